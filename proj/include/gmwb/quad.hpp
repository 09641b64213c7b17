#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "gmwb/errors.hpp"

// Adaptive quadrature for two integral families: finite intervals, and
// semi-infinite spectral integrals whose integrands are bounded by
// C * p^alpha * exp(pi*p/4 - beta*p^2/2). The truncation point of the latter
// is chosen from that envelope so the discarded tail is provably below the
// absolute tolerance.

namespace gmwb::quad {

struct QuadConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_subdivisions = 200;
    // Optional caller-supplied envelope constant C; <= 0 means calibrate by
    // sampling the integrand.
    double tail_bound_constant = 0.0;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw DomainError("QuadConfig: tolerances must be positive");
        if (max_subdivisions < 10)
            throw DomainError("QuadConfig: max_subdivisions must be >= 10");
    }
};

namespace detail {

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK dqk15).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error, resabs;
};

template <class F>
Panel gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    fv[7] = f(c);
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        fv[j] = f(c - dx);
        fv[14 - j] = f(c + dx);
    }
    double resk = 0.0, resabs = 0.0;
    for (int j = 0; j < 7; ++j) {
        resk += kWgk[j] * (fv[j] + fv[14 - j]);
        resabs += kWgk[j] * (std::abs(fv[j]) + std::abs(fv[14 - j]));
    }
    resk += kWgk[7] * fv[7];
    resabs += kWgk[7] * std::abs(fv[7]);
    double resg = kWg[3] * fv[7];
    for (int j = 0; j < 3; ++j)
        resg += kWg[j] * (fv[2 * j + 1] + fv[13 - 2 * j]);

    const double mean = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fv[7] - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
    resasc *= h;

    double err = std::abs(resk - resg) * h;
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps50 = 50.0 * std::numeric_limits<double>::epsilon() * resabs * h;
    if (eps50 > 0.0) err = std::max(err, eps50);
    return Panel{a, b, resk * h, err, resabs * h};
}

struct AdaptiveResult {
    double value;
    double error;
    double absum; // integral of |f|, for rounding-noise estimates
};

template <class F>
AdaptiveResult adaptive(F&& f, double lo, double hi, const QuadConfig& cfg) {
    std::vector<Panel> panels;
    panels.reserve(64);
    panels.push_back(gk15(f, lo, hi));
    double sum = panels[0].value, errsum = panels[0].error, absum = panels[0].resabs;
    int splits = 0;
    auto tolerance = [&] {
        // convergence floor: the rounding level of the absolute-value mass
        const double floor = 100.0 * std::numeric_limits<double>::epsilon() * absum;
        return std::max({cfg.abs_tol, cfg.rel_tol * std::abs(sum), floor});
    };
    while (errsum > tolerance()) {
        if (splits >= cfg.max_subdivisions)
            throw NonConvergence("adaptive quadrature: subdivision limit reached");
        auto worst = std::max_element(panels.begin(), panels.end(),
                                      [](const Panel& x, const Panel& y) { return x.error < y.error; });
        const Panel p = *worst;
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b))
            throw NonConvergence("adaptive quadrature: interval too small to split");
        Panel left = gk15(f, p.a, mid);
        Panel right = gk15(f, mid, p.b);
        *worst = left;
        panels.push_back(right);
        sum += left.value + right.value - p.value;
        errsum += left.error + right.error - p.error;
        absum += left.resabs + right.resabs - p.resabs;
        ++splits;
    }
    // One clean resummation; the incremental updates above can drift.
    sum = 0.0;
    errsum = 0.0;
    absum = 0.0;
    for (const Panel& p : panels) {
        sum += p.value;
        errsum += p.error;
        absum += p.resabs;
    }
    return {sum, errsum, absum};
}

} // namespace detail

struct FiniteResult {
    double value;
    double error;
};

inline FiniteResult integrate_finite_detail(const std::function<double(double)>& f, double lo,
                                            double hi, const QuadConfig& cfg = {}) {
    cfg.validate();
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw DomainError("integrate_finite: need finite lo < hi");
    auto r = detail::adaptive(f, lo, hi, cfg);
    return {r.value, r.error};
}

inline double integrate_finite(const std::function<double(double)>& f, double lo, double hi,
                               const QuadConfig& cfg = {}) {
    return integrate_finite_detail(f, lo, hi, cfg).value;
}

struct SpectralResult {
    double value;
    double error;
    double p_star; // truncation point actually used
    double noise;  // rounding-noise scale: the huge-but-cancelling integrand
                   // mass leaves roughly this much irreducible absolute error
};

namespace detail {

// Log of the envelope C * p^alpha * exp(pi p/4 - beta p^2/2), sans log C.
inline double log_envelope(double p, double alpha, double beta) {
    return alpha * std::log(p) + M_PI * p / 4.0 - 0.5 * beta * p * p;
}

} // namespace detail

// Integrates f over (0, infinity). `t` is the Gaussian decay rate of the
// integrand (beta in the envelope); `nu` fixes the algebraic envelope
// exponent when `alpha` is not supplied. The truncation point P* is chosen so
// the envelope tail integrated past it stays below abs_tol/10.
inline SpectralResult integrate_spectral_detail(const std::function<double(double)>& f, double t,
                                                double nu, const QuadConfig& cfg = {},
                                                double alpha = std::numeric_limits<double>::quiet_NaN()) {
    cfg.validate();
    if (!(t > 1e-4))
        throw TailBoundFailure("integrate_spectral: Gaussian decay rate too small (t <= 1e-4)");
    const double beta = t;
    if (std::isnan(alpha)) alpha = 0.5 * std::abs(nu) + 3.0;

    // Calibrate the envelope constant by sampling, unless supplied.
    double logC;
    if (cfg.tail_bound_constant > 0.0) {
        logC = std::log(cfg.tail_bound_constant);
    } else {
        const double p_hi = std::max(8.0, 3.0 * (M_PI / 4.0 + std::sqrt(std::max(0.0, alpha))) / beta);
        double max_ratio = -std::numeric_limits<double>::infinity();
        const int n_samples = 48;
        for (int i = 0; i < n_samples; ++i) {
            const double p = 0.25 * std::pow(p_hi / 0.25, (i + 0.5) / n_samples);
            const double fp = std::abs(f(p));
            if (fp > 0.0)
                max_ratio = std::max(max_ratio, std::log(fp) - detail::log_envelope(p, alpha, beta));
        }
        if (!std::isfinite(max_ratio)) {
            // Integrand vanished on the whole sample grid; nothing to do.
            return {0.0, 0.0, 1.0, 0.0};
        }
        logC = max_ratio + std::log(10.0); // safety factor
    }

    // Find the smallest P* with envelope tail below abs_tol/10. For a
    // log-concave envelope the tail past P is bounded by env(P)/|d/dp log env|.
    const double target = std::log(cfg.abs_tol / 10.0);
    double p_star = -1.0;
    for (double p = 4.0; p <= 1e4; p *= 1.15) {
        const double slope = beta * p - M_PI / 4.0 - alpha / p;
        if (slope <= 0.0) continue;
        const double log_tail = logC + detail::log_envelope(p, alpha, beta) - std::log(slope);
        if (log_tail <= target) {
            p_star = p;
            break;
        }
    }
    if (p_star < 0.0)
        throw TailBoundFailure("integrate_spectral: no truncation point below 1e4 meets the tail bound");

    auto res = detail::adaptive(f, 0.0, p_star, cfg);
    const double noise = 100.0 * std::numeric_limits<double>::epsilon() * res.absum;
    return {res.value, res.error, p_star, noise};
}

inline double integrate_spectral(const std::function<double(double)>& f, double t, double nu,
                                 const QuadConfig& cfg = {},
                                 double alpha = std::numeric_limits<double>::quiet_NaN()) {
    return integrate_spectral_detail(f, t, nu, cfg, alpha).value;
}

} // namespace gmwb::quad
