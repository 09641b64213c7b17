#pragma once

#include <cmath>
#include <functional>

#include "gmwb/detail/float128.hpp"
#include "gmwb/errors.hpp"
#include "gmwb/quad.hpp"
#include "gmwb/specfun.hpp"

// Hitting-time laws of the increasing exponential-functional process
//   A_t = Int_0^t exp(2 B_u + 2 nu u) du        (first passage H_a)
// and of geometric Brownian motion with affine drift
//   dY = [2(nu+1) Y - 1] dt + 2 Y dB            (first passage tau_{y,0}),
// related by tau^{(-nu)}_{x,0} ~ H^{(nu)}_x. Laplace transforms are closed
// forms in Kummer functions; densities and CDFs come from a spectral
// (inverse-Laplace) integral plus residue corrections for large drift.

namespace gmwb::hitting {

struct YorParams {
    double nu;
    double a;

    void validate() const {
        if (!std::isfinite(nu) || !std::isfinite(a)) throw DomainError("YorParams: non-finite");
        if (!(a > 0.0)) throw DomainError("YorParams: level a must be positive");
    }
};

struct DiffusionParams {
    double mu;    // drift rate per unit time
    double sigma; // volatility per sqrt(time)
    double start; // initial value

    void validate() const {
        if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(start))
            throw DomainError("DiffusionParams: non-finite");
        if (!(sigma > 0.0)) throw DomainError("DiffusionParams: sigma must be positive");
    }
};

namespace detail {

inline int residue_count(double nu) {
    // terms n = 1..floor(nu/2); at even integer nu the last term carries
    // 1/Gamma(0) = 0 and vanishes on its own
    if (!(nu > 2.0)) return 0;
    return static_cast<int>(std::floor(0.5 * nu + 1e-12));
}

inline double pochhammer(double x, int n) {
    double r = 1.0;
    for (int j = 0; j < n; ++j) r *= x + j;
    return r;
}

} // namespace detail

// E[exp(-s tau_{y,0})] for the normalized process with drift index nu,
// lambda supplied directly (allows the analytic continuation to small
// negative s where lambda = sqrt(2s + nu^2) stays real).
inline double laplace_tau_nu_lam(double nu, double y, double lam) {
    const double z = 0.5 / y;
    const double a = 0.5 * (-nu + lam) + 1.0;
    const double b = lam + 1.0;
    return std::exp(0.5 * (-nu - lam) * std::log(2.0 * y) + specfun::lgamma_real(a) -
                    specfun::lgamma_real(b)) *
           specfun::kummer_m_scaled_real(a, b, z);
}

inline double laplace_tau_nu(double nu, double y, double s) {
    const double lam2 = 2.0 * s + nu * nu;
    if (lam2 < -1e-12) throw DomainError("laplace_tau_nu: s below -nu^2/2");
    return laplace_tau_nu_lam(nu, y, std::sqrt(std::max(0.0, lam2)));
}

// --- Yor-process first passage ----------------------------------------------

inline double laplace_H(const YorParams& p, double s) {
    p.validate();
    if (!(p.nu >= 0.0)) throw DomainError("laplace_H: requires nu >= 0");
    if (!(s >= 0.0)) throw DomainError("laplace_H: requires s >= 0");
    return laplace_tau_nu(-p.nu, p.a, s);
}

// Density of tau_{y,0}: spectral integral (drift index nu, any sign) plus a
// finite residue sum active for nu > 2.
inline double density_tau(double nu, double y, double t, const quad::QuadConfig& cfg = {}) {
    if (!(y > 0.0) || !(t > 0.0)) throw DomainError("density_tau: requires y > 0, t > 0");
    const double z = 0.5 / y;
    const double kap = 0.5 * (1.0 - nu);
    const double x0 = -0.5 * nu;
    const double pref =
        std::exp(kap * std::log(2.0 * y) - 0.25 / y) / (4.0 * M_PI * M_PI);
    auto integrand = [&](double p) {
        return 0.5 * (nu * nu + p * p) *
               specfun::spectral_weight(kap, z, x0, p, -0.5 * (nu * nu + p * p) * t);
    };
    const auto spec =
        quad::integrate_spectral_detail(integrand, t, nu, cfg, 0.5 * std::abs(nu) + 2.0);
    double f = pref * spec.value;
    const int nres = detail::residue_count(nu);
    for (int n = 1; n <= nres; ++n) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        const double term = std::exp(-2.0 * n * (nu - n) * t + (n - nu) * std::log(2.0 * y) -
                                     specfun::lgamma_real(static_cast<double>(n))) *
                            2.0 * sign * specfun::rgamma_real(nu - 2.0 * n) *
                            specfun::kummer_m_real(nu - n, nu - 2.0 * n + 1.0, -z);
        f -= term;
    }
    const double slack = 1e-7 + 10.0 * pref * spec.noise;
    if (f < -slack) throw NonConvergence("density_tau: negative density beyond tolerance");
    return std::max(f, 0.0);
}

// P(tau_{y,0} = infinity) complement: probability of eventual passage.
inline double prob_finite_tau(double nu, double y) {
    if (!(y > 0.0)) throw DomainError("prob_finite_tau: requires y > 0");
    if (nu <= 1e-12) return 1.0;
    return specfun::gamma_p(nu, 0.5 / y);
}

// P(A_t^{(nu)} < y): spectral integral, an ultimate-passage term for nu < 0,
// and a finite correction sum for nu < -2.
inline double cdf_A(double nu, double t, double y, const quad::QuadConfig& cfg = {}) {
    if (!(y > 0.0) || !(t > 0.0)) throw DomainError("cdf_A: requires y > 0, t > 0");
    const double z = 0.5 / y;
    const double kap = 0.5 * (1.0 + nu);
    const double x0 = 0.5 * nu;
    const double pref =
        std::exp(kap * std::log(2.0 * y) - 0.25 / y) / (4.0 * M_PI * M_PI);
    auto integrand = [&](double p) {
        return specfun::spectral_weight(kap, z, x0, p, -0.5 * (nu * nu + p * p) * t);
    };
    const auto spec =
        quad::integrate_spectral_detail(integrand, t, nu, cfg, 0.5 * std::abs(nu) + 2.0);
    double val = pref * spec.value;
    if (nu < 0.0) {
        const double an = -nu;
        val += specfun::gamma_q(an, z);
        const int nres = detail::residue_count(an);
        for (int n = 1; n <= nres; ++n) {
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            const double term =
                sign * detail::pochhammer(an - 2.0 * n, n) *
                std::exp(-2.0 * n * (an - n) * t + (n - an) * std::log(2.0 * y) -
                         specfun::lgamma_real(1.0 + an - n) -
                         specfun::lgamma_real(static_cast<double>(n + 1))) *
                specfun::kummer_m_real(an - n, an - 2.0 * n + 1.0, -z);
            val -= term;
        }
    }
    const double slack = 1e-6 + 10.0 * pref * spec.noise;
    if (val < -slack || val > 1.0 + slack)
        throw NonConvergence("cdf_A: value outside [0,1] beyond tolerance");
    return std::min(1.0, std::max(0.0, val));
}

// Spectral-representation density of H_a (nu >= 0); identical in law to the
// zero-passage time of the drift-flipped diffusion.
inline double density_H_second(const YorParams& p, double u, const quad::QuadConfig& cfg = {}) {
    p.validate();
    if (!(p.nu >= 0.0)) throw DomainError("density_H_second: requires nu >= 0");
    if (!(u > 0.0)) throw DomainError("density_H_second: requires u > 0");
    return density_tau(-p.nu, p.a, u, cfg);
}

// Density of H_a by the theta-kernel representation. The kernel
// exp((pi^2 - w^2)/(2u)) sin(pi w/u) cancels through roughly pi^2/(2u ln 10)
// decimal digits, so the whole evaluation runs in quad precision with the
// inner integral
//   g(w) = Int_0^inf x^{nu+2} exp(-a x^2/2 - x cosh w) dx
// tabulated as a Chebyshev proxy of log g.
inline double density_H_first(const YorParams& p, double u) {
    p.validate();
    if (!(p.nu >= 0.0)) throw DomainError("density_H_first: requires nu >= 0");
    if (!(u > 0.0)) throw DomainError("density_H_first: requires u > 0");
    if (u < 0.02)
        throw NonConvergence("density_H_first: kernel cancellation exceeds quad precision below u = 0.02");
    using detail128::f128;
    const f128 nu = p.nu, a = p.a, uu = u;
    const f128 pi = detail128::kPi;

    const auto& rule = detail128::gl32();
    auto g_direct = [&](f128 w) -> f128 {
        const f128 c = coshq(w);
        const f128 x_hi = (-c + sqrtq(c * c + 680 * a)) / a;
        auto fx = [&](f128 x) -> f128 {
            if (x <= 0) return 0;
            return expq((nu + 2) * logq(x) - a * x * x / 2 - c * x);
        };
        // unimodal gamma-like integrand: linear panels across the peak, then
        // geometric panels out to the cutoff
        const f128 x_p = 2 * (nu + 2) / (c + sqrtq(c * c + 4 * a * (nu + 2)));
        f128 acc = 0, lo = 0, hi = 2 * x_p;
        acc += rule.integrate(fx, lo, hi > x_hi ? x_hi : hi);
        while (hi < x_hi) {
            lo = hi;
            hi = 2 * hi;
            acc += rule.integrate(fx, lo, hi > x_hi ? x_hi : hi);
        }
        return acc;
    };

    // truncation of the w-integral: Gaussian factor below 1e-60 relative
    const f128 w_star = sqrtq(pi * pi + 2 * uu * 150) + 2;
    const auto log_g = detail128::cheb_fit([&](f128 w) { return logq(g_direct(w)); }, 0, w_star,
                                           160 + static_cast<int>(4.0 * (double)w_star));

    auto phi = [&](f128 w) -> f128 { // sinh(w) g(w)
        return sinhq(w) * expq(log_g.eval(w));
    };
    auto kernel = [&](f128 w) -> f128 {
        return expq((pi * pi - w * w) / (2 * uu)) * sinq(pi * w / uu);
    };

    // one half-oscillation (or less) per panel; Gauss-Legendre 32 resolves
    // each panel to far below the target
    const double width = std::min(u / 2.0, 0.35);
    const int n_panels = static_cast<int>(std::ceil((double)w_star / width));
    f128 total = 0;
    for (int j = 0; j < n_panels; ++j) {
        const f128 lo = w_star * j / n_panels;
        const f128 hi = w_star * (j + 1) / n_panels;
        total += rule.integrate([&](f128 w) { return kernel(w) * phi(w); }, lo, hi);
    }

    const f128 pref = expq(-nu * nu * uu / 2 - 1 / (2 * a) + (nu + 1) * logq(a)) /
                      sqrtq(2 * pi * pi * pi * uu);
    const double f = (double)(pref * total);
    if (f < -1e-8) throw NonConvergence("density_H_first: negative density beyond tolerance");
    return std::max(f, 0.0);
}

// E[exp(-s (H_y - H_x))] for y > x > 0: mixes the H-transform over the
// squared-Bessel position at the first passage. The integrand is assembled in
// log space; its exponential factors combine to exp(-(rho-1)^2/(2x)), so the
// evaluation stays stable down to x -> 0+.
inline double laplace_H_increment(const YorParams& p, double x, double y, double s,
                                  const quad::QuadConfig& cfg = {}) {
    p.validate();
    if (!(p.nu >= 0.0)) throw DomainError("laplace_H_increment: requires nu >= 0");
    if (!(y > x && x > 0.0)) throw DomainError("laplace_H_increment: requires y > x > 0");
    if (!(s >= 0.0)) throw DomainError("laplace_H_increment: requires s >= 0");
    const double nu = p.nu;
    const double lam = std::sqrt(2.0 * s + nu * nu);
    const double gap = y - x;
    const double a = 0.5 * (nu + lam) + 1.0;
    const double b = lam + 1.0;
    const double log_c = 0.5 * (nu - lam) * std::log(2.0 * gap) + specfun::lgamma_real(a) -
                         specfun::lgamma_real(b) - std::log(x);
    auto integrand = [&](double rho) -> double {
        if (!(rho > 0.0)) return 0.0;
        const double i_scaled = specfun::bessel_i_scaled(nu, rho / x);
        if (i_scaled <= 0.0) return 0.0;
        const double m_scaled =
            specfun::kummer_m_scaled_real(a, b, rho * rho / (2.0 * gap));
        const double lg = log_c + (lam + 1.0) * std::log(rho) -
                          (rho - 1.0) * (rho - 1.0) / (2.0 * x) + std::log(i_scaled) +
                          std::log(m_scaled);
        return std::exp(lg);
    };
    const double rho_hi = 1.0 + std::sqrt(2.0 * x * 130.0);
    return quad::integrate_finite(integrand, 0.0, rho_hi, cfg);
}

// --- Affine-drift diffusion first passage ------------------------------------

namespace detail {

struct SolverParams {
    double k;
    double b;
};

inline SolverParams kb_of(double mu, double sigma, double s) {
    const double d = 2.0 * mu - sigma * sigma;
    const double disc = d * d + 8.0 * sigma * sigma * s;
    if (disc < -1e-12) throw DomainError("hitting: Laplace argument below the continuation bound");
    const double k = (d + std::sqrt(std::max(0.0, disc))) / (2.0 * sigma * sigma);
    return {k, 2.0 * k + 2.0 - 2.0 * mu / (sigma * sigma)};
}

} // namespace detail

// E[exp(-s tau_{y,0})] for dY = [mu Y - 1]dt + sigma Y dB, Y_0 = start > 0.
inline double laplace_tau_to_zero(const DiffusionParams& d, double s) {
    d.validate();
    if (!(d.start > 0.0)) throw DomainError("laplace_tau_to_zero: requires start > 0");
    const auto [k, b] = detail::kb_of(d.mu, d.sigma, s);
    const double z = 2.0 / (d.sigma * d.sigma * d.start);
    return std::exp(specfun::lgamma_real(b - k) - specfun::lgamma_real(b) + k * std::log(z)) *
           specfun::kummer_m_scaled_real(b - k, b, z);
}

// E[exp(-s tau_{start,target})] for the descending-annuity diffusion; the
// three admissible orderings use the decreasing/increasing solutions of the
// underlying ODE.
inline double laplace_tau_general(const DiffusionParams& d, double target, double s) {
    d.validate();
    if (!(s > 0.0)) throw DomainError("laplace_tau_general: requires s > 0");
    const double x = d.start, y = target;
    if (x == y) return 1.0;
    const auto [k, b] = detail::kb_of(d.mu, d.sigma, s);
    const double s2 = d.sigma * d.sigma;
    const double ratio_pow = std::pow(x / y, -k);
    if ((x > y && y > 0.0) || (0.0 > y && y > x)) {
        return ratio_pow * specfun::kummer_m_real(k, b, -2.0 / (s2 * x)) /
               specfun::kummer_m_real(k, b, -2.0 / (s2 * y));
    }
    if (y > x && x > 0.0) {
        return ratio_pow * std::exp(-2.0 / (s2 * x) + 2.0 / (s2 * y)) *
               specfun::kummer_u(k, b, 2.0 / (s2 * x)) / specfun::kummer_u(k, b, 2.0 / (s2 * y));
    }
    if (0.0 > x && x > y) {
        return ratio_pow * specfun::kummer_u(k, b, -2.0 / (s2 * x)) /
               specfun::kummer_u(k, b, -2.0 / (s2 * y));
    }
    throw CaseError("laplace_tau_general: start/target pair matches no supported case");
}

// E[exp(-s rho_{start,target})] for the ascending-annuity diffusion
// dX = [mu X + 1]dt + sigma X dB; mirror image of tau via X ~ -Y.
inline double laplace_rho(const DiffusionParams& d, double target, double s) {
    d.validate();
    if (!(s > 0.0)) throw DomainError("laplace_rho: requires s > 0");
    const double x = d.start, y = target;
    if (x == y) return 1.0;
    const auto [k, b] = detail::kb_of(d.mu, d.sigma, s);
    const double s2 = d.sigma * d.sigma;
    if (x == 0.0 && y > 0.0) {
        // limit of the ascending case as the start collapses to zero
        const double zy = 2.0 / (s2 * y);
        return std::pow(zy, -k) / specfun::kummer_u(k, b, zy);
    }
    const double ratio_pow = std::pow(x / y, -k);
    if ((x > y && y > 0.0) || (0.0 > y && y > x)) {
        return ratio_pow * specfun::kummer_m_real(k, b, 2.0 / (s2 * x)) /
               specfun::kummer_m_real(k, b, 2.0 / (s2 * y));
    }
    if (y > x && x > 0.0) {
        return ratio_pow * specfun::kummer_u(k, b, 2.0 / (s2 * x)) /
               specfun::kummer_u(k, b, 2.0 / (s2 * y));
    }
    if (0.0 > x && x > y) {
        return ratio_pow * std::exp(2.0 / (s2 * x) - 2.0 / (s2 * y)) *
               specfun::kummer_u(k, b, -2.0 / (s2 * x)) / specfun::kummer_u(k, b, -2.0 / (s2 * y));
    }
    throw CaseError("laplace_rho: start/target pair matches no supported case");
}

// --- consistency helpers ------------------------------------------------------

// Rigorous bound on P(tau_{y,0} <= u) for small u: absorption requires the
// running minimum of the driving Brownian motion to beat ln(y/u)/2.
inline double tau_small_time_mass_bound(double nu, double y, double u) {
    const double m = 0.5 * std::log(y / u) - std::abs(nu) * u;
    if (!(m > 0.7 * std::sqrt(u))) return 1.0;
    return std::exp(-m * m / (2.0 * u));
}

// Laplace transform of tau recovered from the density by quadrature; the
// short-time mass is discarded only once its rigorous bound is negligible,
// and the long-time tail uses the u^{-3/2} e^{-nu^2 u/2} envelope.
inline double laplace_tau_from_density(double nu, double y, double s,
                                       const quad::QuadConfig& cfg = {}) {
    double u_lo = 0.02;
    while (u_lo < 0.3 && tau_small_time_mass_bound(nu, y, u_lo) > 1e-10) u_lo *= 1.3;
    if (tau_small_time_mass_bound(nu, y, u_lo) > 1e-10)
        throw NonConvergence("laplace_tau_from_density: cannot bound the short-time mass");
    const double rate = 0.5 * nu * nu + s;
    if (!(rate > 1e-3))
        throw DomainError("laplace_tau_from_density: integrand decays too slowly");
    const double u_hi = std::max(30.0, 45.0 / rate);
    // tolerances must sit above the per-point noise of the density near u_lo
    quad::QuadConfig qc = cfg;
    qc.rel_tol = std::max(cfg.rel_tol, 1e-8);
    qc.abs_tol = std::max(cfg.abs_tol, 1e-9);
    qc.max_subdivisions = 400;
    const double body = quad::integrate_finite(
        [&](double u) { return std::exp(-s * u) * density_tau(nu, y, u); }, u_lo, u_hi, qc);
    const double tail_density = density_tau(nu, y, u_hi);
    const double tail_bound = tail_density * std::exp(-s * u_hi) / rate;
    if (tail_bound > 1e-8)
        throw NonConvergence("laplace_tau_from_density: truncation tail not negligible");
    return body;
}

} // namespace gmwb::hitting
