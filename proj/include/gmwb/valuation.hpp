#pragma once

#include <cmath>

#include "gmwb/errors.hpp"
#include "gmwb/hitting.hpp"
#include "gmwb/quad.hpp"
#include "gmwb/specfun.hpp"

// Valuation of the guaranteed-minimum-withdrawal rider. Everything is
// computed in reduced coordinates (time scaled by sigma^2/4, fund scaled by
// sigma^2/(4w)) where the fund is the affine-drift diffusion with index nu;
// the scale factors 4w/sigma^2 and 16w/sigma^4 reappear exactly once, in the
// two pricing gaps.

namespace gmwb::valuation {

struct ModelParams {
    double r;     // risk-free force of interest, per year
    double sigma; // volatility, per sqrt(year)
    double G;     // initial deposit
    double w;     // withdrawal rate, per year
    double m;     // total fee rate, per year
    double m_w;   // fee rate allocated to the guarantee, per year

    double maturity() const { return G / w; }

    void validate() const {
        for (double v : {r, sigma, G, w, m, m_w})
            if (!std::isfinite(v)) throw DomainError("ModelParams: non-finite field");
        if (!(sigma > 0.0)) throw DomainError("ModelParams: sigma must be positive");
        if (!(G > 0.0) || !(w > 0.0)) throw DomainError("ModelParams: G and w must be positive");
        if (!(r > 0.0)) throw DomainError("ModelParams: r must be positive");
        if (!(m >= m_w) || !(m_w >= 0.0)) throw DomainError("ModelParams: need m >= m_w >= 0");
    }
};

struct DerivedParams {
    double nu;    // drift index of the reduced fund
    double y;     // reduced initial value, sigma^2 G / (4w)
    double t;     // reduced maturity, sigma^2 T / 4
    double r_hat; // reduced discount rate, 4r/sigma^2
    double kappa; // (1 - nu)/2, the first Whittaker index of every kernel
};

inline DerivedParams derive(const ModelParams& mp) {
    mp.validate();
    DerivedParams dp;
    const double s2 = mp.sigma * mp.sigma;
    dp.nu = (2.0 * (mp.r - mp.m) - s2) / s2;
    dp.y = s2 * mp.G / (4.0 * mp.w);
    dp.t = s2 * mp.maturity() / 4.0;
    dp.r_hat = 4.0 * mp.r / s2;
    dp.kappa = 0.5 * (1.0 - dp.nu);
    if (!(dp.y > 0.0) || !(dp.t > 0.0)) throw DomainError("derive: degenerate reduced coordinates");
    return dp;
}

inline constexpr double kSeamTol = 1e-8;   // |nu+1| below this takes the special branch
inline constexpr double kDegenTol = 1e-9;  // coinciding-pole guard
inline constexpr double kSmallT = 1e-4;    // below this the absorbed mass is provably nil

namespace detail {

inline bool small_t_applies(double t, double y) {
    // short-horizon closed forms are valid once the absorption probability is
    // provably below double rounding; see tau_small_time_mass_bound
    return t <= kSmallT && std::log(y / t) >= 4.0;
}

inline double mean_reduced_fund(double nu, double y, double t) {
    if (std::abs(nu + 1.0) <= kSeamTol) return y - t;
    const double eps = 2.0 * (nu + 1.0);
    return y * std::exp(eps * t) - std::expm1(eps * t) / eps;
}

// spectral tail of h and d: same Gamma argument, different damping/rational
inline double spectral_h(double nu, double y, double t, const quad::QuadConfig& cfg) {
    const double z = 0.5 / y;
    const double kap = 0.5 * (1.0 - nu);
    const double pref = std::exp(kap * std::log(2.0 * y) - 0.25 / y) / (8.0 * M_PI * M_PI);
    auto f = [&](double p) {
        return specfun::spectral_weight(kap, z, -0.5 * nu - 1.0, p,
                                        -0.5 * (nu * nu + p * p) * t);
    };
    return pref * quad::integrate_spectral(f, t, nu, cfg, 0.5 * std::abs(nu) + 2.0);
}

inline double spectral_d(double nu, double y, double t, double r_hat,
                         const quad::QuadConfig& cfg) {
    const double z = 0.5 / y;
    const double kap = 0.5 * (1.0 - nu);
    const double pref = -std::exp(kap * std::log(2.0 * y) - 0.25 / y) / (4.0 * M_PI * M_PI);
    auto f = [&](double p) {
        return specfun::spectral_weight(kap, z, -0.5 * nu - 1.0, p,
                                        -0.5 * (nu * nu + p * p + 2.0 * r_hat) * t) /
               (2.0 * r_hat + nu * nu + p * p);
    };
    return pref * quad::integrate_spectral(f, t, nu, cfg, 0.5 * std::abs(nu) + 2.0);
}

} // namespace detail

// h(t) = E^y[Y_t; tau_0 > t], the undiscounted surviving fund value.
inline double h_value(const DerivedParams& dp, const quad::QuadConfig& cfg = {}) {
    const double nu = dp.nu, y = dp.y, t = dp.t;
    const double z = 0.5 / y;
    if (t <= kSmallT) {
        if (!detail::small_t_applies(t, y))
            throw TailBoundFailure("h_value: reduced maturity too small for the spectral kernel");
        return detail::mean_reduced_fund(nu, y, t);
    }
    const double spectral = detail::spectral_h(nu, y, t, cfg);
    double closed;
    if (std::abs(nu + 1.0) <= kSeamTol) {
        closed = y * std::exp(-z) - 0.5 * specfun::exp_integral_e1(z);
    } else {
        const double eps = 2.0 * (nu + 1.0);
        const double lam = std::abs(nu + 2.0);
        closed = (y - 1.0 / eps) * std::exp(eps * t) +
                 std::exp(eps * t) / eps * hitting::laplace_tau_nu_lam(nu, y, lam);
        if (nu > 1e-12) closed += specfun::gamma_q(nu, z) / eps;
        const int nres = hitting::detail::residue_count(nu);
        for (int n = 1; n <= nres; ++n) {
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            const double cn = 2.0 * n * (nu - n);
            closed -= sign *
                      std::exp(-cn * t + (n - nu) * std::log(2.0 * y) -
                               specfun::lgamma_real(n + 1.0)) *
                      specfun::rgamma_real(nu - 2.0 * n) *
                      specfun::kummer_m_real(nu - n, nu - 2.0 * n + 1.0, -z) /
                      ((nu - n) * (2.0 * (nu + 1.0) + cn));
        }
    }
    const double h = closed + spectral;
    if (h < -1e-7 * std::max(1.0, y)) throw NonConvergence("h_value: negative beyond tolerance");
    return std::max(h, 0.0);
}

// a(y) = E^y[e^{-r_hat tau_0}].
inline double a_value(const DerivedParams& dp) {
    return hitting::laplace_tau_nu(dp.nu, dp.y, dp.r_hat);
}

// b(t,y) = E^y[e^{-r_hat tau_0}; tau_0 > t].
inline double b_value(const DerivedParams& dp, const quad::QuadConfig& cfg = {}) {
    const double nu = dp.nu, y = dp.y, t = dp.t, r_hat = dp.r_hat;
    const double z = 0.5 / y;
    if (t <= kSmallT) {
        if (!detail::small_t_applies(t, y))
            throw TailBoundFailure("b_value: reduced maturity too small for the spectral kernel");
        return a_value(dp);
    }
    const double kap = dp.kappa;
    const double pref = std::exp(kap * std::log(2.0 * y) - 0.25 / y) / (M_PI * M_PI);
    auto f = [&](double p) {
        return specfun::spectral_weight(kap, z, 1.0 - 0.5 * nu, p,
                                        -0.5 * (nu * nu + p * p + 2.0 * r_hat) * t) /
               (nu * nu + p * p + 2.0 * r_hat);
    };
    double b = pref * quad::integrate_spectral(f, t, nu, cfg, 0.5 * std::abs(nu) + 2.0);
    const int nres = hitting::detail::residue_count(nu);
    for (int n = 1; n <= nres; ++n) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        const double cn = 2.0 * n * (nu - n);
        b -= 2.0 * sign *
             std::exp(-(cn + r_hat) * t + (n - nu) * std::log(2.0 * y) -
                      specfun::lgamma_real(static_cast<double>(n))) *
             specfun::rgamma_real(nu - 2.0 * n) *
             specfun::kummer_m_real(nu - n, nu - 2.0 * n + 1.0, -z) / (cn + r_hat);
    }
    const double a = a_value(dp);
    if (b < -1e-7 || b > a + 1e-7)
        throw NonConvergence("b_value: outside [0, a] beyond tolerance");
    return std::min(std::max(b, 0.0), a);
}

// c(t,y) = P^y(tau_0 < t).
inline double c_value(const DerivedParams& dp, const quad::QuadConfig& cfg = {}) {
    if (dp.t <= kSmallT) {
        if (!detail::small_t_applies(dp.t, dp.y))
            throw TailBoundFailure("c_value: reduced maturity too small for the spectral kernel");
        return 0.0;
    }
    return 1.0 - hitting::cdf_A(-dp.nu, dp.t, dp.y, cfg);
}

// d(t,y) = E^y[Int_0^{tau_0 ^ t} e^{-r_hat u} Y_u du]: Bromwich inversion of
// the resolvent, as rational residues, Kummer residues, a residue sum from
// the Gamma poles for nu > 2, and the branch-cut (spectral) integral.
inline double d_value(const DerivedParams& dp, const quad::QuadConfig& cfg = {}) {
    const double nu = dp.nu, y = dp.y, t = dp.t, r_hat = dp.r_hat;
    const double z = 0.5 / y;
    const double eps = 2.0 * (nu + 1.0);
    const double delta = r_hat - eps;
    const bool seam = std::abs(nu + 1.0) <= kSeamTol;

    if (t <= kSmallT) {
        if (!detail::small_t_applies(t, y))
            throw TailBoundFailure("d_value: reduced maturity too small for the spectral kernel");
        if (seam)
            return y * (-std::expm1(-r_hat * t)) / r_hat -
                   (1.0 - (1.0 + r_hat * t) * std::exp(-r_hat * t)) / (r_hat * r_hat);
        const double dfac = std::abs(delta) < 1e-12 ? t : (-std::expm1(-delta * t)) / delta;
        return (y - 1.0 / eps) * dfac + (-std::expm1(-r_hat * t)) / (r_hat * eps);
    }

    const double spectral = detail::spectral_d(nu, y, t, r_hat, cfg);

    if (seam) {
        const double lam1 = std::sqrt(1.0 + 2.0 * r_hat);
        const double closed =
            (r_hat * y - 1.0) / (r_hat * r_hat) +
            std::exp(specfun::lgamma_real(1.0 + 0.5 * (lam1 + 1.0)) -
                     specfun::lgamma_real(1.0 + lam1) - 0.5 * (lam1 - 1.0) * std::log(2.0 * y)) *
                specfun::kummer_m_real(0.5 * (lam1 - 1.0), 1.0 + lam1, -z) / (r_hat * r_hat) -
            std::exp(-r_hat * t) / r_hat *
                (y * std::exp(-z) - 0.5 * specfun::exp_integral_e1(z));
        const double d = closed + spectral;
        if (d < -1e-7) throw NonConvergence("d_value: negative beyond tolerance");
        return std::max(d, 0.0);
    }

    if (std::abs(delta) < kDegenTol)
        throw PoleDegeneracy("d_value: r_hat coincides with 2(nu+1)");

    const double lam = std::sqrt(nu * nu + 2.0 * r_hat);
    const double anu = std::abs(nu), anu2 = std::abs(nu + 2.0);

    auto m_term = [&](double lam_eff) {
        return std::exp(specfun::lgamma_real(1.0 + 0.5 * (lam_eff - nu)) -
                        specfun::lgamma_real(1.0 + lam_eff) -
                        0.5 * (lam_eff + nu) * std::log(2.0 * y)) *
               specfun::kummer_m_real(0.5 * (lam_eff + nu), 1.0 + lam_eff, -z);
    };

    double d = y * (-std::expm1(-delta * t)) / delta; // rational residues at q = 0 and q = eps - r_hat
    d += -1.0 / (r_hat * delta) - std::exp(-r_hat * t) / (r_hat * eps) +
         std::exp(-delta * t) / (delta * eps);
    d += m_term(lam) / (r_hat * delta);
    d += std::exp(-r_hat * t) * m_term(anu) / (r_hat * eps);
    d -= std::exp(-delta * t) * m_term(anu2) / (delta * eps);

    const int nres = hitting::detail::residue_count(nu);
    for (int k = 1; k <= nres; ++k) {
        const double c2 = 2.0 * k * (k - nu); // negative for active k
        if (std::abs(c2 - r_hat) < kDegenTol || std::abs(c2 - eps) < kDegenTol)
            throw PoleDegeneracy("d_value: Gamma-pole residue coincides with a rational pole");
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        d -= sign *
             std::exp(-(r_hat - c2) * t + (k - nu) * std::log(2.0 * y) -
                      specfun::lgamma_real(static_cast<double>(k))) *
             specfun::rgamma_real(nu - 2.0 * k) *
             specfun::kummer_m_real(nu - k, nu - 2.0 * k + 1.0, -z) /
             (k * (k - nu) * (c2 - r_hat) * (c2 - eps));
    }

    d += spectral;
    if (d < -1e-7) throw NonConvergence("d_value: negative beyond tolerance");
    return std::max(d, 0.0);
}

// Policyholder pricing equation: discounted surviving fund plus guaranteed
// income stream, net of the initial deposit.
inline double policyholder_gap(const ModelParams& mp, const quad::QuadConfig& cfg = {}) {
    const DerivedParams dp = derive(mp);
    const double T = mp.maturity();
    const double s2 = mp.sigma * mp.sigma;
    return std::exp(-mp.r * T) * (4.0 * mp.w / s2) * h_value(dp, cfg) +
           mp.w / mp.r * (-std::expm1(-mp.r * T)) - mp.G;
}

// Insurer pricing equation: guarantee liability minus allocated fee revenue.
inline double insurer_gap(const ModelParams& mp, const quad::QuadConfig& cfg = {}) {
    const DerivedParams dp = derive(mp);
    const double T = mp.maturity();
    const double s2 = mp.sigma * mp.sigma;
    const double liability =
        mp.w / mp.r * (a_value(dp) - b_value(dp, cfg)) -
        mp.w / mp.r * std::exp(-mp.r * T) * c_value(dp, cfg);
    const double revenue = mp.m_w * (16.0 * mp.w / (s2 * s2)) * d_value(dp, cfg);
    return liability - revenue;
}

// Balance identity tying the two pricing equations together; zero for every
// fee level, not only the fair one.
inline double equivalence_residual(const ModelParams& mp, const quad::QuadConfig& cfg = {}) {
    mp.validate();
    if (std::abs(mp.m - mp.m_w) > 1e-12 * std::max(1.0, mp.m))
        throw DomainError("equivalence_residual: requires m == m_w");
    const DerivedParams dp = derive(mp);
    const double T = mp.maturity();
    const double s2 = mp.sigma * mp.sigma;
    const double a = a_value(dp), b = b_value(dp, cfg), c = c_value(dp, cfg);
    return std::exp(-mp.r * T) * (4.0 * mp.w / s2) * h_value(dp, cfg) +
           mp.w / mp.r * (1.0 - (a - b) - std::exp(-mp.r * T) * (1.0 - c)) +
           mp.m * (16.0 * mp.w / (s2 * s2)) * d_value(dp, cfg) - mp.G;
}

enum class Side { policyholder, insurer };

struct FairFee {
    double m;   // total fee rate per year
    double m_w; // guarantee-allocated fee rate per year
    int m_bp;   // half-up rounding to basis points
    int m_w_bp;
};

// Bisection for the fee that zeroes the selected pricing gap. fee_link is
// m_w/m. The bracket widens once on failure; PoleDegeneracy inside an
// evaluation is retried with the fee perturbed by 1e-7.
inline FairFee solve_fair_fee(Side side, const ModelParams& tmpl, double fee_link,
                              const quad::QuadConfig& cfg = {}) {
    tmpl.validate();
    if (!(fee_link > 0.0 && fee_link <= 1.0))
        throw DomainError("solve_fair_fee: fee_link must lie in (0, 1]");
    auto gap = [&](double m) {
        ModelParams mp = tmpl;
        mp.m = m;
        mp.m_w = fee_link * m;
        for (int attempt = 0;; ++attempt) {
            try {
                return side == Side::policyholder ? policyholder_gap(mp, cfg)
                                                  : insurer_gap(mp, cfg);
            } catch (const PoleDegeneracy&) {
                if (attempt >= 2) throw;
                mp.m += 1e-7;
                mp.m_w = fee_link * mp.m;
            }
        }
    };
    double lo = 1e-6, hi = 0.10;
    double glo = gap(lo), ghi = gap(hi);
    if (glo * ghi > 0.0) {
        hi = 0.20;
        ghi = gap(hi);
        if (glo * ghi > 0.0) throw NoBracket("solve_fair_fee: no sign change on [1e-6, 0.20]");
    }
    int it = 0;
    while (hi - lo > 1e-7) {
        if (++it > 60) throw NonConvergence("solve_fair_fee: bisection failed to converge");
        const double mid = 0.5 * (lo + hi);
        const double gm = gap(mid);
        if (gm == 0.0) {
            lo = hi = mid;
            break;
        }
        if (gm * glo < 0.0)
            hi = mid;
        else {
            lo = mid;
            glo = gm;
        }
    }
    FairFee out;
    out.m = 0.5 * (lo + hi);
    out.m_w = fee_link * out.m;
    out.m_bp = static_cast<int>(std::floor(out.m * 1e4 + 0.5));
    out.m_w_bp = static_cast<int>(std::floor(out.m_w * 1e4 + 0.5));
    return out;
}

} // namespace gmwb::valuation
