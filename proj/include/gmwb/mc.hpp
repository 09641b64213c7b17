#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "gmwb/errors.hpp"
#include "gmwb/valuation.hpp"

// Monte Carlo oracle for every law the analytic layer computes. Paths draw
// from counter-based streams keyed on (seed, path index), so estimates are
// bit-identical for a fixed seed regardless of the worker count; block
// partial sums are combined in block order.
//
// All integral functionals (the exponential functionals driving A, Y and the
// fund) advance by a Simpson step with a Brownian-bridge midpoint draw, and
// zero-level hitting is detected on the monotone integral itself, which
// removes the barrier-monitoring bias a naive Euler scheme would carry.

namespace gmwb::mc {

struct McConfig {
    std::size_t n_paths = 100000;
    double dt = 1e-4;
    std::uint64_t seed = 42;
    double horizon_cap = 50.0;
    bool antithetic = false;

    void validate() const {
        if (n_paths < 1) throw DomainError("McConfig: n_paths must be >= 1");
        if (!(dt > 0.0)) throw DomainError("McConfig: dt must be positive");
        if (!(horizon_cap > 0.0)) throw DomainError("McConfig: horizon_cap must be positive");
    }
};

struct PathSample {
    std::vector<double> times;
    std::vector<double> values;
    std::optional<double> hit_time;
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

struct HittingSample {
    std::vector<double> times; // censored paths enter clamped at horizon_cap
    std::size_t censored = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with a per-path stream derived from (seed, path index).
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t path) {
        std::uint64_t x = seed ^ (0xA0761D6478BD642FULL * (path + 1));
        for (auto& w : s_) w = splitmix64(x);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double next_uniform() { // (0,1)
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform(), u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Deterministic block-parallel map: body(path, rng) -> vector of accumulator
// contributions handled by the caller through a per-block state.
template <class BlockState, class Body>
std::vector<BlockState> run_blocks(const McConfig& cfg, Body&& body) {
    constexpr std::size_t kBlock = 4096;
    const std::size_t n_blocks = (cfg.n_paths + kBlock - 1) / kBlock;
    std::vector<BlockState> states(n_blocks);
    const unsigned n_threads =
        std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t blk = w; blk < n_blocks; blk += n_threads) {
                const std::size_t lo = blk * kBlock;
                const std::size_t hi = std::min(lo + kBlock, cfg.n_paths);
                for (std::size_t path = lo; path < hi; ++path) body(path, states[blk]);
            }
        });
    }
    for (auto& t : workers) t.join();
    return states;
}

struct Moments {
    double sum = 0.0, sumsq = 0.0;
    std::size_t n = 0;
    void add(double x) {
        sum += x;
        sumsq += x * x;
        ++n;
    }
    void merge(const Moments& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        n += o.n;
    }
    Estimate estimate() const {
        Estimate e;
        e.n = n;
        if (n == 0) return e;
        e.mean = sum / static_cast<double>(n);
        if (n > 1) {
            const double var =
                std::max(0.0, (sumsq - sum * sum / static_cast<double>(n)) /
                                  static_cast<double>(n - 1));
            e.se = std::sqrt(var / static_cast<double>(n));
        }
        return e;
    }
};

// Simpson steps of I += Int exp(drift s + vol B_s) ds with a Brownian-bridge
// midpoint draw; the running integrand value is cached across steps.
struct ExpIntegrator {
    double drift, vol; // exponent = drift * s + vol * B_s
    double b = 0.0;    // running Brownian value
    double t = 0.0;
    double g = 1.0;    // exp(drift t + vol b), maintained incrementally

    double step(double dt, double sqrt_dt, Rng& rng, double sign) {
        const double z = sign * rng.next_normal();
        const double zb = sign * rng.next_normal();
        const double b1 = b + sqrt_dt * z;
        const double bm = 0.5 * (b + b1) + 0.5 * sqrt_dt * zb;
        const double gm = std::exp(drift * (t + 0.5 * dt) + vol * bm);
        const double g1 = std::exp(drift * (t + dt) + vol * b1);
        const double inc = dt / 6.0 * (g + 4.0 * gm + g1);
        b = b1;
        t += dt;
        g = g1;
        return inc;
    }
};

} // namespace detail

// Terminal samples of A_t = Int_0^t exp(2 B_u + 2 nu u) du.
inline std::vector<double> simulate_A(double nu, double t_end, const McConfig& cfg) {
    cfg.validate();
    if (!(t_end > 0.0)) throw DomainError("simulate_A: requires t_end > 0");
    struct Block {
        std::vector<double> vals;
    };
    const double sqdt = std::sqrt(cfg.dt);
    auto blocks = detail::run_blocks<Block>(cfg, [&](std::size_t path, Block& blk) {
        const std::size_t stream = cfg.antithetic ? path / 2 : path;
        const double sign = (cfg.antithetic && (path % 2 == 1)) ? -1.0 : 1.0;
        detail::Rng rng(cfg.seed, stream);
        detail::ExpIntegrator ei{2.0 * nu, 2.0};
        double acc = 0.0;
        while (ei.t < t_end - 1e-15) {
            const double dt = std::min(cfg.dt, t_end - ei.t);
            acc += ei.step(dt, dt == cfg.dt ? sqdt : std::sqrt(dt), rng, sign);
        }
        blk.vals.push_back(acc);
    });
    std::vector<double> out;
    out.reserve(cfg.n_paths);
    for (auto& b : blocks) out.insert(out.end(), b.vals.begin(), b.vals.end());
    return out;
}

// Terminal samples of the ascending diffusion started at zero,
// X_t = exp(2 B^{(nu)}_t) Int_0^t exp(-2 B^{(nu)}_s) ds.
inline std::vector<double> simulate_X(double nu, double t_end, const McConfig& cfg) {
    cfg.validate();
    if (!(t_end > 0.0)) throw DomainError("simulate_X: requires t_end > 0");
    struct Block {
        std::vector<double> vals;
    };
    const double sqdt = std::sqrt(cfg.dt);
    auto blocks = detail::run_blocks<Block>(cfg, [&](std::size_t path, Block& blk) {
        const std::size_t stream = cfg.antithetic ? path / 2 : path;
        const double sign = (cfg.antithetic && (path % 2 == 1)) ? -1.0 : 1.0;
        detail::Rng rng(cfg.seed, stream);
        detail::ExpIntegrator ei{-2.0 * nu, -2.0};
        double acc = 0.0;
        while (ei.t < t_end - 1e-15) {
            const double dt = std::min(cfg.dt, t_end - ei.t);
            acc += ei.step(dt, dt == cfg.dt ? sqdt : std::sqrt(dt), rng, sign);
        }
        blk.vals.push_back(acc / ei.g);
    });
    std::vector<double> out;
    out.reserve(cfg.n_paths);
    for (auto& b : blocks) out.insert(out.end(), b.vals.begin(), b.vals.end());
    return out;
}

// One recorded A-path on the simulation grid (diagnostics and path tests).
inline PathSample sample_A_path(double nu, double t_end, const McConfig& cfg,
                                std::size_t path_index = 0) {
    cfg.validate();
    detail::Rng rng(cfg.seed, path_index);
    detail::ExpIntegrator ei{2.0 * nu, 2.0};
    PathSample ps;
    double acc = 0.0;
    ps.times.push_back(0.0);
    ps.values.push_back(0.0);
    while (ei.t < t_end - 1e-15) {
        const double dt = std::min(cfg.dt, t_end - ei.t);
        acc += ei.step(dt, std::sqrt(dt), rng, 1.0);
        ps.times.push_back(ei.t);
        ps.values.push_back(acc);
    }
    return ps;
}

namespace detail {

// First time Int_0^t exp(drift s + vol B_s) ds reaches `level`; the integral
// is nondecreasing, so a grid crossing brackets the true crossing and linear
// interpolation within the step settles it.
inline std::optional<double> integral_hit_time(double drift, double vol, double level, double cap,
                                               double dt_max, Rng& rng, double sign) {
    ExpIntegrator ei{drift, vol};
    const double sqdt = std::sqrt(dt_max);
    double acc = 0.0;
    while (ei.t < cap) {
        const double dt = std::min(dt_max, cap - ei.t);
        const double prev = acc;
        const double t0 = ei.t;
        acc += ei.step(dt, dt == dt_max ? sqdt : std::sqrt(dt), rng, sign);
        if (acc >= level) {
            const double theta = (level - prev) / (acc - prev);
            return t0 + theta * dt;
        }
    }
    return std::nullopt;
}

} // namespace detail

// First-passage samples of H_a = inf{t : A_t = a}.
inline HittingSample simulate_hitting_H(double nu, double a, const McConfig& cfg) {
    cfg.validate();
    if (!(a > 0.0)) throw DomainError("simulate_hitting_H: requires a > 0");
    struct Block {
        std::vector<double> times;
        std::size_t censored = 0;
    };
    auto blocks = detail::run_blocks<Block>(cfg, [&](std::size_t path, Block& blk) {
        const std::size_t stream = cfg.antithetic ? path / 2 : path;
        const double sign = (cfg.antithetic && (path % 2 == 1)) ? -1.0 : 1.0;
        detail::Rng rng(cfg.seed, stream);
        auto hit = detail::integral_hit_time(2.0 * nu, 2.0, a, cfg.horizon_cap, cfg.dt, rng, sign);
        if (hit) {
            blk.times.push_back(*hit);
        } else {
            blk.times.push_back(cfg.horizon_cap);
            ++blk.censored;
        }
    });
    HittingSample out;
    out.times.reserve(cfg.n_paths);
    for (auto& b : blocks) {
        out.times.insert(out.times.end(), b.times.begin(), b.times.end());
        out.censored += b.censored;
    }
    return out;
}

// First-passage samples of tau_{y,0} for the normalized descending diffusion:
// Y_t = exp(2 B^{(nu)}_t)(y - Int_0^t exp(-2 B^{(nu)}_s) ds) crosses zero
// exactly when the (monotone) integral reaches y.
inline HittingSample simulate_hitting_tau(double nu, double y, const McConfig& cfg) {
    cfg.validate();
    if (!(y > 0.0)) throw DomainError("simulate_hitting_tau: requires y > 0");
    if (y < 10.0 * cfg.dt)
        throw DomainError("simulate_hitting_tau: y below 10*dt would bias the crossing");
    struct Block {
        std::vector<double> times;
        std::size_t censored = 0;
    };
    auto blocks = detail::run_blocks<Block>(cfg, [&](std::size_t path, Block& blk) {
        const std::size_t stream = cfg.antithetic ? path / 2 : path;
        const double sign = (cfg.antithetic && (path % 2 == 1)) ? -1.0 : 1.0;
        detail::Rng rng(cfg.seed, stream);
        auto hit = detail::integral_hit_time(-2.0 * nu, -2.0, y, cfg.horizon_cap, cfg.dt, rng, sign);
        if (hit) {
            blk.times.push_back(*hit);
        } else {
            blk.times.push_back(cfg.horizon_cap);
            ++blk.censored;
        }
    });
    HittingSample out;
    out.times.reserve(cfg.n_paths);
    for (auto& b : blocks) {
        out.times.insert(out.times.end(), b.times.begin(), b.times.end());
        out.censored += b.censored;
    }
    return out;
}

// General-coefficient zero-passage, dY = [mu Y - 1]dt + sigma Y dB, Y_0 = y.
inline HittingSample simulate_hitting_tau_general(double mu, double sigma, double y,
                                                  const McConfig& cfg) {
    cfg.validate();
    if (!(sigma > 0.0) || !(y > 0.0))
        throw DomainError("simulate_hitting_tau_general: requires sigma > 0, y > 0");
    struct Block {
        std::vector<double> times;
        std::size_t censored = 0;
    };
    const double c0 = mu - 0.5 * sigma * sigma;
    auto blocks = detail::run_blocks<Block>(cfg, [&](std::size_t path, Block& blk) {
        const std::size_t stream = cfg.antithetic ? path / 2 : path;
        const double sign = (cfg.antithetic && (path % 2 == 1)) ? -1.0 : 1.0;
        detail::Rng rng(cfg.seed, stream);
        auto hit = detail::integral_hit_time(-c0, -sigma, y, cfg.horizon_cap, cfg.dt, rng, sign);
        if (hit) {
            blk.times.push_back(*hit);
        } else {
            blk.times.push_back(cfg.horizon_cap);
            ++blk.censored;
        }
    });
    HittingSample out;
    out.times.reserve(cfg.n_paths);
    for (auto& b : blocks) {
        out.times.insert(out.times.end(), b.times.begin(), b.times.end());
        out.censored += b.censored;
    }
    return out;
}

// Level passage with a non-zero target for dY = [mu Y - 1]dt + sigma Y dB;
// monitored on the grid with a geometric-bridge crossing correction.
inline HittingSample simulate_hitting_level(double mu, double sigma, double x0, double target,
                                            const McConfig& cfg) {
    cfg.validate();
    if (!(x0 > target && target > 0.0))
        throw DomainError("simulate_hitting_level: requires x0 > target > 0");
    struct Block {
        std::vector<double> times;
        std::size_t censored = 0;
    };
    const double c0 = mu - 0.5 * sigma * sigma;
    const double sqdt = std::sqrt(cfg.dt);
    auto blocks = detail::run_blocks<Block>(cfg, [&](std::size_t path, Block& blk) {
        detail::Rng rng(cfg.seed, path);
        detail::ExpIntegrator ei{-c0, -sigma};
        double acc = 0.0, y_prev = x0;
        std::optional<double> hit;
        while (ei.t < cfg.horizon_cap && !hit) {
            const double dt = std::min(cfg.dt, cfg.horizon_cap - ei.t);
            acc += ei.step(dt, dt == cfg.dt ? sqdt : std::sqrt(dt), rng, 1.0);
            const double t = ei.t;
            const double y_now = (x0 - acc) / ei.g;
            if (y_now <= target) {
                const double lo = std::log(std::max(y_prev / target, 1.0 + 1e-12));
                const double lh = std::log(std::max(y_prev / std::max(y_now, 1e-300), 1.0 + 1e-12));
                hit = t - dt + dt * std::min(1.0, lo / lh);
            } else {
                // geometric-bridge probability of an unseen dip below target
                const double l0 = std::log(y_prev / target), l1 = std::log(y_now / target);
                const double p_cross = std::exp(-2.0 * l0 * l1 / (sigma * sigma * dt));
                if (rng.next_uniform() < p_cross) hit = t - 0.5 * dt;
            }
            y_prev = y_now;
        }
        if (hit) {
            blk.times.push_back(*hit);
        } else {
            blk.times.push_back(cfg.horizon_cap);
            ++blk.censored;
        }
    });
    HittingSample out;
    out.times.reserve(cfg.n_paths);
    for (auto& b : blocks) {
        out.times.insert(out.times.end(), b.times.begin(), b.times.end());
        out.censored += b.censored;
    }
    return out;
}

struct GmwbEstimates {
    Estimate terminal_in_force;  // E[e^{-rT} F_T 1{tau > T}]
    Estimate ruin_prob;          // P(tau < T)
    Estimate discounted_ruin;    // E[e^{-r tau} 1{tau < T}]
    Estimate fee_base;           // E[Int_0^{tau ^ T} e^{-rs} F_s ds]
};

// Risk-neutral fund simulation dF = [(r-m)F - w]dt + sigma F dW, F_0 = G,
// absorbed at zero, via the exact pathwise form.
inline GmwbEstimates simulate_gmwb(const valuation::ModelParams& mp, const McConfig& cfg) {
    mp.validate();
    cfg.validate();
    const double T = mp.maturity();
    const double c0 = mp.r - mp.m - 0.5 * mp.sigma * mp.sigma;
    const double level = mp.G / mp.w;
    struct Block {
        detail::Moments m1, m2, m3, m4;
    };
    const double sqdt = std::sqrt(cfg.dt);
    auto blocks = detail::run_blocks<Block>(cfg, [&](std::size_t path, Block& blk) {
        const std::size_t stream = cfg.antithetic ? path / 2 : path;
        const double sign = (cfg.antithetic && (path % 2 == 1)) ? -1.0 : 1.0;
        detail::Rng rng(cfg.seed, stream);
        detail::ExpIntegrator ei{-c0, -mp.sigma};
        double acc = 0.0;
        double fee_integral = 0.0;
        double f_prev = mp.G;
        std::optional<double> hit;
        while (ei.t < T - 1e-12 && !hit) {
            const double dt = std::min(cfg.dt, T - ei.t);
            const double prev = acc;
            acc += ei.step(dt, dt == cfg.dt ? sqdt : std::sqrt(dt), rng, sign);
            const double t = ei.t;
            const double f_now = std::max(0.0, (mp.G - mp.w * acc) / ei.g);
            if (acc >= level) {
                const double theta = (level - prev) / (acc - prev);
                hit = t - dt + theta * dt;
                // fund decays linearly to zero over the partial step
                fee_integral += 0.5 * theta * dt * std::exp(-mp.r * (t - dt)) * f_prev;
            } else {
                fee_integral += 0.5 * dt *
                                (std::exp(-mp.r * (t - dt)) * f_prev + std::exp(-mp.r * t) * f_now);
            }
            f_prev = f_now;
        }
        blk.m1.add(hit ? 0.0 : std::exp(-mp.r * T) * f_prev);
        blk.m2.add(hit ? 1.0 : 0.0);
        blk.m3.add(hit ? std::exp(-mp.r * *hit) : 0.0);
        blk.m4.add(fee_integral);
    });
    detail::Moments m1, m2, m3, m4;
    for (auto& b : blocks) {
        m1.merge(b.m1);
        m2.merge(b.m2);
        m3.merge(b.m3);
        m4.merge(b.m4);
    }
    return {m1.estimate(), m2.estimate(), m3.estimate(), m4.estimate()};
}

// --- sample statistics --------------------------------------------------------

struct KsResult {
    double statistic;
    double p_value;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        p += 2.0 * sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    p = std::min(1.0, std::max(0.0, p));
    return {d, p};
}

// Chi-square upper tail probability via the regularized incomplete gamma.
inline double chi2_pvalue(double statistic, int dof) {
    if (dof <= 0 || !(statistic >= 0.0)) throw DomainError("chi2_pvalue: invalid arguments");
    return specfun::gamma_q(0.5 * dof, 0.5 * statistic);
}

} // namespace gmwb::mc
