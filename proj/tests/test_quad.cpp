#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gmwb/quad.hpp"

using namespace gmwb;

TEST_CASE("integrate_finite: polynomial and oscillatory sanity") {
    CHECK(quad::integrate_finite([](double x) { return x * x; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    const double s = quad::integrate_finite([](double x) { return std::sin(x); }, 0.0, 2.0 * M_PI);
    CHECK(std::abs(s) < 1e-13);
}

TEST_CASE("integrate_finite: argument validation") {
    CHECK_THROWS_AS(quad::integrate_finite([](double) { return 1.0; }, 1.0, 1.0), DomainError);
    quad::QuadConfig bad;
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(quad::integrate_finite([](double) { return 1.0; }, 0.0, 1.0, bad), DomainError);
    bad = {};
    bad.max_subdivisions = 5;
    CHECK_THROWS_AS(quad::integrate_finite([](double) { return 1.0; }, 0.0, 1.0, bad), DomainError);
}

TEST_CASE("integrate_finite: subdivision exhaustion raises") {
    quad::QuadConfig cfg;
    cfg.max_subdivisions = 10;
    cfg.rel_tol = 1e-13;
    cfg.abs_tol = 1e-300;
    auto spike = [](double x) {
        const double d = x - 0.3141592653589793;
        return 1.0 / (d * d + 1e-12);
    };
    CHECK_THROWS_AS(quad::integrate_finite(spike, 0.0, 1.0, cfg), NonConvergence);
}

TEST_CASE("integrate_finite: halving rel_tol refines monotonically") {
    auto f = [](double x) { return std::exp(-x) * std::cos(7.0 * x) / std::sqrt(x + 0.01); };
    quad::QuadConfig coarse;
    coarse.rel_tol = 1e-6;
    coarse.abs_tol = 1e-15;
    double prev_rel = 1e-6;
    auto prev = quad::integrate_finite_detail(f, 0.0, 5.0, coarse);
    for (int i = 0; i < 4; ++i) {
        prev_rel *= 0.5;
        quad::QuadConfig finer = coarse;
        finer.rel_tol = prev_rel;
        auto next = quad::integrate_finite_detail(f, 0.0, 5.0, finer);
        CHECK(std::abs(next.value - prev.value) <= prev.error + 1e-16);
        prev = next;
    }
}

TEST_CASE("integrate_spectral: Gaussian moments") {
    const double g0 = quad::integrate_spectral([](double p) { return std::exp(-0.5 * p * p); },
                                               1.0, 0.0);
    CHECK(g0 == doctest::Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-10));
    const double t = 0.2;
    const double g1 = quad::integrate_spectral(
        [t](double p) { return p * std::exp(-0.5 * t * p * p); }, t, 0.0);
    CHECK(g1 == doctest::Approx(1.0 / t).epsilon(1e-9));
}

TEST_CASE("integrate_spectral: rejects vanishing Gaussian rates") {
    CHECK_THROWS_AS(
        quad::integrate_spectral([](double p) { return std::exp(-p * p * 1e-5); }, 5e-5, 0.0),
        TailBoundFailure);
}

TEST_CASE("integrate_spectral: extending the truncation point changes nothing") {
    // envelope-shaped integrand with the e^{pi p/4} growth the tail bound assumes
    const double t = 0.15;
    auto f = [t](double p) {
        return std::cos(3.0 * p) * std::exp(M_PI * p / 4.0 - 0.5 * t * p * p) * p;
    };
    quad::QuadConfig cfg;
    auto res = quad::integrate_spectral_detail(f, t, 1.0, cfg);
    // the discarded tail itself must sit below the absolute tolerance
    const double tail = quad::integrate_finite(f, res.p_star, 1.5 * res.p_star, cfg);
    CHECK(std::abs(tail) < cfg.abs_tol);
}
