#pragma once

#include <quadmath.h>

#include <vector>

// Minimal quad-precision toolkit: a tanh-sinh rule and a Chebyshev proxy.
// Used where an oscillatory kernel cancels through many more digits than
// double precision carries.

namespace gmwb::detail128 {

using f128 = __float128;

inline const f128 kPi = acosq(-1);

// Tanh-sinh quadrature on [a,b]; doubles the node density until two
// consecutive levels agree to rel_tol (plus an absolute floor).
template <class F>
f128 tanh_sinh(F&& f, f128 a, f128 b, f128 rel_tol, f128 abs_floor = 0, int max_level = 9) {
    const f128 c = (a + b) / 2;
    const f128 d = (b - a) / 2;
    const f128 t_max = 7.3;

    auto node_sum = [&](f128 h, bool odd_only) {
        f128 s = 0;
        const int k0 = odd_only ? 1 : 0;
        const int step = odd_only ? 2 : 1;
        for (int k = k0;; k += step) {
            const f128 t = k * h;
            if (t > t_max) break;
            const f128 sh = kPi / 2 * sinhq(t);
            const f128 ch = coshq(sh);
            const f128 w = kPi / 2 * coshq(t) / (ch * ch);
            if (w == 0) break;
            const f128 u = tanhq(sh);
            s += (k == 0) ? w * f(c) : w * (f(c + d * u) + f(c - d * u));
        }
        return s;
    };

    f128 h = 1;
    f128 sum = node_sum(h, false);
    f128 integral = d * h * sum;
    for (int level = 1; level <= max_level; ++level) {
        h /= 2;
        sum += node_sum(h, true);
        const f128 next = d * h * sum;
        const f128 delta = fabsq(next - integral);
        integral = next;
        if (level >= 3 && delta <= rel_tol * fabsq(next) + abs_floor) break;
    }
    return integral;
}

// Fixed-order Gauss-Legendre rule; nodes refined to quad precision by Newton
// iteration on the Legendre recurrence.
template <int N>
struct GaussLegendre {
    f128 x[N];
    f128 w[N];

    GaussLegendre() {
        for (int i = 0; i < (N + 1) / 2; ++i) {
            f128 root = cosq(kPi * (i + 0.75) / (N + 0.5));
            f128 dp = 0;
            for (int it = 0; it < 60; ++it) {
                f128 p0 = 1, p1 = root;
                for (int k = 2; k <= N; ++k) {
                    const f128 p2 = ((2 * k - 1) * root * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N * (root * p1 - p0) / (root * root - 1);
                const f128 step = p1 / dp;
                root -= step;
                if (fabsq(step) < 1e-34) break;
            }
            x[i] = -root;
            x[N - 1 - i] = root;
            w[i] = w[N - 1 - i] = 2 / ((1 - root * root) * dp * dp);
        }
    }

    template <class F>
    f128 integrate(F&& f, f128 a, f128 b) const {
        const f128 c = (a + b) / 2, d = (b - a) / 2;
        f128 s = 0;
        for (int i = 0; i < N; ++i) s += w[i] * f(c + d * x[i]);
        return d * s;
    }
};

inline const GaussLegendre<32>& gl32() {
    static const GaussLegendre<32> rule;
    return rule;
}

// Chebyshev interpolant built from function values at the classic nodes.
struct Cheb {
    f128 lo = 0, hi = 1;
    std::vector<f128> coef;

    f128 eval(f128 x) const {
        const f128 u = (2 * x - lo - hi) / (hi - lo);
        f128 b0 = 0, b1 = 0;
        for (int k = static_cast<int>(coef.size()) - 1; k >= 1; --k) {
            const f128 b2 = b1;
            b1 = b0;
            b0 = 2 * u * b1 - b2 + coef[static_cast<size_t>(k)];
        }
        return u * b0 - b1 + coef[0];
    }
};

template <class F>
Cheb cheb_fit(F&& f, f128 lo, f128 hi, int n) {
    Cheb out;
    out.lo = lo;
    out.hi = hi;
    std::vector<f128> v(static_cast<size_t>(n));
    // cosine table: cos(pi m / (2n)) for m in [0, 4n)
    std::vector<f128> ct(static_cast<size_t>(4 * n));
    for (int m = 0; m < 4 * n; ++m) ct[static_cast<size_t>(m)] = cosq(kPi * m / (2 * n));
    for (int j = 0; j < n; ++j) {
        const f128 x = ct[static_cast<size_t>((2 * j + 1) % (4 * n))]; // cos(pi(2j+1)/(2n))
        v[static_cast<size_t>(j)] = f((lo + hi) / 2 + (hi - lo) / 2 * x);
    }
    out.coef.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        f128 acc = 0;
        for (int j = 0; j < n; ++j) {
            const long long m = (static_cast<long long>(k) * (2 * j + 1)) % (4LL * n);
            acc += v[static_cast<size_t>(j)] * ct[static_cast<size_t>(m)];
        }
        out.coef[static_cast<size_t>(k)] = 2 * acc / n;
    }
    out.coef[0] /= 2;
    return out;
}

} // namespace gmwb::detail128
