#pragma once

// Test-only oracles, kept independent of the library's evaluation paths:
// brute-force series in extended precision, a tail-corrected product formula
// for log Gamma, and a stand-alone continued fraction for E1.

#include <cmath>
#include <complex>

namespace oracles {

using CLD = std::complex<long double>;

// Kummer series summed termwise in extended precision.
inline CLD kummer_m_series_ld(CLD a, CLD b, CLD z, int terms = 400) {
    CLD sum = 0.0L, term = 1.0L;
    for (int n = 0; n < terms; ++n) {
        sum += term;
        term *= (a + static_cast<long double>(n)) / (b + static_cast<long double>(n)) * z /
                static_cast<long double>(n + 1);
    }
    return sum;
}

// log Gamma via the Weierstrass product, N explicit factors plus an
// Euler-Maclaurin corrected tail of the remainder sum.
inline CLD log_gamma_product_ld(CLD z, int N = 500) {
    const long double euler_gamma = 0.57721566490153286060651209008240243L;
    CLD acc = -euler_gamma * z - std::log(z);
    for (int k = 1; k <= N; ++k) {
        const long double kk = k;
        acc += z / kk - std::log(1.0L + z / kk);
    }
    // remainder: sum_{m>=2} (-1)^m z^m / m * zeta_{>N}(m)
    const long double Np1 = static_cast<long double>(N) + 1.0L;
    CLD zp = z; // z^1
    for (int m = 2; m <= 24; ++m) {
        zp *= z;
        const long double mm = m;
        const long double tail = std::pow(Np1, 1.0L - mm) / (mm - 1.0L) +
                                 0.5L * std::pow(Np1, -mm) +
                                 mm / 12.0L * std::pow(Np1, -mm - 1.0L) -
                                 mm * (mm + 1.0L) * (mm + 2.0L) / 720.0L * std::pow(Np1, -mm - 3.0L);
        const CLD contrib = ((m % 2 == 0) ? 1.0L : -1.0L) * zp / mm * tail;
        acc += contrib;
        if (std::abs(contrib) < 1e-30L * (1.0L + std::abs(acc))) break;
    }
    return acc;
}

// E1 by a plain backward-evaluated continued fraction (x > 1).
inline long double e1_cf_ld(long double x, int depth = 120) {
    long double tail = 0.0L;
    for (int n = depth; n >= 1; --n) {
        const long double nn = n;
        tail = nn / (1.0L + nn / (x + tail));
    }
    return std::exp(-x) / (x + tail);
}

// Modified Bessel I by brute-force series in extended precision.
inline long double bessel_i_series_ld(long double order, long double z, int terms = 100) {
    long double lgam = std::lgamma(order + 1.0L);
    long double term = std::exp(order * std::log(0.5L * z) - lgam);
    long double sum = 0.0L;
    const long double q = 0.25L * z * z;
    for (int k = 0; k < terms; ++k) {
        sum += term;
        term *= q / ((k + 1.0L) * (order + k + 1.0L));
    }
    return sum;
}

} // namespace oracles
