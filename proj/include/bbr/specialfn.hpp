// specialfn.hpp: sine/cosine integrals, angular weights, coth(y/2), binary entropy

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "bbr/errors.hpp"
#include "bbr/quadrature.hpp"

namespace bbr {

namespace detail {

inline constexpr double kEulerGamma = 0.57721566490153286061;

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": argument must be finite");
}

// Modified Lentz evaluation of the continued fraction for E_q(z) e^z,
//   1/(z+q- 1*q/(z+q+2- 2(q+1)/(z+q+4- ...))),
// valid for Re z >= 0 away from the origin (|z| >= 2 is used here).
inline std::complex<double> expint_cf_scaled(double q, std::complex<double> z) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 4.0 * std::numeric_limits<double>::epsilon();
    std::complex<double> b = z + q;
    std::complex<double> c = 1.0 / tiny;
    std::complex<double> d = 1.0 / b;
    std::complex<double> h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -static_cast<double>(i) * (q - 1.0 + static_cast<double>(i));
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const std::complex<double> del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    return h;
}

/// e^{ix} E1(ix) for x >= 4. Ci(x) = -Re E1(ix), Si(x) = pi/2 + Im E1(ix).
inline std::complex<double> e1_imag_scaled(double x) { return expint_cf_scaled(1.0, {0.0, x}); }

inline std::complex<double> e1_imag(double x) {
    return e1_imag_scaled(x) * std::complex<double>(std::cos(x), -std::sin(x));
}

inline double si_series(double x) {
    const double x2 = x * x;
    double term = x; // (-1)^k x^(2k+1) / (2k+1)!
    double sum = x;
    for (int k = 1; k < 40; ++k) {
        term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
        const double add = term / (2.0 * k + 1.0);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// Cin(x) = sum_{k>=1} (-1)^(k+1) x^(2k) / (2k (2k)!)
inline double cin_series(double x) {
    const double x2 = x * x;
    double term = 1.0; // (-1)^(k+1) x^(2k) / (2k)!
    double sum = 0.0;
    for (int k = 1; k < 40; ++k) {
        term *= (k == 1 ? 1.0 : -1.0) * x2 / ((2.0 * k - 1.0) * (2.0 * k));
        const double add = term / (2.0 * k);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

} // namespace detail

/// Si(x) = int_0^x sin(u)/u du.
inline double sine_integral(double x) {
    detail::require_finite(x, "sine_integral");
    const double ax = std::abs(x);
    double s;
    if (ax <= 4.0)
        s = detail::si_series(ax);
    else
        s = std::numbers::pi / 2.0 + detail::e1_imag(ax).imag();
    return x < 0.0 ? -s : s;
}

/// Ci(x) = gamma + ln x + int_0^x (cos u - 1)/u du, x > 0.
inline double cosine_integral(double x) {
    detail::require_finite(x, "cosine_integral");
    if (!(x > 0.0)) throw DomainError("cosine_integral needs x > 0");
    if (x <= 4.0) return detail::kEulerGamma + std::log(x) - detail::cin_series(x);
    return -detail::e1_imag(x).real();
}

/// Entire cosine integral Cin(x) = int_0^x (1 - cos u)/u du (even in x).
inline double cin(double x) {
    detail::require_finite(x, "cin");
    const double ax = std::abs(x);
    if (ax <= 4.0) return detail::cin_series(ax);
    return detail::kEulerGamma + std::log(ax) + detail::e1_imag(ax).real();
}

/// Si(c) - Si(b), keeping relative accuracy when both arguments are large.
inline double si_diff(double c, double b) {
    detail::require_finite(c, "si_diff");
    detail::require_finite(b, "si_diff");
    if (c > 4.0 && b > 4.0) return detail::e1_imag(c).imag() - detail::e1_imag(b).imag();
    if (c < -4.0 && b < -4.0) return -(detail::e1_imag(-c).imag() - detail::e1_imag(-b).imag());
    return sine_integral(c) - sine_integral(b);
}

/// Cin(c) - Cin(b) for c >= b >= 0, accurate also when the interval is short relative to b.
inline double cin_diff(double c, double b) {
    if (!(c >= b && b >= 0.0)) throw DomainError("cin_diff needs c >= b >= 0");
    if (c - b <= 2.0) {
        auto integrand = [](double u) {
            if (u == 0.0) return 0.0;
            const double s = std::sin(0.5 * u);
            return 2.0 * s * s / u;
        };
        return quad::gk15(integrand, b, c).value;
    }
    if (b >= 4.0) return std::log1p((c - b) / b) + detail::e1_imag(c).real() - detail::e1_imag(b).real();
    return cin(c) - cin(b);
}

/// Generalized exponential integral on the negative imaginary axis,
/// E_q(-ix) = int_1^inf e^{ixs} s^{-q} ds for q > 1 and x >= 0.
inline std::complex<double> expint_neg_imag(double q, double x) {
    if (!(q > 1.0)) throw DomainError("expint_neg_imag needs q > 1");
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("expint_neg_imag needs finite x >= 0");
    if (x == 0.0) return {1.0 / (q - 1.0), 0.0};
    const std::complex<double> z(0.0, -x);
    if (x >= 2.0) return detail::expint_cf_scaled(q, z) * std::exp(-z);

    // Integrate s in [1, 2/x] directly (substituting s = e^u), then hand the rest to the
    // continued fraction through E_q(-ix) tail = T^(1-q) E_q(-ixT) with xT = 2.
    const double T = 2.0 / x;
    const double U = std::log(T);
    auto re = [&](double u) { return std::exp((1.0 - q) * u) * std::cos(x * std::exp(u)); };
    auto im = [&](double u) { return std::exp((1.0 - q) * u) * std::sin(x * std::exp(u)); };
    const quad::Tolerance tol{1e-15, 1e-14, 30};
    const double head_re = quad::integrate_panels(re, 0.0, U, 0.5, tol).value;
    const double head_im = quad::integrate_panels(im, 0.0, U, 0.5, tol).value;
    const std::complex<double> zt(0.0, -2.0);
    const std::complex<double> tail = std::pow(T, 1.0 - q) * detail::expint_cf_scaled(q, zt) * std::exp(-zt);
    return std::complex<double>(head_re, head_im) + tail;
}

namespace detail {

// sum_{k>=2} (-1)^k 2k/(2k+1)! x^(2k-2), i.e. cos x/x^2 - sin x/x^3 + 1/3 near the origin
inline double dipole_series_tail(double x) {
    const double x2 = x * x;
    double fact = 120.0; // (2k+1)! at k = 2
    double pw = x2;
    double sum = 0.0;
    for (int k = 2; k < 12; ++k) {
        sum += (k % 2 == 0 ? 1.0 : -1.0) * (2.0 * k) / fact * pw;
        pw *= x2;
        fact *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
    }
    return sum;
}

inline constexpr double kWeightSeriesSwitch = 0.5;

} // namespace detail

/// cos x/x^2 - sin x/x^3 for x >= 0 (tends to -1/3 at the origin).
inline double dipole_kernel(double x) {
    if (!(x >= 0.0)) throw DomainError("dipole_kernel needs x >= 0");
    if (std::isinf(x)) return 0.0;
    if (x <= detail::kWeightSeriesSwitch) return detail::dipole_series_tail(x) - 1.0 / 3.0;
    return std::cos(x) / (x * x) - std::sin(x) / (x * x * x);
}

/// Angular weight 1/3 + (-1)^nu (cos x/x^2 - sin x/x^3) of the cos-wave (nu = 1) and
/// sin-wave (nu = 2) baths. Always in [0, 2/3]; the two weights sum to 2/3.
inline double geometric_weight(int nu, double x) {
    if (nu != 1 && nu != 2) throw DomainError("geometric_weight: nu must be 1 or 2");
    if (!(x >= 0.0)) throw DomainError("geometric_weight needs x >= 0");
    if (std::isinf(x)) return 1.0 / 3.0;
    const double g = x <= detail::kWeightSeriesSwitch ? detail::dipole_series_tail(x)
                                                      : std::cos(x) / (x * x) - std::sin(x) / (x * x * x) + 1.0 / 3.0;
    return nu == 2 ? g : 2.0 / 3.0 - g;
}

/// coth(y/2) for y > 0.
inline double coth_half(double y) {
    if (!(y > 0.0)) throw DomainError("coth_half needs y > 0");
    if (y < 1e-4) return 2.0 / y + y / 6.0;
    if (y > 40.0) return 1.0;
    return 1.0 + 2.0 / std::expm1(y);
}

/// -x log2 x - (1-x) log2 (1-x), with 0 log 0 = 0.
inline double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("binary_entropy needs x in [0, 1]");
    auto term = [](double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; };
    return term(x) + term(1.0 - x);
}

} // namespace bbr
