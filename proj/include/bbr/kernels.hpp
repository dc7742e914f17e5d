// kernels.hpp: decoherence exponents f_nu and phases phi_nu of the cos/sin-wave baths
//
// Every argument is dimensionless: times in units of tau (or t0 in the T = 0 mode), frequencies
// as y = omega tau. With a = t0 and w_nu(x) = 1/3 + (-1)^nu g(x), g(x) = cos x/x^2 - sin x/x^3,
//
//   f_nu   = int_0^inf dy C(y) y coth(y/2) (1 - cos yt) w_nu(y a)
//   phi_nu = int_0^Y   dy y (yt - sin yt) w_nu(y a)
//
// where C is the cutoff function (1 below Y). The phases always use the sharp cutoff: their
// integrand grows like y^2 t, so a y^-p tail with p <= 3 would not converge.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "bbr/errors.hpp"
#include "bbr/params.hpp"
#include "bbr/quadrature.hpp"
#include "bbr/specialfn.hpp"

namespace bbr {

enum class TemperatureMode { Thermal, CothOne, ZeroT };
enum class Strategy { AutoSelect, Quadrature, ClosedFormCothOne, LongTimeAsymptote };
enum class KernelPath { Quadrature, ClosedFormCothOne, ClosedFormThermalCorrected, LongTimeAsymptote };

inline std::string to_string(TemperatureMode m) {
    switch (m) {
    case TemperatureMode::Thermal: return "thermal";
    case TemperatureMode::CothOne: return "coth_one";
    case TemperatureMode::ZeroT: return "zero_t";
    }
    return "?";
}

inline std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::AutoSelect: return "auto";
    case Strategy::Quadrature: return "quadrature";
    case Strategy::ClosedFormCothOne: return "closed_form";
    case Strategy::LongTimeAsymptote: return "long_time";
    }
    return "?";
}

inline std::string to_string(KernelPath p) {
    switch (p) {
    case KernelPath::Quadrature: return "quadrature";
    case KernelPath::ClosedFormCothOne: return "closed_form_coth_one";
    case KernelPath::ClosedFormThermalCorrected: return "closed_form_thermal";
    case KernelPath::LongTimeAsymptote: return "long_time_asymptote";
    }
    return "?";
}

inline constexpr double kDefaultOscillationBudget = 1e7;

struct KernelQuery {
    double t = 0.0;
    double t0 = 1.0;
    double y_max = 1.0;
    CutoffSpec cutoff{};
    TemperatureMode temperature_mode = TemperatureMode::Thermal;
    Strategy strategy = Strategy::AutoSelect;
    double oscillation_budget = kDefaultOscillationBudget; // max y_max * max(t, t0) for quadrature

    void validate() const {
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("kernel query: t must be finite and >= 0");
        if (!(t0 > 0.0) || !std::isfinite(t0)) throw DomainError("kernel query: t0 must be finite and > 0");
        if (!(y_max > 0.0) || !std::isfinite(y_max)) throw DomainError("kernel query: y_max must be > 0");
        if (!(oscillation_budget > 0.0)) throw ConfigError("oscillation_budget", "must be > 0");
        cutoff.validate();
        if (!cutoff.is_sharp() && !(y_max >= 1.0))
            throw DomainError("power-law cutoff y^-p needs y_max >= 1 to stay below 1");
        if (temperature_mode == TemperatureMode::ZeroT && t0 != 1.0)
            throw ConfigError("t0", "the T = 0 mode measures time in units of t0, so t0 must be 1");
        if (temperature_mode == TemperatureMode::Thermal && strategy == Strategy::ClosedFormCothOne)
            throw ConfigError("kernel_mode", "the coth = 1 closed form cannot be requested in thermal mode");
    }
};

struct BathKernels {
    double f1 = 0.0, f2 = 0.0;
    double phi1 = 0.0, phi2 = 0.0;
    double phi_minus = 0.0;
    double error_estimate = 0.0;
    KernelPath path = KernelPath::Quadrature;
};

namespace detail {

// c_k = (-1)^k 2k / (2k+1)!, so that g(x) = sum_{k>=1} c_k x^(2k-2).
inline double g_coeff(int k) {
    double fact = 1.0;
    for (int i = 2; i <= 2 * k + 1; ++i) fact *= i;
    return (k % 2 == 0 ? 1.0 : -1.0) * (2.0 * k) / fact;
}

// 1 - cos x, stable for small x
inline double one_minus_cos(double x) {
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s;
}

// x - sin x, stable for small x
inline double x_minus_sin(double x) {
    if (std::abs(x) < 0.1) {
        const double x2 = x * x;
        return x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))));
    }
    return x - std::sin(x);
}

// y (coth(y/2) - 1) = 2y/(e^y - 1), the thermal excess over coth = 1
inline double thermal_excess(double y) {
    if (y == 0.0) return 2.0;
    if (y > 745.0) return 0.0;
    return 2.0 * y / std::expm1(y);
}

// y coth(y/2)
inline double y_coth_half(double y) { return y + thermal_excess(y); }

// Normalized moments mc_n(X) = int_0^1 s^n (1 - cos Xs) ds and ms_n(X) = int_0^1 s^n (Xs - sin Xs) ds.
struct Moments {
    double mc;
    double ms;
};

inline Moments normalized_moments(int n, double X) {
    if (X <= 2.0) {
        const double X2 = X * X;
        double mc = 0.0, ms = 0.0;
        double ec = 1.0; // X^(2m)/(2m)!
        for (int m = 1; m < 30; ++m) {
            ec *= X2 / ((2.0 * m - 1.0) * (2.0 * m));
            const double es = ec * X / (2.0 * m + 1.0); // X^(2m+1)/(2m+1)!
            const double sgn = (m % 2 == 1) ? 1.0 : -1.0;
            mc += sgn * ec / (n + 2.0 * m + 1.0);
            ms += sgn * es / (n + 2.0 * m + 2.0);
            if (ec < 1e-20) break;
        }
        return {mc, ms};
    }
    if (X <= 64.0) {
        auto fc = [n, X](double s) { return std::pow(s, n) * one_minus_cos(X * s); };
        auto fs = [n, X](double s) { return std::pow(s, n) * x_minus_sin(X * s); };
        const quad::Tolerance tol{0.0, 1e-14, 30};
        const double w = std::numbers::pi / X;
        return {quad::integrate_panels(fc, 0.0, 1.0, w, tol).value, quad::integrate_panels(fs, 0.0, 1.0, w, tol).value};
    }
    // j_k = int_0^1 s^k e^{iXs} ds by upward recursion, stable for X well above k
    const std::complex<double> I(0.0, 1.0);
    const std::complex<double> e = std::exp(I * X);
    std::complex<double> j = -I * (e - 1.0) / X;
    for (int k = 1; k <= n; ++k) j = -I * e / X + I * static_cast<double>(k) * j / X;
    return {1.0 / (n + 1.0) - j.real(), X / (n + 2.0) - j.imag()};
}

inline bool small_light_time(double a, double Y) { return a * Y < 0.5; }

// Number of series terms so that (aY)^(2k-2) |c_k| is below machine precision
inline constexpr int kSeriesTerms = 12;

// Sharp-cutoff, coth = 1 decoherence exponents over [0, Y]: returns {f1, f2}.
inline std::pair<double, double> f_sharp_coth_one(double t, double a, double Y) {
    if (t == 0.0) return {0.0, 0.0};
    const double X = t * Y;
    const double P = Y * Y * normalized_moments(1, X).mc; // int y (1 - cos ty)
    if (small_light_time(a, Y)) {
        double w2 = 0.0; // P/3 + I
        for (int k = 2; k <= kSeriesTerms; ++k)
            w2 += g_coeff(k) * Y * Y * std::pow(a * Y, 2 * k - 2) * normalized_moments(2 * k - 1, X).mc;
        return {2.0 / 3.0 * P - w2, w2};
    }
    const double a3 = a * a * a;
    const double I = one_minus_cos(X) * std::sin(a * Y) / (a3 * Y) -
                     t / (2.0 * a3) * cin_diff((t + a) * Y, std::abs(t - a) * Y);
    return {P / 3.0 - I, P / 3.0 + I};
}

// Cycle-averaged (1 - cos yt -> 1) sharp-cutoff exponents: {f1, f2}.
inline std::pair<double, double> f_sharp_long_time(double a, double Y) {
    const double bulk = Y * Y / 6.0;
    if (small_light_time(a, Y)) {
        double w2 = 0.0;
        for (int k = 2; k <= kSeriesTerms; ++k)
            w2 += g_coeff(k) * Y * Y * std::pow(a * Y, 2 * k - 2) / (2.0 * k);
        return {2.0 * bulk - w2, w2};
    }
    const double G = std::sin(a * Y) / (a * a * a * Y) - 1.0 / (a * a); // int_0^Y y g(ya) dy
    return {bulk - G, bulk + G};
}

// int_Y^inf y^-m e^{i w y} dy for w real
inline std::complex<double> power_tail(double m, double w, double Y) {
    const std::complex<double> v = std::pow(Y, 1.0 - m) * expint_neg_imag(m, std::abs(w) * Y);
    return w < 0.0 ? std::conj(v) : v;
}

// Power-law tail of the coth = 1 exponents, int_Y^inf y^(1-p) (1 - cos yt) w_nu(ya) dy.
// With `averaged` the cos yt term is dropped. Returns {tail1, tail2}.
inline std::pair<double, double> f_power_tail(double t, double a, double Y, double p, bool averaged) {
    if (t == 0.0 && !averaged) return {0.0, 0.0};
    const double base = std::pow(Y, 2.0 - p) / (p - 2.0);
    double bulk = base;
    if (!averaged) bulk -= power_tail(p - 1.0, t, Y).real();
    bulk /= 3.0;
    // int y^(1-p) (1 - cos yt) [cos(ay)/(a y)^2 - sin(ay)/(a y)^3]
    double cos_part = power_tail(p + 1.0, a, Y).real();
    double sin_part = power_tail(p + 2.0, a, Y).imag();
    if (!averaged) {
        cos_part -= 0.5 * (power_tail(p + 1.0, a + t, Y).real() + power_tail(p + 1.0, a - t, Y).real());
        sin_part -= 0.5 * (power_tail(p + 2.0, a + t, Y).imag() + power_tail(p + 2.0, a - t, Y).imag());
    }
    const double G = cos_part / (a * a) - sin_part / (a * a * a);
    return {bulk - G, bulk + G};
}

// Sharp-cutoff phases from closed forms: {phi1, phi2, phi_minus}.
struct Phases {
    double phi1, phi2, phi_minus;
};

inline Phases phases_closed(double t, double a, double Y);

} // namespace detail

/// phi_1 - phi_2 in closed form:
///   (t/t0^3)(-2 sin(Y t0) + Si(Y(t-t0)) + 2 Si(Y t0) - Si(Y(t+t0))) + 2 sin(Y t) sin(Y t0)/(Y t0^3).
/// For Y t0 < 1/2 the bracket cancels to O((Y t0)^3) and a moment series is used instead.
inline double phi_minus_closed(double t, double t0, double y_max) {
    if (!(t >= 0.0) || !(t0 > 0.0) || !(y_max > 0.0)) throw DomainError("phi_minus_closed: need t >= 0, t0 > 0, y_max > 0");
    if (t == 0.0) return 0.0;
    const double Y = y_max, a = t0;
    if (detail::small_light_time(a, Y)) return detail::phases_closed(t, a, Y).phi_minus;
    const double a3 = a * a * a;
    // Si(Y(t-t0)) - Si(Y(t+t0)) loses nothing when both arguments are large
    const double si_pair = si_diff(Y * (t - a), Y * (t + a));
    const double bracket = -2.0 * std::sin(Y * a) + 2.0 * sine_integral(Y * a) + si_pair;
    return t / a3 * bracket + 2.0 * std::sin(Y * t) * std::sin(Y * a) / (Y * a3);
}

namespace detail {

inline Phases phases_closed(double t, double a, double Y) {
    if (t == 0.0) return {0.0, 0.0, 0.0};
    const double X = t * Y;
    const double sum = 2.0 / 3.0 * Y * Y * X * geometric_weight(2, X); // phi1 + phi2
    if (small_light_time(a, Y)) {
        double p2 = 0.0; // phi2 = sum_{k>=2} c_k a^(2k-2) int y^(2k-1) (yt - sin yt)
        for (int k = 2; k <= kSeriesTerms; ++k)
            p2 += g_coeff(k) * Y * Y * std::pow(a * Y, 2 * k - 2) * normalized_moments(2 * k - 1, X).ms;
        return {sum - p2, p2, sum - 2.0 * p2};
    }
    const double pm = phi_minus_closed(t, a, Y);
    return {0.5 * (sum + pm), 0.5 * (sum - pm), pm};
}

// Thermal excess of f over coth = 1: int_0^60 C(y) h(y) (1 - cos yt) w_nu(ya) dy.
// Beyond y = 60 the excess h(y) = 2y/(e^y - 1) is below 1e-24.
inline constexpr double kThermalRange = 60.0;

inline double thermal_upper(double Y, const CutoffSpec& c) { return c.is_sharp() ? std::min(Y, kThermalRange) : kThermalRange; }

struct ThermalExcess {
    double d1, d2, err;
    bool asymptotic;
};

inline double bose_transform(double t) {
    // int_0^inf 2y/(e^y - 1) cos(ty) dy = 1/t^2 - pi^2/sinh^2(pi t)
    const double pi = std::numbers::pi;
    if (t < 1e-2) {
        const double t2 = t * t;
        return pi * pi / 3.0 - std::pow(pi, 4) * t2 / 15.0 + 2.0 * std::pow(pi, 6) * t2 * t2 / 189.0;
    }
    if (pi * t > 40.0) return 1.0 / (t * t);
    const double s = std::sinh(pi * t);
    return 1.0 / (t * t) - pi * pi / (s * s);
}

inline ThermalExcess thermal_excess_terms(double t, double a, double Y, const CutoffSpec& c, double budget,
                                          const quad::Tolerance& tol) {
    if (t == 0.0) return {0.0, 0.0, 0.0, false};
    const double top = thermal_upper(Y, c);
    auto weight = [&](double y) { return c.weight(y, Y) * thermal_excess(y); };
    if (top * std::max(t, a) <= budget) {
        const double width = std::numbers::pi / std::max(t, a);
        auto i1 = [&](double y) { return weight(y) * one_minus_cos(y * t) * geometric_weight(1, y * a); };
        auto i2 = [&](double y) { return weight(y) * one_minus_cos(y * t) * geometric_weight(2, y * a); };
        const auto r1 = quad::integrate_panels(i1, 0.0, top, width, tol);
        const auto r2 = quad::integrate_panels(i2, 0.0, top, width, tol);
        return {r1.value, r2.value, r1.abs_error + r2.abs_error, false};
    }
    // Time-averaged part D_nu minus the oscillating part E_nu, each by quadrature when
    // affordable and otherwise from their large-argument forms.
    double D1, D2;
    if (top * a <= budget) {
        const double width = std::numbers::pi / std::max(a, 1.0);
        auto j1 = [&](double y) { return weight(y) * geometric_weight(1, y * a); };
        auto j2 = [&](double y) { return weight(y) * geometric_weight(2, y * a); };
        D1 = quad::integrate_panels(j1, 0.0, top, width, tol).value;
        D2 = quad::integrate_panels(j2, 0.0, top, width, tol).value;
    } else {
        // g(ya) only matters for y < 1/a where h = 2, and int_0^inf g = -pi/4
        const double third = quad::integrate_panels(weight, 0.0, top, 1.0, tol).value / 3.0;
        const double shift = -std::numbers::pi / (2.0 * a);
        D1 = third - shift;
        D2 = third + shift;
    }
    const double r = t / a;
    const double G = r < 1.0 ? -std::numbers::pi / 4.0 * (1.0 - r * r) : 0.0; // int_0^inf cos(rx) g(x) dx
    const double k3 = bose_transform(t) / 3.0;
    const double E1 = k3 - 2.0 / a * G;
    const double E2 = k3 + 2.0 / a * G;
    const double m = std::max(t, a);
    return {D1 - E1, D2 - E2, 10.0 / (m * m), true};
}

inline quad::Tolerance kernel_tolerance() { return {0.0, 1e-11, 24}; }

} // namespace detail

/// Time-independent upper bound (2/3) int_Y^inf C(y) y dy on the cutoff-tail part of f_nu.
inline double cutoff_tail_bound(double y_max, const CutoffSpec& cutoff) {
    if (cutoff.is_sharp()) return 0.0;
    if (!(cutoff.p > 2.0)) throw DomainError("cutoff tail diverges for p <= 2");
    return 2.0 / 3.0 * std::pow(y_max, 2.0 - cutoff.p) / (cutoff.p - 2.0);
}

/// f_nu with coth -> 1 and a sharp cutoff, in closed form.
inline double f_nu_closed_coth_one(double t, double t0, double y_max, int nu) {
    if (nu != 1 && nu != 2) throw DomainError("nu must be 1 or 2");
    if (!(t >= 0.0) || !(t0 > 0.0) || !(y_max > 0.0)) throw DomainError("f_nu_closed_coth_one: need t >= 0, t0 > 0, y_max > 0");
    const auto [f1, f2] = detail::f_sharp_coth_one(t, t0, y_max);
    return nu == 1 ? f1 : f2;
}

namespace detail {

inline BathKernels kernels_quadrature(const KernelQuery& q) {
    BathKernels k;
    k.path = KernelPath::Quadrature;
    const double t = q.t, a = q.t0, Y = q.y_max;
    if (t == 0.0) return k;
    const auto tol = kernel_tolerance();
    const double width = std::numbers::pi / std::max(t, a);
    const bool thermal = q.temperature_mode == TemperatureMode::Thermal;
    auto yweight = [thermal](double y) { return thermal ? y_coth_half(y) : y; };

    auto f_int = [&](int nu) {
        return quad::integrate_panels(
            [&, nu](double y) { return yweight(y) * one_minus_cos(y * t) * geometric_weight(nu, y * a); }, 0.0, Y,
            width, tol);
    };
    auto p_int = [&](int nu) {
        return quad::integrate_panels(
            [&, nu](double y) { return y * x_minus_sin(y * t) * geometric_weight(nu, y * a); }, 0.0, Y, width, tol);
    };
    const auto f1 = f_int(1), f2 = f_int(2), p1 = p_int(1), p2 = p_int(2);
    const auto pm = quad::integrate_panels(
        [&](double y) {
            // w_1 - w_2 = -2 g
            return -2.0 * y * x_minus_sin(y * t) * dipole_kernel(y * a);
        },
        0.0, Y, width, tol);
    k.f1 = f1.value;
    k.f2 = f2.value;
    k.phi1 = p1.value;
    k.phi2 = p2.value;
    k.phi_minus = pm.value;
    k.error_estimate = f1.abs_error + f2.abs_error + p1.abs_error + p2.abs_error + pm.abs_error;

    if (!q.cutoff.is_sharp()) {
        const auto [t1, t2] = f_power_tail(t, a, Y, q.cutoff.p, false);
        k.f1 += t1;
        k.f2 += t2;
        if (thermal && Y < kThermalRange) {
            auto tail = [&](int nu) {
                return quad::integrate_panels(
                    [&, nu](double y) {
                        return q.cutoff.weight(y, Y) * thermal_excess(y) * one_minus_cos(y * t) *
                               geometric_weight(nu, y * a);
                    },
                    Y, kThermalRange, width, tol);
            };
            const auto r1 = tail(1), r2 = tail(2);
            k.f1 += r1.value;
            k.f2 += r2.value;
            k.error_estimate += r1.abs_error + r2.abs_error;
        }
    }
    return k;
}

inline BathKernels kernels_closed(const KernelQuery& q, bool thermal) {
    BathKernels k;
    k.path = thermal ? KernelPath::ClosedFormThermalCorrected : KernelPath::ClosedFormCothOne;
    const double t = q.t, a = q.t0, Y = q.y_max;
    if (t == 0.0) return k;
    auto [f1, f2] = f_sharp_coth_one(t, a, Y);
    if (!q.cutoff.is_sharp()) {
        const auto [t1, t2] = f_power_tail(t, a, Y, q.cutoff.p, false);
        f1 += t1;
        f2 += t2;
    }
    double err = 1e-12 * (std::abs(f1) + std::abs(f2));
    if (thermal) {
        const auto d = thermal_excess_terms(t, a, Y, q.cutoff, q.oscillation_budget, kernel_tolerance());
        f1 += d.d1;
        f2 += d.d2;
        err += d.err;
    }
    const auto ph = phases_closed(t, a, Y);
    k.f1 = f1;
    k.f2 = f2;
    k.phi1 = ph.phi1;
    k.phi2 = ph.phi2;
    k.phi_minus = ph.phi_minus;
    k.error_estimate = err + 1e-12 * (std::abs(ph.phi1) + std::abs(ph.phi2));
    return k;
}

inline BathKernels kernels_long_time(const KernelQuery& q) {
    BathKernels k;
    k.path = KernelPath::LongTimeAsymptote;
    const double t = q.t, a = q.t0, Y = q.y_max;
    if (t == 0.0) return k;
    auto [f1, f2] = f_sharp_long_time(a, Y);
    if (!q.cutoff.is_sharp()) {
        const auto [t1, t2] = f_power_tail(t, a, Y, q.cutoff.p, true);
        f1 += t1;
        f2 += t2;
    }
    if (q.temperature_mode == TemperatureMode::Thermal) {
        // averaged thermal excess: the oscillating part is dropped, as for the coth = 1 bulk
        const auto tol = kernel_tolerance();
        const double top = thermal_upper(Y, q.cutoff);
        auto weight = [&](double y) { return q.cutoff.weight(y, Y) * thermal_excess(y); };
        if (top * a <= q.oscillation_budget) {
            const double width = std::numbers::pi / std::max(a, 1.0);
            f1 += quad::integrate_panels([&](double y) { return weight(y) * geometric_weight(1, y * a); }, 0.0, top,
                                         width, tol).value;
            f2 += quad::integrate_panels([&](double y) { return weight(y) * geometric_weight(2, y * a); }, 0.0, top,
                                         width, tol).value;
        } else {
            const double third = quad::integrate_panels(weight, 0.0, top, 1.0, tol).value / 3.0;
            const double shift = -std::numbers::pi / (2.0 * a);
            f1 += third - shift;
            f2 += third + shift;
        }
    }
    const auto ph = phases_closed(t, a, Y);
    k.f1 = f1;
    k.f2 = f2;
    k.phi1 = ph.phi1;
    k.phi2 = ph.phi2;
    k.phi_minus = ph.phi_minus;
    // the dropped oscillation is bounded by the (2/3) int y |cos yt| scale over one period
    k.error_estimate = Y / t + 1e-12 * (std::abs(f1) + std::abs(f2) + std::abs(ph.phi1) + std::abs(ph.phi2));
    return k;
}

} // namespace detail

/// All four kernels plus phi_minus, with the evaluation path recorded.
inline BathKernels evaluate_kernels(const KernelQuery& q) {
    q.validate();
    const bool thermal = q.temperature_mode == TemperatureMode::Thermal;
    const double load = q.y_max * std::max(q.t, q.t0);
    switch (q.strategy) {
    case Strategy::Quadrature:
        if (load > q.oscillation_budget)
            throw StrategyRefused("quadrature refused: y_max*max(t, t0) = " + std::to_string(load) +
                                  " exceeds the oscillation budget " + std::to_string(q.oscillation_budget) +
                                  "; use the closed_form or long_time strategy");
        return detail::kernels_quadrature(q);
    case Strategy::ClosedFormCothOne:
        return detail::kernels_closed(q, false);
    case Strategy::LongTimeAsymptote:
        return detail::kernels_long_time(q);
    case Strategy::AutoSelect:
        if (load <= q.oscillation_budget) return detail::kernels_quadrature(q);
        return detail::kernels_closed(q, thermal);
    }
    throw ConfigError("kernel_mode", "unknown strategy");
}

inline double f_nu(const KernelQuery& q, int nu) {
    if (nu != 1 && nu != 2) throw DomainError("nu must be 1 or 2");
    const auto k = evaluate_kernels(q);
    return nu == 1 ? k.f1 : k.f2;
}

inline double phi_nu(const KernelQuery& q, int nu) {
    if (nu != 1 && nu != 2) throw DomainError("nu must be 1 or 2");
    const auto k = evaluate_kernels(q);
    return nu == 1 ? k.phi1 : k.phi2;
}

} // namespace bbr
