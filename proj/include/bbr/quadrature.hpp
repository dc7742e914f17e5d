// quadrature.hpp: Gauss-Kronrod panels for smooth and oscillatory integrands

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace bbr::quad {

/// Neumaier-compensated running sum; the result does not depend on how many
/// small terms were folded in before a large one.
class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    void add(const NeumaierSum& other) {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct RuleResult {
    double value;
    double abs_error;
    double abs_mass; // integral of |f|
};

namespace detail {
// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15 abscissae and weights).
inline constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
} // namespace detail

/// One application of the 15-point Gauss-Kronrod rule on [a, b] with the QUADPACK error model.
template <class F>
RuleResult gk15(F&& f, double a, double b) {
    using namespace detail;
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    std::array<double, 7> fv1{}, fv2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += kWgk[j] * (f1 + f2);
        resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    const double reskh = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    const double ah = std::abs(half);
    double err = std::abs((resk - resg) * half);
    resasc *= ah;
    resabs *= ah;
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return {resk * half, err, resabs};
}

struct Tolerance {
    double abs = 1e-10;
    double rel = 1e-10;
    int max_depth = 24;
};

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    std::size_t panels = 0;
    std::size_t evaluations = 0;
};

namespace detail {
template <class F>
void adapt(F& f, double a, double b, double abs_share, const Tolerance& tol, int depth, NeumaierSum& sum,
           NeumaierSum& err, Result& out) {
    const RuleResult r = gk15(f, a, b);
    out.evaluations += 15;
    // never ask for less than the rule's own rounding floor
    const double floor = 100.0 * std::numeric_limits<double>::epsilon() * r.abs_mass;
    const double target = std::max({abs_share, tol.rel * r.abs_mass, floor});
    if (r.abs_error <= target || depth >= tol.max_depth) {
        sum.add(r.value);
        err.add(r.abs_error);
        return;
    }
    const double mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * abs_share, tol, depth + 1, sum, err, out);
    adapt(f, mid, b, 0.5 * abs_share, tol, depth + 1, sum, err, out);
}
} // namespace detail

/// Integrates f over [a, b] split into equal panels no wider than `panel_width`; each panel is
/// refined by bisection until its Kronrod error meets the tolerance. For oscillatory integrands
/// pass the half-period of the fastest oscillation as the panel width.
template <class F>
Result integrate_panels(F&& f, double a, double b, double panel_width, const Tolerance& tol = {}) {
    Result out;
    if (!(b > a)) return out;
    const double span = b - a;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / panel_width)));
    const double w = span / static_cast<double>(n);
    const double abs_share = tol.abs / static_cast<double>(n);
    NeumaierSum sum, err;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = a + w * static_cast<double>(i);
        const double hi = (i + 1 == n) ? b : a + w * static_cast<double>(i + 1);
        detail::adapt(f, lo, hi, abs_share, tol, 0, sum, err, out);
    }
    out.panels = n;
    out.value = sum.value();
    out.abs_error = err.value();
    return out;
}

} // namespace bbr::quad
