// scan.hpp: deterministic parallel parameter sweeps, onset analysis and the t1 law

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bbr/constants.hpp"
#include "bbr/entanglement.hpp"
#include "bbr/errors.hpp"
#include "bbr/kernels.hpp"
#include "bbr/params.hpp"
#include "bbr/twoqubit.hpp"

namespace bbr {

enum class AxisScale { Linear, Log10 };

inline std::string to_string(AxisScale s) { return s == AxisScale::Linear ? "linear" : "log10"; }

/// n evenly spaced coordinates from min to max inclusive. For Log10 axes the coordinate is the
/// exponent and physical() returns 10^coordinate.
struct AxisSpec {
    std::string name;
    AxisScale scale = AxisScale::Linear;
    double min = 0.0;
    double max = 1.0;
    int n = 100;

    double coordinate(int i) const {
        if (n == 1) return min;
        return min + (max - min) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    double physical(int i) const {
        const double c = coordinate(i);
        return scale == AxisScale::Log10 ? std::pow(10.0, c) : c;
    }
    void validate(const std::string& key) const {
        if (n < 1) throw ConfigError(key + "_n", "axis needs at least one point");
        if (!std::isfinite(min) || !std::isfinite(max)) throw ConfigError(key + "_min", "axis bounds must be finite");
        if (n > 1 && !(max > min)) throw ConfigError(key + "_max", "axis max must exceed min");
    }
};

enum class CellSource : std::uint8_t {
    Quadrature,
    ClosedFormCothOne,
    ClosedFormThermalCorrected,
    LongTimeAsymptote,
    AsymptoticMap,
    Failed,
};

inline std::string to_string(CellSource s) {
    switch (s) {
    case CellSource::Quadrature: return "quadrature";
    case CellSource::ClosedFormCothOne: return "closed_form";
    case CellSource::ClosedFormThermalCorrected: return "closed_form_thermal";
    case CellSource::LongTimeAsymptote: return "long_time";
    case CellSource::AsymptoticMap: return "asymptotic_map";
    case CellSource::Failed: return "failed";
    }
    return "unknown";
}

inline CellSource source_of(KernelPath p) {
    switch (p) {
    case KernelPath::Quadrature: return CellSource::Quadrature;
    case KernelPath::ClosedFormCothOne: return CellSource::ClosedFormCothOne;
    case KernelPath::ClosedFormThermalCorrected: return CellSource::ClosedFormThermalCorrected;
    case KernelPath::LongTimeAsymptote: return CellSource::LongTimeAsymptote;
    }
    return CellSource::Failed;
}

struct CellResult {
    double value = 0.0;
    CellSource source = CellSource::Failed;
    std::string diagnostic; // empty unless the cell failed
};

struct ScanGrid {
    AxisSpec x_axis, y_axis;
    std::vector<double> values;          // row-major, n_y rows of n_x
    std::vector<CellSource> provenance;  // per cell
    PhysicalParams params;
    std::vector<std::string> diagnostics; // "ix,iy: message" for failed cells

    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy * x_axis.n + ix)]; }
    CellSource source(int ix, int iy) const { return provenance[static_cast<std::size_t>(iy * x_axis.n + ix)]; }

    std::map<std::string, std::size_t> histogram() const {
        std::map<std::string, std::size_t> h;
        for (auto s : provenance) ++h[to_string(s)];
        return h;
    }
};

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Evaluates cell(ix, iy) on every grid point. Results go to pre-allocated slots, so the grid
/// does not depend on the worker count or on scheduling.
inline ScanGrid run_grid(const AxisSpec& x, const AxisSpec& y, const std::function<CellResult(int, int)>& cell,
                         unsigned threads = 1) {
    x.validate("x");
    y.validate("y");
    ScanGrid g;
    g.x_axis = x;
    g.y_axis = y;
    const std::size_t total = static_cast<std::size_t>(x.n) * static_cast<std::size_t>(y.n);
    g.values.assign(total, std::numeric_limits<double>::quiet_NaN());
    g.provenance.assign(total, CellSource::Failed);
    std::vector<std::string> diag(total);
    auto work = [&](std::size_t i) {
        const int ix = static_cast<int>(i % static_cast<std::size_t>(x.n));
        const int iy = static_cast<int>(i / static_cast<std::size_t>(x.n));
        CellResult r;
        try {
            r = cell(ix, iy);
        } catch (const std::exception& e) {
            r = {std::numeric_limits<double>::quiet_NaN(), CellSource::Failed, e.what()};
        }
        g.values[i] = r.value;
        g.provenance[i] = r.source;
        diag[i] = std::move(r.diagnostic);
    };
    const unsigned n = std::max(1u, threads);
    if (n == 1) {
        for (std::size_t i = 0; i < total; ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < total; i = next++) work(i);
            });
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = 0; i < total; ++i)
        if (!diag[i].empty())
            g.diagnostics.push_back(std::to_string(i % static_cast<std::size_t>(x.n)) + "," +
                                    std::to_string(i / static_cast<std::size_t>(x.n)) + ": " + diag[i]);
    return g;
}

inline constexpr double kScanOscillationBudget = 1e4;

/// Everything a finite-temperature cell needs besides (t0, t, gamma).
struct ScanContext {
    double y_max = 0.0;
    double A = 0.0;
    CutoffSpec cutoff{};
    double oscillation_budget = kScanOscillationBudget;

    static ScanContext from(const PhysicalParams& p, double budget = kScanOscillationBudget,
                            const PhysicalConstants& k = kCodata2018) {
        if (p.zero_temperature()) throw ConfigError("temperature_K", "time-resolved scans need T > 0");
        const auto d = derive_dimensionless(p, k);
        return {d.y_max, d.A, p.cutoff, budget};
    }
};

/// Kernels at (t, t0) in units of tau. A refused strategy falls back to the long-time asymptote.
inline BathKernels scan_kernels(const ScanContext& c, double t0, double t) {
    KernelQuery q;
    q.t = t;
    q.t0 = t0;
    q.y_max = c.y_max;
    q.cutoff = c.cutoff;
    q.temperature_mode = TemperatureMode::Thermal;
    q.oscillation_budget = c.oscillation_budget;
    try {
        return evaluate_kernels(q);
    } catch (const StrategyRefused&) {
        q.strategy = Strategy::LongTimeAsymptote;
        return evaluate_kernels(q);
    }
}

/// evaluate_kernels -> evolve -> entanglement_of_formation for the product initial state.
inline CellResult eof_cell(const ScanContext& c, double t0, double t, double gamma) {
    const BathKernels k = scan_kernels(c, t0, t);
    const DensityMatrix4 r = evolve(initial_product_state(), k, c.A, gamma);
    return {entanglement_of_formation(r), source_of(k.path), {}};
}

struct Fig1Spec {
    AxisSpec x{"log10_t0_over_tau", AxisScale::Log10, 0.0, 5.0, 100};
    AxisSpec y{"log10_t_over_tau", AxisScale::Log10, 0.0, 16.0, 100};
    double oscillation_budget = kScanOscillationBudget;
};

inline ScanGrid scan_fig1(const PhysicalParams& p, const Fig1Spec& s = {}, unsigned threads = 1) {
    const ScanContext c = ScanContext::from(p, s.oscillation_budget);
    auto g = run_grid(s.x, s.y, [&](int ix, int iy) { return eof_cell(c, s.x.physical(ix), s.y.physical(iy), 1.0); },
                      threads);
    g.params = p;
    return g;
}

struct Fig2Spec {
    AxisSpec x{"v", AxisScale::Linear, 0.0, 100.0, 100};
    AxisSpec y{"phi_minus", AxisScale::Linear, 0.0, std::numbers::pi, 100};
};

inline ScanGrid scan_fig2(double alpha0 = kCodata2018.alpha0, const Fig2Spec& s = {}, unsigned threads = 1) {
    auto g = run_grid(
        s.x, s.y,
        [&](int ix, int iy) {
            const auto r = asymptotic_state(s.x.physical(ix), s.y.physical(iy), initial_product_state(), alpha0);
            return CellResult{entanglement_of_formation(r), CellSource::AsymptoticMap, {}};
        },
        threads);
    return g;
}

struct Fig3Spec {
    double t0_over_tau = 1e6;
    AxisSpec x{"gamma", AxisScale::Linear, 0.0, 1.0, 100};
    AxisSpec y{"log10_t_over_tau", AxisScale::Log10, 0.0, 8.0, 100};
    double oscillation_budget = kScanOscillationBudget;
};

inline ScanGrid scan_fig3(const PhysicalParams& p, const Fig3Spec& s = {}, unsigned threads = 1) {
    if (!(s.t0_over_tau > 0.0)) throw ConfigError("t0_over_tau", "must be > 0");
    if (s.x.min < 0.0 || s.x.max > 1.0) throw ConfigError("gamma", "gamma axis must lie in [0, 1]");
    const ScanContext c = ScanContext::from(p, s.oscillation_budget);
    auto g = run_grid(
        s.x, s.y, [&](int ix, int iy) { return eof_cell(c, s.t0_over_tau, s.y.physical(iy), s.x.physical(ix)); },
        threads);
    g.params = p;
    g.params.separation_m = s.t0_over_tau * thermal_time(p.temperature_K) * kCodata2018.c0;
    return g;
}

/// First y coordinate (interpolated linearly in the axis coordinate) where column ix reaches the threshold.
inline std::optional<double> onset_coordinate(const ScanGrid& g, int ix, double threshold) {
    double prev = 0.0;
    for (int iy = 0; iy < g.y_axis.n; ++iy) {
        const double v = g.at(ix, iy);
        if (std::isnan(v)) continue;
        if (v >= threshold) {
            if (iy == 0) return g.y_axis.coordinate(0);
            const double y0 = g.y_axis.coordinate(iy - 1), y1 = g.y_axis.coordinate(iy);
            const double w = (threshold - prev) / (v - prev);
            return y0 + w * (y1 - y0);
        }
        prev = v;
    }
    return std::nullopt;
}

struct OnsetFit {
    std::vector<double> x;       // column coordinates with an onset
    std::vector<double> onset;   // onset coordinates
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
};

/// Fits onset = slope * x + intercept over the columns whose onset lies strictly inside the y range.
inline OnsetFit fit_onset(const ScanGrid& g, double threshold = 0.01) {
    OnsetFit f;
    for (int ix = 0; ix < g.x_axis.n; ++ix) {
        const auto o = onset_coordinate(g, ix, threshold);
        if (!o || *o <= g.y_axis.coordinate(0)) continue;
        f.x.push_back(g.x_axis.coordinate(ix));
        f.onset.push_back(*o);
    }
    if (f.x.size() < 2) throw SearchError("onset fit needs at least two columns with an interior onset");
    const double n = static_cast<double>(f.x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        sx += f.x[i];
        sy += f.onset[i];
    }
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        sxx += (f.x[i] - sx / n) * (f.x[i] - sx / n);
        sxy += (f.x[i] - sx / n) * (f.onset[i] - sy / n);
    }
    f.slope = sxy / sxx;
    f.intercept = sy / n - f.slope * sx / n;
    return f;
}

/// t1 = (pi / (2 alpha0)) (R^2 / d^2) (R / c0), in seconds.
inline double predict_t1(const PhysicalParams& p, const PhysicalConstants& k = kCodata2018) {
    if (!(p.separation_m > 0.0) || !(p.dipole_m > 0.0)) throw DomainError("predict_t1 needs R > 0 and d > 0");
    const double R = p.separation_m, d = p.dipole_m;
    return std::numbers::pi / (2.0 * k.alpha0) * (R * R) / (d * d) * R / k.c0;
}

/// Separation R with predict_t1 = t1 for dipole length d.
inline double separation_for_t1(double t1_seconds, double dipole_m, const PhysicalConstants& k = kCodata2018) {
    if (!(t1_seconds > 0.0) || !(dipole_m > 0.0)) throw DomainError("separation_for_t1 needs t1 > 0 and d > 0");
    return std::cbrt(2.0 * k.alpha0 * dipole_m * dipole_m * k.c0 * t1_seconds / std::numbers::pi);
}

struct T1SearchSpec {
    double log10_min_over_t0 = 0.0;   // window start, log10(t/t0)
    double log10_max_over_t0 = 40.0;  // window end
    int points_per_decade = 20;
    double min_peak = 0.1;            // smaller local maxima are ripple, not the first maximum
    double log10_tolerance = 1e-7;
    double oscillation_budget = kScanOscillationBudget;
};

struct T1Result {
    double t_over_tau = 0.0;
    double t_seconds = 0.0;
    double eof = 0.0;
    double y_max_pinned = 0.0;
    int evaluations = 0;
};

inline constexpr double kT1RegimeMin = 10.0; // t0/tau >> 1

/// Locates the first local maximum of EoF(t) at the separation in p: coarse log-grid bracketing,
/// then golden-section refinement in log t. y_max is pinned so that y_max t0 is a multiple of pi.
inline T1Result find_t1_numeric(const PhysicalParams& p, const T1SearchSpec& s = {},
                                const PhysicalConstants& k = kCodata2018) {
    ScanContext c = ScanContext::from(p, s.oscillation_budget, k);
    const auto d = derive_dimensionless(p, k);
    const double t0 = *d.t0_over_tau;
    if (!(t0 >= kT1RegimeMin)) throw PreconditionError("find_t1 needs t0/tau >> 1 (at least 10)");
    if (!(s.log10_max_over_t0 > s.log10_min_over_t0) || s.points_per_decade < 2)
        throw ConfigError("search_window", "invalid search window");
    c.y_max = std::max(1.0, std::round(c.y_max * t0 / std::numbers::pi)) * std::numbers::pi / t0;

    T1Result res;
    res.y_max_pinned = c.y_max;
    auto eof_at = [&](double log10_t) {
        ++res.evaluations;
        return eof_cell(c, t0, std::pow(10.0, log10_t), p.gamma).value;
    };
    const double lo = std::log10(t0) + s.log10_min_over_t0;
    const double hi = std::log10(t0) + s.log10_max_over_t0;
    const int n = static_cast<int>(std::ceil((hi - lo) * s.points_per_decade)) + 1;
    const double h = (hi - lo) / (n - 1);
    double e_prev2 = eof_at(lo), e_prev = eof_at(lo + h);
    for (int i = 2; i < n; ++i) {
        const double e = eof_at(lo + i * h);
        if (e_prev > e_prev2 && e_prev >= e && e_prev >= s.min_peak) {
            double a = lo + (i - 2) * h, b = lo + i * h;
            const double g = (std::sqrt(5.0) - 1.0) / 2.0;
            double x1 = b - g * (b - a), x2 = a + g * (b - a);
            double f1 = eof_at(x1), f2 = eof_at(x2);
            while (b - a > s.log10_tolerance) {
                if (f1 < f2) {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + g * (b - a);
                    f2 = eof_at(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - g * (b - a);
                    f1 = eof_at(x1);
                }
            }
            const double xm = 0.5 * (a + b);
            res.t_over_tau = std::pow(10.0, xm);
            res.t_seconds = res.t_over_tau * *d.tau;
            res.eof = eof_at(xm);
            return res;
        }
        e_prev2 = e_prev;
        e_prev = e;
    }
    throw SearchError("no maximum of EoF(t) found in the search window");
}

} // namespace bbr
