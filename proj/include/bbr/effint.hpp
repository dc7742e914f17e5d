// effint.hpp: bath-induced sigma_z sigma_z coupling by explicit transverse mode summation

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include "bbr/constants.hpp"
#include "bbr/errors.hpp"
#include "bbr/quadrature.hpp"

namespace bbr {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Two orthonormal polarization vectors transverse to k: Gram-Schmidt of x-hat against k-hat,
/// falling back to y-hat when k is (nearly) parallel to x-hat.
struct PolarizationPair {
    Vec3 e1, e2;
};

inline PolarizationPair polarization_basis(const Vec3& k) {
    const double kn = norm(k);
    if (!(kn > 0.0)) throw DomainError("polarization_basis needs k != 0");
    const Vec3 kh = (1.0 / kn) * k;
    Vec3 ref{1.0, 0.0, 0.0};
    if (std::abs(kh.x) > 0.9) ref = {0.0, 1.0, 0.0};
    Vec3 e1 = ref - dot(ref, kh) * kh;
    e1 = (1.0 / norm(e1)) * e1;
    return {e1, cross(kh, e1)};
}

struct ModeSumConfig {
    double L = 0.0;          // box side, m
    int n_max = 0;           // modes with |n| <= n_max are summed (spherical cutoff)
    Vec3 R_vec;              // separation, m
    Vec3 u1{0.0, 0.0, 1.0};  // dipole orientations
    Vec3 u2{0.0, 0.0, 1.0};
    double d = 0.0;          // dipole length, m
    double regulator_eta = 0.0; // s

    void validate() const {
        if (!(L > 0.0) || !std::isfinite(L)) throw GeometryError("box side L must be > 0");
        if (n_max < 1) throw GeometryError("n_max must be >= 1");
        if (!(d > 0.0)) throw GeometryError("dipole length must be > 0");
        if (!(regulator_eta >= 0.0)) throw GeometryError("regulator eta must be >= 0");
        if (std::abs(norm(u1) - 1.0) > 1e-12 || std::abs(norm(u2) - 1.0) > 1e-12)
            throw GeometryError("dipole orientations must be unit vectors");
        const double r = norm(R_vec);
        if (!(r > 0.0)) throw GeometryError("separation must be nonzero");
        if (!(r < 0.5 * L)) throw GeometryError("separation must stay below L/2 so that images stay distant");
    }
};

/// (d1.d2 - 3 (d1.r)(d2.r)) / (4 pi eps0 R^3) with d_i = (e d / 2) u_i; the sigma_z1 sigma_z2 coefficient in J.
inline double analytic_dipole_coefficient(const Vec3& u1, const Vec3& u2, const Vec3& R_vec, double d,
                                          const PhysicalConstants& k = kCodata2018) {
    const double r = norm(R_vec);
    if (!(r > 0.0)) throw GeometryError("dipole coefficient is singular at zero separation");
    const Vec3 rh = (1.0 / r) * R_vec;
    const double q = 0.5 * k.e_charge * d;
    return q * q * (dot(u1, u2) - 3.0 * dot(u1, rh) * dot(u2, rh)) / (4.0 * std::numbers::pi * k.eps0 * r * r * r);
}

/// Symmetric 3x3 tensor T with coefficient = (e d/2)^2 u1 . T . u2.
struct CouplingTensor {
    std::array<double, 9> t{};

    double operator()(int i, int j) const { return t[static_cast<std::size_t>(3 * i + j)]; }
    double contract(const Vec3& a, const Vec3& b) const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s += a[i] * (*this)(i, j) * b[j];
        return s;
    }
};

struct ModeSumResult {
    std::vector<double> etas;              // regulator times, s
    std::vector<CouplingTensor> tensors;   // one per eta
    std::size_t modes = 0;                 // summed wave vectors, k = 0 included
    double truncation_weight = 0.0;        // exp(-c0 k_max eta_min): regulator left at the cutoff sphere
};

inline constexpr double kTruncationWarning = 1e-6;

namespace detail {

struct ShardSums {
    // per level: S0 = sum w, M_ab = sum w n_a n_b / |n|^2 (a <= b), w = cos(k.R) exp(-c0 |k| eta)
    std::vector<std::array<quad::NeumaierSum, 7>> level;
    std::size_t modes = 0;
};

// Half-space lattice sum (k and -k give equal terms) for regulators eta_base * 2^j, j < levels.
inline ModeSumResult lattice_sum(double L, int n_max, const Vec3& R, double eta_base, int levels, unsigned threads,
                                 const PhysicalConstants& k) {
    const double dk = 2.0 * std::numbers::pi / L;
    const int N = n_max;
    std::vector<std::complex<double>> ex(2 * N + 1), ey(2 * N + 1), ez(2 * N + 1);
    for (int n = -N; n <= N; ++n) {
        const auto i = static_cast<std::size_t>(n + N);
        ex[i] = std::polar(1.0, dk * n * R.x);
        ey[i] = std::polar(1.0, dk * n * R.y);
        ez[i] = std::polar(1.0, dk * n * R.z);
    }
    const double ceta = k.c0 * eta_base * dk; // exponent per unit |n|
    const long long n2max = static_cast<long long>(N) * N;
    const auto nl = static_cast<std::size_t>(levels);

    std::vector<ShardSums> shards(static_cast<std::size_t>(N + 1));
    auto work = [&](int nz) {
        ShardSums& sh = shards[static_cast<std::size_t>(nz)];
        sh.level.assign(nl, {});
        const long long rz = n2max - static_cast<long long>(nz) * nz;
        const int ymax = static_cast<int>(std::floor(std::sqrt(static_cast<double>(rz))));
        std::vector<double> acc(7 * nl);
        for (int ny = (nz == 0 ? 0 : -ymax); ny <= ymax; ++ny) {
            const long long ry = rz - static_cast<long long>(ny) * ny;
            const int xmax = static_cast<int>(std::floor(std::sqrt(static_cast<double>(ry))));
            const int xmin = (nz == 0 && ny == 0) ? 1 : -xmax;
            if (xmin > xmax) continue;
            const std::complex<double> ya = ey[static_cast<std::size_t>(ny + N)], za = ez[static_cast<std::size_t>(nz + N)];
            const double row_re = ya.real() * za.real() - ya.imag() * za.imag();
            const double row_im = ya.real() * za.imag() + ya.imag() * za.real();
            std::fill(acc.begin(), acc.end(), 0.0);
            const double fy = ny, fz = nz;
            for (int nx = xmin; nx <= xmax; ++nx) {
                const double fx = nx;
                const double nn = fx * fx + fy * fy + fz * fz;
                const double inv = 1.0 / nn;
                const std::complex<double> xa = ex[static_cast<std::size_t>(nx + N)];
                const double c = row_re * xa.real() - row_im * xa.imag(); // cos(k.R)
                double e = std::exp(-ceta * std::sqrt(nn));
                for (std::size_t j = 0; j < nl; ++j) {
                    const double w = c * e;
                    const double wi = w * inv;
                    double* a = &acc[7 * j];
                    a[0] += w;
                    a[1] += wi * fx * fx;
                    a[2] += wi * fx * fy;
                    a[3] += wi * fx * fz;
                    a[4] += wi * fy * fy;
                    a[5] += wi * fy * fz;
                    a[6] += wi * fz * fz;
                    e *= e;
                }
                ++sh.modes;
            }
            for (std::size_t j = 0; j < nl; ++j)
                for (std::size_t c = 0; c < 7; ++c) sh.level[j][c].add(acc[7 * j + c]);
        }
    };

    const unsigned nthreads = std::max(1u, threads);
    if (nthreads == 1) {
        for (int nz = 0; nz <= N; ++nz) work(nz);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (int nz = next++; nz <= N; nz = next++) work(nz);
            });
        for (auto& th : pool) th.join();
    }

    ModeSumResult out;
    out.modes = 1;
    const double V = L * L * L;
    const double pref = -1.0 / (k.eps0 * V);
    for (std::size_t j = 0; j < nl; ++j) {
        std::array<quad::NeumaierSum, 7> tot;
        for (const auto& sh : shards)
            for (std::size_t c = 0; c < 7; ++c) tot[c].add(sh.level[j][c]);
        std::array<double, 7> s{};
        for (std::size_t c = 0; c < 7; ++c) s[c] = 2.0 * tot[c].value();
        // k = 0 cell: the cubic average of the projector, (2/3) delta_ij
        const std::array<double, 9> m{s[1], s[2], s[3], s[2], s[4], s[5], s[3], s[5], s[6]};
        CouplingTensor T;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const double delta = a == b ? 1.0 : 0.0;
                T.t[static_cast<std::size_t>(3 * a + b)] =
                    pref * (delta * (s[0] + 2.0 / 3.0) - m[static_cast<std::size_t>(3 * a + b)]);
            }
        out.etas.push_back(eta_base * std::ldexp(1.0, static_cast<int>(j)));
        out.tensors.push_back(T);
    }
    for (const auto& sh : shards) out.modes += 2 * sh.modes;
    out.truncation_weight = std::exp(-ceta * N);
    return out;
}

} // namespace detail

/// sigma_z1 sigma_z2 coefficient -sum_{k,alpha} (hbar g1 g2 / omega_k) 2 cos(k.R) exp(-omega_k eta), in J.
/// The polarization sum is the transverse projector delta_ij - k_i k_j / k^2, which any basis from
/// polarization_basis reproduces. The k = 0 cell enters with its cubic average (2/3) delta_ij.
struct ModeSumCoefficient {
    double value = 0.0;
    std::size_t modes = 0;
    double truncation_weight = 0.0;
    bool truncation_warning = false; // n_max too small for the regulator
};

inline ModeSumCoefficient mode_sum_coefficient(const ModeSumConfig& cfg, unsigned threads = 1,
                                               const PhysicalConstants& k = kCodata2018) {
    cfg.validate();
    const auto r = detail::lattice_sum(cfg.L, cfg.n_max, cfg.R_vec, cfg.regulator_eta, 1, threads, k);
    const double q = 0.5 * k.e_charge * cfg.d;
    ModeSumCoefficient out;
    out.value = q * q * r.tensors[0].contract(cfg.u1, cfg.u2);
    out.modes = r.modes;
    out.truncation_weight = r.truncation_weight;
    out.truncation_warning = r.truncation_weight > kTruncationWarning;
    return out;
}

/// Regulators {4, 2, 1} x eta and the Richardson value (8 J(eta) - 6 J(2 eta) + J(4 eta)) / 3,
/// which removes the O(eta) and O(eta^2) terms.
struct EtaLadder {
    std::array<double, 3> eta{};         // descending
    std::array<double, 3> coefficient{}; // J at each eta
    double extrapolated = 0.0;
    std::array<double, 3> residual{};    // |J(eta_i) - extrapolated|
    bool residual_decreasing = false;
};

inline double richardson_eta(double j1, double j2, double j4) { return (8.0 * j1 - 6.0 * j2 + j4) / 3.0; }

inline EtaLadder make_ladder(const std::array<double, 3>& etas_desc, const std::array<double, 3>& j_desc) {
    EtaLadder l;
    l.eta = etas_desc;
    l.coefficient = j_desc;
    l.extrapolated = richardson_eta(j_desc[2], j_desc[1], j_desc[0]);
    for (std::size_t i = 0; i < 3; ++i) l.residual[i] = std::abs(j_desc[i] - l.extrapolated);
    l.residual_decreasing = l.residual[0] > l.residual[1] && l.residual[1] > l.residual[2];
    return l;
}

/// Smallest regulator of the default ladder, (R/c0)/50.
inline double default_eta(double R, const PhysicalConstants& k = kCodata2018) { return R / (50.0 * k.c0); }

inline constexpr double kDefaultBoxRatio = 5.0;        // L / R
inline constexpr double kRegulatorDecades = 16.0;      // c0 k_max eta_min

/// Box L = 5 R and n_max such that c0 k_max eta_min = 16.
inline ModeSumConfig default_mode_sum_config(const Vec3& R_vec, const Vec3& u1, const Vec3& u2, double d,
                                             double box_ratio = kDefaultBoxRatio,
                                             const PhysicalConstants& k = kCodata2018) {
    ModeSumConfig cfg;
    const double R = norm(R_vec);
    cfg.L = box_ratio * R;
    cfg.R_vec = R_vec;
    cfg.u1 = u1;
    cfg.u2 = u2;
    cfg.d = d;
    cfg.regulator_eta = default_eta(R, k);
    const double kmax = kRegulatorDecades / (k.c0 * cfg.regulator_eta);
    cfg.n_max = static_cast<int>(std::ceil(kmax * cfg.L / (2.0 * std::numbers::pi)));
    return cfg;
}

/// Evaluates the ladder {4, 2, 1} x cfg.regulator_eta for several orientation pairs in one lattice pass.
struct LadderSet {
    std::vector<EtaLadder> ladders; // one per orientation pair
    std::size_t modes = 0;
    double truncation_weight = 0.0;
};

inline LadderSet extrapolate_coefficients(const ModeSumConfig& cfg, const std::vector<std::pair<Vec3, Vec3>>& orientations,
                                          unsigned threads = 1, const PhysicalConstants& k = kCodata2018) {
    cfg.validate();
    if (!(cfg.regulator_eta > 0.0)) throw GeometryError("extrapolation needs a positive regulator");
    for (const auto& [a, b] : orientations)
        if (std::abs(norm(a) - 1.0) > 1e-12 || std::abs(norm(b) - 1.0) > 1e-12)
            throw GeometryError("dipole orientations must be unit vectors");
    const auto r = detail::lattice_sum(cfg.L, cfg.n_max, cfg.R_vec, cfg.regulator_eta, 3, threads, k);
    const double q = 0.5 * k.e_charge * cfg.d;
    LadderSet out;
    out.modes = r.modes;
    out.truncation_weight = r.truncation_weight;
    for (const auto& [a, b] : orientations) {
        std::array<double, 3> j{}, e{};
        for (std::size_t i = 0; i < 3; ++i) {
            j[i] = q * q * r.tensors[2 - i].contract(a, b);
            e[i] = r.etas[2 - i];
        }
        out.ladders.push_back(make_ladder(e, j));
    }
    return out;
}

inline EtaLadder extrapolate_coefficient(const ModeSumConfig& cfg, unsigned threads = 1,
                                         const PhysicalConstants& k = kCodata2018) {
    return extrapolate_coefficients(cfg, {{cfg.u1, cfg.u2}}, threads, k).ladders.front();
}

struct ConvergenceRow {
    double L = 0.0;
    int n_max = 0;
    double eta = 0.0; // 0 marks the extrapolated value
    double R = 0.0;
    double coefficient = 0.0;
    double analytic = 0.0;
    double rel_err = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::optional<double> slope;     // d log|J| / d log R over the extrapolated rows
    std::optional<double> intercept;
};

/// Least-squares line through (x, y); returns {slope, intercept}.
inline std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("line fit needs at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw DomainError("line fit needs distinct abscissae");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

/// Runs the eta ladder for every configuration and fits log|J| against log R when R varies.
inline ConvergenceTable convergence_study(const std::vector<ModeSumConfig>& configs, unsigned threads = 1,
                                          const PhysicalConstants& k = kCodata2018) {
    ConvergenceTable table;
    std::vector<double> lx, ly;
    for (const auto& cfg : configs) {
        const EtaLadder l = extrapolate_coefficient(cfg, threads, k);
        const double R = norm(cfg.R_vec);
        const double an = analytic_dipole_coefficient(cfg.u1, cfg.u2, cfg.R_vec, cfg.d, k);
        auto row = [&](double eta, double j) {
            ConvergenceRow r{cfg.L, cfg.n_max, eta, R, j, an, an != 0.0 ? (j - an) / std::abs(an) : std::numeric_limits<double>::quiet_NaN()};
            table.rows.push_back(r);
        };
        for (std::size_t i = 0; i < 3; ++i) row(l.eta[i], l.coefficient[i]);
        row(0.0, l.extrapolated);
        if (l.extrapolated != 0.0) {
            lx.push_back(std::log10(R));
            ly.push_back(std::log10(std::abs(l.extrapolated)));
        }
    }
    if (lx.size() >= 2 && *std::max_element(lx.begin(), lx.end()) > *std::min_element(lx.begin(), lx.end())) {
        const auto [s, b] = fit_line(lx, ly);
        table.slope = s;
        table.intercept = b;
    }
    return table;
}

} // namespace bbr
