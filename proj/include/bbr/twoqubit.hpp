// twoqubit.hpp: coupling matrices and the exact elementwise map of the two-dot reduced state

#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "bbr/constants.hpp"
#include "bbr/errors.hpp"
#include "bbr/kernels.hpp"
#include "bbr/linalg.hpp"
#include "bbr/state.hpp"

namespace bbr {

using IntMatrix4 = std::array<std::array<int, 4>, 4>;

struct CouplingMatrices {
    IntMatrix4 S{{{0, 1, 1, 0}, {1, 0, 4, 1}, {1, 4, 0, 1}, {0, 1, 1, 0}}};
    IntMatrix4 C{{{0, 1, 1, 4}, {1, 0, 0, 1}, {1, 0, 0, 1}, {4, 1, 1, 0}}};
    IntMatrix4 S_tilde{{{0, -1, -1, 0}, {1, 0, 0, 1}, {1, 0, 0, 1}, {0, -1, -1, 0}}};

    int C_tilde(int r, int c) const { return -S_tilde[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]; }
    int s(int r, int c) const { return S[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]; }
    int c(int r, int c_) const { return C[static_cast<std::size_t>(r)][static_cast<std::size_t>(c_)]; }
    int s_tilde(int r, int c) const { return S_tilde[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]; }
};

inline const CouplingMatrices kCoupling{};

/// (|0> + |1>) x (|0> + |1>) / 2: every entry 1/4.
inline DensityMatrix4 initial_product_state() {
    Matrix4c m;
    for (auto& v : m.a) v = 0.25;
    return DensityMatrix4::unchecked(m);
}

/// Multiplies entry (s, s') by exp(-D + i P) for a symmetric damping D and antisymmetric phase P.
inline DensityMatrix4 apply_elementwise(const DensityMatrix4& rho0, const std::array<double, 16>& damping,
                                        const std::array<double, 16>& phase) {
    Matrix4c m = rho0.matrix();
    for (std::size_t i = 0; i < 16; ++i) {
        if (damping[i] == 0.0 && phase[i] == 0.0) continue;
        m.a[i] *= std::exp(-damping[i]) * cplx(std::cos(phase[i]), std::sin(phase[i]));
    }
    return DensityMatrix4::unchecked(m);
}

/// rho(t)_{ss'} = exp(-A (f1 C + g f2 S) + i A (phi1 C~ + g phi2 S~))_{ss'} rho(0)_{ss'} with g = gamma.
inline DensityMatrix4 evolve(const DensityMatrix4& rho0, const BathKernels& k, double A, double gamma = 1.0) {
    if (!(A >= 0.0) || !std::isfinite(A)) throw DomainError("evolve: A must be finite and >= 0");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("evolve: gamma must lie in [0, 1]");
    const CouplingMatrices& cm = kCoupling;
    std::array<double, 16> damp{}, phase{};
    // with C~ = -S~ the phase is A C~ (phi1 - gamma phi2); phi_minus carries phi1 - phi2 accurately
    const double phase_weight = A * (k.phi_minus + (1.0 - gamma) * k.phi2);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const auto i = static_cast<std::size_t>(4 * r + c);
            damp[i] = A * (k.f1 * cm.c(r, c) + gamma * k.f2 * cm.s(r, c));
            phase[i] = phase_weight * cm.C_tilde(r, c);
        }
    return apply_elementwise(rho0, damp, phase);
}

/// Long-time map exp(-(alpha0/6pi) v^2 (S + C) + i phi_minus C~). Here phi_minus is the
/// dimensionless A (phi1 - phi2) and the damping equals A y_max^2/6 (S + C).
inline DensityMatrix4 asymptotic_state(double v, double phi_minus, const DensityMatrix4& rho0,
                                       double alpha0 = kCodata2018.alpha0) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("asymptotic_state: v must be finite and >= 0");
    const double rate = alpha0 * v * v / (6.0 * std::numbers::pi);
    const CouplingMatrices& cm = kCoupling;
    std::array<double, 16> damp{}, phase{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const auto i = static_cast<std::size_t>(4 * r + c);
            damp[i] = rate * (cm.s(r, c) + cm.c(r, c));
            phase[i] = phi_minus * cm.C_tilde(r, c);
        }
    return apply_elementwise(rho0, damp, phase);
}

/// v with A y_max^2 = alpha0 v^2 / pi.
inline double v_from_A(double A, double y_max, double alpha0 = kCodata2018.alpha0) {
    return std::sqrt(std::numbers::pi * A / alpha0) * y_max;
}

struct AsymptoticCheckParams {
    double t = 0.0;
    double t0 = 0.0;
    double y_max = 0.0;
    double A = 0.0;
    double gamma = 1.0;
    double alpha0 = kCodata2018.alpha0;
    TemperatureMode temperature_mode = TemperatureMode::Thermal;
};

struct AsymptoticCheckReport {
    double max_abs_difference = 0.0;
    double v = 0.0;
    double phi_minus = 0.0; // A (phi1 - phi2)
    KernelPath path = KernelPath::Quadrature;
};

inline constexpr double kRegimeRatio = 10.0;

/// Compares evolve on the product state with the long-time map at the same v and phase.
/// Requires t >= 10 t0, t0 >= 10 and gamma = 1.
inline AsymptoticCheckReport consistency_check_asymptotic(const AsymptoticCheckParams& p) {
    if (!(p.t > 0.0)) throw PreconditionError("asymptotic check: t must be > 0");
    if (p.gamma != 1.0) throw PreconditionError("asymptotic check: the long-time form assumes gamma = 1");
    if (!(p.t0 >= kRegimeRatio)) throw PreconditionError("asymptotic check: needs t0 >> 1");
    if (!(p.t >= kRegimeRatio * p.t0)) throw PreconditionError("asymptotic check: needs t >> t0");
    KernelQuery q;
    q.t = p.t;
    q.t0 = p.t0;
    q.y_max = p.y_max;
    q.temperature_mode = p.temperature_mode;
    const BathKernels k = evaluate_kernels(q);
    AsymptoticCheckReport rep;
    rep.path = k.path;
    rep.v = v_from_A(p.A, p.y_max, p.alpha0);
    rep.phi_minus = p.A * k.phi_minus;
    const DensityMatrix4 rho0 = initial_product_state();
    const Matrix4c a = evolve(rho0, k, p.A, 1.0).matrix();
    const Matrix4c b = asymptotic_state(rep.v, rep.phi_minus, rho0, p.alpha0).matrix();
    rep.max_abs_difference = max_abs(a - b);
    return rep;
}

} // namespace bbr
