// params.hpp: physical parameters and the dimensionless quantities derived from them

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "bbr/constants.hpp"
#include "bbr/errors.hpp"

namespace bbr {

enum class CutoffKind { Sharp, PowerLaw };

/// Spectral cutoff applied to the decoherence integrals above y_max.
///
/// Below y_max the weight is 1. Above it, Sharp drops to 0 and PowerLaw continues as y^-p
/// (dimensionless y, so the weight stays in [0, 1] for y_max >= 1). The tail then contributes
/// at most (2/3) y_max^(2-p) / (p-2) to f_nu, negligible next to the y_max^2 bulk.
struct CutoffSpec {
    CutoffKind kind = CutoffKind::Sharp;
    double p = 0.0;

    static constexpr CutoffSpec sharp() { return {}; }
    static constexpr CutoffSpec power_law(double exponent) { return {CutoffKind::PowerLaw, exponent}; }

    bool is_sharp() const { return kind == CutoffKind::Sharp; }

    void validate() const {
        if (kind == CutoffKind::PowerLaw && !(p > 2.0))
            throw DomainError("power-law cutoff needs p > 2 for a finite tail (got p = " + std::to_string(p) + ")");
    }

    double weight(double y, double y_max) const {
        if (y < y_max) return 1.0;
        return kind == CutoffKind::Sharp ? 0.0 : std::pow(y, -p);
    }
};

inline std::string to_string(CutoffKind k) { return k == CutoffKind::Sharp ? "sharp" : "power_law"; }

/// SI description of the two-dot setup. T = 0 selects the vacuum mode with t0 as the time unit.
struct PhysicalParams {
    double temperature_K = 2.73;
    double dipole_m = 10e-9;
    double separation_m = 1e-3;
    double omega_max = 0.0; // rad/s
    double gamma = 1.0;     // sin-wave bath coupling fraction
    CutoffSpec cutoff{};

    bool zero_temperature() const { return temperature_K == 0.0; }

    void validate() const {
        if (!(temperature_K >= 0.0) || !std::isfinite(temperature_K))
            throw DomainError("temperature must be >= 0 K");
        if (!(dipole_m > 0.0) || !std::isfinite(dipole_m)) throw DomainError("dipole length must be > 0");
        if (!(separation_m > 0.0) || !std::isfinite(separation_m)) throw DomainError("separation must be > 0");
        if (!(omega_max > 0.0) || !std::isfinite(omega_max)) throw DomainError("cutoff frequency must be > 0");
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
        cutoff.validate();
    }
};

struct DerivedQuantities {
    std::optional<double> tau;         // thermal time hbar/(kB T), s; absent at T = 0
    double t0_seconds = 0.0;           // light travel time R/c0
    std::optional<double> t0_over_tau; // absent at T = 0
    double y_max = 0.0;                // omega_max tau, or z_max = omega_max t0 at T = 0
    double v = 0.0;                    // omega_max d / c0
    double A = 0.0;                    // alpha0 d^2 / (pi c0^2 tau^2), tau -> t0 at T = 0
    bool zero_temperature = false;

    /// Time unit of every dimensionless kernel argument (tau, or t0 at T = 0).
    double time_unit() const { return tau ? *tau : t0_seconds; }
};

inline double thermal_time(double temperature_K, const PhysicalConstants& k = kCodata2018) {
    if (!(temperature_K > 0.0)) throw DomainError("thermal time needs T > 0");
    return k.hbar / (k.kB * temperature_K);
}

inline double omega_from_eV(double energy_eV, const PhysicalConstants& k = kCodata2018) {
    return energy_eV * k.e_charge / k.hbar;
}

inline DerivedQuantities derive_dimensionless(const PhysicalParams& p, const PhysicalConstants& k = kCodata2018) {
    p.validate();
    DerivedQuantities d;
    d.zero_temperature = p.zero_temperature();
    d.t0_seconds = p.separation_m / k.c0;
    d.v = p.omega_max * p.dipole_m / k.c0;
    const double unit = d.zero_temperature ? d.t0_seconds : thermal_time(p.temperature_K, k);
    if (!d.zero_temperature) {
        d.tau = unit;
        d.t0_over_tau = d.t0_seconds / unit;
    }
    d.y_max = p.omega_max * unit;
    d.A = k.alpha0 * p.dipole_m * p.dipole_m / (std::numbers::pi * k.c0 * k.c0 * unit * unit);
    return d;
}

/// Coefficient c in t/tau < c (t0/tau)^3 below which no entanglement forms; equals 1/(2A).
inline double c_constant(const PhysicalParams& p, const PhysicalConstants& k = kCodata2018) {
    if (p.zero_temperature()) throw DomainError("c_constant is defined for finite temperature only");
    return 1.0 / (2.0 * derive_dimensionless(p, k).A);
}

inline double c_constant_from_A(double A) {
    if (!(A > 0.0)) throw DomainError("A must be positive");
    return 1.0 / (2.0 * A);
}

} // namespace bbr
