// constants.hpp: physical constants (CODATA 2018)

#pragma once

#include <numbers>

namespace bbr {

struct PhysicalConstants {
    double alpha0;   // fine-structure constant
    double c0;       // speed of light, m/s
    double hbar;     // reduced Planck constant, J s
    double kB;       // Boltzmann constant, J/K
    double eps0;     // vacuum permittivity, F/m
    double e_charge; // elementary charge, C

    /// e^2 / (4 pi eps0 hbar c0); agrees with alpha0 to the precision of the constant set.
    constexpr double alpha_from_si() const {
        return e_charge * e_charge / (4.0 * std::numbers::pi * eps0 * hbar * c0);
    }
};

inline constexpr PhysicalConstants kCodata2018{
    .alpha0 = 7.2973525693e-3,
    .c0 = 299792458.0,
    .hbar = 1.054571817e-34,
    .kB = 1.380649e-23,
    .eps0 = 8.8541878128e-12,
    .e_charge = 1.602176634e-19,
};

inline constexpr const char* kConstantSetName = "CODATA-2018";

} // namespace bbr
