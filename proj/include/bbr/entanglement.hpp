// entanglement.hpp: Wootters concurrence and entanglement of formation

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "bbr/linalg.hpp"
#include "bbr/specialfn.hpp"
#include "bbr/state.hpp"

namespace bbr {

inline constexpr double kClampThreshold = 1e-10;
inline constexpr double kNotAStateThreshold = -1e-8;

/// sigma_y (x) sigma_y in the standard basis: antidiagonal (-1, +1, +1, -1).
inline Matrix4c sigma_yy() {
    Matrix4c m;
    m(0, 3) = -1.0;
    m(1, 2) = 1.0;
    m(2, 1) = 1.0;
    m(3, 0) = -1.0;
    return m;
}

namespace detail {
// Eigenvalues below this fraction of the largest are below the eigensolver's resolution and
// are treated as zero, so rank-deficient states do not pick up sqrt(eps) noise.
inline constexpr double kRankFloor = 64.0 * std::numeric_limits<double>::epsilon();

inline Matrix4c sqrt_from(const SpectralDecomposition& sd) {
    if (sd.eigenvalues[3] < kNotAStateThreshold)
        throw NotAState("eigenvalue " + std::to_string(sd.eigenvalues[3]) + " is below -1e-8");
    const double floor = kRankFloor * std::max(0.0, sd.eigenvalues[0]);
    std::array<double, 4> r{};
    for (std::size_t i = 0; i < 4; ++i) {
        const double l = sd.eigenvalues[i];
        r[i] = l > floor ? std::sqrt(l) : 0.0;
    }
    return sd.eigenvectors * Matrix4c::diagonal(r) * adjoint(sd.eigenvectors);
}
} // namespace detail

/// Hermitian positive square root; eigenvalues down to -1e-8 are clamped to zero.
inline Matrix4c psd_sqrt(const Matrix4c& m) { return detail::sqrt_from(hermitian_eigen(m)); }

inline Matrix4c psd_sqrt(const DensityMatrix4& rho) { return psd_sqrt(rho.matrix()); }

/// Spin-flipped state (sigma_y x sigma_y) rho* (sigma_y x sigma_y).
inline Matrix4c spin_flip(const Matrix4c& rho) {
    const Matrix4c y = sigma_yy();
    return y * conjugate(rho) * y;
}

/// Descending singular values of M = sqrt(rho) Y sqrt(rho)* Y, the square roots of the eigenvalues
/// of rho rho~. Working with M directly keeps pure product states exactly rank-deficient and avoids
/// squaring the condition number.
inline std::array<double, 4> wootters_singular_values(const DensityMatrix4& rho) {
    const Matrix4c s = psd_sqrt(rho.matrix());
    auto sv = singular_values(s * spin_flip(s));
    const double floor = detail::kRankFloor * sv[0];
    for (double& x : sv)
        if (x <= floor) x = 0.0;
    return sv;
}

/// Descending eigenvalues of rho rho~.
inline std::array<double, 4> wootters_eigenvalues(const DensityMatrix4& rho) {
    auto l = wootters_singular_values(rho);
    for (double& x : l) x *= x;
    return l;
}

inline double concurrence(const DensityMatrix4& rho) {
    const auto s = wootters_singular_values(rho);
    return std::clamp(s[0] - s[1] - s[2] - s[3], 0.0, 1.0);
}

inline double eof_from_concurrence(double c) {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("concurrence must lie in [0, 1]");
    const double x = 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c)));
    return binary_entropy(std::min(1.0, x));
}

inline double entanglement_of_formation(const DensityMatrix4& rho) { return eof_from_concurrence(concurrence(rho)); }

} // namespace bbr
