// state.hpp: validated two-qubit density matrices in the basis |00>, |01>, |10>, |11>

#pragma once

#include <string>

#include "bbr/errors.hpp"
#include "bbr/linalg.hpp"

namespace bbr {

struct StateTolerance {
    double hermitian = 1e-12;
    double trace = 1e-12;
    double min_eigenvalue = -1e-10;
};

/// Row index is the bra-side configuration s, column index the ket-side s'.
class DensityMatrix4 {
public:
    DensityMatrix4() : m_(Matrix4c::diagonal({1.0, 0.0, 0.0, 0.0})) {}

    /// Validates Hermiticity, unit trace and positivity; throws NotAState otherwise.
    static DensityMatrix4 from_matrix(const Matrix4c& m, const StateTolerance& tol = {}) {
        for (const auto& v : m.a)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NotAState("state has non-finite entries");
        const double herm = hermiticity_defect(m);
        if (herm > tol.hermitian) throw NotAState("state is not Hermitian (defect " + std::to_string(herm) + ")");
        const cplx tr = trace(m);
        if (std::abs(tr - 1.0) > tol.trace) throw NotAState("state trace differs from 1");
        const double lo = hermitian_eigen(m).eigenvalues[3];
        if (lo < tol.min_eigenvalue) throw NotAState("state has a negative eigenvalue " + std::to_string(lo));
        return DensityMatrix4(m);
    }

    /// Wraps a matrix produced by a trace- and Hermiticity-preserving map without re-checking it.
    static DensityMatrix4 unchecked(const Matrix4c& m) { return DensityMatrix4(m); }

    const Matrix4c& matrix() const { return m_; }
    const cplx& operator()(int r, int c) const { return m_(r, c); }

    DensityMatrix4 conjugated() const { return DensityMatrix4(conjugate(m_)); }

private:
    explicit DensityMatrix4(const Matrix4c& m) : m_(m) {}
    Matrix4c m_;
};

/// |psi><psi| for a normalized 4-component vector.
inline DensityMatrix4 pure_state(const std::array<cplx, 4>& psi) {
    double n = 0.0;
    for (const auto& c : psi) n += std::norm(c);
    if (!(n > 0.0)) throw NotAState("zero state vector");
    Matrix4c m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            m(i, j) = psi[static_cast<std::size_t>(i)] * std::conj(psi[static_cast<std::size_t>(j)]) / n;
    return DensityMatrix4::unchecked(m);
}

} // namespace bbr
