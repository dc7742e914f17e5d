// linalg.hpp: fixed-size 4x4 complex matrices and a cyclic Jacobi Hermitian eigensolver

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>

#include "bbr/errors.hpp"

namespace bbr {

using cplx = std::complex<double>;

struct Matrix4c {
    std::array<cplx, 16> a{};

    cplx& operator()(int r, int c) { return a[static_cast<std::size_t>(4 * r + c)]; }
    const cplx& operator()(int r, int c) const { return a[static_cast<std::size_t>(4 * r + c)]; }

    static Matrix4c zero() { return {}; }
    static Matrix4c identity() {
        Matrix4c m;
        for (int i = 0; i < 4; ++i) m(i, i) = 1.0;
        return m;
    }
    static Matrix4c diagonal(const std::array<double, 4>& d) {
        Matrix4c m;
        for (int i = 0; i < 4; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
        return m;
    }
};

inline Matrix4c operator*(const Matrix4c& x, const Matrix4c& y) {
    Matrix4c r;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            const cplx xik = x(i, k);
            for (int j = 0; j < 4; ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}

inline Matrix4c operator+(const Matrix4c& x, const Matrix4c& y) {
    Matrix4c r;
    for (std::size_t i = 0; i < 16; ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

inline Matrix4c operator-(const Matrix4c& x, const Matrix4c& y) {
    Matrix4c r;
    for (std::size_t i = 0; i < 16; ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

inline Matrix4c operator*(double s, const Matrix4c& x) {
    Matrix4c r;
    for (std::size_t i = 0; i < 16; ++i) r.a[i] = s * x.a[i];
    return r;
}

inline Matrix4c adjoint(const Matrix4c& x) {
    Matrix4c r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r(i, j) = std::conj(x(j, i));
    return r;
}

inline Matrix4c conjugate(const Matrix4c& x) {
    Matrix4c r;
    for (std::size_t i = 0; i < 16; ++i) r.a[i] = std::conj(x.a[i]);
    return r;
}

inline Matrix4c transpose(const Matrix4c& x) {
    Matrix4c r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r(i, j) = x(j, i);
    return r;
}

inline cplx trace(const Matrix4c& x) { return x(0, 0) + x(1, 1) + x(2, 2) + x(3, 3); }

/// Largest entry modulus.
inline double max_abs(const Matrix4c& x) {
    double m = 0.0;
    for (const auto& v : x.a) m = std::max(m, std::abs(v));
    return m;
}

inline double hermiticity_defect(const Matrix4c& x) { return max_abs(x - adjoint(x)); }

/// Kronecker product of two 2x2 matrices given row-major.
inline Matrix4c kron(const std::array<cplx, 4>& u, const std::array<cplx, 4>& v) {
    Matrix4c r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    r(2 * i + k, 2 * j + l) = u[static_cast<std::size_t>(2 * i + j)] * v[static_cast<std::size_t>(2 * k + l)];
    return r;
}

struct SpectralDecomposition {
    std::array<double, 4> eigenvalues{}; // descending
    Matrix4c eigenvectors;               // columns

    Matrix4c reconstruct() const {
        return eigenvectors * Matrix4c::diagonal(eigenvalues) * adjoint(eigenvectors);
    }
};

/// Full eigendecomposition of a Hermitian 4x4 matrix by cyclic complex Jacobi rotations.
/// Eigenvalues come out descending; each eigenvector's first non-negligible component is real positive.
inline SpectralDecomposition hermitian_eigen(const Matrix4c& m, double hermitian_tol = 1e-10) {
    const double scale = std::max(1.0, max_abs(m));
    if (!(hermiticity_defect(m) <= hermitian_tol * scale)) throw DomainError("hermitian_eigen: matrix is not Hermitian");
    for (const auto& v : m.a)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("hermitian_eigen: non-finite entry");

    Matrix4c A = 0.5 * (m + adjoint(m));
    Matrix4c V = Matrix4c::identity();
    constexpr int kMaxSweeps = 50;
    constexpr double kTol = 1e-14;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0, total = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const double v = std::norm(A(i, j));
                total += v;
                if (i != j) off += v;
            }
        if (off <= kTol * kTol * total || off == 0.0) break;
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 4; ++q) {
                const double apq = std::abs(A(p, q));
                if (apq == 0.0) continue;
                const cplx phase = A(p, q) / apq; // e^{i theta}
                const double theta = (A(q, q).real() - A(p, p).real()) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // J = D R with D = diag(1, e^{-i theta}) on (p, q) and the real rotation R
                const cplx em = std::conj(phase);
                // A <- J^dagger A J, applied to columns then rows
                for (int k = 0; k < 4; ++k) {
                    const cplx akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * em * akq;
                    A(k, q) = s * akp + c * em * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    const cplx apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * phase * aqk;
                    A(q, k) = s * apk + c * phase * aqk;
                }
                A(p, q) = 0.0;
                A(q, p) = 0.0;
                A(p, p) = A(p, p).real();
                A(q, q) = A(q, q).real();
                for (int k = 0; k < 4; ++k) {
                    const cplx vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * em * vkq;
                    V(k, q) = s * vkp + c * em * vkq;
                }
            }
    }

    std::array<int, 4> order{0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return A(x, x).real() > A(y, y).real(); });
    SpectralDecomposition out;
    for (int j = 0; j < 4; ++j) {
        const int src = order[static_cast<std::size_t>(j)];
        out.eigenvalues[static_cast<std::size_t>(j)] = A(src, src).real();
        cplx ph = 1.0;
        int lead = 0;
        for (; lead < 4; ++lead) {
            const double r = std::abs(V(lead, src));
            if (r > 1e-12) {
                ph = std::conj(V(lead, src)) / r;
                break;
            }
        }
        for (int i = 0; i < 4; ++i) out.eigenvectors(i, j) = V(i, src) * ph;
        if (lead < 4) out.eigenvectors(lead, j) = std::abs(V(lead, src));
    }
    return out;
}

/// Descending singular values by one-sided Jacobi on the columns. Small singular values keep an
/// absolute accuracy of order eps times the largest, unlike eigenvalues of M M^dagger.
inline std::array<double, 4> singular_values(const Matrix4c& m) {
    for (const auto& v : m.a)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("singular_values: non-finite entry");
    Matrix4c a = m;
    constexpr int kMaxSweeps = 60;
    constexpr double kTol = 1e-15;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 4; ++q) {
                double alpha = 0.0, beta = 0.0;
                cplx g = 0.0;
                for (int k = 0; k < 4; ++k) {
                    alpha += std::norm(a(k, p));
                    beta += std::norm(a(k, q));
                    g += std::conj(a(k, p)) * a(k, q);
                }
                const double ag = std::abs(g);
                if (ag == 0.0 || ag <= kTol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const cplx em = std::conj(g) / ag; // makes the column overlap real and positive
                const double zeta = (beta - alpha) / (2.0 * ag);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int k = 0; k < 4; ++k) {
                    const cplx x = a(k, p), y = a(k, q) * em;
                    a(k, p) = c * x - s * y;
                    a(k, q) = s * x + c * y;
                }
            }
        if (!rotated) break;
    }
    std::array<double, 4> sv{};
    for (int j = 0; j < 4; ++j) {
        double n = 0.0;
        for (int k = 0; k < 4; ++k) n += std::norm(a(k, j));
        sv[static_cast<std::size_t>(j)] = std::sqrt(n);
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

} // namespace bbr
