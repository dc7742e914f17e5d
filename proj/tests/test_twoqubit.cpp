#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bbr/entanglement.hpp"
#include "bbr/twoqubit.hpp"

using namespace bbr;

namespace {

constexpr double kPi = std::numbers::pi;

BathKernels kernels(double f1, double f2, double phi1, double phi2) {
    BathKernels k;
    k.f1 = f1;
    k.f2 = f2;
    k.phi1 = phi1;
    k.phi2 = phi2;
    k.phi_minus = phi1 - phi2;
    return k;
}

double min_eigenvalue(const DensityMatrix4& r) { return hermitian_eigen(r.matrix()).eigenvalues[3]; }

} // namespace

TEST(CouplingMatrices, ExactEntries) {
    const CouplingMatrices& m = kCoupling;
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(m.s(i, i), 0);
        EXPECT_EQ(m.c(i, i), 0);
        EXPECT_EQ(m.s_tilde(i, i), 0);
        for (int j = 0; j < 4; ++j) {
            EXPECT_EQ(m.s(i, j), m.s(j, i));
            EXPECT_EQ(m.c(i, j), m.c(j, i));
            EXPECT_EQ(m.C_tilde(i, j), -m.s_tilde(i, j));
            EXPECT_EQ(m.s_tilde(i, j), -m.s_tilde(j, i));
        }
    }
    EXPECT_EQ(m.s(1, 2), 4);
    EXPECT_EQ(m.c(0, 3), 4);
    EXPECT_EQ(m.s(0, 3), 0);
    EXPECT_EQ(m.c(1, 2), 0);
    EXPECT_EQ(m.s_tilde(0, 1), -1);
    EXPECT_EQ(m.s_tilde(1, 3), 1);
}

TEST(InitialState, ProductOfPlusStates) {
    const auto r = initial_product_state();
    for (const auto& v : r.matrix().a) EXPECT_EQ(v, cplx(0.25, 0.0));
    EXPECT_NO_THROW(DensityMatrix4::from_matrix(r.matrix()));
    EXPECT_NEAR(trace(r.matrix()).real(), 1.0, 1e-15);
    EXPECT_LE(concurrence(r), 1e-12);
    const auto sd = hermitian_eigen(r.matrix());
    EXPECT_NEAR(sd.eigenvalues[0], 1.0, 1e-14);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(sd.eigenvalues[static_cast<std::size_t>(i)], 0.0, 1e-14);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(sd.eigenvectors(i, 0) - 0.5), 0.0, 1e-14);
}

TEST(Evolve, ZeroKernelsLeaveStateUnchanged) {
    const auto r0 = initial_product_state();
    const auto r = evolve(r0, BathKernels{}, 0.3, 0.7);
    EXPECT_EQ(max_abs(r.matrix() - r0.matrix()), 0.0);
}

TEST(Evolve, EntrywiseFactorsFollowCouplingMatrices) {
    const auto r0 = initial_product_state();
    const double A = 0.37, gamma = 0.6;
    const auto k = kernels(0.3, 0.5, 2.1, 1.4);
    const auto r = evolve(r0, k, A, gamma);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const cplx ratio = r(i, j) / r0(i, j);
            const double damp = A * (k.f1 * kCoupling.c(i, j) + gamma * k.f2 * kCoupling.s(i, j));
            const double phase = A * (k.phi1 * kCoupling.C_tilde(i, j) + gamma * k.phi2 * kCoupling.s_tilde(i, j));
            EXPECT_NEAR(std::abs(ratio), std::exp(-damp), 1e-15);
            EXPECT_NEAR(std::abs(ratio - std::polar(std::exp(-damp), phase)), 0.0, 1e-14);
        }
    EXPECT_NEAR(std::abs(r(1, 2)) / 0.25, std::exp(-4.0 * A * gamma * k.f2), 1e-15);
    EXPECT_NEAR(std::abs(r(0, 3)) / 0.25, std::exp(-4.0 * A * k.f1), 1e-15);
}

TEST(Evolve, StrongDampingLeavesOnlyPopulations) {
    const auto r = evolve(initial_product_state(), kernels(1e3, 1e3, 0.0, 0.0), 1.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i == j)
                EXPECT_EQ(r(i, j), cplx(0.25, 0.0));
            else
                EXPECT_EQ(std::abs(r(i, j)), 0.0);
        }
    // the (01,10) and (00,11) coherences decay four times faster than the rest
    const auto w = evolve(initial_product_state(), kernels(0.1, 0.1, 0.0, 0.0), 1.0);
    EXPECT_NEAR(std::log(std::abs(w(1, 2)) / 0.25), -0.4, 1e-14);
    EXPECT_NEAR(std::log(std::abs(w(0, 3)) / 0.25), -0.4, 1e-14);
    EXPECT_NEAR(std::log(std::abs(w(0, 1)) / 0.25), -0.2, 1e-14);
}

TEST(Evolve, GammaScalesSinBathOnly) {
    const auto r0 = initial_product_state();
    const auto k = kernels(0.2, 0.9, 3.0, 2.5);
    const auto g0 = evolve(r0, k, 1.0, 0.0);
    const auto only_cos = evolve(r0, kernels(0.2, 0.0, 3.0, 0.0), 1.0, 1.0);
    EXPECT_LE(max_abs(g0.matrix() - only_cos.matrix()), 1e-15);
}

TEST(Evolve, RejectsBadArguments) {
    const auto r0 = initial_product_state();
    EXPECT_THROW(evolve(r0, BathKernels{}, -1e-3), DomainError);
    EXPECT_THROW(evolve(r0, BathKernels{}, 1.0, 1.5), DomainError);
    EXPECT_THROW(evolve(r0, BathKernels{}, 1.0, -0.1), DomainError);
}

TEST(Evolve, PreservesHermiticityTraceAndPositivity) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ut(0.0, 6.0), ut0(0.2, 3.0), uA(1e-4, 0.2);
    const auto r0 = initial_product_state();
    for (int i = 0; i < 1000; ++i) {
        KernelQuery q;
        q.t = ut(rng);
        q.t0 = ut0(rng);
        q.y_max = 20.0;
        const auto k = evaluate_kernels(q);
        const auto r = evolve(r0, k, uA(rng));
        EXPECT_LE(hermiticity_defect(r.matrix()), 1e-13);
        EXPECT_NEAR(trace(r.matrix()).real(), 1.0, 1e-14);
        for (int d = 0; d < 4; ++d) EXPECT_EQ(r(d, d), r0(d, d));
        EXPECT_GE(min_eigenvalue(r), -1e-10);
    }
}

TEST(Evolve, PhaseOnlyMapsCompose) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 50; ++i) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        const auto two = evolve(evolve(initial_product_state(), kernels(0, 0, a, b), 1.0), kernels(0, 0, c, d), 1.0);
        const auto one = evolve(initial_product_state(), kernels(0, 0, a + c, b + d), 1.0);
        EXPECT_LE(max_abs(two.matrix() - one.matrix()), 1e-13);
    }
}

TEST(AsymptoticState, PurePhaseMapAtQuarterPeriod) {
    const auto r = asymptotic_state(0.0, kPi / 2.0, initial_product_state());
    EXPECT_NEAR(concurrence(r), 1.0, 1e-12);
    EXPECT_NEAR(entanglement_of_formation(r), 1.0, 1e-12);
}

TEST(AsymptoticState, NoPhaseNoEntanglement) {
    for (double v : {0.0, 1.0, 5.0, 20.0, 50.0, 100.0}) {
        const auto r = asymptotic_state(v, 0.0, initial_product_state());
        EXPECT_LE(entanglement_of_formation(r), 1e-12) << v;
    }
}

TEST(AsymptoticState, PiPeriodicInPhase) {
    for (double v : {0.0, 3.0, 12.0, 30.0})
        for (double p : {0.1, 0.7, 1.3, 2.9}) {
            const double a = concurrence(asymptotic_state(v, p, initial_product_state()));
            const double b = concurrence(asymptotic_state(v, p + kPi, initial_product_state()));
            EXPECT_NEAR(a, b, 1e-10);
        }
}

TEST(AsymptoticState, EqualsEvolveWithSaturatedKernels) {
    const double Y = 100.0 * kPi, v = 12.0, pm = 0.8;
    const double A = kCodata2018.alpha0 * v * v / (kPi * Y * Y);
    BathKernels k = kernels(Y * Y / 6.0, Y * Y / 6.0, pm / A + 5.0, 5.0);
    const auto a = evolve(initial_product_state(), k, A);
    const auto b = asymptotic_state(v, pm, initial_product_state());
    EXPECT_LE(max_abs(a.matrix() - b.matrix()), 1e-13);
    EXPECT_NEAR(v_from_A(A, Y), v, 1e-12);
}

TEST(AsymptoticCheck, LongTimeRegimeAgrees) {
    AsymptoticCheckParams p;
    p.t = 1e8;
    p.t0 = 1e2;
    p.y_max = 100.0 * kPi;
    p.A = 1e-6;
    const auto rep = consistency_check_asymptotic(p);
    EXPECT_LT(rep.max_abs_difference, 1e-3);
    p.A = 3.3e-13;
    EXPECT_LT(consistency_check_asymptotic(p).max_abs_difference, 1e-3);
}

TEST(AsymptoticCheck, RegimePreconditions) {
    AsymptoticCheckParams p;
    p.t = 0.0;
    p.t0 = 1e2;
    p.y_max = 100.0 * kPi;
    p.A = 1e-6;
    EXPECT_THROW(consistency_check_asymptotic(p), PreconditionError);
    p.t = 1e8;
    p.gamma = 0.5;
    EXPECT_THROW(consistency_check_asymptotic(p), PreconditionError);
    p.gamma = 1.0;
    p.t0 = 1.0;
    EXPECT_THROW(consistency_check_asymptotic(p), PreconditionError);
    p.t0 = 1e2;
    p.t = 2e2;
    EXPECT_THROW(consistency_check_asymptotic(p), PreconditionError);
}
