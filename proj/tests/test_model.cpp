#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace hsbl;
using fx::MatD;
using fx::VecD;

namespace {

// naive per-entry builders
MatD loop_H(const StructuralModel<double>& m, const VecD& Phi) {
    const Index d = m.d, modes = Phi.size() / d;
    MatD H = MatD::Zero(d * modes, m.n);
    for (Index i = 0; i < modes; ++i)
        for (Index j = 0; j < m.n; ++j)
            for (Index r = 0; r < d; ++r)
                for (Index c = 0; c < d; ++c) H(i * d + r, j) += m.Ksub[j](r, c) * Phi(i * d + c);
    return H;
}

MatD loop_K(const StructuralModel<double>& m, const VecD& theta) {
    MatD K = m.K0;
    for (Index r = 0; r < m.d; ++r)
        for (Index c = 0; c < m.d; ++c)
            for (Index j = 0; j < m.n; ++j) K(r, c) += theta(j) * m.Ksub[j](r, c);
    return K;
}

} // namespace

TEST(AssembleStiffness, ZeroThetaGivesK0) {
    std::mt19937 g(1);
    const auto m = fx::random_model(3, 2, g);
    EXPECT_EQ(assemble_stiffness(m, VecD::Zero(2)), m.K0);
}

TEST(AssembleStiffness, Shear10Tridiagonal) {
    const auto m = shear_building_model(ShearBuildingSpec<double>{});
    const MatD K = assemble_stiffness(m, VecD::Ones(10));
    const double k0 = 176.729e6;
    for (Index r = 0; r < 10; ++r)
        for (Index c = 0; c < 10; ++c) {
            double want = 0;
            if (r == c) want = r == 9 ? k0 : 2 * k0;
            else if (std::abs(r - c) == 1) want = -k0;
            EXPECT_DOUBLE_EQ(K(r, c), want) << r << "," << c;
        }
}

TEST(AssembleStiffness, MatchesBruteForceSum) {
    std::mt19937 g(2);
    const auto m = fx::random_model(2, 2, g);
    const VecD th = fx::random_vec(2, g);
    EXPECT_LE((assemble_stiffness(m, th) - (m.K0 + th(0) * m.Ksub[0] + th(1) * m.Ksub[1])).norm(), 1e-14);
}

TEST(AssembleStiffness, AffineInTheta) {
    std::mt19937 g(3);
    const auto m = fx::random_model(4, 3, g);
    for (int t = 0; t < 5; ++t) {
        const VecD a = fx::random_vec(3, g), b = fx::random_vec(3, g);
        const MatD lhs = assemble_stiffness(m, a + b) + m.K0;
        const MatD rhs = assemble_stiffness(m, a) + assemble_stiffness(m, b);
        EXPECT_LE((lhs - rhs).norm(), 1e-12 * rhs.norm());
    }
}

TEST(AssembleStiffness, WrongLengthIsConfigError) {
    std::mt19937 g(4);
    const auto m = fx::random_model(3, 2, g);
    EXPECT_THROW(assemble_stiffness(m, VecD::Ones(3)), ConfigError);
}

TEST(Builders, HTrivialCases) {
    std::mt19937 g(5);
    const auto m = fx::random_model(3, 2, g);
    EXPECT_EQ(build_H(m, VecD::Zero(6)).norm(), 0.0);

    StructuralModel<double> one;
    one.d = 3;
    one.n = 1;
    one.M = MatD::Identity(3, 3);
    one.K0 = MatD::Zero(3, 3);
    one.Ksub = {MatD::Identity(3, 3)};
    const VecD phi = fx::random_vec(3, g);
    EXPECT_EQ(VecD(build_H(one, phi).col(0)), phi);
}

TEST(Builders, MatchLoopOracles) {
    std::mt19937 g(6);
    const auto m = fx::random_model(3, 2, g);
    const VecD Phi = fx::random_vec(6, g), w2 = fx::random_vec(2, g, 0.5, 3), th = fx::random_vec(2, g);
    const MatD H = build_H(m, Phi);
    EXPECT_LE((H - loop_H(m, Phi)).norm(), 1e-12 * H.norm());

    const MatD K = loop_K(m, th);
    VecD b(6), c(6);
    MatD G = MatD::Zero(6, 2);
    for (Index i = 0; i < 2; ++i)
        for (Index r = 0; r < 3; ++r) {
            double sb = 0, sc = 0, sg = 0;
            for (Index k = 0; k < 3; ++k) {
                sb += (w2(i) * m.M(r, k) - m.K0(r, k)) * Phi(i * 3 + k);
                sc += K(r, k) * Phi(i * 3 + k);
                sg += m.M(r, k) * Phi(i * 3 + k);
            }
            b(i * 3 + r) = sb;
            c(i * 3 + r) = sc;
            G(i * 3 + r, i) = sg;
        }
    EXPECT_LE((build_b(m, w2, Phi) - b).norm(), 1e-12 * b.norm());
    EXPECT_LE((build_c(m, th, Phi) - c).norm(), 1e-12 * c.norm());
    EXPECT_LE((build_G(m, Phi) - G).norm(), 1e-12 * G.norm());
}

TEST(Builders, FBlockIsExplicitSquare) {
    std::mt19937 g(7);
    const auto m = fx::random_model(3, 2, g);
    const VecD th = fx::random_vec(2, g), w2 = VecD::Constant(1, 1.7);
    const MatD A = loop_K(m, th) - 1.7 * m.M;
    MatD A2 = MatD::Zero(3, 3);
    for (Index r = 0; r < 3; ++r)
        for (Index c = 0; c < 3; ++c)
            for (Index k = 0; k < 3; ++k) A2(r, c) += A(r, k) * A(k, c);
    const MatD F = build_F(m, th, w2);
    EXPECT_LE((F - A2).norm(), 1e-12 * A2.norm());

    // huge omega2: leading order omega^4 M^2
    const MatD Fh = build_F(m, th, VecD::Constant(1, 1e8));
    EXPECT_LE((Fh / 1e16 - m.M * m.M).norm(), 1e-6 * (m.M * m.M).norm());
}

TEST(Builders, FAnnihilatesExactModes) {
    std::mt19937 g(8);
    auto m = fx::random_model(4, 2, g);
    const VecD th = VecD::Ones(2);
    m.K0 = fx::random_spd(4, g);
    const auto ex = eigen_solve(m, th, 3);
    const MatD F = build_F(m, th, ex.omega2);
    const double K = assemble_stiffness(m, th).norm();
    EXPECT_LE((F * ex.Phi).norm(), 1e-8 * K * K * ex.Phi.norm());
}

TEST(Builders, CAndGTrivialCases) {
    std::mt19937 g(9);
    auto m = fx::random_model(3, 2, g);
    const VecD Phi = fx::random_vec(6, g);
    VecD c0(6);
    c0 << m.K0 * Phi.head(3), m.K0 * Phi.tail(3);
    EXPECT_LE((build_c(m, VecD::Zero(2), Phi) - c0).norm(), 1e-14);
    m.M = MatD::Identity(3, 3);
    const MatD G = build_G(m, Phi);
    EXPECT_EQ(VecD(G.col(0).head(3)), VecD(Phi.head(3)));
    EXPECT_EQ(VecD(G.col(1).tail(3)), VecD(Phi.tail(3)));
    EXPECT_EQ(G.col(0).tail(3).norm(), 0.0);
}

TEST(Builders, BIdentityWithExactModes) {
    // K0 = 0 and exact eigenpairs: b = H theta
    const auto m = fx::small_shear(4);
    const VecD th(VecD::LinSpaced(4, 0.8, 1.1));
    const auto ex = eigen_solve(m, th, 4);
    const VecD b = build_b(m, ex.omega2, ex.Phi);
    EXPECT_LE((build_H(m, ex.Phi) * th - b).norm(), 1e-8 * b.norm());
}

TEST(Builders, HThetaMinusBStacksResiduals) {
    std::mt19937 g(10);
    const auto m = fx::random_model(3, 2, g);
    const VecD th = fx::random_vec(2, g), Phi = fx::random_vec(6, g), w2 = fx::random_vec(2, g, 0.5, 2);
    const VecD r = build_H(m, Phi) * th - build_b(m, w2, Phi);
    const SystemModalState<double> st{w2, Phi};
    const VecD norms = eigen_residuals(m, th, st);
    for (Index i = 0; i < 2; ++i) EXPECT_NEAR(r.segment(i * 3, 3).norm(), norms(i), 1e-12);
}

TEST(EigenSolve, Shear10Frequencies) {
    const auto m = shear_building_model(ShearBuildingSpec<double>{});
    const auto ex = eigen_solve(m, VecD::Ones(10), 5);
    const double ref_hz[5] = {1.00, 2.98, 4.89, 6.69, 8.34};
    // scipy.linalg.eigh on the same matrices
    const double oracle_w2[5] = {39.478338241184936, 350.03345888946745, 943.5495148677325, 1767.2899999999995,
                                 2748.0619572566898};
    for (Index i = 0; i < 5; ++i) {
        EXPECT_NEAR(std::sqrt(ex.omega2(i)) / (2 * std::numbers::pi), ref_hz[i], 0.01);
        EXPECT_LE(fx::rel_err(ex.omega2(i), oracle_w2[i]), 1e-10);
        EXPECT_NEAR(ex.Phi.segment(i * 10, 10).norm(), 1.0, 1e-12);
    }
}

TEST(EigenSolve, ProportionalMatrices) {
    std::mt19937 g(11);
    StructuralModel<double> m;
    m.d = 4;
    m.n = 1;
    m.M = fx::random_spd(4, g);
    m.K0 = MatD::Zero(4, 4);
    m.Ksub = {3.5 * m.M};
    const auto ex = eigen_solve(m, VecD::Ones(1), 4);
    for (Index i = 0; i < 4; ++i) EXPECT_NEAR(ex.omega2(i), 3.5, 1e-10);
}

TEST(EigenSolve, CharacteristicPolynomialRoots) {
    // det(K - l M) = -6 l^3 + 34 l^2 - 51 l + 18, roots by numpy
    StructuralModel<double> m;
    m.d = 3;
    m.n = 1;
    m.M = VecD((VecD(3) << 2, 1, 3).finished()).asDiagonal();
    m.K0 = MatD::Zero(3, 3);
    m.Ksub = {(MatD(3, 3) << 4, -1, 0, -1, 3, -1, 0, -1, 2).finished()};
    const auto ex = eigen_solve(m, VecD::Ones(1), 3);
    const double roots[3] = {0.5117890565377511, 1.6934700598547898, 3.461407550274123};
    for (Index i = 0; i < 3; ++i) EXPECT_LE(fx::rel_err(ex.omega2(i), roots[i]), 1e-8);

    // 2-DOF unit chain: (3 -+ sqrt 5) / 2
    const auto two = fx::small_shear(2);
    const auto e2 = eigen_solve(two, VecD::Constant(2, 1e-3), 2);
    EXPECT_LE(fx::rel_err(e2.omega2(0), (3 - std::sqrt(5.0)) / 2), 1e-12);
    EXPECT_LE(fx::rel_err(e2.omega2(1), (3 + std::sqrt(5.0)) / 2), 1e-12);
}

TEST(EigenSolve, ResidualsAndSigns) {
    std::mt19937 g(12);
    auto m = fx::random_model(3, 2, g);
    m.K0 = fx::random_spd(3, g);
    const VecD th = VecD::Ones(2);
    const auto ex = eigen_solve(m, th, 3);
    const double K = assemble_stiffness(m, th).norm();
    EXPECT_LE(eigen_residuals(m, th, ex).maxCoeff(), 1e-9 * K);
    for (Index i = 0; i < 3; ++i) {
        const VecD v = ex.Phi.segment(i * 3, 3);
        Index k;
        v.cwiseAbs().maxCoeff(&k);
        EXPECT_GT(v(k), 0.0);
    }
    for (Index i = 1; i < 3; ++i) EXPECT_LT(ex.omega2(i - 1), ex.omega2(i));
}

TEST(EigenSolve, ResidualGrowsLinearlyAlongOtherMode) {
    const auto m = fx::small_shear(3);
    const VecD th = VecD::Ones(3);
    const auto ex = eigen_solve(m, th, 3);
    const double slope = std::abs(ex.omega2(2) - ex.omega2(0)) * (m.M * ex.Phi.segment(6, 3)).norm();
    for (double delta : {1e-3, 1e-2, 1e-1}) {
        SystemModalState<double> p = ex;
        p.omega2 = ex.omega2.head(1);
        p.Phi = ex.Phi.head(3) + delta * ex.Phi.segment(6, 3);
        EXPECT_NEAR(eigen_residuals(m, th, p)(0), slope * delta, 1e-9 * slope);
    }
    SystemModalState<double> z{ex.omega2, VecD::Zero(9)};
    EXPECT_EQ(eigen_residuals(m, th, z).norm(), 0.0);
}

TEST(ModelValidate, RejectsBadMatrices) {
    std::mt19937 g(13);
    auto m = fx::random_model(3, 2, g);
    EXPECT_NO_THROW(m.validate());
    auto bad = m;
    bad.Ksub[1](0, 1) += 1;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = m;
    bad.M = -m.M;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = m;
    bad.Ksub.pop_back();
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ModelScaled, EigenvaluesUnchanged) {
    const auto m = shear_building_model(ShearBuildingSpec<double>{});
    const auto a = eigen_solve(m, VecD::Ones(10), 4);
    const auto b = eigen_solve(m.scaled(1e7), VecD::Ones(10), 4);
    EXPECT_LE((a.omega2 - b.omega2).norm(), 1e-10 * a.omega2.norm());
    EXPECT_LE((a.Phi - b.Phi).norm(), 1e-10);
}
