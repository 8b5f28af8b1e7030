#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace hsbl;
using fx::MatD;
using fx::VecD;
using LD = long double;

namespace {

StructuralModel<LD> cast_model(const StructuralModel<double>& m) {
    StructuralModel<LD> o;
    o.d = m.d;
    o.n = m.n;
    o.M = m.M.cast<LD>();
    o.K0 = m.K0.cast<LD>();
    for (const auto& K : m.Ksub) o.Ksub.push_back(K.cast<LD>());
    return o;
}

ModalDataset<LD> cast_dataset(const ModalDataset<double>& d) {
    ModalDataset<LD> o;
    o.q = d.q;
    o.m = d.m;
    o.s = d.s;
    o.omega_hat2 = d.omega_hat2.cast<LD>();
    o.Psi_hat = d.Psi_hat.cast<LD>();
    o.observed_dofs = d.observed_dofs;
    return o;
}

InferenceState<LD> cast_state(const InferenceState<double>& s) {
    InferenceState<LD> o;
    o.theta = s.theta.cast<LD>();
    o.omega2 = s.omega2.cast<LD>();
    o.Phi = s.Phi.cast<LD>();
    o.beta = s.beta;
    o.eta = s.eta;
    o.nu = s.nu;
    o.rho = s.rho.cast<LD>();
    o.tau = s.tau.cast<LD>();
    o.alpha = s.alpha.cast<LD>();
    o.lambda = s.lambda;
    o.zeta = s.zeta;
    o.a0 = s.a0;
    o.b0 = s.b0;
    o.fixed = s.fixed;
    return o;
}

Vec<LD> pack(const InferenceState<LD>& st, const JointLayout& L, const std::vector<Index>& act) {
    Vec<LD> x(L.size());
    x(L.beta()) = st.beta;
    for (Index i = 0; i < L.m; ++i) {
        x(L.omega2(i)) = st.omega2(i);
        x(L.rho(i)) = st.rho(i);
        x(L.tau(i)) = st.tau(i);
        for (Index a = 0; a < L.d; ++a) x(L.phi(i, a)) = st.Phi(i * L.d + a);
    }
    x(L.eta()) = st.eta;
    x(L.nu()) = st.nu;
    for (Index c = 0; c < L.k; ++c) x(L.theta(c)) = st.theta(act[c]);
    return x;
}

void unpack(InferenceState<LD>& st, const Vec<LD>& x, const JointLayout& L, const std::vector<Index>& act) {
    st.beta = x(L.beta());
    for (Index i = 0; i < L.m; ++i) {
        st.omega2(i) = x(L.omega2(i));
        st.rho(i) = x(L.rho(i));
        st.tau(i) = x(L.tau(i));
        for (Index a = 0; a < L.d; ++a) st.Phi(i * L.d + a) = x(L.phi(i, a));
    }
    st.eta = x(L.eta());
    st.nu = x(L.nu());
    for (Index c = 0; c < L.k; ++c) st.theta(act[c]) = x(L.theta(c));
}

// state after a few coordinate sweeps with finite alpha
InferenceState<double> settled_state(const StructuralModel<double>& m, const ModalDataset<double>& ds, const VecD& tu,
                                     const VecD& alpha) {
    auto st = initialize(ds, m, tu, AlgorithmConfig<double>::monitoring());
    st.alpha = alpha;
    for (int k = 0; k < 5; ++k) {
        st.Phi = update_mode_shapes(st, ds, m);
        update_eta(st, ds, m.d);
        st.omega2 = update_frequencies(st, ds, m);
        update_rho(st, ds);
        st.theta = update_theta(st, ds, m, tu);
        st.beta = update_beta(st, m);
    }
    return st;
}

} // namespace

TEST(JointHessian, MatchesFiniteDifferenceOfObjective) {
    const auto m = fx::small_shear(2);
    const auto ds = simulate_modal_data(m, VecD((VecD(2) << 0.9, 1.05).finished()), 1, 3, {0, 1}, fx::noise(0.02, 9));
    const VecD tu = VecD::Ones(2);
    const auto st = settled_state(m, ds, tu, VecD::Constant(2, 0.05));
    const auto jh = joint_hessian(st, ds, m, tu);
    ASSERT_EQ(jh.H.rows(), 1 + 3 + 2 + 2 + 2);

    const auto mL = cast_model(m);
    const auto dL = cast_dataset(ds);
    const auto sL = cast_state(st);
    const Vec<LD> tuL = tu.cast<LD>();
    const auto& L = jh.layout;
    const Vec<LD> x0 = pack(sL, L, jh.theta_index);
    auto J = [&](const Vec<LD>& x) {
        auto s = sL;
        unpack(s, x, L, jh.theta_index);
        return objective(s, dL, mL, tuL);
    };
    const Index N = x0.size();
    Mat<LD> fd(N, N);
    for (Index a = 0; a < N; ++a)
        for (Index b = 0; b < N; ++b) {
            const LD ha = 1e-5L * std::max(std::abs(x0(a)), 1e-3L), hb = 1e-5L * std::max(std::abs(x0(b)), 1e-3L);
            auto at = [&](LD sa, LD sb) {
                Vec<LD> x = x0;
                x(a) += sa * ha;
                x(b) += sb * hb;
                return J(x);
            };
            fd(a, b) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * ha * hb);
        }
    const double norm = jh.H.norm();
    int checked = 0;
    for (Index a = 0; a < N; ++a)
        for (Index b = 0; b < N; ++b) {
            const double want = static_cast<double>(fd(a, b));
            if (std::abs(want) > 1e-8 * norm) {
                EXPECT_LE(fx::rel_err(jh.H(a, b), want), 1e-4) << jh.labels[a] << " / " << jh.labels[b];
                ++checked;
            } else {
                EXPECT_LE(std::abs(jh.H(a, b)), 1e-7 * norm) << jh.labels[a] << " / " << jh.labels[b];
            }
        }
    EXPECT_GE(checked, 25);
}

TEST(JointHessian, DiagonalEntriesByFormula) {
    const auto m = shear_building_model(ShearBuildingSpec<double>{}).scaled(1e7);
    const auto ds = simulate_modal_data(m, VecD::Ones(10), 4, 3, all_dofs<double>(10), fx::noise(0.01, 3));
    auto st = initialize(ds, m, VecD::Ones(10), AlgorithmConfig<double>::calibration());
    ASSERT_DOUBLE_EQ(st.beta, 20.0);
    const auto jh = joint_hessian(st, ds, m, VecD::Ones(10));
    EXPECT_DOUBLE_EQ(jh.H(0, 0), 0.05);
    EXPECT_DOUBLE_EQ(jh.H(jh.layout.eta(), jh.layout.eta()), 120 / (2 * st.eta * st.eta));
    EXPECT_LE((jh.H - jh.H.transpose()).norm(), 0.0);
}

TEST(CovSummary, ConditionalFootnoteValues) {
    const auto m = shear_building_model(ShearBuildingSpec<double>{});
    auto cfg = AlgorithmConfig<double>::calibration();
    const double want_phi[] = {0.81650, 0.44721, 0.14142};
    const Index qs[] = {3, 10, 100};
    for (int k = 0; k < 3; ++k) {
        const auto ds = simulate_modal_data(m, VecD::Ones(10), 4, qs[k], all_dofs<double>(10), fx::noise(0.01, 11));
        const auto r = run_calibration(ds, m, VecD::Ones(10), cfg);
        EXPECT_NEAR(r.cov_conditional.beta, 0.22361, 5e-6);
        for (Index i = 0; i < 4; ++i) EXPECT_NEAR(r.cov_conditional.rho(i), want_phi[k], 5e-6);
        EXPECT_NEAR(r.cov_conditional.eta, std::sqrt(2.0 / (10 * qs[k] * 4)), 1e-12);
        if (qs[k] == 3) EXPECT_NEAR(r.cov_conditional.eta, 0.12910, 5e-6);
    }
}

TEST(JointCovariance, InverseOfHessianAndTauCoupling) {
    const auto m = fx::small_shear(3);
    const auto ds = simulate_modal_data(m, VecD::Ones(3), 2, 10, all_dofs<double>(3), fx::noise(0.01, 12));
    const VecD tu = VecD::Ones(3);
    const auto st = settled_state(m, ds, tu, VecD::Constant(3, 0.05));
    const auto jh = joint_hessian(st, ds, m, tu);
    const auto jc = joint_covariance(jh);
    const Index N = jh.H.rows();
    EXPECT_LE((jh.H * jc.cov - MatD::Identity(N, N)).norm(), 1e-6);
    EXPECT_LE((jc.cov - jc.cov.transpose()).norm(), 0.0);
    EXPECT_GT(jc.rcond, 0.0);
    // for an SPD matrix (H^-1)_ii >= 1 / H_ii: marginal never below conditional
    const auto mc = marginal_cov(jc, st);
    const auto cc = conditional_cov(jh, st, theta_covariance(st.beta, build_H(m, st.Phi), st.alpha, st.fixed));
    EXPECT_GE(mc.beta, cc.beta);
    EXPECT_GE(mc.eta, cc.eta);
    for (Index i = 0; i < 2; ++i) EXPECT_GE(mc.rho(i), cc.rho(i));
}

TEST(JointCovariance, SingularHessianIsNumericalError) {
    JointHessian<double> jh;
    jh.H = MatD::Zero(3, 3);
    EXPECT_THROW(joint_covariance(jh), NumericalError);
}

TEST(ThetaCovariance, TwoFormsAndDirectInverse) {
    std::mt19937 g(41);
    for (int t = 0; t < 5; ++t) {
        const MatD H = MatD::NullaryExpr(12, 4, [&] { return std::uniform_real_distribution<double>(-1, 1)(g); });
        const VecD a = fx::random_vec(4, g, 0.01, 2);
        const double beta = 3.7;
        const std::vector<bool> fixed(4, false);
        const MatD S1 = theta_covariance(beta, H, a, fixed);
        const MatD S2 = theta_covariance_right(beta, H, a, fixed);
        EXPECT_LE((S1 - S2).norm(), 1e-10 * S1.norm());
        MatD P = beta * H.transpose() * H;
        P.diagonal() += a.cwiseInverse();
        EXPECT_LE((S1 - P.inverse()).norm(), 1e-10 * S1.norm());
    }
}

TEST(ThetaCovariance, LimitsAndPrunedRows) {
    std::mt19937 g(42);
    const MatD H = MatD::NullaryExpr(6, 3, [&] { return std::uniform_real_distribution<double>(-1, 1)(g); });
    const VecD a = fx::random_vec(3, g, 0.1, 1);
    std::vector<bool> fixed(3, false);
    EXPECT_EQ(theta_covariance(2.0, H, VecD::Zero(3), fixed).norm(), 0.0);
    EXPECT_LE((theta_covariance(1e-14, H, a, fixed) - MatD(a.asDiagonal())).norm(), 1e-12);
    fixed[1] = true;
    const MatD S = theta_covariance(2.0, H, a, fixed);
    EXPECT_EQ(S.row(1).norm() + S.col(1).norm(), 0.0);
    EXPECT_GT(S(0, 0), 0.0);
}

TEST(HyperHessian, DirectSubstitutionExample) {
    InferenceState<double> st;
    st.theta = VecD::Zero(1);
    st.alpha = VecD::Ones(1);
    st.lambda = 1;
    st.zeta = 1;
    st.fixed = {false};
    // B = Sigma + (theta_u - theta)^2 = 0 + 1
    const auto hh = hyper_hessian(st, VecD::Ones(1), MatD::Zero(1, 1));
    const MatD want = (MatD(3, 3) << 1, 1, 0, 1, 1, 1, 0, 1, 1).finished();
    EXPECT_EQ(hh.H, want);
    const MatD C = hyper_covariance(hh);
    EXPECT_LE((C * want - MatD::Identity(3, 3)).norm(), 1e-12);
}

TEST(HyperHessian, AlphaEntrySign) {
    InferenceState<double> st;
    st.theta = VecD::Zero(1);
    st.alpha = VecD::Constant(1, 0.4);
    st.fixed = {false};
    for (double B : {0.1, 0.2, 0.3, 0.4, 0.9}) {
        const auto hh = hyper_hessian(st, VecD::Constant(1, std::sqrt(B)), MatD::Zero(1, 1));
        EXPECT_EQ(hh.H(0, 0) > 0, B > 0.2) << B;
        if (B == 0.4) EXPECT_NEAR(hh.H(0, 0), 1 / 0.16, 1e-12);
    }
}

TEST(HyperHessian, FiniteDifferenceOfLogSurrogate) {
    // g(alpha, lambda, zeta) = sum log a + B/a - n log lambda + lambda sum a - log zeta + zeta lambda
    InferenceState<double> st;
    st.theta = (VecD(2) << 0.9, 1.2).finished();
    st.alpha = (VecD(2) << 0.03, 0.5).finished();
    st.lambda = 2.5;
    st.zeta = 0.7;
    st.fixed = {false, false};
    const VecD tu = VecD::Ones(2);
    const MatD Sig = (MatD(2, 2) << 0.01, 0.002, 0.002, 0.04).finished();
    const VecD B = ard_B(Sig, tu, st.theta);
    // analytic gradient of g, differentiated once more numerically
    auto grad = [&](const VecD& x, Index a) {
        if (a < 2) return 1 / x(a) - B(a) / (x(a) * x(a)) + x(2);
        if (a == 2) return -2 / x(2) + x(0) + x(1) + x(3);
        return -1 / x(3) + x(2);
    };
    const VecD x0 = (VecD(4) << st.alpha(0), st.alpha(1), st.lambda, st.zeta).finished();
    const auto hh = hyper_hessian(st, tu, Sig);
    for (Index a = 0; a < 4; ++a) {
        const VecD row = fx::fd_grad([&](const VecD& x) { return grad(x, a); }, x0, 1e-6);
        for (Index b = 0; b < 4; ++b) {
            if (hh.H(a, b) == 0) EXPECT_NEAR(row(b), 0.0, 1e-6);
            else EXPECT_LE(fx::rel_err(row(b), hh.H(a, b)), 1e-4) << a << "," << b;
        }
    }
}

TEST(HyperHessian, PrunedComponentsExcluded) {
    InferenceState<double> st;
    st.theta = VecD::Ones(3);
    st.alpha = (VecD(3) << 0.2, 0.0, 0.3).finished();
    st.fixed = {false, true, false};
    const auto hh = hyper_hessian(st, VecD::Ones(3), MatD::Zero(3, 3));
    EXPECT_EQ(hh.H.rows(), 4);
    EXPECT_EQ(hh.alpha_index, (std::vector<Index>{0, 2}));
    st.alpha.setZero();
    st.fixed.assign(3, true);
    EXPECT_EQ(hyper_hessian(st, VecD::Ones(3), MatD::Zero(3, 3)).H.rows(), 2);
}
