#pragma once

#include "updates.hpp"

namespace hsbl {

// Sigma_theta = (beta A H^T H + I)^{-1} A, zero rows/cols where alpha = 0 or fixed
template <class T>
Mat<T> theta_covariance(T beta, const NoDeduce<Mat<T>>& H, const NoDeduce<Vec<T>>& alpha, const std::vector<bool>& fixed) {
    const Index n = alpha.size();
    std::vector<Index> act;
    for (Index j = 0; j < n; ++j)
        if (!fixed[j] && alpha(j) > T(0)) act.push_back(j);
    Mat<T> S = Mat<T>::Zero(n, n);
    if (act.empty()) return S;
    const Mat<T> Hf = select_cols(H, act);
    const Index k = static_cast<Index>(act.size());
    Vec<T> a(k);
    for (Index c = 0; c < k; ++c) a(c) = alpha(act[c]);
    Mat<T> L = beta * a.asDiagonal() * (Hf.transpose() * Hf);
    L.diagonal().array() += T(1);
    Eigen::PartialPivLU<Mat<T>> lu(L);
    const Mat<T> Sf = symmetrize<T>(lu.solve(Mat<T>(a.asDiagonal())));
    for (Index r = 0; r < k; ++r)
        for (Index c = 0; c < k; ++c) S(act[r], act[c]) = Sf(r, c);
    return S;
}

// Sigma_theta = A (beta H^T H A + I)^{-1}, the second closed form
template <class T>
Mat<T> theta_covariance_right(T beta, const NoDeduce<Mat<T>>& H, const NoDeduce<Vec<T>>& alpha, const std::vector<bool>& fixed) {
    const Index n = alpha.size();
    std::vector<Index> act;
    for (Index j = 0; j < n; ++j)
        if (!fixed[j] && alpha(j) > T(0)) act.push_back(j);
    Mat<T> S = Mat<T>::Zero(n, n);
    if (act.empty()) return S;
    const Mat<T> Hf = select_cols(H, act);
    const Index k = static_cast<Index>(act.size());
    Vec<T> a(k);
    for (Index c = 0; c < k; ++c) a(c) = alpha(act[c]);
    Mat<T> R = beta * (Hf.transpose() * Hf) * a.asDiagonal();
    R.diagonal().array() += T(1);
    // A R^{-1} = (R^{-T} A)^T
    const Mat<T> Sf = Eigen::PartialPivLU<Mat<T>>(R.transpose()).solve(Mat<T>(a.asDiagonal())).transpose();
    for (Index r = 0; r < k; ++r)
        for (Index c = 0; c < k; ++c) S(act[r], act[c]) = Sf(r, c);
    return S;
}

// Row/column layout of the joint Hessian: [beta, omega2, rho, tau | Phi, eta, nu, theta(active)]
struct JointLayout {
    Index m = 0, d = 0, k = 0;
    Index beta() const { return 0; }
    Index omega2(Index i) const { return 1 + i; }
    Index rho(Index i) const { return 1 + m + i; }
    Index tau(Index i) const { return 1 + 2 * m + i; }
    Index phi(Index i, Index a) const { return 1 + 3 * m + i * d + a; }
    Index eta() const { return 1 + 3 * m + d * m; }
    Index nu() const { return eta() + 1; }
    Index theta(Index c) const { return nu() + 1 + c; }
    Index size() const { return nu() + 1 + k; }
};

template <class T> struct JointHessian {
    Mat<T> H;
    JointLayout layout;
    std::vector<Index> theta_index; // model index of each theta row
    std::vector<std::string> labels;
};

// Exact Hessian of objective() over (xi, theta_active)
template <class T>
JointHessian<T> joint_hessian(const InferenceState<T>& st, const ModalDataset<T>& ds, const StructuralModel<T>& model,
                              const NoDeduce<Vec<T>>& theta_u) {
    (void)theta_u;
    const Index d = model.d, m = ds.m, q = ds.q, s = ds.s;
    const auto act = active_set(st);
    JointLayout L{m, d, static_cast<Index>(act.size())};
    Mat<T> Hs = Mat<T>::Zero(L.size(), L.size());
    const Mat<T> K = assemble_stiffness(model, st.theta);
    const Mat<T> Hm = build_H(model, st.Phi);
    const Vec<T> b = build_b(model, st.omega2, st.Phi);
    const Mat<T> Hf = select_cols(Hm, act);
    const Vec<T> e = Hm * st.theta - b; // stacked (K - omega_i^2 M) Phi_i
    const Vec<T> gdiag = gamma_diag(ds, d);
    const Vec<T> gpsi = gamma_t_psi(ds, d);
    const T dm = T(d * m), sqm = T(s * q * m);

    auto set = [&](Index r, Index c, T v) {
        Hs(r, c) = v;
        Hs(c, r) = v;
    };

    set(L.beta(), L.beta(), (dm / T(2) - T(1) + st.a0) / sqr(st.beta));
    for (Index i = 0; i < m; ++i) {
        const auto phi = st.Phi.segment(i * d, d);
        const Mat<T> R = K - st.omega2(i) * model.M;
        const Vec<T> g = model.M * phi;
        const Vec<T> Rphi = R * phi;
        T sum = 0;
        for (Index r = 0; r < q; ++r) sum += ds.w2(r, i);

        set(L.beta(), L.omega2(i), -g.dot(Rphi));
        const Vec<T> FPhi = R * Rphi;
        for (Index a = 0; a < d; ++a) set(L.beta(), L.phi(i, a), FPhi(a));

        set(L.omega2(i), L.omega2(i), T(q) * st.rho(i) + st.beta * g.squaredNorm());
        set(L.omega2(i), L.rho(i), T(q) * st.omega2(i) - sum);
        const Vec<T> wphi = -st.beta * (model.M * Rphi + R * g);
        for (Index a = 0; a < d; ++a) set(L.omega2(i), L.phi(i, a), wphi(a));
        for (Index c = 0; c < L.k; ++c) set(L.omega2(i), L.theta(c), -st.beta * g.dot(model.Ksub[act[c]] * phi));

        set(L.rho(i), L.rho(i), T(q) / (T(2) * sqr(st.rho(i))));
        set(L.rho(i), L.tau(i), T(1));
        set(L.tau(i), L.tau(i), T(1) / sqr(st.tau(i)));

        Mat<T> PP = st.beta * (R * R);
        PP.diagonal() += st.eta * gdiag;
        Hs.block(L.phi(i, 0), L.phi(i, 0), d, d) = PP;
        for (Index a = 0; a < d; ++a)
            set(L.phi(i, a), L.eta(), gdiag(a) * phi(a) - gpsi(i * d + a));
        for (Index c = 0; c < L.k; ++c) {
            const Mat<T>& Kj = model.Ksub[act[c]];
            const Vec<T> v = st.beta * (Kj * Rphi + R * (Kj * phi));
            for (Index a = 0; a < d; ++a) set(L.phi(i, a), L.theta(c), v(a));
        }
    }
    set(L.eta(), L.eta(), sqm / (T(2) * sqr(st.eta)));
    set(L.eta(), L.nu(), T(1));
    set(L.nu(), L.nu(), T(1) / sqr(st.nu));

    const Vec<T> bt = Hf.transpose() * e;
    Mat<T> TT = st.beta * (Hf.transpose() * Hf);
    for (Index c = 0; c < L.k; ++c) {
        set(L.beta(), L.theta(c), bt(c));
        TT(c, c) += T(1) / st.alpha(act[c]);
    }
    if (L.k > 0) Hs.block(L.theta(0), L.theta(0), L.k, L.k) = TT;

    JointHessian<T> out;
    out.H = Hs;
    out.layout = L;
    out.theta_index = act;
    out.labels.resize(L.size());
    out.labels[L.beta()] = "beta";
    for (Index i = 0; i < m; ++i) {
        out.labels[L.omega2(i)] = "omega2_" + std::to_string(i + 1);
        out.labels[L.rho(i)] = "rho_" + std::to_string(i + 1);
        out.labels[L.tau(i)] = "tau_" + std::to_string(i + 1);
        for (Index a = 0; a < d; ++a)
            out.labels[L.phi(i, a)] = "phi_" + std::to_string(i + 1) + "_" + std::to_string(a + 1);
    }
    out.labels[L.eta()] = "eta";
    out.labels[L.nu()] = "nu";
    for (Index c = 0; c < L.k; ++c) out.labels[L.theta(c)] = "theta_" + std::to_string(act[c] + 1);
    return out;
}

template <class T> struct JointCovariance {
    Mat<T> cov;
    T rcond = 0;
    JointLayout layout;
    std::vector<Index> theta_index;
    std::vector<std::string> labels;
};

// Inverse of the joint Hessian via a pivoted LDL^T factorization
template <class T> JointCovariance<T> joint_covariance(const JointHessian<T>& jh) {
    Eigen::LDLT<Mat<T>> ldlt(jh.H);
    JointCovariance<T> out;
    out.rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : T(0);
    if (ldlt.info() != Eigen::Success || !(out.rcond > T(1e-300)))
        throw NumericalError("joint_covariance: singular Hessian (rcond " + std::to_string(out.rcond) + ")");
    out.cov = symmetrize<T>(ldlt.solve(Mat<T>::Identity(jh.H.rows(), jh.H.cols())));
    out.layout = jh.layout;
    out.theta_index = jh.theta_index;
    out.labels = jh.labels;
    return out;
}

// c.o.v. (fraction) of hyper-parameters and theta
template <class T> struct CovSummary {
    T beta = 0;
    T eta = 0;
    Vec<T> rho; // equals the c.o.v. of the normalized phi_i
    Vec<T> theta;
};

// Conditional c.o.v.: each parameter's own diagonal block inverted with all others held at the MAP.
template <class T> CovSummary<T> conditional_cov(const JointHessian<T>& jh, const InferenceState<T>& st,
                                                 const Mat<T>& theta_cov) {
    const auto& L = jh.layout;
    CovSummary<T> c;
    c.beta = std::sqrt(T(1) / jh.H(L.beta(), L.beta())) / st.beta;
    c.eta = std::sqrt(T(1) / jh.H(L.eta(), L.eta())) / st.eta;
    c.rho.resize(L.m);
    for (Index i = 0; i < L.m; ++i) c.rho(i) = std::sqrt(T(1) / jh.H(L.rho(i), L.rho(i))) / st.rho(i);
    c.theta = Vec<T>::Zero(st.theta.size());
    for (Index j = 0; j < st.theta.size(); ++j)
        if (theta_cov(j, j) > T(0)) c.theta(j) = std::sqrt(theta_cov(j, j)) / std::abs(st.theta(j));
    return c;
}

// Marginal c.o.v. read off the full joint covariance
template <class T> CovSummary<T> marginal_cov(const JointCovariance<T>& jc, const InferenceState<T>& st) {
    const auto& L = jc.layout;
    CovSummary<T> c;
    c.beta = std::sqrt(std::max(jc.cov(L.beta(), L.beta()), T(0))) / st.beta;
    c.eta = std::sqrt(std::max(jc.cov(L.eta(), L.eta()), T(0))) / st.eta;
    c.rho.resize(L.m);
    for (Index i = 0; i < L.m; ++i) c.rho(i) = std::sqrt(std::max(jc.cov(L.rho(i), L.rho(i)), T(0))) / st.rho(i);
    c.theta = Vec<T>::Zero(st.theta.size());
    for (Index k = 0; k < L.k; ++k) {
        const Index j = jc.theta_index[k];
        c.theta(j) = std::sqrt(std::max(jc.cov(L.theta(k), L.theta(k)), T(0))) / std::abs(st.theta(j));
    }
    return c;
}

// B_j = (Sigma_theta)_jj + (theta_u - theta)_j^2
template <class T> Vec<T> ard_B(const Mat<T>& theta_cov, const Vec<T>& theta_u, const Vec<T>& theta) {
    return theta_cov.diagonal() + (theta_u - theta).cwiseAbs2();
}

template <class T> struct HyperHessian {
    Mat<T> H;                  // (k+2) x (k+2), order [alpha(active), lambda, zeta]
    std::vector<Index> alpha_index;
};

// [[2 A^-3 B - A^-2, 1, 0], [1^T, n/lambda^2, 1], [0^T, 1, 1/zeta^2]] over unpruned components
template <class T>
HyperHessian<T> hyper_hessian(const InferenceState<T>& st, const NoDeduce<Vec<T>>& theta_u,
                              const NoDeduce<Mat<T>>& theta_cov) {
    const Vec<T> B = ard_B(theta_cov, theta_u, st.theta);
    HyperHessian<T> out;
    for (Index j = 0; j < st.alpha.size(); ++j)
        if (!st.fixed[j] && st.alpha(j) > T(0)) out.alpha_index.push_back(j);
    const Index k = static_cast<Index>(out.alpha_index.size());
    out.H = Mat<T>::Zero(k + 2, k + 2);
    for (Index c = 0; c < k; ++c) {
        const T a = st.alpha(out.alpha_index[c]);
        out.H(c, c) = T(2) * B(out.alpha_index[c]) / (a * a * a) - T(1) / (a * a);
        out.H(c, k) = out.H(k, c) = T(1);
    }
    out.H(k, k) = T(st.alpha.size()) / sqr(st.lambda);
    out.H(k, k + 1) = out.H(k + 1, k) = T(1);
    out.H(k + 1, k + 1) = T(1) / sqr(st.zeta);
    return out;
}

template <class T> Mat<T> hyper_covariance(const HyperHessian<T>& hh) {
    Eigen::FullPivLU<Mat<T>> lu(hh.H);
    if (!lu.isInvertible()) throw NumericalError("hyper_covariance: singular hyper-parameter Hessian");
    return symmetrize<T>(lu.inverse());
}

} // namespace hsbl
