#pragma once

#include "state.hpp"

namespace hsbl {

// Phi solving (beta F + eta Gamma^T Gamma) Phi = eta Gamma^T Psi_hat, one d x d system per mode
template <class T>
Vec<T> update_mode_shapes(const InferenceState<T>& st, const ModalDataset<T>& ds, const StructuralModel<T>& model) {
    const Index d = model.d, m = ds.m;
    const Mat<T> K = assemble_stiffness(model, st.theta);
    const Vec<T> gdiag = gamma_diag(ds, d);
    const Vec<T> rhs = st.eta * gamma_t_psi(ds, d);
    Vec<T> Phi(d * m);
    for (Index i = 0; i < m; ++i) {
        const Mat<T> R = K - st.omega2(i) * model.M;
        Mat<T> A = st.beta * (R * R);
        A.diagonal() += st.eta * gdiag;
        Eigen::LLT<Mat<T>> llt(A);
        if (llt.info() != Eigen::Success) {
            std::string msg = "update_mode_shapes: singular system for mode " + std::to_string(i);
            if (st.beta == T(0))
                for (Index k = 0; k < d; ++k)
                    if (gdiag(k) == T(0)) {
                        msg += ", DOF " + std::to_string(k) + " is unobserved and unconstrained";
                        break;
                    }
            throw NumericalError(msg);
        }
        Phi.segment(i * d, d) = llt.solve(rhs.segment(i * d, d));
    }
    return Phi;
}

// eta = (sqm - 2) / ||Psi_hat - Gamma Phi||^2, clamped; nu = 1/eta
template <class T>
void update_eta(InferenceState<T>& st, const ModalDataset<T>& ds, Index d, T eta_max = T(1e12)) {
    const T res = shape_residual(ds, st.Phi, d);
    const T num = T(ds.s * ds.q * ds.m - 2);
    st.eta_clamped = !(res > num / eta_max);
    st.eta = st.eta_clamped ? eta_max : num / res;
    st.nu = T(1) / st.eta;
}

// omega_i^2 = (beta g.c + rho_i sum_r w_ri) / (beta g.g + q rho_i), g = M Phi_i, c = K Phi_i
template <class T>
Vec<T> update_frequencies(const InferenceState<T>& st, const ModalDataset<T>& ds, const StructuralModel<T>& model) {
    const Index d = model.d, m = ds.m;
    const Mat<T> K = assemble_stiffness(model, st.theta);
    Vec<T> w(m);
    for (Index i = 0; i < m; ++i) {
        const auto phi = st.Phi.segment(i * d, d);
        const Vec<T> g = model.M * phi;
        const Vec<T> c = K * phi;
        T sum = 0;
        for (Index r = 0; r < ds.q; ++r) sum += ds.w2(r, i);
        const T den = st.beta * g.squaredNorm() + T(ds.q) * st.rho(i);
        if (!(den > 0)) throw NumericalError("update_frequencies: nonpositive system for mode " + std::to_string(i));
        w(i) = (st.beta * g.dot(c) + st.rho(i) * sum) / den;
    }
    return w;
}

// rho_i = (q - 2) / sum_r (w_ri - omega_i^2)^2, clamped; tau = 1/rho
template <class T> void update_rho(InferenceState<T>& st, const ModalDataset<T>& ds, T rho_max = T(1e12)) {
    st.rho_clamped = false;
    for (Index i = 0; i < ds.m; ++i) {
        T dev = 0;
        for (Index r = 0; r < ds.q; ++r) dev += sqr(ds.w2(r, i) - st.omega2(i));
        const T num = T(ds.q - 2);
        if (!(dev > num / rho_max)) {
            st.rho(i) = rho_max;
            st.rho_clamped = true;
        } else {
            st.rho(i) = num / dev;
        }
    }
    st.tau = st.rho.cwiseInverse();
}

// components that are free (not fixed and alpha > 0)
template <class T> std::vector<Index> active_set(const InferenceState<T>& st) {
    std::vector<Index> idx;
    for (Index j = 0; j < st.alpha.size(); ++j)
        if (!st.fixed[j] && st.alpha(j) > T(0)) idx.push_back(j);
    return idx;
}

// b with the pinned components moved to the right-hand side
template <class T>
Vec<T> reduced_rhs(const Mat<T>& H, const Vec<T>& b, const InferenceState<T>& st, const Vec<T>& theta_u,
                   const std::vector<Index>& active) {
    Vec<T> out = b;
    std::vector<bool> on(st.alpha.size(), false);
    for (Index j : active) on[j] = true;
    for (Index j = 0; j < st.alpha.size(); ++j)
        if (!on[j]) out.noalias() -= theta_u(j) * H.col(j);
    return out;
}

template <class T> Mat<T> select_cols(const Mat<T>& H, const std::vector<Index>& idx) {
    Mat<T> out(H.rows(), static_cast<Index>(idx.size()));
    for (Index k = 0; k < out.cols(); ++k) out.col(k) = H.col(idx[k]);
    return out;
}

// theta minimizing beta/2 ||H theta - b||^2 + 1/2 sum (theta_u - theta)_j^2 / alpha_j over free components;
// pinned components stay exactly at theta_u
template <class T>
Vec<T> update_theta(const InferenceState<T>& st, const ModalDataset<T>& ds, const StructuralModel<T>& model,
                    const NoDeduce<Vec<T>>& theta_u) {
    (void)ds;
    const Mat<T> H = build_H(model, st.Phi);
    const Vec<T> b = build_b(model, st.omega2, st.Phi);
    const auto act = active_set(st);
    Vec<T> theta = theta_u;
    if (act.empty()) return theta;
    const Mat<T> Hf = select_cols(H, act);
    const Vec<T> bf = reduced_rhs(H, b, st, theta_u, act);
    const Index k = static_cast<Index>(act.size());
    Mat<T> A = st.beta * (Hf.transpose() * Hf);
    Vec<T> rhs = st.beta * (Hf.transpose() * bf);
    for (Index c = 0; c < k; ++c) {
        const T a = st.alpha(act[c]);
        A(c, c) += T(1) / a;
        rhs(c) += theta_u(act[c]) / a;
    }
    Eigen::LDLT<Mat<T>> ldlt(A);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > T(1e-15)))
        throw NumericalError("update_theta: singular system");
    const Vec<T> x = ldlt.solve(rhs);
    for (Index c = 0; c < k; ++c) theta(act[c]) = x(c);
    return theta;
}

// sum_i ||(K - omega_i^2 M) Phi_i||^2
template <class T> T equation_residual(const InferenceState<T>& st, const StructuralModel<T>& model) {
    const Index d = model.d, m = st.omega2.size();
    const Mat<T> K = assemble_stiffness(model, st.theta);
    T S = 0;
    for (Index i = 0; i < m; ++i) S += ((K - st.omega2(i) * model.M) * st.Phi.segment(i * d, d)).squaredNorm();
    return S;
}

// beta = (dm + 2(a0 - 1)) / (2 b0 + S)
template <class T> T update_beta(const InferenceState<T>& st, const StructuralModel<T>& model) {
    const T num = T(model.d * st.omega2.size()) + T(2) * (st.a0 - T(1));
    if (!(num > 0)) throw ConfigError("update_beta: d*m + 2(a0 - 1) must be positive");
    return num / (T(2) * st.b0 + equation_residual(st, model));
}

// ARD variance update (-1 + sqrt(1 + 8 lambda B)) / (4 lambda), evaluated as
// 2B / (1 + sqrt(1 + 8 lambda B)) to avoid cancellation at small lambda.
// lambda below 1e-12 uses the series limit alpha = B.
template <class T> T alpha_from_B(T B, T lambda) {
    if (lambda < T(1e-12)) return B;
    return T(2) * B / (T(1) + std::sqrt(T(1) + T(8) * lambda * B));
}

// precision-variant update alpha = B + kappa
template <class T> T alpha_from_B_precision(T B, T kappa) { return B + kappa; }

template <class T> Vec<T> update_alpha(const Vec<T>& B, T lambda) {
    Vec<T> a(B.size());
    for (Index j = 0; j < B.size(); ++j) a(j) = alpha_from_B(B(j), lambda);
    return a;
}

template <class T> Vec<T> update_alpha_precision_variant(const Vec<T>& B, T kappa) {
    Vec<T> a(B.size());
    for (Index j = 0; j < B.size(); ++j) a(j) = alpha_from_B_precision(B(j), kappa);
    return a;
}

// lambda from the current zeta, then zeta from the new lambda
template <class T> void update_lambda_zeta(InferenceState<T>& st) {
    const T n = T(st.alpha.size());
    st.lambda = n / (st.alpha.sum() + st.zeta);
    st.zeta = T(1) / st.lambda;
}

// Negative log posterior over (xi, theta) given the ARD hyper-parameters, constants dropped
template <class T>
T objective(const InferenceState<T>& st, const ModalDataset<T>& ds, const StructuralModel<T>& model,
            const NoDeduce<Vec<T>>& theta_u) {
    if (!(st.beta > 0) || !(st.eta > 0) || !(st.nu > 0) || !(st.rho.array() > 0).all() || !(st.tau.array() > 0).all())
        throw ConfigError("objective: precisions must be positive");
    const Index d = model.d, m = ds.m, q = ds.q, s = ds.s;
    const T dm = T(d * m), sqm = T(s * q * m);
    T J = (T(1) - st.a0) * std::log(st.beta) + st.b0 * st.beta;
    for (Index i = 0; i < m; ++i) {
        T dev = 0;
        for (Index r = 0; r < q; ++r) dev += sqr(ds.w2(r, i) - st.omega2(i));
        J += -T(0.5) * T(q) * std::log(st.rho(i)) + T(0.5) * st.rho(i) * dev;
        J -= std::log(st.tau(i)) - st.tau(i) * st.rho(i);
    }
    J += -T(0.5) * sqm * std::log(st.eta) + T(0.5) * st.eta * shape_residual(ds, st.Phi, d);
    J += -std::log(st.nu) + st.nu * st.eta;
    for (Index j = 0; j < model.n; ++j) {
        if (st.fixed[j] || st.alpha(j) == T(0)) continue;
        J += T(0.5) * sqr(theta_u(j) - st.theta(j)) / st.alpha(j);
    }
    J += -T(0.5) * dm * std::log(st.beta) + T(0.5) * st.beta * equation_residual(st, model);
    return J;
}

} // namespace hsbl
