#pragma once

#include "common.hpp"

#include <Eigen/Eigenvalues>

namespace hsbl {

// K(theta) = K0 + sum_j theta_j Ksub[j]
template <class T> struct StructuralModel {
    Index d = 0;              // degrees of freedom
    Index n = 0;              // substructures
    Mat<T> M;                 // mass (kg)
    Mat<T> K0;                // base stiffness (N/m)
    std::vector<Mat<T>> Ksub; // nominal substructure stiffness (N/m)

    void validate() const {
        if (d < 1 || n < 1) throw ConfigError("model: need d >= 1 and n >= 1");
        if (M.rows() != d || M.cols() != d || K0.rows() != d || K0.cols() != d)
            throw ConfigError("model: M and K0 must be d x d");
        if (static_cast<Index>(Ksub.size()) != n)
            throw ConfigError("model: expected n substructure matrices");
        for (const auto& K : Ksub)
            if (K.rows() != d || K.cols() != d) throw ConfigError("model: substructure matrix is not d x d");
        if (asymmetry(M) > T(1e-10)) throw ConfigError("model: mass matrix not symmetric");
        if (asymmetry(K0) > T(1e-10)) throw ConfigError("model: K0 not symmetric");
        for (Index j = 0; j < n; ++j)
            if (asymmetry(Ksub[j]) > T(1e-10))
                throw ConfigError("model: substructure matrix " + std::to_string(j) + " not symmetric");
        Eigen::LLT<Mat<T>> llt(M);
        if (llt.info() != Eigen::Success) throw ConfigError("model: mass matrix not positive definite");
    }

    // divide M and all stiffness matrices by c; eigenvalues are unchanged
    StructuralModel scaled(T c) const {
        StructuralModel out = *this;
        out.M /= c;
        out.K0 /= c;
        for (auto& K : out.Ksub) K /= c;
        return out;
    }
};

// omega2 (m) and mode-major stacked Phi (d*m)
template <class T> struct SystemModalState {
    Vec<T> omega2;
    Vec<T> Phi;
};

template <class T> Mat<T> assemble_stiffness(const StructuralModel<T>& model, const NoDeduce<Vec<T>>& theta) {
    if (theta.size() != model.n) throw ConfigError("assemble_stiffness: theta has wrong length");
    Mat<T> K = model.K0;
    for (Index j = 0; j < model.n; ++j) K.noalias() += theta(j) * model.Ksub[j];
    if (asymmetry(K) > T(1e-10)) throw ConfigError("assemble_stiffness: K(theta) not symmetric");
    return K;
}

namespace detail {
template <class T> void check_phi(const StructuralModel<T>& model, const NoDeduce<Vec<T>>& Phi) {
    if (Phi.size() == 0 || Phi.size() % model.d != 0)
        throw ConfigError("Phi length must be a positive multiple of d");
}
} // namespace detail

// (d*m) x n, block (i,j) = K_j Phi_i
template <class T> Mat<T> build_H(const StructuralModel<T>& model, const NoDeduce<Vec<T>>& Phi) {
    detail::check_phi(model, Phi);
    const Index d = model.d, m = Phi.size() / d;
    Mat<T> H(d * m, model.n);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < model.n; ++j)
            H.col(j).segment(i * d, d).noalias() = model.Ksub[j] * Phi.segment(i * d, d);
    return H;
}

// block i = (omega_i^2 M - K0) Phi_i
template <class T> Vec<T> build_b(const StructuralModel<T>& model, const NoDeduce<Vec<T>>& omega2, const NoDeduce<Vec<T>>& Phi) {
    detail::check_phi(model, Phi);
    const Index d = model.d, m = Phi.size() / d;
    if (omega2.size() != m) throw ConfigError("build_b: omega2 length must equal mode count");
    Vec<T> b(d * m);
    for (Index i = 0; i < m; ++i)
        b.segment(i * d, d).noalias() = (omega2(i) * model.M - model.K0) * Phi.segment(i * d, d);
    return b;
}

// block-diagonal, block i = (K - omega_i^2 M)^2
template <class T> Mat<T> build_F(const StructuralModel<T>& model, const NoDeduce<Vec<T>>& theta, const NoDeduce<Vec<T>>& omega2) {
    const Index d = model.d, m = omega2.size();
    const Mat<T> K = assemble_stiffness(model, theta);
    Mat<T> F = Mat<T>::Zero(d * m, d * m);
    for (Index i = 0; i < m; ++i) {
        const Mat<T> R = K - omega2(i) * model.M;
        F.block(i * d, i * d, d, d).noalias() = R * R;
    }
    return F;
}

// (d*m) x m, column i holds M Phi_i in block i
template <class T> Mat<T> build_G(const StructuralModel<T>& model, const NoDeduce<Vec<T>>& Phi) {
    detail::check_phi(model, Phi);
    const Index d = model.d, m = Phi.size() / d;
    Mat<T> G = Mat<T>::Zero(d * m, m);
    for (Index i = 0; i < m; ++i) G.col(i).segment(i * d, d).noalias() = model.M * Phi.segment(i * d, d);
    return G;
}

// block i = K(theta) Phi_i
template <class T> Vec<T> build_c(const StructuralModel<T>& model, const NoDeduce<Vec<T>>& theta, const NoDeduce<Vec<T>>& Phi) {
    detail::check_phi(model, Phi);
    const Index d = model.d, m = Phi.size() / d;
    const Mat<T> K = assemble_stiffness(model, theta);
    Vec<T> c(d * m);
    for (Index i = 0; i < m; ++i) c.segment(i * d, d).noalias() = K * Phi.segment(i * d, d);
    return c;
}

// flip v so that its first component of largest magnitude is positive
template <class T> void fix_sign(Eigen::Ref<Vec<T>> v) {
    if (v.size() == 0) return;
    const T vmax = v.cwiseAbs().maxCoeff();
    for (Index k = 0; k < v.size(); ++k) {
        if (std::abs(v(k)) >= vmax * (T(1) - T(1e-10))) {
            if (v(k) < T(0)) v = -v;
            return;
        }
    }
}

// m lowest eigenpairs of K(theta) Phi = omega^2 M Phi, unit-norm shapes
template <class T> SystemModalState<T> eigen_solve(const StructuralModel<T>& model, const NoDeduce<Vec<T>>& theta, Index m) {
    if (m < 1 || m > model.d) throw ConfigError("eigen_solve: mode count must be in [1, d]");
    Eigen::LLT<Mat<T>> llt(model.M);
    if (llt.info() != Eigen::Success) throw ConfigError("eigen_solve: mass matrix not positive definite");
    const Mat<T> K = assemble_stiffness(model, theta);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat<T>> es(K, model.M, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw NumericalError("eigen_solve: eigensolver did not converge");
    SystemModalState<T> out;
    out.omega2 = es.eigenvalues().head(m);
    out.Phi.resize(model.d * m);
    for (Index i = 0; i < m; ++i) {
        Vec<T> v = es.eigenvectors().col(i);
        v.normalize();
        fix_sign<T>(v);
        out.Phi.segment(i * model.d, model.d) = v;
    }
    return out;
}

// entry i = ||(K(theta) - omega_i^2 M) Phi_i||
template <class T>
Vec<T> eigen_residuals(const StructuralModel<T>& model, const NoDeduce<Vec<T>>& theta, const SystemModalState<T>& state) {
    detail::check_phi(model, state.Phi);
    const Index d = model.d, m = state.omega2.size();
    const Mat<T> K = assemble_stiffness(model, theta);
    Vec<T> r(m);
    for (Index i = 0; i < m; ++i) r(i) = ((K - state.omega2(i) * model.M) * state.Phi.segment(i * d, d)).norm();
    return r;
}

} // namespace hsbl
