#pragma once

#include "config.hpp"
#include "dataset.hpp"
#include "model.hpp"

namespace hsbl {

template <class T> struct InferenceState {
    Vec<T> theta;
    Vec<T> omega2;
    Vec<T> Phi;     // d*m, mode-major
    T beta = 1;
    T eta = 1;
    T nu = 1;
    Vec<T> rho;
    Vec<T> tau;
    Vec<T> alpha;   // ARD variances, 0 for pruned
    T lambda = 1;
    T zeta = 1;
    T a0 = 1;
    T b0 = 1;
    std::vector<bool> fixed; // pinned to theta_u

    bool eta_clamped = false;
    bool rho_clamped = false;

    Index n_free() const {
        Index k = 0;
        for (bool f : fixed) k += f ? 0 : 1;
        return k;
    }
    std::vector<Index> free_indices() const {
        std::vector<Index> idx;
        for (Index j = 0; j < static_cast<Index>(fixed.size()); ++j)
            if (!fixed[j]) idx.push_back(j);
        return idx;
    }
};

template <class T>
InferenceState<T> initialize(const ModalDataset<T>& ds, const StructuralModel<T>& model, const NoDeduce<Vec<T>>& theta_init,
                             const AlgorithmConfig<T>& cfg) {
    ds.validate(model.d);
    cfg.validate();
    if (theta_init.size() != model.n) throw ConfigError("initialize: theta_init has wrong length");
    const Index d = model.d, m = ds.m, q = ds.q, s = ds.s, n = model.n;
    const T dm = T(d * m);
    const T beta_num = dm + T(2) * (cfg.a0 - T(1));
    if (!(beta_num > 0)) throw ConfigError("initialize: d*m + 2(a0 - 1) must be positive");

    InferenceState<T> st;
    st.a0 = cfg.a0;
    st.b0 = cfg.b0;
    st.theta = theta_init;
    st.beta = cfg.fix_beta ? *cfg.fix_beta : cfg.beta_init_factor * beta_num / (T(2) * cfg.b0);
    st.eta = cfg.fix_eta ? *cfg.fix_eta : cfg.eta_init_factor * T(s * q * m - 2) / ds.Psi_hat.squaredNorm();
    st.nu = T(1) / st.eta;

    st.rho.resize(m);
    st.omega2.resize(m);
    for (Index i = 0; i < m; ++i) {
        T s4 = 0, s2 = 0;
        for (Index r = 0; r < q; ++r) {
            s4 += sqr(ds.w2(r, i));
            s2 += ds.w2(r, i);
        }
        if (cfg.fix_rho)
            st.rho(i) = *cfg.fix_rho;
        else if (cfg.fix_phi)
            st.rho(i) = *cfg.fix_phi * T(q) / s4;
        else
            st.rho(i) = cfg.rho_init_factor * T(q - 2) / s4;
        st.omega2(i) = s2 / T(q);
    }
    st.tau = st.rho.cwiseInverse();

    st.Phi = Vec<T>::Zero(d * m);
    for (Index i = 0; i < m; ++i)
        for (Index k = 0; k < s; ++k) {
            T acc = 0;
            for (Index r = 0; r < q; ++r) acc += ds.psi(r, i)(k);
            st.Phi(i * d + ds.observed_dofs[k]) = acc / T(q);
        }

    const T a_init = cfg.mode == Mode::Calibration ? cfg.alpha_init_large : T(n * n);
    st.alpha = Vec<T>::Constant(n, a_init);
    st.lambda = cfg.fix_lambda ? *cfg.fix_lambda : T(1);
    st.zeta = T(1);
    st.fixed.assign(n, false);
    return st;
}

} // namespace hsbl
