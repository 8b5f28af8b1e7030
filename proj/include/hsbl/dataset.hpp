#pragma once

#include "common.hpp"

namespace hsbl {

// q segments of identified modal data at s sensors.
// omega_hat2 is segment-major (r*m + i); Psi_hat holds s components per (r, i).
template <class T> struct ModalDataset {
    Index q = 0;
    Index m = 0;
    Index s = 0;
    Vec<T> omega_hat2;
    Vec<T> Psi_hat;
    std::vector<Index> observed_dofs; // defines Gamma

    T w2(Index r, Index i) const { return omega_hat2(r * m + i); }
    auto psi(Index r, Index i) { return Psi_hat.segment((r * m + i) * s, s); }
    auto psi(Index r, Index i) const { return Psi_hat.segment((r * m + i) * s, s); }

    void validate(Index d) const {
        if (q < 3) throw ConfigError("dataset: insufficient segments, q >= 3 is required (q - 2 must be positive)");
        if (m < 1 || s < 1) throw ConfigError("dataset: need m >= 1 and s >= 1");
        if (s * q * m <= 2) throw ConfigError("dataset: insufficient mode-shape data, s*q*m must exceed 2");
        if (omega_hat2.size() != q * m) throw ConfigError("dataset: omega_hat2 must have q*m entries");
        if (Psi_hat.size() != q * m * s) throw ConfigError("dataset: Psi_hat must have q*m*s entries");
        if (static_cast<Index>(observed_dofs.size()) != s)
            throw ConfigError("dataset: observed_dofs must have s entries");
        for (Index k = 0; k < s; ++k) {
            if (observed_dofs[k] < 0 || observed_dofs[k] >= d)
                throw ConfigError("dataset: observed DOF out of range");
            if (k > 0 && observed_dofs[k] <= observed_dofs[k - 1])
                throw ConfigError("dataset: observed_dofs must be strictly increasing");
        }
        for (Index k = 0; k < omega_hat2.size(); ++k)
            if (!(omega_hat2(k) > T(0)) || !std::isfinite(omega_hat2(k)))
                throw ConfigError("dataset: identified squared frequencies must be positive and finite");
        if (!Psi_hat.allFinite()) throw ConfigError("dataset: mode shapes must be finite");
    }
};

// Unit-norm every segment mode shape and sign-align it to segment 0.
// With global_unit_norm the whole stacked vector is then rescaled to norm 1.
template <class T> void normalize_mode_shapes(ModalDataset<T>& ds, bool global_unit_norm = false) {
    for (Index i = 0; i < ds.m; ++i) {
        for (Index r = 0; r < ds.q; ++r) {
            auto v = ds.psi(r, i);
            T nrm = v.norm();
            if (nrm == T(0)) throw ConfigError("dataset: zero mode shape in segment " + std::to_string(r));
            v /= nrm;
            if (r > 0 && v.dot(ds.psi(0, i)) < T(0)) v = -v;
        }
    }
    if (global_unit_norm) ds.Psi_hat /= ds.Psi_hat.norm();
}

// Gamma^T Gamma diagonal: q on observed DOFs (same for every mode)
template <class T> Vec<T> gamma_diag(const ModalDataset<T>& ds, Index d) {
    Vec<T> g = Vec<T>::Zero(d);
    for (Index k = 0; k < ds.s; ++k) g(ds.observed_dofs[k]) = T(ds.q);
    return g;
}

// Gamma^T Psi_hat, stacked d*m
template <class T> Vec<T> gamma_t_psi(const ModalDataset<T>& ds, Index d) {
    Vec<T> out = Vec<T>::Zero(d * ds.m);
    for (Index r = 0; r < ds.q; ++r)
        for (Index i = 0; i < ds.m; ++i)
            for (Index k = 0; k < ds.s; ++k) out(i * d + ds.observed_dofs[k]) += ds.psi(r, i)(k);
    return out;
}

// ||Psi_hat - Gamma Phi||^2
template <class T> T shape_residual(const ModalDataset<T>& ds, const Vec<T>& Phi, Index d) {
    T acc = 0;
    for (Index r = 0; r < ds.q; ++r)
        for (Index i = 0; i < ds.m; ++i)
            for (Index k = 0; k < ds.s; ++k) acc += sqr(ds.psi(r, i)(k) - Phi(i * d + ds.observed_dofs[k]));
    return acc;
}

} // namespace hsbl
