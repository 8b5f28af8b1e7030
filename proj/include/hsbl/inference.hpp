#pragma once

#include "uncertainty.hpp"

#include <optional>

namespace hsbl {

struct PruneEvent {
    Index component = 0;
    int sweep = 0;         // 1-based
    bool by_evidence = false;
};

template <class T> struct InferenceResult {
    Mode mode = Mode::Calibration;
    InferenceState<T> state_map;      // beta/eta/rho in the internal force unit
    Vec<T> theta_u;                   // anchor used in the theta update
    Mat<T> theta_cov;
    Vec<T> cov_theta;                 // fraction, 0 for pruned components
    CovSummary<T> cov_conditional;    // own-block c.o.v. of beta, eta, rho, theta
    std::optional<CovSummary<T>> cov_marginal;
    std::optional<Mat<T>> full_cov;
    std::vector<std::string> full_cov_labels;
    std::vector<T> objective_trace;
    std::vector<Vec<T>> theta_trace;
    std::vector<T> beta_trace;
    std::vector<PruneEvent> prune_log;
    int iterations = 0;
    bool converged = false;
    T force_unit = 1;
    std::vector<std::string> diagnostics;
};

// Components whose ARD variance maximizes the pseudo-evidence at zero:
// q_j^2 - s_j <= 2 lambda with s_j, q_j from D without component j.
// Applied sequentially, so later components see earlier removals.
template <class T>
std::vector<Index> evidence_prune_candidates(InferenceState<T>& st, const StructuralModel<T>& model,
                                             const Vec<T>& theta_u, T lambda) {
    std::vector<Index> out;
    const auto act = active_set(st);
    if (act.empty()) return out;
    const Mat<T> H = build_H(model, st.Phi);
    const Vec<T> b = build_b(model, st.omega2, st.Phi);
    const Mat<T> Hf = select_cols(H, act);
    const Vec<T> bf = reduced_rhs(H, b, st, theta_u, act);
    const Index k = static_cast<Index>(act.size());
    const Mat<T> G = Hf.transpose() * Hf;
    Eigen::LLT<Mat<T>> llt(G);
    if (llt.info() != Eigen::Success) return out;
    const Mat<T> C = llt.solve(Mat<T>::Identity(k, k)) / st.beta;
    Vec<T> y(k);
    const Vec<T> mu = llt.solve(Hf.transpose() * bf);
    for (Index c = 0; c < k; ++c) y(c) = theta_u(act[c]) - mu(c);
    Vec<T> a(k);
    for (Index c = 0; c < k; ++c) a(c) = st.alpha(act[c]);
    for (Index c = 0; c < k; ++c) {
        Mat<T> D = C;
        for (Index r = 0; r < k; ++r)
            if (r != c) D(r, r) += a(r);
        Eigen::LLT<Mat<T>> dl(D);
        if (dl.info() != Eigen::Success) continue;
        const Vec<T> e = Vec<T>::Unit(k, c);
        const T sj = e.dot(dl.solve(e));
        const T qj = e.dot(dl.solve(y));
        if (qj * qj - sj <= T(2) * lambda) {
            a(c) = 0;
            st.alpha(act[c]) = 0;
            out.push_back(act[c]);
        }
    }
    return out;
}

namespace detail {

template <class T> T max_abs_log_change(const std::vector<T>& a, const std::vector<T>& b) {
    T mx = 0;
    for (size_t k = 0; k < a.size(); ++k) mx = std::max(mx, std::abs(std::log(a[k]) - std::log(b[k])));
    return mx;
}

template <class T> std::vector<T> free_hypers(const InferenceState<T>& st, const AlgorithmConfig<T>& cfg) {
    std::vector<T> h;
    if (!cfg.fix_beta) h.push_back(st.beta);
    if (!cfg.fix_eta) h.push_back(st.eta);
    if (!cfg.fix_rho && !cfg.fix_phi)
        for (Index i = 0; i < st.rho.size(); ++i) h.push_back(st.rho(i));
    return h;
}

template <class T>
InferenceResult<T> run(const ModalDataset<T>& ds, const StructuralModel<T>& model_si, const Vec<T>& theta_start,
                       const Vec<T>& theta_u, const AlgorithmConfig<T>& cfg) {
    model_si.validate();
    const StructuralModel<T> model = model_si.scaled(cfg.force_unit);
    InferenceState<T> st = initialize(ds, model, theta_start, cfg);
    if (theta_u.size() != model.n) throw ConfigError("run: anchor theta has wrong length");
    const bool monitoring = cfg.mode == Mode::Monitoring;
    const bool variance = cfg.hyper_variant == HyperVariant::VarianceExponential;

    InferenceResult<T> res;
    res.mode = cfg.mode;
    res.theta_u = theta_u;
    res.force_unit = cfg.force_unit;

    std::vector<T> hyp_prev = free_hypers(st, cfg);
    for (int it = 0; it < cfg.max_iterations; ++it) {
        st.Phi = update_mode_shapes(st, ds, model);
        if (!cfg.fix_eta) update_eta(st, ds, model.d, cfg.eta_max);
        st.omega2 = update_frequencies(st, ds, model);
        if (!cfg.fix_rho && !cfg.fix_phi) update_rho(st, ds, cfg.rho_max);
        const Vec<T> theta_old = st.theta;
        st.theta = update_theta(st, ds, model, theta_u);
        if (!cfg.fix_beta) st.beta = update_beta(st, model);

        res.objective_trace.push_back(objective(st, ds, model, theta_u));
        res.theta_trace.push_back(st.theta);
        res.beta_trace.push_back(st.beta);
        res.iterations = it + 1;

        bool conv = false;
        if (!monitoring) {
            const T dth = (st.theta - theta_old).cwiseAbs().maxCoeff();
            const std::vector<T> hyp = free_hypers(st, cfg);
            const T dh = max_abs_log_change(hyp, hyp_prev);
            hyp_prev = hyp;
            conv = dth < cfg.tol_theta && dh < cfg.tol_log_hyper;
        } else {
            const Mat<T> H = build_H(model, st.Phi);
            const Mat<T> Sig = theta_covariance(st.beta, H, st.alpha, st.fixed);
            const Vec<T> B = ard_B(Sig, theta_u, st.theta);
            T dla = 0;
            for (Index j = 0; j < model.n; ++j) {
                if (st.fixed[j]) {
                    st.alpha(j) = 0;
                    continue;
                }
                const T a_new = variance ? alpha_from_B(B(j), st.lambda) : alpha_from_B_precision(B(j), cfg.kappa);
                if (st.alpha(j) > T(0) && a_new > T(0))
                    dla = std::max(dla, std::abs(std::log(a_new) - std::log(st.alpha(j))));
                else
                    dla = std::numeric_limits<T>::infinity();
                st.alpha(j) = a_new;
            }
            if (variance && !cfg.fix_lambda) update_lambda_zeta(st);

            const bool armed = it >= cfg.min_sweeps_before_prune;
            bool pruned_now = false;
            std::vector<Index> by_evidence;
            if (armed && variance && cfg.evidence_prune && dla < cfg.tol_log_alpha)
                by_evidence = evidence_prune_candidates(st, model, theta_u, st.lambda);
            if (armed) {
                for (Index j = 0; j < model.n; ++j) {
                    if (st.fixed[j] || !(st.alpha(j) < cfg.alpha_min)) continue;
                    st.fixed[j] = true;
                    st.alpha(j) = 0;
                    st.theta(j) = theta_u(j);
                    const bool ev = std::find(by_evidence.begin(), by_evidence.end(), j) != by_evidence.end();
                    res.prune_log.push_back({j, it + 1, ev});
                    pruned_now = true;
                }
            }
            if (st.n_free() == 0) conv = true;
            else conv = armed && dla < cfg.tol_log_alpha && !pruned_now;
        }
        if (conv) {
            res.converged = true;
            break;
        }
    }
    if (st.eta_clamped) res.diagnostics.push_back("noise-free data: eta clamped at eta_max");
    if (st.rho_clamped) res.diagnostics.push_back("noise-free data: rho clamped at rho_max");
    if (monitoring && st.n_free() == 0) res.diagnostics.push_back("all components pruned");

    const Mat<T> H = build_H(model, st.Phi);
    res.theta_cov = theta_covariance(st.beta, H, st.alpha, st.fixed);
    const JointHessian<T> jh = joint_hessian(st, ds, model, theta_u);
    res.cov_conditional = conditional_cov(jh, st, res.theta_cov);
    res.cov_theta = res.cov_conditional.theta;
    try {
        const JointCovariance<T> jc = joint_covariance(jh);
        res.cov_marginal = marginal_cov(jc, st);
        res.full_cov = jc.cov;
        res.full_cov_labels = jc.labels;
    } catch (const NumericalError& e) {
        res.diagnostics.push_back(e.what());
    }
    res.state_map = std::move(st);
    return res;
}

} // namespace detail

// Calibration: alpha pinned large, theta_init doubles as the (negligible) anchor
template <class T>
InferenceResult<T> run_calibration(const ModalDataset<T>& ds, const StructuralModel<T>& model, const NoDeduce<Vec<T>>& theta_init,
                                   const AlgorithmConfig<T>& cfg) {
    if (cfg.mode != Mode::Calibration) throw ConfigError("run_calibration: config mode must be calibration");
    return detail::run(ds, model, theta_init, theta_init, cfg);
}

// Monitoring: starts at and is anchored to the calibration MAP theta_u
template <class T>
InferenceResult<T> run_monitoring(const ModalDataset<T>& ds, const StructuralModel<T>& model, const NoDeduce<Vec<T>>& theta_u,
                                  const AlgorithmConfig<T>& cfg) {
    if (cfg.mode != Mode::Monitoring) throw ConfigError("run_monitoring: config mode must be monitoring");
    return detail::run(ds, model, theta_u, theta_u, cfg);
}

} // namespace hsbl
