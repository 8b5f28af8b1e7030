#pragma once

#include "common.hpp"

#include <optional>

namespace hsbl {

enum class Mode { Calibration, Monitoring };
enum class HyperVariant { VarianceExponential, PrecisionExponential };

template <class T> struct AlgorithmConfig {
    Mode mode = Mode::Calibration;
    HyperVariant hyper_variant = HyperVariant::VarianceExponential;
    T kappa = 0;               // precision-variant rate
    T alpha_min = 1e-9;        // pruning threshold
    T tol_theta = 1e-3;        // calibration: max |d theta|
    T tol_log_alpha = 5e-3;    // monitoring: max |d log alpha|
    T tol_log_hyper = 5e-3;    // calibration: max |d log| over beta, eta, rho
    int max_iterations = 2000;
    T a0 = 1;
    T b0 = 1;
    T alpha_init_large = 1e9;
    T eta_max = 1e12;
    T rho_max = 1e12;
    T force_unit = 1e7;        // M and K are divided by this inside the runs
    int min_sweeps_before_prune = 2;
    bool evidence_prune = true; // pseudo-evidence test at apparent convergence
    T beta_init_factor = 1;    // multiplies the prior-only beta start
    T eta_init_factor = 1;
    T rho_init_factor = 1;

    // fixed hyper-parameters (comparison mode)
    std::optional<T> fix_beta;
    std::optional<T> fix_eta;
    std::optional<T> fix_rho;    // same value for every mode
    std::optional<T> fix_phi;    // normalized: rho_i = phi * q / sum_r omega_hat^4
    std::optional<T> fix_lambda; // 0 gives the classic uniform hyper-prior

    static AlgorithmConfig calibration() {
        AlgorithmConfig c;
        c.mode = Mode::Calibration;
        c.b0 = 1;
        return c;
    }
    static AlgorithmConfig monitoring() {
        AlgorithmConfig c;
        c.mode = Mode::Monitoring;
        c.b0 = T(0.1);
        return c;
    }

    void validate() const {
        if (!(alpha_min > 0) || !(tol_theta > 0) || !(tol_log_alpha > 0) || !(tol_log_hyper > 0))
            throw ConfigError("config: tolerances and alpha_min must be positive");
        if (max_iterations < 1) throw ConfigError("config: max_iterations must be >= 1");
        if (!(b0 > 0)) throw ConfigError("config: b0 must be positive");
        if (!(a0 > 0)) throw ConfigError("config: a0 must be positive");
        if (kappa < 0) throw ConfigError("config: kappa must be nonnegative");
        if (!(force_unit > 0)) throw ConfigError("config: force_unit must be positive");
        if (!(alpha_init_large > 0)) throw ConfigError("config: alpha_init_large must be positive");
        if (fix_lambda && *fix_lambda < 0) throw ConfigError("config: lambda must be nonnegative");
        for (auto v : {fix_beta, fix_eta, fix_rho, fix_phi})
            if (v && !(*v > 0)) throw ConfigError("config: fixed hyper-parameters must be positive");
        if (fix_rho && fix_phi) throw ConfigError("config: fix either rho or phi, not both");
    }
};

} // namespace hsbl
