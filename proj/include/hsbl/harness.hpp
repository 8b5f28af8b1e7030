#pragma once

// Calibration sweeps on the shear building over modes, segments, sensor layouts and initial values.

#include "io.hpp"

namespace hsbl {

struct HarnessConfig {
    ShearBuildingSpec<double> building;
    std::vector<Index> modes{3, 4, 5};
    std::vector<Index> segments{3};
    std::vector<std::vector<Index>> sensor_sets{all_dofs<double>(10)};
    std::vector<std::string> sensor_names{"full"};
    NoiseSpec<double> noise;
    std::vector<double> init_factors{0.1, 1, 10, 100};
    bool sweep_all_hypers = false; // false: only beta's start is scaled
    std::vector<std::uint64_t> seeds{0};
    AlgorithmConfig<double> base = AlgorithmConfig<double>::calibration();
};

inline std::vector<Index> sensors_from_json(const io::json& j, Index d, std::string& name) {
    if (j.is_string()) {
        name = j.get<std::string>();
        if (name == "full") return all_dofs<double>(d);
        if (name == "partial") {
            if (d != 10) throw ConfigError("harness: the partial layout is defined for 10 stories");
            return partial_sensors_10();
        }
        throw ConfigError("harness: sensors must be full, partial or a list of 1-based floors");
    }
    std::vector<Index> ids;
    name = "custom";
    for (Index k : j.get<std::vector<Index>>()) ids.push_back(k - 1);
    return ids;
}

inline HarnessConfig harness_from_json(const io::json& j) {
    HarnessConfig h;
    try {
        if (j.contains("building")) {
            const auto& b = j.at("building");
            h.building = b.is_string() ? io::named_building(b.get<std::string>()) : io::shear_spec_from(b);
        }
        const Index d = h.building.stories;
        h.sensor_sets = {all_dofs<double>(d)};
        if (j.contains("modes")) h.modes = j.at("modes").get<std::vector<Index>>();
        if (j.contains("segments")) h.segments = j.at("segments").get<std::vector<Index>>();
        if (j.contains("sensors")) {
            h.sensor_sets.clear();
            h.sensor_names.clear();
            const auto& s = j.at("sensors");
            const bool many = s.is_array() && !s.empty() && (s.front().is_string() || s.front().is_array());
            auto add = [&](const io::json& x) {
                std::string nm;
                h.sensor_sets.push_back(sensors_from_json(x, d, nm));
                h.sensor_names.push_back(nm);
            };
            if (many)
                for (const auto& x : s) add(x);
            else
                add(s);
        }
        if (j.contains("noise")) {
            const auto& n = j.at("noise");
            if (n.is_number()) {
                h.noise.freq_cov = h.noise.shape_cov = n.get<double>();
            } else {
                if (n.contains("freq_cov")) h.noise.freq_cov = n.at("freq_cov").get<double>();
                if (n.contains("shape_cov")) h.noise.shape_cov = n.at("shape_cov").get<double>();
                if (n.contains("seed")) h.noise.seed = n.at("seed").get<std::uint64_t>();
                if (n.contains("noise_on"))
                    h.noise.noise_on = n.at("noise_on").get<std::string>() == "omega2" ? NoiseOn::Omega2 : NoiseOn::Omega;
                if (n.contains("shape_scale"))
                    h.noise.shape_scale = n.at("shape_scale").get<std::string>() == "per_component"
                                              ? ShapeNoiseScale::PerComponent
                                              : ShapeNoiseScale::Rms;
            }
        }
        h.seeds = {h.noise.seed};
        if (j.contains("sweeps")) {
            const auto& s = j.at("sweeps");
            if (s.contains("init_factors")) h.init_factors = s.at("init_factors").get<std::vector<double>>();
            if (s.contains("target")) h.sweep_all_hypers = s.at("target").get<std::string>() == "all";
            if (s.contains("seeds")) h.seeds = s.at("seeds").get<std::vector<std::uint64_t>>();
        }
        if (j.contains("config")) h.base = io::config_from_json(j.at("config"), Mode::Calibration);
    } catch (const io::json::exception& e) {
        throw ConfigError(std::string("harness config: ") + e.what());
    }
    for (Index q : h.segments)
        if (q < 3) throw ConfigError("harness: q >= 3 segments are required");
    return h;
}

struct HarnessOutput {
    io::Table table;                          // MAP and c.o.v. per run and parameter
    std::map<std::string, io::Table> traces;  // iteration histories (init factor 1 runs)
};

inline HarnessOutput example1_harness(const HarnessConfig& h) {
    const auto model = shear_building_model(h.building);
    const Vec<double> truth = Vec<double>::Ones(model.n);
    HarnessOutput out;
    out.table.header = {"sensors", "m", "q", "seed", "init_factor", "param", "map", "cov_percent",
                        "iterations", "converged"};
    for (size_t si = 0; si < h.sensor_sets.size(); ++si)
        for (Index m : h.modes)
            for (Index q : h.segments)
                for (std::uint64_t seed : h.seeds) {
                    NoiseSpec<double> ns = h.noise;
                    ns.seed = seed;
                    const auto ds = simulate_modal_data(model, truth, m, q, h.sensor_sets[si], ns);
                    const Vec<double> th0 = random_theta_init<double>(model.n, seed);
                    for (double f : h.init_factors) {
                        auto cfg = h.base;
                        cfg.beta_init_factor = f;
                        if (h.sweep_all_hypers) cfg.eta_init_factor = cfg.rho_init_factor = f;
                        const auto r = run_calibration(ds, model, th0, cfg);
                        const auto& st = r.state_map;
                        const auto& c = r.cov_conditional;
                        auto row = [&](const std::string& p, double v, double cv) {
                            out.table.rows.push_back({h.sensor_names[si], std::to_string(m), std::to_string(q),
                                                      std::to_string(seed), io::fmt(f), p, io::fmt(v),
                                                      io::fmt(100.0 * cv), std::to_string(r.iterations),
                                                      r.converged ? "1" : "0"});
                        };
                        for (Index j = 0; j < model.n; ++j) row("theta_" + std::to_string(j + 1), st.theta(j), c.theta(j));
                        row("beta", st.beta, c.beta);
                        row("eta", st.eta, c.eta);
                        for (Index i = 0; i < m; ++i) {
                            double s4 = 0;
                            for (Index r2 = 0; r2 < q; ++r2) s4 += sqr(ds.w2(r2, i));
                            row("phi_" + std::to_string(i + 1), st.rho(i) * s4 / double(q), c.rho(i));
                        }
                        if (f == 1.0)
                            out.traces["trace_" + h.sensor_names[si] + "_m" + std::to_string(m) + "_q" +
                                       std::to_string(q) + "_seed" + std::to_string(seed) + ".csv"] = io::trace_table(r);
                    }
                }
    return out;
}

} // namespace hsbl
