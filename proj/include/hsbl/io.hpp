#pragma once

// JSON/CSV persistence for models, datasets, configs and results (double precision).

#include "damage.hpp"
#include "inference.hpp"
#include "synthetic.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace hsbl::io {

using json = nlohmann::json;
using Model = StructuralModel<double>;
using Dataset = ModalDataset<double>;
using Config = AlgorithmConfig<double>;
using Result = InferenceResult<double>;

inline std::string fmt(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

inline json parse(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

inline json read_json(const std::string& path) { return parse(read_text(path), path); }

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

template <class J> double num(const J& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw ConfigError(std::string("missing numeric field '") + key + "'");
    return j.at(key).template get<double>();
}

inline Mat<double> matrix_from(const json& j, Index d, const std::string& what) {
    std::vector<double> v;
    if (j.is_array() && !j.empty() && j.front().is_array()) {
        for (const auto& row : j)
            for (const auto& x : row) v.push_back(x.get<double>());
    } else {
        v = j.get<std::vector<double>>();
    }
    if (static_cast<Index>(v.size()) != d * d) throw ConfigError(what + ": expected d*d entries");
    Mat<double> M(d, d);
    for (Index r = 0; r < d; ++r)
        for (Index c = 0; c < d; ++c) M(r, c) = v[r * d + c];
    return M;
}

inline json matrix_to(const Mat<double>& M) {
    std::vector<double> v;
    for (Index r = 0; r < M.rows(); ++r)
        for (Index c = 0; c < M.cols(); ++c) v.push_back(M(r, c));
    return v;
}

inline json vec_to(const Vec<double>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vec<double> vec_from(const json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::Map<Vec<double>>(v.data(), static_cast<Index>(v.size()));
}

inline ShearBuildingSpec<double> shear_spec_from(const json& j) {
    ShearBuildingSpec<double> s;
    if (j.contains("stories")) s.stories = j.at("stories").get<Index>();
    auto list = [](const json& x) {
        return x.is_array() ? x.get<std::vector<double>>() : std::vector<double>{x.get<double>()};
    };
    if (j.contains("floor_mass")) s.floor_mass = list(j.at("floor_mass"));
    if (j.contains("story_stiffness")) s.story_stiffness = list(j.at("story_stiffness"));
    s.validate();
    return s;
}

// "shear10" style names: uniform 100 t floors, 176.729 MN/m stories
inline ShearBuildingSpec<double> named_building(const std::string& name) {
    if (name.rfind("shear", 0) != 0) throw ConfigError("unknown building '" + name + "'");
    ShearBuildingSpec<double> s;
    try {
        s.stories = std::stol(name.substr(5));
    } catch (...) {
        throw ConfigError("unknown building '" + name + "'");
    }
    s.validate();
    return s;
}

inline Model model_from_json(const json& j) {
    try {
        if (j.contains("shear_building")) {
            const auto& sb = j.at("shear_building");
            return shear_building_model(sb.is_string() ? named_building(sb.get<std::string>()) : shear_spec_from(sb));
        }
        Model m;
        m.d = j.at("d").get<Index>();
        m.n = j.at("n").get<Index>();
        if (m.d < 1 || m.n < 1) throw ConfigError("model: need d >= 1 and n >= 1");
        m.M = matrix_from(j.at("M"), m.d, "M");
        m.K0 = j.contains("K0") ? matrix_from(j.at("K0"), m.d, "K0") : Mat<double>::Zero(m.d, m.d);
        for (const auto& k : j.at("Ksub")) m.Ksub.push_back(matrix_from(k, m.d, "Ksub"));
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

inline json model_to_json(const Model& m) {
    json j;
    j["d"] = m.d;
    j["n"] = m.n;
    j["M"] = matrix_to(m.M);
    j["K0"] = matrix_to(m.K0);
    j["Ksub"] = json::array();
    for (const auto& k : m.Ksub) j["Ksub"].push_back(matrix_to(k));
    return j;
}

inline Dataset dataset_from_json(const json& j, bool global_unit_norm = false) {
    try {
        Dataset ds;
        ds.q = j.at("q").get<Index>();
        ds.m = j.at("m").get<Index>();
        ds.observed_dofs = j.at("observed_dofs").get<std::vector<Index>>();
        ds.s = j.contains("s") ? j.at("s").get<Index>() : static_cast<Index>(ds.observed_dofs.size());
        if (ds.q < 3) throw ConfigError("dataset: insufficient segments, q >= 3 is required (q - 2 must be positive)");
        const auto& segs = j.at("segments");
        if (static_cast<Index>(segs.size()) != ds.q) throw ConfigError("dataset: expected q segments");
        const bool hz = j.contains("units") && j.at("units").get<std::string>() == "hz";
        const double two_pi = 2.0 * 3.14159265358979323846;
        ds.omega_hat2.resize(ds.q * ds.m);
        ds.Psi_hat.resize(ds.q * ds.m * ds.s);
        for (Index r = 0; r < ds.q; ++r) {
            const auto& sg = segs.at(r);
            const auto w = sg.at(hz ? "frequency_hz" : "omega2").get<std::vector<double>>();
            const auto& shapes = sg.at("mode_shapes");
            if (static_cast<Index>(w.size()) != ds.m || static_cast<Index>(shapes.size()) != ds.m)
                throw ConfigError("dataset: segment " + std::to_string(r) + " must hold m modes");
            for (Index i = 0; i < ds.m; ++i) {
                ds.omega_hat2(r * ds.m + i) = hz ? sqr(two_pi * w[i]) : w[i];
                const auto v = shapes.at(i).get<std::vector<double>>();
                if (static_cast<Index>(v.size()) != ds.s)
                    throw ConfigError("dataset: mode shape must have s components");
                for (Index k = 0; k < ds.s; ++k) ds.psi(r, i)(k) = v[k];
            }
        }
        normalize_mode_shapes(ds, global_unit_norm);
        return ds;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("dataset: ") + e.what());
    }
}

inline json dataset_to_json(const Dataset& ds) {
    json j;
    j["q"] = ds.q;
    j["m"] = ds.m;
    j["s"] = ds.s;
    j["observed_dofs"] = ds.observed_dofs;
    j["segments"] = json::array();
    for (Index r = 0; r < ds.q; ++r) {
        json sg;
        std::vector<double> w;
        json shapes = json::array();
        for (Index i = 0; i < ds.m; ++i) {
            w.push_back(ds.w2(r, i));
            shapes.push_back(vec_to(ds.psi(r, i)));
        }
        sg["omega2"] = w;
        sg["mode_shapes"] = shapes;
        j["segments"].push_back(sg);
    }
    return j;
}

// Config keys mirror AlgorithmConfig; unknown keys are rejected.
inline Config config_from_json(const json& j, Mode mode) {
    Config c = mode == Mode::Calibration ? Config::calibration() : Config::monitoring();
    if (j.is_null()) return c;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "hyper_variant") {
                const auto s = v.get<std::string>();
                if (s == "variance") c.hyper_variant = HyperVariant::VarianceExponential;
                else if (s == "precision") c.hyper_variant = HyperVariant::PrecisionExponential;
                else throw ConfigError("config: hyper_variant must be variance or precision");
            } else if (key == "kappa") c.kappa = v.get<double>();
            else if (key == "alpha_min") c.alpha_min = v.get<double>();
            else if (key == "tol_theta") c.tol_theta = v.get<double>();
            else if (key == "tol_log_alpha") c.tol_log_alpha = v.get<double>();
            else if (key == "tol_log_hyper") c.tol_log_hyper = v.get<double>();
            else if (key == "max_iterations") c.max_iterations = v.get<int>();
            else if (key == "a0") c.a0 = v.get<double>();
            else if (key == "b0") c.b0 = v.get<double>();
            else if (key == "alpha_init_large") c.alpha_init_large = v.get<double>();
            else if (key == "eta_max") c.eta_max = v.get<double>();
            else if (key == "rho_max") c.rho_max = v.get<double>();
            else if (key == "force_unit") c.force_unit = v.get<double>();
            else if (key == "min_sweeps_before_prune") c.min_sweeps_before_prune = v.get<int>();
            else if (key == "evidence_prune") c.evidence_prune = v.get<bool>();
            else if (key == "beta_init_factor") c.beta_init_factor = v.get<double>();
            else if (key == "eta_init_factor") c.eta_init_factor = v.get<double>();
            else if (key == "rho_init_factor") c.rho_init_factor = v.get<double>();
            else if (key == "lambda") c.fix_lambda = v.get<double>();
            else if (key == "fix_hypers") {
                for (const auto& [hk, hv] : v.items()) {
                    const double x = hv.get<double>();
                    if (hk == "beta") c.fix_beta = x;
                    else if (hk == "eta") c.fix_eta = x;
                    else if (hk == "rho") c.fix_rho = x;
                    else if (hk == "phi") c.fix_phi = x;
                    else throw ConfigError("config: unknown fixed hyper-parameter '" + hk + "'");
                }
            } else if (key == "mode" || key == "variance_pairing" || key == "f_grid") {
                // read by other stages
            } else {
                throw ConfigError("config: unknown key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline json config_to_json(const Config& c) {
    json j;
    j["mode"] = c.mode == Mode::Calibration ? "calibration" : "monitoring";
    j["hyper_variant"] = c.hyper_variant == HyperVariant::VarianceExponential ? "variance" : "precision";
    j["kappa"] = c.kappa;
    j["alpha_min"] = c.alpha_min;
    j["tol_theta"] = c.tol_theta;
    j["tol_log_alpha"] = c.tol_log_alpha;
    j["tol_log_hyper"] = c.tol_log_hyper;
    j["max_iterations"] = c.max_iterations;
    j["a0"] = c.a0;
    j["b0"] = c.b0;
    j["alpha_init_large"] = c.alpha_init_large;
    j["eta_max"] = c.eta_max;
    j["rho_max"] = c.rho_max;
    j["force_unit"] = c.force_unit;
    j["min_sweeps_before_prune"] = c.min_sweeps_before_prune;
    j["evidence_prune"] = c.evidence_prune;
    j["beta_init_factor"] = c.beta_init_factor;
    j["eta_init_factor"] = c.eta_init_factor;
    j["rho_init_factor"] = c.rho_init_factor;
    if (c.fix_lambda) j["lambda"] = *c.fix_lambda;
    json fx = json::object();
    if (c.fix_beta) fx["beta"] = *c.fix_beta;
    if (c.fix_eta) fx["eta"] = *c.fix_eta;
    if (c.fix_rho) fx["rho"] = *c.fix_rho;
    if (c.fix_phi) fx["phi"] = *c.fix_phi;
    if (!fx.empty()) j["fix_hypers"] = fx;
    return j;
}

inline json cov_summary_to(const CovSummary<double>& c) {
    return json{{"beta", c.beta}, {"eta", c.eta}, {"rho", vec_to(c.rho)}, {"theta", vec_to(c.theta)}};
}

inline json result_to_json(const Result& r) {
    const auto& st = r.state_map;
    json j;
    j["mode"] = r.mode == Mode::Calibration ? "calibration" : "monitoring";
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["force_unit"] = r.force_unit;
    j["theta"] = vec_to(st.theta);
    j["theta_u"] = vec_to(r.theta_u);
    j["theta_cov"] = matrix_to(r.theta_cov);
    j["cov_theta"] = vec_to(r.cov_theta);
    j["omega2"] = vec_to(st.omega2);
    std::vector<double> hz;
    for (Index i = 0; i < st.omega2.size(); ++i) hz.push_back(std::sqrt(st.omega2(i)) / (2.0 * 3.14159265358979323846));
    j["frequency_hz"] = hz;
    j["beta"] = st.beta;
    j["eta"] = st.eta;
    j["nu"] = st.nu;
    j["rho"] = vec_to(st.rho);
    j["tau"] = vec_to(st.tau);
    j["alpha"] = vec_to(st.alpha);
    j["lambda"] = st.lambda;
    j["zeta"] = st.zeta;
    std::vector<Index> fixed;
    for (Index k = 0; k < static_cast<Index>(st.fixed.size()); ++k)
        if (st.fixed[k]) fixed.push_back(k);
    j["fixed"] = fixed;
    j["cov_conditional"] = cov_summary_to(r.cov_conditional);
    if (r.cov_marginal) j["cov_marginal"] = cov_summary_to(*r.cov_marginal);
    j["prune_log"] = json::array();
    for (const auto& e : r.prune_log)
        j["prune_log"].push_back({{"component", e.component}, {"sweep", e.sweep}, {"by_evidence", e.by_evidence}});
    j["diagnostics"] = r.diagnostics;
    j["objective_final"] = r.objective_trace.empty() ? 0.0 : r.objective_trace.back();
    return j;
}

// Fields needed downstream (monitor anchor, report); traces are not stored in the JSON.
inline Result result_from_json(const json& j) {
    try {
        Result r;
        r.mode = j.at("mode").get<std::string>() == "calibration" ? Mode::Calibration : Mode::Monitoring;
        r.converged = j.at("converged").get<bool>();
        r.iterations = j.at("iterations").get<int>();
        r.force_unit = j.at("force_unit").get<double>();
        auto& st = r.state_map;
        st.theta = vec_from(j.at("theta"));
        const Index n = st.theta.size();
        r.theta_u = vec_from(j.at("theta_u"));
        r.theta_cov = matrix_from(j.at("theta_cov"), n, "theta_cov");
        r.cov_theta = vec_from(j.at("cov_theta"));
        st.omega2 = vec_from(j.at("omega2"));
        st.beta = j.at("beta").get<double>();
        st.eta = j.at("eta").get<double>();
        st.nu = j.at("nu").get<double>();
        st.rho = vec_from(j.at("rho"));
        st.tau = vec_from(j.at("tau"));
        st.alpha = vec_from(j.at("alpha"));
        st.lambda = j.at("lambda").get<double>();
        st.zeta = j.at("zeta").get<double>();
        st.fixed.assign(n, false);
        for (Index k : j.at("fixed").get<std::vector<Index>>()) st.fixed.at(k) = true;
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("result file: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw ConfigError(std::string("result file: ") + e.what());
    }
}

// Simple CSV table with round-trip number formatting
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& v) {
            for (size_t k = 0; k < v.size(); ++k) {
                if (k) out += ',';
                out += v[k];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

inline Table theta_table(const Result& r) {
    Table t{{"substructure_id", "theta", "cov_percent", "fixed"}, {}};
    for (Index j = 0; j < r.state_map.theta.size(); ++j)
        t.rows.push_back({std::to_string(j + 1), fmt(r.state_map.theta(j)), fmt(100.0 * r.cov_theta(j)),
                          r.state_map.fixed[j] ? "1" : "0"});
    return t;
}

inline Table matrix_table(const Mat<double>& M, const std::vector<std::string>& labels) {
    Table t;
    t.header.push_back("param");
    for (const auto& l : labels) t.header.push_back(l);
    for (Index r = 0; r < M.rows(); ++r) {
        std::vector<std::string> row{labels[r]};
        for (Index c = 0; c < M.cols(); ++c) row.push_back(fmt(M(r, c)));
        t.rows.push_back(row);
    }
    return t;
}

inline std::vector<std::string> theta_labels(Index n) {
    std::vector<std::string> l;
    for (Index j = 0; j < n; ++j) l.push_back("theta_" + std::to_string(j + 1));
    return l;
}

// c.o.v. (percent) of theta and the hyper-parameters, one row per parameter
inline Table cov_table(const Result& r) {
    Table t{{"param", "map", "cov_percent", "cov_percent_joint"}, {}};
    const auto& st = r.state_map;
    const auto& c = r.cov_conditional;
    const bool mg = r.cov_marginal.has_value();
    auto joint = [&](double v) { return mg ? fmt(100.0 * v) : std::string("nan"); };
    for (Index j = 0; j < st.theta.size(); ++j)
        t.rows.push_back({"theta_" + std::to_string(j + 1), fmt(st.theta(j)), fmt(100.0 * c.theta(j)),
                          joint(mg ? r.cov_marginal->theta(j) : 0.0)});
    t.rows.push_back({"beta", fmt(st.beta), fmt(100.0 * c.beta), joint(mg ? r.cov_marginal->beta : 0.0)});
    t.rows.push_back({"eta", fmt(st.eta), fmt(100.0 * c.eta), joint(mg ? r.cov_marginal->eta : 0.0)});
    for (Index i = 0; i < st.rho.size(); ++i)
        t.rows.push_back({"rho_" + std::to_string(i + 1), fmt(st.rho(i)), fmt(100.0 * c.rho(i)),
                          joint(mg ? r.cov_marginal->rho(i) : 0.0)});
    return t;
}

inline Table trace_table(const Result& r) {
    Table t;
    t.header = {"iteration", "objective", "beta"};
    const Index n = r.state_map.theta.size();
    for (const auto& l : theta_labels(n)) t.header.push_back(l);
    for (size_t k = 0; k < r.theta_trace.size(); ++k) {
        std::vector<std::string> row{std::to_string(k + 1), fmt(r.objective_trace[k]), fmt(r.beta_trace[k])};
        for (Index j = 0; j < n; ++j) row.push_back(fmt(r.theta_trace[k](j)));
        t.rows.push_back(row);
    }
    return t;
}

inline Table prune_table(const Result& r) {
    Table t{{"substructure_id", "sweep", "rule"}, {}};
    for (const auto& e : r.prune_log)
        t.rows.push_back({std::to_string(e.component + 1), std::to_string(e.sweep), e.by_evidence ? "evidence" : "alpha_min"});
    return t;
}

inline Table report_table(const DamageReport<double>& rep) {
    Table t{{"substructure_id", "map_ratio", "cov_percent", "f", "prob"}, {}};
    for (Index j = 0; j < rep.map_ratio.size(); ++j)
        for (size_t k = 0; k < rep.curves[j].f.size(); ++k)
            t.rows.push_back({std::to_string(j + 1), fmt(rep.map_ratio(j)), fmt(rep.cov_percent(j)),
                              fmt(rep.curves[j].f[k]), fmt(rep.curves[j].prob[k])});
    return t;
}

inline Table ratio_table(const DamageReport<double>& rep) {
    Table t{{"substructure_id", "map_ratio", "cov_percent", "alarm"}, {}};
    for (Index j = 0; j < rep.map_ratio.size(); ++j)
        t.rows.push_back({std::to_string(j + 1), fmt(rep.map_ratio(j)), fmt(rep.cov_percent(j)),
                          rep.alarm[j] ? "1" : "0"});
    return t;
}

inline json report_summary(const DamageReport<double>& rep) {
    std::vector<Index> ids;
    for (Index j : rep.alarms()) ids.push_back(j + 1);
    return json{{"alarms", ids}, {"n", rep.map_ratio.size()}, {"map_ratio", vec_to(rep.map_ratio)}};
}

// Parse one report CSV back (used for round-trip checks)
inline DamageReport<double> report_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            double x = 0;
            auto res = std::from_chars(cell.data(), cell.data() + cell.size(), x);
            if (res.ec != std::errc()) throw ConfigError("report csv: bad number '" + cell + "'");
            v.push_back(x);
        }
        if (v.size() != 5) throw ConfigError("report csv: expected 5 columns");
        rows.push_back(v);
    }
    DamageReport<double> rep;
    Index n = 0;
    for (const auto& r : rows) n = std::max<Index>(n, static_cast<Index>(r[0]));
    rep.map_ratio = Vec<double>::Zero(n);
    rep.cov_percent = Vec<double>::Zero(n);
    rep.curves.resize(n);
    for (const auto& r : rows) {
        const Index j = static_cast<Index>(r[0]) - 1;
        rep.map_ratio(j) = r[1];
        rep.cov_percent(j) = r[2];
        rep.curves[j].f.push_back(r[3]);
        rep.curves[j].prob.push_back(r[4]);
    }
    for (Index j = 0; j < n; ++j) rep.alarm.push_back(rep.map_ratio(j) < 1.0);
    return rep;
}

} // namespace hsbl::io
