// hsbl: simulate | calibrate | monitor | report

#include <hsbl/harness.hpp>
#include <hsbl/manifest.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace hsbl;
using io::json;

namespace {

struct Globals {
    std::string config;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool verbose = false;
    std::vector<std::string> argv;
};

struct Outputs {
    fs::path dir;
    io::RunManifest manifest;

    void text(const std::string& name, const std::string& body) {
        io::write_text((dir / name).string(), body);
        manifest.outputs[name] = io::sha256_hex(body);
    }
    void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }
    void table(const std::string& name, const io::Table& t) { text(name, t.str()); }
    void finish(const std::string& cmd) {
        manifest.finished = io::utc_now();
        io::write_json((dir / (cmd + ".manifest.json")).string(), manifest.to_json());
    }
};

Outputs open_outputs(const Globals& g, const std::string& cmd) {
    Outputs o;
    o.dir = g.out_dir;
    std::error_code ec;
    fs::create_directories(o.dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + g.out_dir);
    o.manifest.command = cmd;
    o.manifest.argv = g.argv;
    o.manifest.seed = g.seed;
    o.manifest.started = io::utc_now();
    return o;
}

json load_config(const Globals& g, Outputs& o) {
    if (g.config.empty()) {
        o.manifest.config_hash = io::sha256_hex("{}");
        return json::object();
    }
    o.manifest.add_input(g.config);
    json j = io::read_json(g.config);
    o.manifest.config_hash = io::sha256_hex(j.dump());
    return j;
}

io::Model load_model(const std::string& spec, Outputs& o) {
    if (fs::exists(spec)) {
        o.manifest.add_input(spec);
        return io::model_from_json(io::read_json(spec));
    }
    return shear_building_model(io::named_building(spec));
}

// "beta=20,eta=1e5,phi=1e4"
void apply_fix_hypers(const std::string& text, io::Config& cfg) {
    if (text.empty()) return;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("--fix-hypers expects key=value pairs");
        const std::string key = item.substr(0, eq);
        double v = 0;
        try {
            v = std::stod(item.substr(eq + 1));
        } catch (...) {
            throw ConfigError("--fix-hypers: bad value for " + key);
        }
        if (key == "beta") cfg.fix_beta = v;
        else if (key == "eta") cfg.fix_eta = v;
        else if (key == "rho") cfg.fix_rho = v;
        else if (key == "phi") cfg.fix_phi = v;
        else throw ConfigError("--fix-hypers: unknown key " + key);
    }
    cfg.validate();
}

std::vector<Index> parse_sensors(const std::string& s, Index d) {
    if (s == "full") return all_dofs<double>(d);
    if (s == "partial") {
        if (d != 10) throw ConfigError("--sensors partial is defined for 10 stories");
        return partial_sensors_10();
    }
    std::vector<Index> ids;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            ids.push_back(std::stol(item) - 1);
        } catch (...) {
            throw ConfigError("--sensors expects full, partial or 1-based DOF numbers");
        }
    }
    return ids;
}

// "3:0.2,7:0.1" with 1-based substructure ids
std::map<Index, double> parse_damage(const std::string& s) {
    std::map<Index, double> pat;
    if (s.empty()) return pat;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto c = item.find(':');
        if (c == std::string::npos) throw ConfigError("--damage expects id:loss pairs");
        try {
            pat[std::stol(item.substr(0, c)) - 1] = std::stod(item.substr(c + 1));
        } catch (...) {
            throw ConfigError("--damage expects id:loss pairs");
        }
    }
    return pat;
}

json convergence_of(const io::Result& r) {
    return json{{"converged", r.converged}, {"iterations", r.iterations}, {"diagnostics", r.diagnostics}};
}

void write_result(Outputs& o, const std::string& stem, const io::Result& r) {
    o.json_file(stem + ".json", io::result_to_json(r));
    o.table("theta.csv", io::theta_table(r));
    o.table("theta_cov.csv", io::matrix_table(r.theta_cov, io::theta_labels(r.theta_cov.rows())));
    o.table("cov.csv", io::cov_table(r));
    o.table("trace.csv", io::trace_table(r));
    if (r.full_cov) o.table("joint_cov.csv", io::matrix_table(*r.full_cov, r.full_cov_labels));
    o.manifest.convergence = convergence_of(r);
}

void log_run(const Globals& g, const io::Result& r) {
    if (!g.verbose) return;
    std::cerr << (r.mode == Mode::Calibration ? "calibration" : "monitoring") << ": " << r.iterations
              << " sweeps, converged=" << r.converged << ", beta=" << r.state_map.beta << "\n";
    for (const auto& d : r.diagnostics) std::cerr << "  " << d << "\n";
}

} // namespace

int main(int argc, char** argv) {
    Globals g;
    for (int k = 0; k < argc; ++k) g.argv.push_back(argv[k]);
    g.argv[0] = "hsbl";

    CLI::App app{"Sparse Bayesian stiffness-loss inference from modal data"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", g.config, "JSON config file");
    app.add_option("--out-dir", g.out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed");
    app.add_flag("--verbose", g.verbose, "progress on stderr");

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a noisy modal dataset");
    std::string building = "shear10", sensors = "full", damage, noise_on = "omega", shape_scale = "rms";
    Index modes = 4, segments = 3;
    double noise = 0.01;
    std::optional<double> freq_noise, shape_noise;
    bool harness = false;
    sim->add_option("--building", building, "shearN or model JSON path");
    sim->add_option("--modes", modes, "modes per segment");
    sim->add_option("--segments", segments, "segments (q >= 3)");
    sim->add_option("--noise", noise, "fractional noise on frequencies and mode shapes");
    sim->add_option("--freq-noise", freq_noise, "override frequency noise");
    sim->add_option("--shape-noise", shape_noise, "override mode-shape noise");
    sim->add_option("--noise-on", noise_on, "omega | omega2")->check(CLI::IsMember({"omega", "omega2"}));
    sim->add_option("--shape-scale", shape_scale, "rms | per_component")->check(CLI::IsMember({"rms", "per_component"}));
    sim->add_option("--sensors", sensors, "full | partial | 1-based list");
    sim->add_option("--damage", damage, "id:loss pairs, 1-based");
    sim->add_flag("--harness", harness, "run the calibration sweep harness described by --config");

    // calibrate / monitor
    std::string model_spec = "shear10", dataset_path, theta_init = "1", fix_hypers, calib_path, variant;
    std::optional<double> beta_factor, kappa, lambda;
    auto* cal = app.add_subcommand("calibrate", "calibrate theta on undamaged data");
    cal->add_option("--model", model_spec, "shearN or model JSON path");
    cal->add_option("--dataset", dataset_path, "dataset JSON")->required();
    cal->add_option("--theta-init", theta_init, "nominal value or 'random' (U[2,3] from --seed)");
    cal->add_option("--fix-hypers", fix_hypers, "e.g. beta=20,eta=1e5");
    cal->add_option("--beta-init-factor", beta_factor, "scale of the initial beta");

    auto* mon = app.add_subcommand("monitor", "sparse stiffness-change inference against a calibration");
    mon->add_option("--model", model_spec, "shearN or model JSON path");
    mon->add_option("--dataset", dataset_path, "dataset JSON")->required();
    mon->add_option("--calibration", calib_path, "calibration.json")->required();
    mon->add_option("--hyper-variant", variant, "variance | precision")->check(CLI::IsMember({"variance", "precision"}));
    mon->add_option("--kappa", kappa, "precision-variant rate");
    mon->add_option("--lambda", lambda, "fix lambda (0: uniform hyper-prior)");
    mon->add_option("--fix-hypers", fix_hypers, "e.g. beta=20,eta=1e5");

    // report
    std::string mon_path, pairing;
    std::optional<double> fmax, fstep;
    auto* rep = app.add_subcommand("report", "stiffness ratios, damage probabilities, alarms");
    rep->add_option("--calibration", calib_path, "calibration.json")->required();
    rep->add_option("--monitoring", mon_path, "monitoring.json")->required();
    rep->add_option("--fmax", fmax, "largest damage fraction");
    rep->add_option("--fstep", fstep, "damage fraction step");
    rep->add_option("--variance-pairing", pairing, "as_printed | conventional")
        ->check(CLI::IsMember({"as_printed", "conventional"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (*sim) {
            Outputs o = open_outputs(g, "simulate");
            json cfgj = load_config(g, o);
            if (harness) {
                HarnessConfig h = harness_from_json(cfgj);
                if (g.seed_given) {
                    h.noise.seed = g.seed;
                    if (!cfgj.contains("sweeps") || !cfgj.at("sweeps").contains("seeds")) h.seeds = {g.seed};
                }
                const auto res = example1_harness(h);
                o.table("harness_table.csv", res.table);
                for (const auto& [name, t] : res.traces) o.table(name, t);
                o.finish("simulate");
                return 0;
            }
            if (segments < 3)
                throw ConfigError("--segments must be >= 3: the frequency-precision update needs q - 2 > 0");
            const auto model = load_model(building, o);
            NoiseSpec<double> ns;
            ns.freq_cov = freq_noise.value_or(noise);
            ns.shape_cov = shape_noise.value_or(noise);
            ns.seed = g.seed;
            ns.noise_on = noise_on == "omega2" ? NoiseOn::Omega2 : NoiseOn::Omega;
            ns.shape_scale = shape_scale == "per_component" ? ShapeNoiseScale::PerComponent : ShapeNoiseScale::Rms;
            const Vec<double> theta = apply_damage<double>(Vec<double>::Ones(model.n), parse_damage(damage));
            const auto ds = simulate_modal_data(model, theta, modes, segments, parse_sensors(sensors, model.d), ns);
            o.json_file("dataset.json", io::dataset_to_json(ds));
            o.json_file("model.json", io::model_to_json(model));
            o.json_file("truth.json", json{{"theta", io::vec_to(theta)}});
            o.finish("simulate");
            if (g.verbose) std::cerr << "wrote q=" << ds.q << " m=" << ds.m << " s=" << ds.s << " dataset\n";
            return 0;
        }
        if (*cal) {
            Outputs o = open_outputs(g, "calibrate");
            json cfgj = load_config(g, o);
            auto cfg = io::config_from_json(cfgj, Mode::Calibration);
            apply_fix_hypers(fix_hypers, cfg);
            if (beta_factor) cfg.beta_init_factor = *beta_factor;
            const auto model = load_model(model_spec, o);
            o.manifest.add_input(dataset_path);
            const auto ds = io::dataset_from_json(io::read_json(dataset_path));
            Vec<double> th0;
            if (theta_init == "random") {
                th0 = random_theta_init<double>(model.n, g.seed);
            } else {
                try {
                    th0 = Vec<double>::Constant(model.n, std::stod(theta_init));
                } catch (...) {
                    throw ConfigError("--theta-init expects a number or 'random'");
                }
            }
            const auto r = run_calibration(ds, model, th0, cfg);
            log_run(g, r);
            write_result(o, "calibration", r);
            o.finish("calibrate");
            return r.converged ? 0 : 3;
        }
        if (*mon) {
            Outputs o = open_outputs(g, "monitor");
            json cfgj = load_config(g, o);
            auto cfg = io::config_from_json(cfgj, Mode::Monitoring);
            apply_fix_hypers(fix_hypers, cfg);
            if (variant == "precision") cfg.hyper_variant = HyperVariant::PrecisionExponential;
            if (variant == "variance") cfg.hyper_variant = HyperVariant::VarianceExponential;
            if (kappa) cfg.kappa = *kappa;
            if (lambda) cfg.fix_lambda = *lambda;
            cfg.validate();
            const auto model = load_model(model_spec, o);
            o.manifest.add_input(dataset_path);
            o.manifest.add_input(calib_path);
            const auto ds = io::dataset_from_json(io::read_json(dataset_path));
            const auto calr = io::result_from_json(io::read_json(calib_path));
            if (calr.state_map.theta.size() != model.n)
                throw ConfigError("calibration has " + std::to_string(calr.state_map.theta.size()) +
                                  " substructures, model has " + std::to_string(model.n));
            const auto r = run_monitoring(ds, model, calr.state_map.theta, cfg);
            log_run(g, r);
            write_result(o, "monitoring", r);
            o.table("pruning_log.csv", io::prune_table(r));
            o.finish("monitor");
            return r.converged ? 0 : 3;
        }
        if (*rep) {
            Outputs o = open_outputs(g, "report");
            json cfgj = load_config(g, o);
            double fm = 0.25, fs_ = 0.0025;
            VariancePairing vp = VariancePairing::AsPrinted;
            if (cfgj.contains("f_grid")) {
                fm = cfgj["f_grid"].value("fmax", fm);
                fs_ = cfgj["f_grid"].value("fstep", fs_);
            }
            if (cfgj.contains("variance_pairing") && cfgj["variance_pairing"] == "conventional")
                vp = VariancePairing::Conventional;
            if (fmax) fm = *fmax;
            if (fstep) fs_ = *fstep;
            if (pairing == "conventional") vp = VariancePairing::Conventional;
            if (pairing == "as_printed") vp = VariancePairing::AsPrinted;
            o.manifest.add_input(calib_path);
            o.manifest.add_input(mon_path);
            const auto cu = io::result_from_json(io::read_json(calib_path));
            const auto md = io::result_from_json(io::read_json(mon_path));
            const auto report = build_report(cu.state_map.theta, cu.theta_cov, md.state_map.theta, md.theta_cov,
                                             default_f_grid(fm, fs_), vp);
            o.table("report.csv", io::report_table(report));
            o.table("ratios.csv", io::ratio_table(report));
            o.json_file("alarms.json", io::report_summary(report));
            o.manifest.convergence = json{{"calibration_converged", cu.converged}, {"monitoring_converged", md.converged}};
            o.finish("report");
            if (g.verbose) std::cerr << report.alarms().size() << " alarm(s)\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
