// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <hsbl/hsbl.hpp>
#include <hsbl/manifest.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

using namespace hsbl;
using VecD = Vec<double>;
using MatD = Mat<double>;
using LD = long double;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, double seconds, const std::string& detail) {
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string num(double x, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << x;
    return s.str();
}

NoiseSpec<double> noise(double cov, std::uint64_t seed) {
    NoiseSpec<double> ns;
    ns.freq_cov = ns.shape_cov = cov;
    ns.seed = seed;
    return ns;
}

const StructuralModel<double>& shear10() {
    static const auto m = shear_building_model(ShearBuildingSpec<double>{});
    return m;
}

StructuralModel<double> small_shear(Index stories) {
    ShearBuildingSpec<double> spec;
    spec.stories = stories;
    spec.floor_mass = {1.0};
    spec.story_stiffness = {1000.0};
    return shear_building_model(spec);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1: natural frequencies of the 10-story shear building
void eigen_baseline() {
    Timer t;
    const auto ex = eigen_solve(shear10(), VecD::Ones(10), 5);
    const double want[5] = {1.00, 2.98, 4.89, 6.69, 8.34};
    double worst = 0;
    std::string hz;
    for (Index i = 0; i < 5; ++i) {
        const double f = std::sqrt(ex.omega2(i)) / (2 * std::numbers::pi);
        worst = std::max(worst, std::abs(f - want[i]));
        hz += (i ? " " : "") + num(f, 5);
    }
    const double s = t.seconds();
    report(1, "eigen baseline", worst <= 0.01 && s < 1, s, "f = " + hz + " Hz, max dev " + num(worst, 3) + " Hz");
}

// 2: calibration from random starts, insensitive to the beta start
void calibration_robustness() {
    Timer t;
    const auto& m = shear10();
    const auto ds = simulate_modal_data(m, VecD::Ones(10), 4, 3, all_dofs<double>(10), noise(0.01, 7));
    const VecD th0 = random_theta_init<double>(10, 7);
    std::vector<InferenceResult<double>> runs;
    for (double f : {0.1, 1.0, 10.0, 100.0}) {
        auto cfg = AlgorithmConfig<double>::calibration();
        cfg.tol_theta = 1e-10;
        cfg.tol_log_hyper = 1e-9;
        cfg.beta_init_factor = f;
        runs.push_back(run_calibration(ds, m, th0, cfg));
    }
    const auto& ref = runs[1];
    const double err = (ref.state_map.theta.array() - 1).abs().maxCoeff();
    double spread = 0;
    bool conv = true;
    for (const auto& r : runs) {
        conv = conv && r.converged;
        spread = std::max(spread, ((r.state_map.theta - ref.state_map.theta).array() / ref.state_map.theta.array())
                                      .abs()
                                      .maxCoeff());
    }
    const double beta = ref.state_map.beta;
    const double s = t.seconds();
    const bool ok = conv && err <= 0.02 && spread <= 1e-6 && beta >= 12 && beta <= 25 && s < 10;
    report(2, "calibration robustness", ok, s,
           "max |theta-1| " + num(100 * err, 3) + "%, beta-start spread " + num(spread, 2) + ", beta " + num(beta) +
               (conv ? "" : ", not converged"));
}

// 3: conditional c.o.v. identities of the hyper-parameters
void cov_identities() {
    Timer t;
    const auto& m = shear10();
    bool ok = true;
    std::string detail;
    for (Index q : {3, 10, 100}) {
        const auto ds = simulate_modal_data(m, VecD::Ones(10), 4, q, all_dofs<double>(10), noise(0.01, 7));
        const auto r = run_calibration(ds, m, random_theta_init<double>(10, 7), AlgorithmConfig<double>::calibration());
        const auto& c = r.cov_conditional;
        const double phi_want = 100 * std::sqrt(2.0 / q);
        double phi_dev = 0;
        for (Index i = 0; i < 4; ++i) phi_dev = std::max(phi_dev, std::abs(100 * c.rho(i) - phi_want));
        ok = ok && phi_dev <= 1;
        detail += "q=" + std::to_string(q) + " phi dev " + num(phi_dev, 2) + "pt; ";
        if (q == 3) {
            const double b = 100 * c.beta, e = 100 * c.eta;
            ok = ok && std::abs(b - 22.361) <= 0.5 && std::abs(e - 12.910) <= 1;
            detail += "beta " + num(b, 5) + "%, eta " + num(e, 5) + "%; ";
        }
    }
    const double s = t.seconds();
    report(3, "c.o.v. identities", ok && s < 30, s, detail);
}

// 4: median calibration c.o.v. of each theta_j does not grow with q
void monotone_information() {
    Timer t;
    const auto& m = shear10();
    const std::vector<Index> qs{5, 10, 50, 100};
    std::vector<std::vector<double>> med(qs.size(), std::vector<double>(10));
    int not_conv = 0;
    for (size_t a = 0; a < qs.size(); ++a) {
        std::vector<std::vector<double>> per(10);
        for (std::uint64_t k = 1; k <= 10; ++k) {
            const auto ds = simulate_modal_data(m, VecD::Ones(10), 4, qs[a], all_dofs<double>(10), noise(0.01, k));
            const auto r = run_calibration(ds, m, random_theta_init<double>(10, k), AlgorithmConfig<double>::calibration());
            not_conv += !r.converged;
            for (Index j = 0; j < 10; ++j) per[j].push_back(r.cov_theta(j));
        }
        for (Index j = 0; j < 10; ++j) med[a][j] = median(per[j]);
    }
    bool ok = true;
    for (size_t a = 1; a < qs.size(); ++a)
        for (Index j = 0; j < 10; ++j) ok = ok && med[a][j] <= med[a - 1][j];
    std::string detail = "median c.o.v. of theta_1 by q:";
    for (size_t a = 0; a < qs.size(); ++a) detail += " " + num(100 * med[a][0], 3) + "%";
    if (not_conv) detail += ", " + std::to_string(not_conv) + " runs not converged";
    report(4, "monotone information", ok, t.seconds(), detail);
}

StructuralModel<LD> cast_model(const StructuralModel<double>& m) {
    StructuralModel<LD> o;
    o.d = m.d;
    o.n = m.n;
    o.M = m.M.cast<LD>();
    o.K0 = m.K0.cast<LD>();
    for (const auto& K : m.Ksub) o.Ksub.push_back(K.cast<LD>());
    return o;
}

ModalDataset<LD> cast_dataset(const ModalDataset<double>& d) {
    ModalDataset<LD> o;
    o.q = d.q;
    o.m = d.m;
    o.s = d.s;
    o.omega_hat2 = d.omega_hat2.cast<LD>();
    o.Psi_hat = d.Psi_hat.cast<LD>();
    o.observed_dofs = d.observed_dofs;
    return o;
}

InferenceState<LD> cast_state(const InferenceState<double>& s) {
    InferenceState<LD> o;
    o.theta = s.theta.cast<LD>();
    o.omega2 = s.omega2.cast<LD>();
    o.Phi = s.Phi.cast<LD>();
    o.beta = s.beta;
    o.eta = s.eta;
    o.nu = s.nu;
    o.rho = s.rho.cast<LD>();
    o.tau = s.tau.cast<LD>();
    o.alpha = s.alpha.cast<LD>();
    o.lambda = s.lambda;
    o.zeta = s.zeta;
    o.a0 = s.a0;
    o.b0 = s.b0;
    o.fixed = s.fixed;
    return o;
}

// central differences with a relative step; f is evaluated in long double
VecD fd_grad(const std::function<LD(const VecD&)>& f, const VecD& x) {
    VecD g(x.size());
    for (Index k = 0; k < x.size(); ++k) {
        const double h = 1e-6 * (x(k) != 0 ? std::abs(x(k)) : 1.0);
        VecD a = x, b = x;
        a(k) += h;
        b(k) -= h;
        g(k) = static_cast<double>((f(a) - f(b)) / (a(k) - b(k)));
    }
    return g;
}

struct Small {
    StructuralModel<double> model = small_shear(2);
    ModalDataset<double> ds;
    VecD theta_u = VecD::Ones(2);
    Small() { ds = simulate_modal_data(model, (VecD(2) << 0.9, 1.05).finished(), 1, 3, {0, 1}, noise(0.02, 9)); }
    LD J(const InferenceState<double>& st) const {
        return objective(cast_state(st), cast_dataset(ds), cast_model(model), Vec<LD>(theta_u.cast<LD>()));
    }
};

// 5: each coordinate update zeroes the derivative of J in its own block
void stationarity() {
    Timer t;
    const Small p;
    auto st = initialize(p.ds, p.model, VecD::Constant(2, 0.8), AlgorithmConfig<double>::monitoring());
    st.alpha = VecD::Constant(2, 0.05);

    using Get = std::function<VecD(const InferenceState<double>&)>;
    using Set = std::function<void(InferenceState<double>&, const VecD&)>;
    struct Block {
        std::string name;
        Get get;
        Set set;
        std::function<void(InferenceState<double>&)> update;
    };
    const std::vector<Block> blocks{
        {"Phi", [](const auto& s) { return VecD(s.Phi); }, [](auto& s, const VecD& x) { s.Phi = x; },
         [&](auto& s) { s.Phi = update_mode_shapes(s, p.ds, p.model); }},
        {"eta,nu", [](const auto& s) { return VecD((VecD(2) << s.eta, s.nu).finished()); },
         [](auto& s, const VecD& x) { s.eta = x(0), s.nu = x(1); }, [&](auto& s) { update_eta(s, p.ds, p.model.d); }},
        {"omega2", [](const auto& s) { return VecD(s.omega2); }, [](auto& s, const VecD& x) { s.omega2 = x; },
         [&](auto& s) { s.omega2 = update_frequencies(s, p.ds, p.model); }},
        {"rho,tau", [](const auto& s) { return VecD((VecD(2) << s.rho(0), s.tau(0)).finished()); },
         [](auto& s, const VecD& x) { s.rho(0) = x(0), s.tau(0) = x(1); }, [&](auto& s) { update_rho(s, p.ds); }},
        {"theta", [](const auto& s) { return VecD(s.theta); }, [](auto& s, const VecD& x) { s.theta = x; },
         [&](auto& s) { s.theta = update_theta(s, p.ds, p.model, p.theta_u); }},
        {"beta", [](const auto& s) { return VecD::Constant(1, s.beta); }, [](auto& s, const VecD& x) { s.beta = x(0); },
         [&](auto& s) { s.beta = update_beta(s, p.model); }},
    };
    // relative derivative: max_k |x_k dJ/dx_k| / |J|
    double worst = 0;
    std::string where;
    for (int sweep = 0; sweep < 3; ++sweep)
        for (const auto& b : blocks) {
            auto f = [&](const VecD& x) {
                auto s = st;
                b.set(s, x);
                return p.J(s);
            };
            b.update(st);
            const VecD x = b.get(st);
            const double rel = (fd_grad(f, x).cwiseProduct(x)).cwiseAbs().maxCoeff() / std::abs(double(p.J(st)));
            if (rel > worst) worst = rel, where = b.name + " sweep " + std::to_string(sweep + 1);
        }
    const double s = t.seconds();
    report(5, "stationarity", worst <= 1e-6 && s < 5, s,
           "worst max |x dJ/dx| / |J| " + num(worst, 3) + " (" + where + ")");
}

// 6: analytic joint Hessian at the MAP against central differences of J
void hessian_oracle() {
    Timer t;
    const Small p;
    auto st = initialize(p.ds, p.model, p.theta_u, AlgorithmConfig<double>::monitoring());
    st.alpha = VecD::Constant(2, 0.05);
    for (int k = 0; k < 2000; ++k) {
        st.Phi = update_mode_shapes(st, p.ds, p.model);
        update_eta(st, p.ds, p.model.d);
        st.omega2 = update_frequencies(st, p.ds, p.model);
        update_rho(st, p.ds);
        st.theta = update_theta(st, p.ds, p.model, p.theta_u);
        st.beta = update_beta(st, p.model);
    }
    const auto jh = joint_hessian(st, p.ds, p.model, p.theta_u);
    const auto& L = jh.layout;
    const auto& act = jh.theta_index;
    const auto mL = cast_model(p.model);
    const auto dL = cast_dataset(p.ds);
    const auto sL = cast_state(st);
    const Vec<LD> tuL = p.theta_u.cast<LD>();

    Vec<LD> x0(L.size());
    x0(L.beta()) = sL.beta;
    x0(L.omega2(0)) = sL.omega2(0);
    x0(L.rho(0)) = sL.rho(0);
    x0(L.tau(0)) = sL.tau(0);
    for (Index a = 0; a < L.d; ++a) x0(L.phi(0, a)) = sL.Phi(a);
    x0(L.eta()) = sL.eta;
    x0(L.nu()) = sL.nu;
    for (Index c = 0; c < L.k; ++c) x0(L.theta(c)) = sL.theta(act[c]);
    auto J = [&](const Vec<LD>& x) {
        auto s = sL;
        s.beta = x(L.beta());
        s.omega2(0) = x(L.omega2(0));
        s.rho(0) = x(L.rho(0));
        s.tau(0) = x(L.tau(0));
        for (Index a = 0; a < L.d; ++a) s.Phi(a) = x(L.phi(0, a));
        s.eta = x(L.eta());
        s.nu = x(L.nu());
        for (Index c = 0; c < L.k; ++c) s.theta(act[c]) = x(L.theta(c));
        return objective(s, dL, mL, tuL);
    };
    const Index N = x0.size();
    const double norm = jh.H.norm();
    double worst = 0;
    for (Index a = 0; a < N; ++a)
        for (Index b = 0; b < N; ++b) {
            const LD ha = 1e-5L * std::max(std::abs(x0(a)), 1e-3L), hb = 1e-5L * std::max(std::abs(x0(b)), 1e-3L);
            auto at = [&](LD sa, LD sb) {
                Vec<LD> x = x0;
                x(a) += sa * ha;
                x(b) += sb * hb;
                return J(x);
            };
            const double fd = static_cast<double>((at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * ha * hb));
            // entries that vanish analytically are compared on the scale of the whole matrix
            const double e = std::abs(fd) > 1e-8 * norm ? std::abs(jh.H(a, b) - fd) / std::abs(fd)
                                                        : std::abs(jh.H(a, b)) / norm;
            worst = std::max(worst, e);
        }

    const MatD H = build_H(p.model, st.Phi);
    const MatD S1 = theta_covariance(st.beta, H, st.alpha, st.fixed);
    const MatD S2 = theta_covariance_right(st.beta, H, st.alpha, st.fixed);
    const double forms = (S1 - S2).norm() / S1.norm();
    report(6, "Hessian oracle", worst <= 1e-4 && forms <= 1e-10, t.seconds(),
           "max rel dev " + num(worst, 3) + " over " + std::to_string(N) + "x" + std::to_string(N) +
               ", Sigma_theta forms " + num(forms, 3));
}

// calibration on q = 100 undamaged segments; monitoring data use q = 10
InferenceResult<double> calibration_for(std::uint64_t k) {
    const auto& m = shear10();
    const auto cd = simulate_modal_data(m, VecD::Ones(10), 4, 100, all_dofs<double>(10), noise(0.01, 1000 * k));
    return run_calibration(cd, m, random_theta_init<double>(10, k), AlgorithmConfig<double>::calibration());
}

InferenceResult<double> monitoring_for(const InferenceResult<double>& cal, std::uint64_t k,
                                       const std::map<Index, double>& damage, std::uint64_t stream,
                                       const AlgorithmConfig<double>& cfg = AlgorithmConfig<double>::monitoring()) {
    const auto& m = shear10();
    const auto md = simulate_modal_data(m, apply_damage<double>(VecD::Ones(10), damage), 4, 10, all_dofs<double>(10),
                                        noise(0.01, 1000 * k + stream));
    return run_monitoring(md, m, cal.state_map.theta, cfg);
}

// ratio < 1 alarms match the damage exactly, undamaged ratios are exactly 1 with zero c.o.v.
bool case_ok(const InferenceResult<double>& cal, const InferenceResult<double>& mon,
             const std::map<Index, double>& damage, std::string& why) {
    const VecD ratio = stiffness_ratios(cal.state_map.theta, mon.state_map.theta);
    bool ok = mon.converged;
    if (!mon.converged) why += " not converged;";
    for (Index j = 0; j < 10; ++j) {
        const auto it = damage.find(j);
        if (it == damage.end()) {
            if (ratio(j) != 1.0 || mon.cov_theta(j) != 0.0) {
                ok = false;
                why += " story " + std::to_string(j + 1) + " ratio " + num(ratio(j), 6) + ";";
            }
        } else {
            const double loss = 1 - ratio(j);
            if (!(ratio(j) < 1) || std::abs(loss - it->second) > 0.05) {
                ok = false;
                why += " story " + std::to_string(j + 1) + " loss " + num(loss, 4) + ";";
            }
        }
    }
    return ok;
}

// 7: sparsity and alarm correctness over 20 seeds
void sparsity_alarms() {
    Timer t;
    const std::map<Index, double> one{{2, 0.2}}, two{{2, 0.2}, {6, 0.1}};
    int ok1 = 0, ok2 = 0;
    std::string why;
    for (std::uint64_t k = 1; k <= 20; ++k) {
        const auto cal = calibration_for(k);
        std::string w1, w2;
        ok1 += case_ok(cal, monitoring_for(cal, k, one, 1), one, w1);
        ok2 += case_ok(cal, monitoring_for(cal, k, two, 2), two, w2);
        if (!w1.empty()) why += " seed " + std::to_string(k) + " single:" + w1;
        if (!w2.empty()) why += " seed " + std::to_string(k) + " two-story:" + w2;
    }
    const double s = t.seconds();
    report(7, "sparsity and alarms", ok1 == 20 && ok2 == 20 && s < 120, s,
           "single-story " + std::to_string(ok1) + "/20, two-story " + std::to_string(ok2) + "/20" + why);
}

// 8: precision-variant update at kappa = 0 is the lambda -> 0 limit; large kappa keeps more components
void lambda_limit() {
    Timer t;
    double dev = 0;
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(-12, 2);
    for (int k = 0; k < 1000; ++k) {
        const double B = std::pow(10.0, u(g));
        for (double lam : {0.0, 1e-15, 1e-13, 1e-12 * (1 - 1e-12)})
            dev = std::max(dev, std::abs(alpha_from_B(B, lam) - alpha_from_B_precision(B, 0.0)) / B);
    }
    const auto cal = calibration_for(1);
    const std::map<Index, double> one{{2, 0.2}};
    const auto var = monitoring_for(cal, 1, one, 1);
    auto pc = AlgorithmConfig<double>::monitoring();
    pc.hyper_variant = HyperVariant::PrecisionExponential;
    pc.kappa = 1.0;
    const auto prec = monitoring_for(cal, 1, one, 1, pc);
    auto nonzero = [&](const InferenceResult<double>& r) {
        return (r.state_map.theta - cal.state_map.theta).cwiseAbs().cwiseSign().sum();
    };
    const double nv = nonzero(var), np = nonzero(prec);
    report(8, "lambda limit and precision variant", dev <= 1e-8 && np >= nv, t.seconds(),
           "max rel dev " + num(dev, 3) + ", nonzero dtheta: precision(kappa=1) " + num(np) + " vs variance " + num(nv));
}

// 9: damage probability curve of the damaged story
void damage_probability_sanity() {
    Timer t;
    const std::map<Index, double> one{{2, 0.2}};
    const auto cal = calibration_for(1);
    const auto mon = monitoring_for(cal, 1, one, 1);
    const auto rep = build_report(cal.state_map.theta, cal.theta_cov, mon.state_map.theta, mon.theta_cov,
                                  default_f_grid(0.5, 0.0025));
    bool monotone = true;
    for (const auto& c : rep.curves)
        for (size_t k = 1; k < c.prob.size(); ++k) monotone = monotone && c.prob[k] <= c.prob[k - 1];
    const Index j = 2;
    const double su2 = cal.theta_cov(j, j), sd2 = mon.theta_cov(j, j);
    const double pooled = std::sqrt(su2 + sd2);
    const double lo = 0.2 - 2 * pooled, hi = 0.2 + 2 * pooled;
    double p_lo = 1, p_hi = 0;
    const auto& c = rep.curves[j];
    for (size_t k = 0; k < c.f.size(); ++k) {
        if (c.f[k] <= lo) p_lo = std::min(p_lo, c.prob[k]);
        if (c.f[k] >= hi) p_hi = std::max(p_hi, c.prob[k]);
    }
    const bool ok = monotone && p_lo >= 0.99 && p_hi <= 0.01;
    report(9, "damage probability", ok, t.seconds(),
           "MAP loss " + num(1 - rep.map_ratio(j), 4) + ", pooled sigma " + num(pooled, 3) + ", min P(f<=" + num(lo, 3) +
               ") " + num(p_lo, 4) + ", max P(f>=" + num(hi, 3) + ") " + num(p_hi, 4) +
               (monotone ? ", curves non-increasing" : ", a curve increases"));
}

int run_cmd(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

// 10: the CLI pipeline is byte-identical across two runs (manifest timestamps excepted)
void determinism(const std::string& cli, const fs::path& work) {
    Timer t;
    if (cli.empty()) {
        report(10, "determinism", false, 0, "no --cli given");
        return;
    }
    fs::remove_all(work);
    bool ran = true;
    for (const char* k : {"a", "b"}) {
        const fs::path d = work / k;
        const std::string c = quote(cli);
        ran = ran && run_cmd(c + " simulate --seed 7 --modes 4 --segments 3 --noise 0.01 --out-dir " + quote(d / "cal")) == 0;
        ran = ran && run_cmd(c + " calibrate --model shear10 --dataset " + quote(d / "cal/dataset.json") + " --out-dir " +
                             quote(d / "cal")) == 0;
        ran = ran && run_cmd(c + " simulate --seed 8 --modes 4 --segments 10 --damage 3:0.2 --out-dir " +
                             quote(d / "mon")) == 0;
        ran = ran && run_cmd(c + " monitor --model shear10 --dataset " + quote(d / "mon/dataset.json") +
                             " --calibration " + quote(d / "cal/calibration.json") + " --out-dir " + quote(d / "mon")) == 0;
        ran = ran && run_cmd(c + " report --calibration " + quote(d / "cal/calibration.json") + " --monitoring " +
                             quote(d / "mon/monitoring.json") + " --out-dir " + quote(d / "rep")) == 0;
    }
    int compared = 0, differ = 0;
    std::string which;
    if (ran)
        for (const auto& e : fs::recursive_directory_iterator(work / "a")) {
            if (!e.is_regular_file()) continue;
            const fs::path rel = fs::relative(e.path(), work / "a");
            const fs::path other = work / "b" / rel;
            std::string a = io::read_text(e.path().string()), b = fs::exists(other) ? io::read_text(other.string()) : "";
            if (rel.string().ends_with(".manifest.json")) {
                auto ja = io::parse(a, rel.string()), jb = io::parse(b, rel.string());
                for (auto* j : {&ja, &jb}) {
                    j->erase("started_utc");
                    j->erase("finished_utc");
                }
                // the run directory name differs; compare content hashes only
                a = ja.at("outputs").dump() + ja.at("seed").dump() + ja.at("config_hash").dump();
                b = jb.at("outputs").dump() + jb.at("seed").dump() + jb.at("config_hash").dump();
            }
            ++compared;
            if (a != b) ++differ, which += " " + rel.string();
        }
    report(10, "determinism", ran && compared > 0 && differ == 0, t.seconds(),
           ran ? std::to_string(compared) + " files compared, " + std::to_string(differ) + " differ" + which
               : "a pipeline step failed");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::string cli, work = "acceptance_work";
    app.add_option("--cli", cli, "path to the hsbl executable");
    app.add_option("--work", work, "scratch directory");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<void()>> checks{
        eigen_baseline, calibration_robustness, cov_identities, monotone_information, stationarity,
        hessian_oracle, sparsity_alarms, lambda_limit, damage_probability_sanity,
        [&] { determinism(cli, work); },
    };
    for (size_t k = 0; k < checks.size(); ++k) {
        try {
            checks[k]();
        } catch (const std::exception& e) {
            report(int(k + 1), "exception", false, 0, e.what());
        }
    }
    std::printf("%d of %zu criteria failed\n", failures, checks.size());
    return failures ? 1 : 0;
}
