// fracspde command-line driver.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracspde/dynamics.hpp"
#include "fracspde/error.hpp"
#include "fracspde/experiments.hpp"
#include "fracspde/fractional.hpp"
#include "fracspde/io.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/seed.hpp"

namespace fs = std::filesystem;
using namespace fracspde;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::string out = "out";
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
};

unsigned resolve_threads(const GlobalOptions& g) {
    if (g.threads) return *g.threads;
    if (const char* env = std::getenv("FRACSPDE_THREADS"); env != nullptr && *env != '\0') {
        try {
            const long v = std::stol(env);
            if (v < 0) throw std::invalid_argument("negative");
            return static_cast<unsigned>(v);
        } catch (const std::exception&) {
            throw InvalidParameter(std::string("FRACSPDE_THREADS must be a non-negative integer, got '") +
                                   env + "'");
        }
    }
    return 0;
}

fs::path prepare_out(const GlobalOptions& g) {
    fs::path dir(g.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

SimConfig load_config(const std::string& path, const GlobalOptions& g) {
    SimConfig cfg = parse_config(path);
    if (g.seed) cfg.seed = *g.seed;
    return cfg;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::stringstream is(item);
        T v{};
        if (!(is >> v) || !(is >> std::ws).eof()) throw InvalidParameter(what + ": cannot parse '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw InvalidParameter(what + " must not be empty");
    return out;
}

void finish(RunManifest& manifest, const fs::path& dir) {
    manifest.finished_at = utc_timestamp();
    manifest.outputs.push_back("manifest.json");
    write_manifest(manifest, dir);
}

RunManifest start_manifest(const std::string& hash, std::uint64_t seed) {
    RunManifest m;
    m.config_hash = hash;
    m.base_seed = seed;
    m.started_at = utc_timestamp();
    return m;
}

// Hash of a JSON parameter block for subcommands without a SimConfig.
std::string params_hash(const json& params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : params.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_plot_script(const fs::path& dir, RunManifest& m) {
    write_text_file(dir / "plot.py", plot_script());
    m.outputs.push_back("plot.py");
}

int run_simulate(const GlobalOptions& g, const std::string& config_path) {
    const SimConfig cfg = load_config(config_path, g);
    const fs::path dir = prepare_out(g);
    RunManifest m = start_manifest(config_hash(cfg), cfg.seed);
    std::mt19937_64 rng(derive_seed(cfg.seed, 0));
    TrajectoryRecord rec = integrate(cfg, rng);
    rec.config_hash = m.config_hash;
    rec.seed = cfg.seed;
    m.outputs = write_trajectory_outputs(rec, dir);
    write_plot_script(dir, m);
    finish(m, dir);
    std::cout << trajectory_summary(rec).dump() << "\n";
    return 0;
}

int run_ensemble(const GlobalOptions& g, const std::string& config_path, std::size_t runs) {
    const SimConfig cfg = load_config(config_path, g);
    const fs::path dir = prepare_out(g);
    RunManifest m = start_manifest(config_hash(cfg), cfg.seed);
    EnsembleOptions opts;
    opts.threads = resolve_threads(g);
    const SurvivalCurve curve = ensemble_survival(cfg, runs, cfg.seed, opts);
    write_text_file(dir / "survival.csv", survival_csv({curve}));
    json j;
    j["noise_N"] = curve.noise_N;
    j["b"] = curve.b;
    j["A"] = curve.A;
    j["n_runs"] = curve.n_runs;
    const double med = curve.median_blowup_time();
    j["median_blowup_time"] = std::isfinite(med) ? json(med) : json("inf");
    json times = json::array();
    for (const auto& bt : curve.blowup_times) times.push_back(bt ? json(*bt) : json(nullptr));
    j["blowup_times"] = times;
    j["config_hash"] = m.config_hash;
    j["dt"] = cfg.dt;
    write_text_file(dir / "ensemble.json", j.dump(2) + "\n");
    m.outputs = {"survival.csv", "ensemble.json"};
    write_plot_script(dir, m);
    finish(m, dir);
    std::cout << j.dump() << "\n";
    return 0;
}

int run_delay(const GlobalOptions& g, const std::string& config_path, const std::string& levels,
              std::size_t runs) {
    const SimConfig cfg = load_config(config_path, g);
    const fs::path dir = prepare_out(g);
    RunManifest m = start_manifest(config_hash(cfg), cfg.seed);
    EnsembleOptions opts;
    opts.threads = resolve_threads(g);
    const DelayStudy study = delay_study(cfg, parse_list<int>(levels, "--levels"), runs, cfg.seed, opts);
    std::vector<SurvivalCurve> curves;
    for (const auto& r : study.rows) curves.push_back(r.curve);
    write_text_file(dir / "survival.csv", survival_csv(curves));
    json j = delay_json(study);
    j["config_hash"] = m.config_hash;
    j["dt"] = cfg.dt;
    write_text_file(dir / "delay.json", j.dump(2) + "\n");
    m.outputs = {"survival.csv", "delay.json"};
    write_plot_script(dir, m);
    finish(m, dir);
    std::cout << j.dump() << "\n";
    return 0;
}

int run_probe(const GlobalOptions& g, const std::string& zeta_name, std::size_t samples,
              const std::string& exponents, bool identical) {
    const Nonlinearity zeta = nonlinearity_from_string(zeta_name);
    HypothesisExponents ex =
        zeta == Nonlinearity::keller_segel ? keller_segel_exponents() : fisher_exponents();
    if (!exponents.empty()) {
        const auto v = parse_list<double>(exponents, "--exponents");
        if (v.size() != 7) throw InvalidParameter("--exponents needs 7 values a1,g1,a2,g2,a3,g3,eta");
        ex = {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    }
    const std::uint64_t seed = g.seed.value_or(0);
    ProbeFieldSpec spec;
    spec.identical_pairs = identical;
    std::mt19937_64 rng(derive_seed(seed, 0));
    const HypothesisReport report = probe_hypothesis(zeta, ex, samples, rng, spec);
    const fs::path dir = prepare_out(g);
    json j = probe_json(report);
    j["seed"] = seed;
    RunManifest m = start_manifest(params_hash(j), seed);
    write_text_file(dir / "probe.json", j.dump(2) + "\n");
    m.outputs = {"probe.json"};
    finish(m, dir);
    std::cout << j.dump() << "\n";
    return report.violations == 0 ? 0 : 2;
}

int run_dichotomy(const GlobalOptions& g, double beta, const std::string& x0s, double dt, double t_end,
                  double threshold) {
    const auto rows = fisher_mean_dichotomy(beta, parse_list<double>(x0s, "--x0"), dt, t_end, threshold);
    const fs::path dir = prepare_out(g);
    const json j = dichotomy_json(beta, dt, t_end, rows);
    RunManifest m = start_manifest(params_hash(j), 0);
    write_text_file(dir / "dichotomy.json", j.dump(2) + "\n");
    m.outputs = {"dichotomy.json"};
    finish(m, dir);
    std::cout << j.dump() << "\n";
    return 0;
}

ScalarRhs parse_rhs(const std::string& spec) {
    if (spec == "fisher") return [](double x) { return x * x - x; };
    const std::string prefix = "linear:";
    if (spec.rfind(prefix, 0) == 0) {
        const double lambda = parse_list<double>(spec.substr(prefix.size()), "--rhs linear").at(0);
        return [lambda](double x) { return lambda * x; };
    }
    throw InvalidParameter("--rhs must be 'fisher' or 'linear:<lambda>', got '" + spec + "'");
}

int run_ode(const GlobalOptions& g, double beta, double x0, double dt, double t_end, double threshold,
            const std::string& rhs) {
    const ScalarTrajectory traj = solve_caputo_scalar_ode(parse_rhs(rhs), FracOrder(beta), x0, dt, t_end, threshold);
    const fs::path dir = prepare_out(g);
    json summary = scalar_summary(traj);
    json params = {{"beta", beta}, {"x0", x0}, {"dt", dt}, {"t_end", t_end}, {"threshold", threshold}, {"rhs", rhs}};
    RunManifest m = start_manifest(params_hash(params), 0);
    write_text_file(dir / "ode.csv", scalar_trajectory_csv(traj));
    write_text_file(dir / "ode.json", summary.dump() + "\n");
    m.outputs = {"ode.csv", "ode.json"};
    finish(m, dir);
    std::cout << summary.dump() << "\n";
    return 0;
}

int run_noise_audit(const GlobalOptions& g, int N, int d, bool to_file) {
    const ThetaSequence theta = make_theta_cutoff(N, d);
    const NoiseBasis basis(theta);
    const SquareMatrix iso = isotropy_matrix(theta, basis);
    json matrix = json::array();
    for (int i = 0; i < d; ++i) {
        json row = json::array();
        for (int k = 0; k < d; ++k) row.push_back(iso(i, k));
        matrix.push_back(row);
    }
    const double l2 = theta.l2_norm();
    json j;
    j["N"] = N;
    j["d"] = d;
    j["active_modes"] = theta.size();
    j["isotropy_matrix"] = matrix;
    j["expected_diagonal"] = (d - 1.0) / d * l2 * l2;
    j["linf_over_l2"] = theta.linf_norm() / l2;
    if (to_file) {
        const fs::path dir = prepare_out(g);
        RunManifest m = start_manifest(params_hash({{"N", N}, {"d", d}}), 0);
        write_text_file(dir / "noise_audit.json", j.dump(2) + "\n");
        m.outputs = {"noise_audit.json"};
        finish(m, dir);
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral Galerkin simulator for time-fractional SPDEs with transport noise"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kToolVersion);

    GlobalOptions g;
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores; env FRACSPDE_THREADS)");
    app.add_option("--seed", g.seed, "Seed override");

    std::string config;
    std::size_t runs = 50;
    std::string levels = "0,2,4";

    auto* sim = app.add_subcommand("simulate", "Integrate one trajectory");
    sim->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);

    auto* ens = app.add_subcommand("ensemble", "Monte-Carlo survival curve");
    ens->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
    ens->add_option("--runs", runs, "Number of runs")->capture_default_str()->check(CLI::PositiveNumber);

    auto* delay = app.add_subcommand("delay-study", "Blow-up delay across noise levels");
    delay->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
    delay->add_option("--levels", levels, "Comma-separated theta cutoffs")->capture_default_str();
    delay->add_option("--runs", runs, "Runs per level")->capture_default_str()->check(CLI::PositiveNumber);

    std::string zeta = "fisher";
    std::size_t samples = 200;
    std::string exponents;
    bool identical = false;
    auto* probe = app.add_subcommand("probe", "Empirical growth-condition probes");
    probe->add_option("--zeta", zeta, "fisher | ks")->capture_default_str();
    probe->add_option("--samples", samples, "Number of samples")->capture_default_str()->check(CLI::PositiveNumber);
    probe->add_option("--exponents", exponents, "a1,g1,a2,g2,a3,g3,eta");
    probe->add_flag("--identical-pairs", identical, "Use u = v in the monotonicity probe");

    double beta = 1.0, dt = 1e-3, t_end = 20.0, threshold = kDefaultBlowupThreshold;
    std::string x0s = "0.25,0.5,0.75,1,1.2,1.5,2";
    auto* dich = app.add_subcommand("dichotomy", "Mean-mode ODE x' = x^2 - x for several x0");
    dich->add_option("--beta", beta, "Caputo order")->capture_default_str();
    dich->add_option("--x0", x0s, "Comma-separated initial values")->capture_default_str();
    dich->add_option("--dt", dt, "Step")->capture_default_str();
    dich->add_option("--t-end", t_end, "Horizon")->capture_default_str();
    dich->add_option("--threshold", threshold, "Blow-up threshold")->capture_default_str();

    double x0 = 1.0;
    std::string rhs = "fisher";
    auto* ode = app.add_subcommand("ode", "Scalar Caputo ODE");
    ode->add_option("--beta", beta, "Caputo order")->capture_default_str();
    ode->add_option("--x0", x0, "Initial value")->capture_default_str();
    ode->add_option("--dt", dt, "Step")->capture_default_str();
    ode->add_option("--t-end", t_end, "Horizon")->capture_default_str();
    ode->add_option("--threshold", threshold, "Blow-up threshold")->capture_default_str();
    ode->add_option("--rhs", rhs, "fisher | linear:<lambda>")->capture_default_str();

    double ml_alpha = 1.0, ml_gamma = 1.0, ml_z = 0.0;
    auto* ml = app.add_subcommand("ml", "Evaluate E_{alpha,gamma}(z)");
    ml->add_option("alpha", ml_alpha)->required();
    ml->add_option("gamma", ml_gamma)->required();
    ml->add_option("z", ml_z)->required();

    int audit_N = 1, audit_d = 2;
    bool audit_write = false;
    auto* audit = app.add_subcommand("noise-audit", "Isotropy matrix and theta ratio");
    audit->add_option("--N", audit_N, "Theta cutoff radius")->capture_default_str();
    audit->add_option("--d", audit_d, "Dimension")->capture_default_str();
    audit->add_flag("--write", audit_write, "Also write noise_audit.json under --out");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return run_simulate(g, config);
        if (*ens) return run_ensemble(g, config, runs);
        if (*delay) return run_delay(g, config, levels, runs);
        if (*probe) return run_probe(g, zeta, samples, exponents, identical);
        if (*dich) return run_dichotomy(g, beta, x0s, dt, t_end, threshold);
        if (*ode) return run_ode(g, beta, x0, dt, t_end, threshold, rhs);
        if (*ml) {
            std::printf("%.17g\n", mittag_leffler(ml_alpha, ml_gamma, ml_z));
            return 0;
        }
        if (*audit) return run_noise_audit(g, audit_N, audit_d, audit_write);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
