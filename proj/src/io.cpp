#include "fracspde/io.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "fracspde/error.hpp"

namespace fracspde {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw InvalidParameter("config: " + what); }

json parse_strict(const std::string& text) {
    // Duplicate keys are silently merged by the default parser; track them per object.
    std::vector<std::set<std::string>> seen;
    json::parser_callback_t cb = [&seen](int, json::parse_event_t event, json& parsed) {
        switch (event) {
            case json::parse_event_t::object_start: seen.emplace_back(); break;
            case json::parse_event_t::object_end: seen.pop_back(); break;
            case json::parse_event_t::key: {
                const auto key = parsed.get<std::string>();
                if (!seen.back().insert(key).second) config_error("duplicate key '" + key + "'");
                break;
            }
            default: break;
        }
        return true;
    };
    try {
        return json::parse(text, cb);
    } catch (const json::parse_error& e) {
        config_error(std::string("invalid JSON: ") + e.what());
    }
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (allowed.count(key) == 0) config_error("unknown key '" + where + key + "'");
    }
}

const json& require(const json& obj, const std::string& key, const std::string& where = "") {
    auto it = obj.find(key);
    if (it == obj.end()) config_error("missing required key '" + where + key + "'");
    return *it;
}

double number(const json& v, const std::string& key) {
    if (!v.is_number()) config_error("key '" + key + "' must be a number");
    return v.get<double>();
}

int integer(const json& v, const std::string& key) {
    if (!v.is_number_integer()) config_error("key '" + key + "' must be an integer");
    return v.get<int>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) config_error("key '" + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

InitialCondition parse_init(const json& init) {
    if (!init.is_object()) config_error("key 'init' must be an object");
    if (init.contains("modes")) {
        reject_unknown(init, {"modes"}, "init.");
        const auto& modes = init.at("modes");
        if (!modes.is_array()) config_error("key 'init.modes' must be an array");
        ModesInit out;
        for (const auto& m : modes) {
            if (!m.is_object()) config_error("entries of 'init.modes' must be objects");
            reject_unknown(m, {"k", "re", "im"}, "init.modes[].");
            const auto& k = require(m, "k", "init.modes[].");
            if (!k.is_array() || k.size() < 2 || k.size() > 3) {
                config_error("key 'init.modes[].k' must be an array of 2 or 3 integers");
            }
            Wavevector wv{0, 0, 0};
            for (std::size_t c = 0; c < k.size(); ++c) wv[c] = integer(k[c], "init.modes[].k");
            const double re = number(require(m, "re", "init.modes[]."), "init.modes[].re");
            const double im = m.contains("im") ? number(m.at("im"), "init.modes[].im") : 0.0;
            out.modes.emplace_back(wv, Complex{re, im});
        }
        return out;
    }
    if (init.contains("random")) {
        reject_unknown(init, {"random"}, "init.");
        const auto& r = init.at("random");
        if (!r.is_object()) config_error("key 'init.random' must be an object");
        reject_unknown(r, {"decay", "amplitude", "mean"}, "init.random.");
        RandomInit out;
        if (r.contains("decay")) out.decay = number(r.at("decay"), "init.random.decay");
        if (r.contains("amplitude")) out.amplitude = number(r.at("amplitude"), "init.random.amplitude");
        if (r.contains("mean")) out.mean = number(r.at("mean"), "init.random.mean");
        return out;
    }
    reject_unknown(init, {"mean", "delta0"}, "init.");
    FisherInit out;
    out.mean = number(require(init, "mean", "init."), "init.mean");
    out.delta0 = number(require(init, "delta0", "init."), "init.delta0");
    return out;
}

json init_to_json(const InitialCondition& init) {
    if (const auto* m = std::get_if<ModesInit>(&init)) {
        json modes = json::array();
        for (const auto& [k, c] : m->modes) {
            modes.push_back({{"k", {k[0], k[1], k[2]}}, {"re", c.real()}, {"im", c.imag()}});
        }
        return {{"modes", modes}};
    }
    if (const auto* r = std::get_if<RandomInit>(&init)) {
        return {{"random", {{"decay", r->decay}, {"amplitude", r->amplitude}, {"mean", r->mean}}}};
    }
    const auto& f = std::get<FisherInit>(init);
    return {{"mean", f.mean}, {"delta0", f.delta0}};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json optional_time(const std::optional<double>& t) {
    if (!t) return nullptr;
    if (std::isinf(*t)) return "inf";
    return *t;
}

json finite_or_string(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

}  // namespace

SimConfig parse_config_text(const std::string& text) {
    const json doc = parse_strict(text);
    if (!doc.is_object()) config_error("top level must be an object");
    reject_unknown(doc,
                   {"d", "M", "s", "beta", "b", "S", "gamma", "dt", "t_end", "zeta", "noise_N",
                    "seed", "blowup_threshold", "snapshot_stride", "init"},
                   "");
    SimConfig cfg;
    cfg.d = integer(require(doc, "d"), "d");
    cfg.M = integer(require(doc, "M"), "M");
    cfg.s = number(require(doc, "s"), "s");
    cfg.beta = number(require(doc, "beta"), "beta");
    cfg.b = number(require(doc, "b"), "b");
    cfg.S = number(require(doc, "S"), "S");
    cfg.dt = number(require(doc, "dt"), "dt");
    cfg.t_end = number(require(doc, "t_end"), "t_end");
    const auto& zeta = require(doc, "zeta");
    if (!zeta.is_string()) config_error("key 'zeta' must be a string");
    try {
        cfg.zeta = nonlinearity_from_string(zeta.get<std::string>());
    } catch (const InvalidParameter& e) {
        config_error(std::string("key 'zeta': ") + e.what());
    }
    cfg.noise_N = integer(require(doc, "noise_N"), "noise_N");
    cfg.seed = unsigned_integer(require(doc, "seed"), "seed");
    cfg.gamma = doc.contains("gamma") ? number(doc.at("gamma"), "gamma") : 0.1;
    cfg.blowup_threshold =
        doc.contains("blowup_threshold") ? number(doc.at("blowup_threshold"), "blowup_threshold")
                                         : kDefaultBlowupThreshold;
    cfg.snapshot_stride =
        doc.contains("snapshot_stride") ? unsigned_integer(doc.at("snapshot_stride"), "snapshot_stride")
                                        : 0;
    cfg.init = parse_init(require(doc, "init"));
    validate(cfg);
    return cfg;
}

SimConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

json config_to_json(const SimConfig& cfg) {
    json j;
    j["d"] = cfg.d;
    j["M"] = cfg.M;
    j["s"] = cfg.s;
    j["beta"] = cfg.beta;
    j["b"] = cfg.b;
    j["S"] = cfg.S;
    j["gamma"] = cfg.gamma;
    j["dt"] = cfg.dt;
    j["t_end"] = cfg.t_end;
    j["zeta"] = to_string(cfg.zeta);
    j["noise_N"] = cfg.noise_N;
    j["seed"] = cfg.seed;
    j["blowup_threshold"] = cfg.blowup_threshold;
    j["snapshot_stride"] = cfg.snapshot_stride;
    j["init"] = init_to_json(cfg.init);
    return j;
}

std::string config_hash(const SimConfig& cfg) {
    const std::string canonical = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir) {
    json j;
    j["config_hash"] = manifest.config_hash;
    j["tool_version"] = manifest.tool_version;
    j["base_seed"] = manifest.base_seed;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["outputs"] = manifest.outputs;
    write_text_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
    std::string out = "step,time,l2,hs,hneg_gamma,mean,cutoff\n";
    for (std::size_t i = 0; i < rec.size(); ++i) {
        out += std::to_string(i);
        for (double v : {rec.times[i], rec.l2_norm[i], rec.hs_norm[i], rec.hneg_gamma_norm[i],
                         rec.mean_mode[i], rec.cutoff_value[i]}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

json trajectory_summary(const TrajectoryRecord& rec) {
    json j;
    j["blew_up"] = rec.blew_up;
    j["blowup_time"] = optional_time(rec.blowup_time);
    json last = json::object();
    if (rec.size() > 0) {
        const std::size_t i = rec.size() - 1;
        last["time"] = rec.times[i];
        last["l2"] = rec.l2_norm[i];
        last["hs"] = rec.hs_norm[i];
        last["hneg_gamma"] = rec.hneg_gamma_norm[i];
        last["mean"] = rec.mean_mode[i];
    }
    j["final_norms"] = last;
    j["seed"] = rec.seed;
    j["config_hash"] = rec.config_hash;
    j["dt"] = rec.dt;
    return j;
}

std::vector<std::string> write_trajectory_outputs(const TrajectoryRecord& rec,
                                                  const std::filesystem::path& out_dir) {
    std::vector<std::string> written;
    write_text_file(out_dir / "trajectory.csv", trajectory_csv(rec));
    written.emplace_back("trajectory.csv");
    write_text_file(out_dir / "summary.json", trajectory_summary(rec).dump(2) + "\n");
    written.emplace_back("summary.json");
    const std::string prefix = rec.config_hash.substr(0, 8);
    for (const auto& snap : rec.snapshots) {
        char name[64];
        std::snprintf(name, sizeof(name), "snapshot_%s_%06zu.bin", prefix.c_str(), snap.step);
        write_field_binary(snap.field, out_dir / name);
        written.emplace_back(name);
    }
    return written;
}

std::string survival_csv(const std::vector<SurvivalCurve>& curves) {
    if (curves.empty()) throw InvalidParameter("survival_csv needs at least one curve");
    for (const auto& c : curves) {
        if (c.times != curves.front().times) throw ShapeError("survival curves use different grids");
    }
    std::string out = "time";
    for (const auto& c : curves) out += ",level_" + std::to_string(c.noise_N);
    out += '\n';
    const auto& times = curves.front().times;
    for (std::size_t i = 0; i < times.size(); ++i) {
        out += format_double(times[i]);
        for (const auto& c : curves) {
            out += ',';
            out += format_double(c.fraction[i]);
        }
        out += '\n';
    }
    return out;
}

json delay_json(const DelayStudy& study) {
    json j;
    j["deterministic_blowup_time"] = study.deterministic_blowup;
    json rows = json::array();
    for (const auto& r : study.rows) {
        json row;
        row["noise_N"] = r.noise_N;
        row["b"] = r.b;
        row["A"] = r.A;
        row["linf_over_l2"] = r.ratio ? json(*r.ratio) : json(nullptr);
        row["median_blowup_time"] = finite_or_string(r.median_blowup);
        row["survival_at_deterministic_blowup"] = r.survival_at_deterministic;
        row["n_runs"] = r.curve.n_runs;
        json times = json::array();
        for (const auto& bt : r.curve.blowup_times) times.push_back(optional_time(bt));
        row["blowup_times"] = times;
        rows.push_back(row);
    }
    j["levels"] = rows;
    j["median_strictly_increasing"] = study.median_strictly_increasing;
    j["survival_non_decreasing"] = study.survival_non_decreasing;
    j["survival_strict_increase"] = study.survival_strict_increase;
    if (study.premise_fit) {
        j["premise_fit"] = {{"K", study.premise_fit->K},
                            {"lambda", study.premise_fit->lambda},
                            {"residual", study.premise_fit->residual}};
    } else {
        j["premise_fit"] = nullptr;
    }
    return j;
}

json probe_json(const HypothesisReport& report) {
    const auto& e = report.exponents;
    json j;
    j["zeta"] = to_string(report.nonlinearity);
    j["exponents"] = {{"a1", e.a1}, {"g1", e.g1}, {"a2", e.a2}, {"g2", e.g2},
                      {"a3", e.a3}, {"g3", e.g3}, {"eta", e.eta}};
    j["n_samples"] = report.n_samples;
    j["degenerate_pairs"] = report.degenerate_pairs;
    j["violations"] = report.violations;
    const char* names[3] = {"i", "ii", "iii"};
    for (int p = 0; p < 3; ++p) {
        const auto& s = report.probes[p];
        j["probes"][names[p]] = {{"max_ratio", finite_or_string(s.max_ratio)},
                                 {"median_ratio", finite_or_string(s.median_ratio)},
                                 {"violations", s.violations},
                                 {"growth", finite_or_string(s.growth)},
                                 {"n", s.ratios.size()}};
    }
    return j;
}

json dichotomy_json(double beta, double dt, double t_end, const std::vector<DichotomyRow>& rows) {
    json j;
    j["beta"] = beta;
    j["dt"] = dt;
    j["t_end"] = t_end;
    json arr = json::array();
    for (const auto& r : rows) {
        json row;
        row["x0"] = r.x0;
        row["blew_up"] = r.blew_up;
        row["blowup_time"] = r.blew_up ? optional_time(r.blowup_time) : json("bounded");
        row["final_value"] = finite_or_string(r.final_value);
        row["min_value"] = r.min_value;
        row["max_value"] = finite_or_string(r.max_value);
        arr.push_back(row);
    }
    j["rows"] = arr;
    return j;
}

std::string scalar_trajectory_csv(const ScalarTrajectory& traj) {
    std::string out = "time,value\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out += format_double(traj.times[i]);
        out += ',';
        out += format_double(traj.values[i]);
        out += '\n';
    }
    return out;
}

json scalar_summary(const ScalarTrajectory& traj) {
    return {{"blew_up", traj.blew_up}, {"blowup_time", optional_time(traj.blowup_time)},
            {"dt", traj.dt}};
}

std::string plot_script() {
    return R"(#!/usr/bin/env python3
"""Plots survival.csv and trajectory.csv found next to this script."""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def read(name):
    path = os.path.join(here, name)
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {h: [float(r[i]) for r in body] for i, h in enumerate(header)}
    return header, cols


survival = read("survival.csv")
if survival:
    header, cols = survival
    fig, ax = plt.subplots()
    for h in header[1:]:
        ax.step(cols["time"], cols[h], where="post", label=h)
    ax.set_xlabel("t")
    ax.set_ylabel("survival fraction")
    ax.legend()
    fig.savefig(os.path.join(here, "survival.png"), dpi=120)

traj = read("trajectory.csv")
if traj:
    _, cols = traj
    fig, ax = plt.subplots()
    for key in ("l2", "hneg_gamma", "mean"):
        ax.plot(cols["time"], cols[key], label=key)
    ax.set_yscale("symlog")
    ax.set_xlabel("t")
    ax.legend()
    fig.savefig(os.path.join(here, "trajectory.png"), dpi=120)

if not survival and not traj:
    sys.exit("no survival.csv or trajectory.csv next to the script")
)";
}

}  // namespace fracspde
