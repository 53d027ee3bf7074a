#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracspde/error.hpp"
#include "fracspde/io.hpp"
#include "fracspde/seed.hpp"

using namespace fracspde;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"d":2,"M":8,"s":1,"beta":0.8,"b":1,"S":10,"dt":1e-3,"t_end":1,
  "zeta":"fisher","noise_N":2,"seed":7,"init":{"mean":1.2,"delta0":0.01}})";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("fracspde_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("minimal config parses with defaults") {
    const SimConfig cfg = parse_config_text(kMinimal);
    CHECK(cfg.d == 2);
    CHECK(cfg.M == 8);
    CHECK(cfg.beta == 0.8);
    CHECK(cfg.noise_N == 2);
    CHECK(cfg.seed == 7);
    CHECK(cfg.gamma == 0.1);
    CHECK(cfg.blowup_threshold == 1e6);
    CHECK(cfg.snapshot_stride == 0);
    CHECK(cfg.zeta == Nonlinearity::fisher);
    const auto& init = std::get<FisherInit>(cfg.init);
    CHECK(init.mean == 1.2);
    CHECK(init.delta0 == 0.01);
}

TEST_CASE("config rejections") {
    std::string text = kMinimal;
    const auto with = [&](const std::string& from, const std::string& to) {
        std::string t = text;
        t.replace(t.find(from), from.size(), to);
        return t;
    };
    CHECK_THROWS_WITH_AS(parse_config_text(with("\"beta\":0.8", "\"beta\":0.4")),
                         doctest::Contains("beta must satisfy 1/2 < beta <= 1"), InvalidParameter);
    CHECK_THROWS_WITH_AS(parse_config_text(with("\"d\":2", "\"d\":2,\"foo\":1")), doctest::Contains("foo"),
                         InvalidParameter);
    CHECK_THROWS_WITH_AS(parse_config_text(with("\"d\":2", "\"d\":2,\"d\":3")), doctest::Contains("duplicate"),
                         InvalidParameter);
    CHECK_THROWS_WITH_AS(parse_config_text(with("\"seed\":7,", "")), doctest::Contains("seed"), InvalidParameter);
    CHECK_THROWS_WITH_AS(parse_config_text(with("\"M\":8", "\"M\":\"8\"")), doctest::Contains("M"), InvalidParameter);
    CHECK_THROWS_WITH_AS(parse_config_text(with("\"zeta\":\"fisher\"", "\"zeta\":\"x\"")), doctest::Contains("zeta"),
                         InvalidParameter);
    CHECK_THROWS_WITH_AS(parse_config_text(with("\"delta0\":0.01", "\"delta0\":0.01,\"bar\":2")),
                         doctest::Contains("init.bar"), InvalidParameter);
    CHECK_THROWS_AS(parse_config_text("{not json"), InvalidParameter);
    CHECK_THROWS_AS(parse_config(fs::path("/nonexistent/cfg.json")), IoError);
}

TEST_CASE("other initial-data forms") {
    std::string modes = kMinimal;
    modes.replace(modes.find("{\"mean\":1.2,\"delta0\":0.01}"), 26,
                  R"({"modes":[{"k":[1,0],"re":1.0,"im":0.5}]})");
    const auto cfg = parse_config_text(modes);
    const auto& m = std::get<ModesInit>(cfg.init);
    REQUIRE(m.modes.size() == 1);
    CHECK(m.modes[0].first == Wavevector{1, 0, 0});
    CHECK(m.modes[0].second == Complex(1.0, 0.5));

    std::string rnd = kMinimal;
    rnd.replace(rnd.find("{\"mean\":1.2,\"delta0\":0.01}"), 26, R"({"random":{"decay":1.5}})");
    const auto r = std::get<RandomInit>(parse_config_text(rnd).init);
    CHECK(r.decay == 1.5);
    CHECK(r.amplitude == 1.0);
}

TEST_CASE("canonical hashing") {
    const auto a = parse_config_text(kMinimal);
    const auto b = parse_config_text(R"({ "init" : { "delta0":0.01, "mean":1.2 },
        "seed":7, "noise_N":2, "zeta":"fisher", "t_end":1, "dt":0.001,
        "S":10, "b":1, "beta":0.8, "s":1, "M":8, "d":2, "gamma": 0.1 })");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    auto c = a;
    c.seed = 8;
    CHECK(config_hash(c) != config_hash(a));
    CHECK(parse_config_text(config_to_json(a).dump()).seed == a.seed);
    CHECK(config_hash(parse_config_text(config_to_json(a).dump())) == config_hash(a));
}

TEST_CASE("trajectory outputs are byte-identical on rerun") {
    SimConfig cfg = parse_config_text(kMinimal);
    cfg.M = 3;
    cfg.beta = 1.0;
    cfg.t_end = 0.02;
    cfg.snapshot_stride = 5;
    const auto run = [&](const fs::path& dir) {
        std::mt19937_64 rng(derive_seed(cfg.seed, 0));
        TrajectoryRecord rec = integrate(cfg, rng);
        rec.config_hash = config_hash(cfg);
        rec.seed = cfg.seed;
        return write_trajectory_outputs(rec, dir);
    };
    const auto d1 = scratch("a"), d2 = scratch("b");
    const auto files = run(d1);
    run(d2);
    CHECK(files.size() == 2 + 5);
    for (const auto& f : files) CHECK(slurp(d1 / f) == slurp(d2 / f));
    const std::string hash8 = config_hash(cfg).substr(0, 8);
    CHECK(files[2].find(hash8) != std::string::npos);
    CHECK(slurp(d1 / "trajectory.csv").rfind("step,time,l2,hs,hneg_gamma,mean,cutoff\n", 0) == 0);
    const auto summary = nlohmann::json::parse(slurp(d1 / "summary.json"));
    for (const char* key : {"blew_up", "blowup_time", "final_norms", "seed", "config_hash"}) {
        CHECK(summary.contains(key));
    }
    const auto snap = read_field_binary(d1 / files[2]);
    CHECK(snap.cutoff() == 3);

    RunManifest m;
    m.config_hash = config_hash(cfg);
    m.started_at = m.finished_at = utc_timestamp();
    m.outputs = files;
    write_manifest(m, d1);
    const auto mj = nlohmann::json::parse(slurp(d1 / "manifest.json"));
    CHECK(mj["tool_version"] == kToolVersion);
    CHECK_THROWS_AS(write_text_file(d1 / "missing" / "x.txt", "x"), IoError);
}

TEST_CASE("survival, probe and dichotomy writers") {
    SurvivalCurve a, b;
    a.noise_N = 0;
    b.noise_N = 2;
    a.times = b.times = {0.0, 0.5, 1.0};
    a.fraction = {1.0, 1.0, 0.0};
    b.fraction = {1.0, 1.0, 1.0};
    const std::string csv = survival_csv({a, b});
    CHECK(csv.rfind("time,level_0,level_2\n", 0) == 0);
    b.times = {0.0, 1.0, 2.0};
    CHECK_THROWS_AS(survival_csv({a, b}), ShapeError);

    std::mt19937_64 rng(3);
    const auto report = probe_hypothesis(Nonlinearity::fisher, fisher_exponents(), 5, rng);
    const auto pj = probe_json(report);
    CHECK(pj["exponents"]["g1"] == 0.5);
    CHECK(pj["violations"] == 0);
    CHECK(pj["probes"].contains("iii"));

    const auto dj = dichotomy_json(1.0, 1e-3, 2.0, fisher_mean_dichotomy(1.0, {0.5, 2.0}, 1e-3, 2.0));
    CHECK(dj["rows"][0]["blowup_time"] == "bounded");
    CHECK(dj["rows"][1]["blew_up"] == true);
    CHECK(dj["dt"] == 1e-3);
    CHECK(plot_script().find("survival.csv") != std::string::npos);
}

}  // TEST_SUITE
