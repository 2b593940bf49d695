#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = AQM2D_CLI_PATH;
const std::string kConfigDir = AQM2D_CONFIG_DIR;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "aqm2d_cli_test";
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const std::string& name, const std::string& body) {
    const fs::path p = scratch_dir() / name;
    std::ofstream(p) << body;
    return p;
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    json j;
    in >> j;
    return j;
}

// A small self-contained config: known stable system, quick grid.
std::string small_stable_config() {
    return R"({
      "version": 1,
      "params": { "n_flows": 10, "lambda": 1.0, "capacity_pkts_per_s": 1000,
                  "t_prop": 0.001, "q_ref": 100, "scenario": "A", "ecn": "off" },
      "system": {
        "A": [[-1,0,0,0],[0,-1,0,0],[0,0,-1,0],[0,0,0,-1]],
        "A_tau": [[0.1,0,0,0],[0,0.1,0,0],[0,0,0.1,0],[0,0,0,0.1]],
        "B": [[0,0],[0,0],[0,0],[0,0]],
        "B_tau": [[0,0],[0,0],[0,0],[0,0]],
        "tau1": 0.1, "tau2": 0.1 },
      "grid": { "h1": 0.01, "h2": 0.01, "m1": 120, "m2": 120 },
      "boundary": { "x0_h": [1, 1], "x0_v": [1, 1] }
    })";
}

// Benchmark slow-start pipeline with a short grid for fast simulation runs.
std::string small_pipeline_config(const std::string& extra = "") {
    return R"({
      "version": 1,
      "params": { "n_flows": 800, "lambda": 1.0, "capacity_pkts_per_s": 10000,
                  "t_prop": 0.001, "q_ref": 2000, "scenario": "A", "ecn": "off" },
      "equilibrium_override": { "w": 1.3282, "p": 0.6001, "tau1": 0.2, "tau2": 0.201 },
      "grid": { "h1": 0.01, "h2": 0.01, "m1": 300, "m2": 300 },
      "boundary": { "x0_h": [-1, -20], "x0_v": [-1, -20] })" +
           extra + "\n}";
}

}  // namespace

TEST_CASE("equilibrium subcommand writes a report") {
    const fs::path out = scratch_dir() / "eq";
    const int rc = run("equilibrium --config " + kConfigDir + "/scenario-a.json --out " +
                       out.string());
    CHECK(rc == 0);
    const json j = read_json(out / "equilibrium.json");
    CHECK(j["w_h"].get<double>() == 1.3282);
    CHECK(j["p"].get<double>() == 0.6001);
    CHECK(j.contains("residual"));
}

TEST_CASE("config errors exit with code 1") {
    const fs::path bad = write_file("bad.json", R"({"version": 1, "params": {}, "oops": 3})");
    CHECK(run("equilibrium --config " + bad.string()) == 1);
    CHECK(run("equilibrium --config /nonexistent/nope.json") == 1);
    const fs::path notjson = write_file("notjson.json", "{ this is not json");
    CHECK(run("linearize --config " + notjson.string()) == 1);
    CHECK(run("equilibrium") == 1);  // missing required --config
}

TEST_CASE("equilibrium failures exit with code 2") {
    const fs::path degenerate = write_file("degenerate.json", R"({
      "version": 1,
      "params": { "n_flows": 800, "lambda": 1.0, "capacity_pkts_per_s": 10000,
                  "t_prop": 0.0, "q_ref": 0.0, "scenario": "A", "ecn": "off" }
    })");
    CHECK(run("equilibrium --config " + degenerate.string()) == 2);
}

TEST_CASE("linearize emits the four system matrices") {
    const fs::path cfg = write_file("pipeline.json", small_pipeline_config());
    const fs::path out = scratch_dir() / "lin";
    CHECK(run("linearize --config " + cfg.string() + " --out " + out.string()) == 0);
    const json j = read_json(out / "linearization.json");
    for (const char* key : {"A", "A_tau", "B", "B_tau"}) {
        REQUIRE(j.contains(key));
        CHECK(j[key].size() == 4);
    }
    CHECK(j["tau1"].get<double>() > 0.0);
}

TEST_CASE("analyze certifies the known stable system") {
    const fs::path cfg = write_file("stable.json", small_stable_config());
    const fs::path out = scratch_dir() / "an";
    CHECK(run("analyze --config " + cfg.string() + " --out " + out.string()) == 0);
    const json j = read_json(out / "certificate.json");
    CHECK(j["status"].get<std::string>() == "Feasible");
    CHECK(j["margin"].get<double>() > 0.0);
}

TEST_CASE("simulate: stable system decays, open benchmark loop diverges") {
    const fs::path stable = write_file("stable_sim.json", small_stable_config());
    const fs::path out1 = scratch_dir() / "sim_stable";
    CHECK(run("simulate --config " + stable.string() + " --out " + out1.string()) == 0);
    const json s1 = read_json(out1 / "summary.json");
    CHECK_FALSE(s1["divergent"].get<bool>());
    CHECK(s1["tail_ratio"].get<double>() < 1.0);
    CHECK(fs::exists(out1 / "trajectory.csv"));
    CHECK(fs::exists(out1 / "decay.csv"));

    // The uncontrolled benchmark loop blows up; that is a result (exit 0).
    const fs::path open = write_file("open_sim.json", small_pipeline_config());
    const fs::path out2 = scratch_dir() / "sim_open";
    CHECK(run("simulate --config " + open.string() + " --gain none --out " +
              out2.string()) == 0);
    const json s2 = read_json(out2 / "summary.json");
    const bool unstable = s2["divergent"].get<bool>() || s2["tail_ratio"].get<double>() > 1.0;
    CHECK(unstable);
}

TEST_CASE("simulate accepts the published gain names") {
    const fs::path cfg = write_file("gain_sim.json", small_pipeline_config());
    const fs::path out = scratch_dir() / "sim_ka";
    CHECK(run("simulate --config " + cfg.string() + " --gain paper-KA --out " +
              out.string()) == 0);
    const json s = read_json(out / "summary.json");
    CHECK(s.contains("verdict"));
    CHECK(s.contains("tail_ratio"));
    CHECK(run("simulate --config " + cfg.string() + " --gain paper-KB") == 0);
}

TEST_CASE("synthesize then simulate with the produced gain file") {
    const fs::path cfg = write_file("synth.json", small_pipeline_config());
    const fs::path out = scratch_dir() / "synth";
    REQUIRE(run("synthesize --config " + cfg.string() + " --out " + out.string()) == 0);
    const json cert = read_json(out / "certificate.json");
    REQUIRE(cert["status"].get<std::string>() == "Feasible");
    const json gain = read_json(out / "gain.json");
    REQUIRE(gain.contains("K"));
    REQUIRE(gain["K"].size() == 2);
    REQUIRE(gain["K"][0].size() == 4);

    const fs::path out2 = scratch_dir() / "synth_sim";
    CHECK(run("simulate --config " + cfg.string() + " --gain " +
              (out / "gain.json").string() + " --out " + out2.string()) == 0);
    const json s = read_json(out2 / "summary.json");
    CHECK_FALSE(s["divergent"].get<bool>());
}

TEST_CASE("verify-lemma passes its randomized audit") {
    const fs::path out = scratch_dir() / "lemma";
    CHECK(run("verify-lemma --out " + out.string()) == 0);
    const json j = read_json(out / "lemma_report.json");
    CHECK(j["pass"].get<bool>());
    CHECK(j["trials"].get<int>() == 1000);
}

TEST_CASE("diff-report flags the documented discrepancies") {
    const fs::path out = scratch_dir() / "diff";
    CHECK(run("diff-report --config " + kConfigDir + "/scenario-a.json --out " +
              out.string()) == 0);
    const json j = read_json(out / "diff_report.json");
    REQUIRE(j["entries"].is_array());
    CHECK(j["entries"].size() == 4);
    bool saw_queue_self_term = false;
    for (const auto& e : j["entries"])
        if (e["matrix"] == "A" && e["row"] == 1 && e["col"] == 1) saw_queue_self_term = true;
    CHECK(saw_queue_self_term);
}
