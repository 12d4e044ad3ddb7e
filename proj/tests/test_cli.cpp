#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "trajflow/rng.hpp"

namespace fs = std::filesystem;

namespace {

std::string binary() {
    if (const char* env = std::getenv("TRAJFLOW_BIN")) return env;
    return "../trajflow";
}

struct RunResult {
    int code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string cmd = binary() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe)) res.output += buf;
    const int status = pclose(pipe);
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("trajflow_cli_" + std::to_string(trajflow::SeededRng(
                   std::random_device{}()).next_u64()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub) const { return (path / sub).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

// Small maze run: 16 routes, a narrow net, a handful of optimizer steps.
const char* kTinyConfig = R"({
  "seed": 5,
  "domain": {"kind": "maze", "count": 16, "horizon": 24},
  "model": {"base_channels": 8, "depth": 1, "kernel_size": 3, "time_embed_dim": 8, "groups": 4},
  "trainer": {"steps": 30, "batch_size": 4, "checkpoint_every": 0}
})";

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run("--help").code == 0);
    CHECK(run("generate --help").code == 0);

    CHECK(run("").code == 2);                       // missing subcommand
    CHECK(run("generate --no-such-flag").code == 2);
    CHECK(run("frobnicate").code == 2);
}

TEST_CASE("generate, train, sample, eval and benchmark chain") {
    TempDir tmp;
    write_file(tmp.path / "config.json", kTinyConfig);

    const RunResult gen = run("generate --config " + tmp.str("config.json") + " --out " +
                              tmp.str("data"));
    CHECK(gen.code == 0);
    CHECK(fs::exists(tmp.path / "data" / "manifest.json"));
    CHECK(fs::exists(tmp.path / "data" / "trajectories.csv"));
    CHECK(fs::exists(tmp.path / "data" / "contexts.csv"));
    CHECK(fs::exists(tmp.path / "data" / "config.resolved.json"));
    CHECK(fs::exists(tmp.path / "data" / "preview.svg"));

    const RunResult tr = run("train --config " + tmp.str("config.json") + " --data " +
                             tmp.str("data") + " --out " + tmp.str("run"));
    CHECK(tr.code == 0);
    CHECK(fs::exists(tmp.path / "run" / "model.ckpt"));
    CHECK(fs::exists(tmp.path / "run" / "loss.csv"));
    CHECK(fs::exists(tmp.path / "run" / "loss.svg"));

    const RunResult sa = run("sample --checkpoint " + tmp.str("run/model.ckpt") + " --data " +
                             tmp.str("data") + " --out " + tmp.str("samples") +
                             " --num-steps 2 --num-samples 3");
    CHECK(sa.code == 0);
    CHECK(sa.output.find("2 integration steps (6 network calls") != std::string::npos);
    CHECK(fs::exists(tmp.path / "samples" / "samples.csv"));
    CHECK(fs::exists(tmp.path / "samples" / "samples.svg"));

    const RunResult ev = run("eval --checkpoint " + tmp.str("run/model.ckpt") + " --data " +
                             tmp.str("data") + " --out " + tmp.str("eval") +
                             " --steps 1,4 --num-samples 2 --max-items 2");
    CHECK(ev.code == 0);
    CHECK(fs::exists(tmp.path / "eval" / "eval_summary.csv"));
    CHECK(fs::exists(tmp.path / "eval" / "ade_curve.csv"));

    const RunResult be = run("benchmark --checkpoint " + tmp.str("run/model.ckpt") + " --data " +
                             tmp.str("data") + " --out " + tmp.str("bench") +
                             " --steps 1,2 --num-samples 2 --max-items 1 --repetitions 3");
    CHECK(be.code == 0);
    CHECK(fs::exists(tmp.path / "bench" / "benchmark.csv"));
    CHECK(fs::exists(tmp.path / "bench" / "latency.csv"));
}

TEST_CASE("a persisted config reproduces the run byte for byte") {
    TempDir tmp;
    write_file(tmp.path / "config.json", kTinyConfig);

    REQUIRE(run("generate --config " + tmp.str("config.json") + " --out " + tmp.str("a")).code ==
            0);
    REQUIRE(run("generate --config " + tmp.str("a/config.resolved.json") + " --out " +
                tmp.str("b")).code == 0);
    CHECK(slurp(tmp.path / "a" / "trajectories.csv") == slurp(tmp.path / "b" / "trajectories.csv"));
    CHECK(slurp(tmp.path / "a" / "contexts.csv") == slurp(tmp.path / "b" / "contexts.csv"));
    CHECK(slurp(tmp.path / "a" / "manifest.json") == slurp(tmp.path / "b" / "manifest.json"));

    REQUIRE(run("train --config " + tmp.str("config.json") + " --data " + tmp.str("a") +
                " --out " + tmp.str("run1")).code == 0);
    REQUIRE(run("train --config " + tmp.str("run1/config.resolved.json") + " --out " +
                tmp.str("run2")).code == 0);
    CHECK(slurp(tmp.path / "run1" / "loss.csv") == slurp(tmp.path / "run2" / "loss.csv"));
    CHECK(slurp(tmp.path / "run1" / "model.ckpt") == slurp(tmp.path / "run2" / "model.ckpt"));

    REQUIRE(run("sample --checkpoint " + tmp.str("run1/model.ckpt") + " --data " + tmp.str("a") +
                " --out " + tmp.str("s1") + " --num-steps 2 --num-samples 2").code == 0);
    REQUIRE(run("sample --config " + tmp.str("s1/config.resolved.json") + " --out " +
                tmp.str("s2")).code == 0);
    CHECK(slurp(tmp.path / "s1" / "samples.csv") == slurp(tmp.path / "s2" / "samples.csv"));
}

TEST_CASE("failures map onto the documented exit codes") {
    TempDir tmp;

    // config errors -> 2
    write_file(tmp.path / "bad.json", R"({"domain": {"kind": "maze"}, "nonsense": 1})");
    CHECK(run("generate --config " + tmp.str("bad.json") + " --out " + tmp.str("x")).code == 2);
    write_file(tmp.path / "notjson.json", "{");
    CHECK(run("generate --config " + tmp.str("notjson.json") + " --out " + tmp.str("x")).code ==
          2);

    // data errors -> 3
    CHECK(run("sample --checkpoint " + tmp.str("missing.ckpt") + " --out " + tmp.str("x")).code ==
          3);
    write_file(tmp.path / "infeasible.json",
               R"({"domain": {"kind": "maze", "count": 12, "horizon": 2}})");
    const RunResult inf = run("generate --config " + tmp.str("infeasible.json") + " --out " +
                              tmp.str("x"));
    CHECK(inf.code == 3);

    // numeric failures -> 4
    write_file(tmp.path / "config.json", kTinyConfig);
    REQUIRE(run("generate --config " + tmp.str("config.json") + " --out " + tmp.str("data"))
                .code == 0);
    write_file(tmp.path / "blowup.json", R"({
      "seed": 5,
      "domain": {"kind": "maze", "count": 16, "horizon": 24},
      "model": {"base_channels": 8, "depth": 1, "kernel_size": 3, "time_embed_dim": 8, "groups": 4},
      "trainer": {"steps": 5, "batch_size": 4, "lr": 1e155}
    })");
    const RunResult blow = run("train --config " + tmp.str("blowup.json") + " --data " +
                               tmp.str("data") + " --out " + tmp.str("run"));
    CHECK(blow.code == 4);
    CHECK(blow.output.find("non-finite") != std::string::npos);
}
