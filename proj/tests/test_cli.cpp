#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "arc/cli.hpp"

using namespace arc;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "arc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / ("arc_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

const char* kSmallExperiment = R"(seed: 3
runtime:
  profiling_instructions: 20000
  profiling_core: fastest
training:
  count: 6
  instructions: 150000
workloads:
  suite: {count: 3, instructions: 150000}
)";

}  // namespace

TEST_CASE("simulate reports the expiration miss of the three-access trace") {
    auto out = scratch_dir("simulate");
    auto slow = run({"--out", out.string(), "simulate", "--trace", "data/expiry_three_access.trace", "--core", "core1",
                     "--freq", "0.8"});
    CHECK(slow.code == kExitOk);
    CHECK(slow.out.find("expiration_misses=1\n") != std::string::npos);
    auto fast = run({"--out", out.string(), "simulate", "--trace", "data/expiry_three_access.trace", "--core", "core1",
                     "--freq", "1.6"});
    CHECK(fast.code == kExitOk);
    CHECK(fast.out.find("expiration_misses=0\n") != std::string::npos);
    CHECK(fs::exists(out / "simulate.csv"));
    CHECK(fs::exists(out / "manifest.txt"));
}

TEST_CASE("sweep on a single-core config") {
    auto out = scratch_dir("sweep");
    auto r = run({"--config", "configs/single_core.yaml", "--out", out.string(), "sweep", "--workload", "short-reuse"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("rows=5\n") != std::string::npos);
    auto csv = slurp(out / "sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("config and argument errors exit 1") {
    auto dir = scratch_dir("errors");
    auto bad = write_file(dir / "bad.yaml", "seed: 1\nsystem:\n  clusters: 1\n  colour: red\n");
    auto r = run({"--config", bad.string(), "--out", dir.string(), "sweep"});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("bad.yaml:4:") != std::string::npos);

    CHECK(run({"--out", dir.string(), "--constraint", "slack30", "sweep", "--trace", "data/expiry_three_access.trace"})
              .code == kExitConfig);
    CHECK(run({"--out", dir.string(), "--baseline", "nothing", "report"}).code == kExitConfig);
    CHECK(run({"--out", dir.string(), "simulate", "--core", "core1", "--unknown-flag"}).code == kExitConfig);

    auto bad_trace = write_file(dir / "bad.trace", "0 R 0x10\n1 Q 0x20\n");
    auto t = run({"--out", dir.string(), "simulate", "--trace", bad_trace.string()});
    CHECK(t.code == kExitConfig);
    CHECK(t.err.find("bad.trace:2: ") != std::string::npos);

    auto needs_seed = write_file(dir / "noseed.yaml", "workloads:\n  suite: {count: 2}\n");
    CHECK(run({"--config", needs_seed.string(), "--out", dir.string(), "gen-trace"}).code == kExitConfig);
    CHECK(run({"--config", needs_seed.string(), "--seed", "4", "--out", dir.string(), "gen-trace"}).code == kExitOk);
}

TEST_CASE("train, schedule and report") {
    auto dir = scratch_dir("flow");
    auto cfg = write_file(dir / "small.yaml", kSmallExperiment).string();
    auto out = (dir / "out").string();

    auto train = run({"--config", cfg, "--out", out, "--no-timestamp", "train"});
    REQUIRE(train.code == kExitOk);
    for (const char* m : {"model_none.txt", "model_slack10.txt", "model_slack20.txt", "model_best-perf.txt"}) {
        CHECK(fs::exists(fs::path(out) / "models" / m));
    }

    auto sched = run({"--config", cfg, "--out", out, "--no-timestamp", "--constraint", "none", "schedule"});
    REQUIRE(sched.code == kExitOk);
    const auto decisions = slurp(fs::path(out) / "decisions.csv");
    const auto runs = slurp(fs::path(out) / "runs.csv");
    const auto manifest = slurp(fs::path(out) / "manifest.txt");
    CHECK(manifest.find("timestamp") == std::string::npos);
    CHECK(std::count(decisions.begin(), decisions.end(), '\n') == 4);

    auto again = run({"--config", cfg, "--out", out, "--no-timestamp", "--constraint", "none", "schedule"});
    CHECK(again.code == kExitOk);
    CHECK(again.out == sched.out);
    CHECK(slurp(fs::path(out) / "decisions.csv") == decisions);
    CHECK(slurp(fs::path(out) / "runs.csv") == runs);
    CHECK(slurp(fs::path(out) / "manifest.txt") == manifest);

    auto self = run({"--config", cfg, "--out", out, "--baseline", "self", "report"});
    REQUIRE(self.code == kExitOk);
    std::istringstream rep(slurp(fs::path(out) / "report_self.csv"));
    std::string line;
    std::getline(rep, line);
    CHECK(line.rfind("app,system,energy_ratio,time_ratio,edp_ratio", 0) == 0);
    int rows = 0;
    while (std::getline(rep, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        REQUIRE(cells.size() >= 5);
        for (int i = 2; i < 5; ++i) CHECK(std::stod(cells[static_cast<std::size_t>(i)]) == 1.0);
        ++rows;
    }
    CHECK(rows > 0);

    auto homog = run({"--config", cfg, "--out", out, "report"});
    CHECK(homog.code == kExitOk);
    CHECK(fs::exists(fs::path(out) / "report_homog-400us.csv"));

    auto strict = run({"--config", cfg, "--out", out, "--constraint", "best-perf", "schedule"});
    CHECK(strict.code == kExitFlagged);
}

TEST_CASE("predict prints a full ranking") {
    auto dir = scratch_dir("predict");
    auto cfg = write_file(dir / "small.yaml", kSmallExperiment).string();
    auto out = (dir / "out").string();
    REQUIRE(run({"--config", cfg, "--out", out, "train"}).code == kExitOk);
    auto p = run({"--config", cfg, "--out", out, "predict", "--workload", "app0-hot"});
    REQUIRE(p.code == kExitOk);
    auto pos = p.out.find("ranking=");
    REQUIRE(pos != std::string::npos);
    auto ranking = p.out.substr(pos + 8, p.out.find('\n', pos) - pos - 8);
    CHECK(std::count(ranking.begin(), ranking.end(), '>') == 3);
    auto pred = p.out.substr(p.out.find("predicted=") + 10);
    pred = pred.substr(0, pred.find('\n'));
    CHECK(ranking.rfind(pred, 0) == 0);
}
