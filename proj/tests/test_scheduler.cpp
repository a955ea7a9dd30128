#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "arc/scheduler.hpp"
#include "arc/trace.hpp"

using namespace arc;

namespace {

// Every constraint's model answers `label` for any input.
ArcModels constant_models(const ArcSystem& sys, const std::string& label) {
    ArcModels m;
    for (auto c : Constraint::all()) {
        TrainingSet t;
        t.feature_names = features::for_constraint(c);
        for (const auto& core : sys.cores) t.labels.push_back(core.id);
        FeatureVector fv;
        for (const auto& f : t.feature_names) fv.set(f, 0.0);
        t.add(fv, label);
        m.set(c, train_tree(t));
    }
    return m;
}

RuntimeOptions small_options() {
    RuntimeOptions o;
    o.profiling_instructions = 50'000;
    return o;
}

Trace app_trace(std::uint64_t seed, std::uint64_t instructions = 300'000) {
    SynthParams p;
    p.total_instructions = instructions;
    p.seed = seed;
    return gen_synthetic(p);
}

// Mostly hits, so latency tracks frequency.
Trace compute_bound(std::uint64_t instructions = 300'000) {
    SynthParams p;
    p.working_set_blocks = 16;
    p.reuse.kind = ReuseGaps::Kind::Uniform;
    p.reuse.uniform_min = 500;
    p.reuse.uniform_max = 1500;
    p.write_fraction = 0.05;
    p.memory_op_fraction = 0.1;
    p.total_instructions = instructions;
    p.seed = 12;
    return gen_synthetic(p);
}

const Constraint kNone{ConstraintKind::None};
const Constraint kSlack10{ConstraintKind::Slack10};

}  // namespace

TEST_CASE("history table LRU") {
    HistoryTable h(120);
    for (int i = 0; i < 120; ++i) CHECK_FALSE(h.record("app" + std::to_string(i), "core1", kNone).has_value());
    CHECK(h.size() == 120);
    auto evicted = h.record("app120", "core2", kNone);
    REQUIRE(evicted.has_value());
    CHECK(*evicted == "app0");
    CHECK(h.size() == 120);
    CHECK_FALSE(h.contains("app0"));
    CHECK_FALSE(h.lookup("app0", kNone).has_value());

    auto hit = h.lookup("app120", kNone);
    REQUIRE(hit.has_value());
    CHECK(hit->core == "core2");
    CHECK_FALSE(h.lookup("never-seen", kNone).has_value());
}

TEST_CASE("history refresh and constraint matching") {
    HistoryTable h(3);
    h.record("a", "core1", kNone);
    h.record("b", "core1", kNone);
    h.record("c", "core1", kNone);
    h.record("a", "core3", kNone);
    CHECK(h.recency_order() == std::vector<std::string>{"a", "c", "b"});
    CHECK(*h.record("d", "core1", kNone) == "b");
    CHECK(h.lookup("a", kNone)->core == "core3");

    h.lookup("c", kNone);
    CHECK(h.recency_order().front() == "c");
    CHECK_FALSE(h.lookup("a", kSlack10).has_value());
    h.record("a", "core4", kSlack10);
    CHECK(h.lookup("a", kSlack10)->core == "core4");
    CHECK_FALSE(h.lookup("a", kNone).has_value());
    CHECK_THROWS_AS(HistoryTable(0), std::invalid_argument);
}

TEST_CASE("deadlines and escalation order") {
    CHECK(deadline_for(10e-3, kSlack10) == doctest::Approx(11e-3));
    CHECK(deadline_for(10e-3, Constraint{ConstraintKind::Slack20}) == doctest::Approx(12e-3));
    CHECK(deadline_for(10e-3, Constraint{ConstraintKind::BestPerformance}) == 10e-3);
    CHECK(std::isinf(deadline_for(10e-3, kNone)));

    const auto sys = defaults::arc_system();
    std::vector<std::string> ids;
    for (auto i : escalation_order(sys)) ids.push_back(sys.cores[i].id);
    CHECK(ids == std::vector<std::string>{"core3", "core4", "core1", "core2"});
    CHECK(sys.cores[default_profiling_core(sys)].id == "core1");
    CHECK(sys.cores[resolve_profiling_core(sys, "fastest")].id == "core3");
    CHECK(sys.cores[resolve_profiling_core(sys, "core2")].id == "core2");
}

TEST_CASE("single-core system") {
    ArcSystem one;
    one.cores.push_back(defaults::arc_system().core("core1"));
    auto models = constant_models(one, "core1");
    HistoryTable h;
    auto t = app_trace(3);
    auto d = run_application("solo", t.events, one, models, kNone, h, PowerModel{}, small_options(), INFINITY);
    CHECK(d.core == "core1");
    REQUIRE(d.path.size() == 2);
    CHECK(d.path[0].reason == PathReason::Profile);
    CHECK(d.path[1].reason == PathReason::Predicted);
    CHECK(d.migrations == 0);
    CHECK_FALSE(d.flagged);
    auto whole = simulate_run(t.events, one.cores[0], one.cores[0].operating_freq, PowerModel{});
    CHECK(d.total_time_s == doctest::Approx(whole.wall_time_s + d.prediction_time_s).epsilon(1e-9));
}

TEST_CASE("a history hit skips profiling and prediction") {
    const auto sys = defaults::arc_system();
    auto models = constant_models(sys, "core2");
    HistoryTable h;
    auto t = app_trace(5);
    auto first = run_application("app", t.events, sys, models, kNone, h, PowerModel{}, small_options(), INFINITY);
    CHECK(first.profiling.instructions > 0);
    CHECK(first.prediction_time_s > 0.0);
    REQUIRE(h.lookup("app", kNone).has_value());

    auto second = run_application("app", t.events, sys, models, kNone, h, PowerModel{}, small_options(), INFINITY);
    CHECK(second.profiling.instructions == 0);
    CHECK(second.profiling.energy_j == 0.0);
    CHECK(second.prediction_time_s == 0.0);
    REQUIRE_FALSE(second.path.empty());
    CHECK(second.path[0].reason == PathReason::History);
    CHECK(second.path[0].core == first.core);
    CHECK(second.core == first.core);
}

TEST_CASE("a slow prediction escalates until the deadline is met") {
    const auto sys = defaults::arc_system();
    const PowerModel power;
    auto t = compute_bound(2'000'000);
    auto sweep = exhaustive_sweep(t.events, sys, power, kSlack10);
    const double deadline = sweep.deadline_s;
    const auto& c2 = sys.core("core2");
    REQUIRE(simulate_run(t.events, c2, c2.operating_freq, power).wall_time_s > deadline);

    auto models = constant_models(sys, "core2");
    HistoryTable h;
    RuntimeOptions opts;
    opts.profiling_instructions = 100'000;
    opts.profiling_core = "fastest";
    auto d = run_application("slow", t.events, sys, models, kSlack10, h, power, opts, deadline);
    bool escalated = false;
    for (const auto& s : d.path) escalated |= s.reason == PathReason::EscalatedDeadline;
    CHECK(escalated);
    CHECK_FALSE(d.flagged);
    CHECK(d.deadline_met);
    CHECK(d.total_time_s <= deadline);
    CHECK(sys.core(d.core).operating_freq == Frequency::from_mhz(2000));
    CHECK(h.lookup("slow", kSlack10)->core == d.core);
}

TEST_CASE("no core meets an impossible deadline") {
    const auto sys = defaults::arc_system();
    auto models = constant_models(sys, "core4");
    HistoryTable h;
    auto t = app_trace(9);
    auto d = run_application("tight", t.events, sys, models, kSlack10, h, PowerModel{}, small_options(), 1e-12);
    CHECK(d.flagged);
    CHECK_FALSE(d.deadline_met);
    CHECK(d.core == "core3");
}

TEST_CASE("final energy is never above the base core") {
    const auto sys = defaults::arc_system();
    const PowerModel power;
    for (std::uint64_t seed = 20; seed < 26; ++seed) {
        auto t = app_trace(seed);
        for (const auto& core : sys.cores) {
            auto models = constant_models(sys, core.id);
            HistoryTable h;
            auto d = run_application("a", t.events, sys, models, kNone, h, power, small_options(), INFINITY);
            CAPTURE(seed);
            CAPTURE(core.id);
            CHECK(d.total_energy_j <= d.base_energy_j);
            if (d.core != core.id) CHECK(d.path.back().reason == PathReason::RejectedEnergy);
            CHECK(d.total_energy_j ==
                  doctest::Approx(d.profiling.energy_j + d.run_energy_j + d.overhead_energy_j).epsilon(1e-12));
            CHECK(d.migrations == (d.core == d.path.front().core ? 0 : 1));
        }
    }
}

TEST_CASE("replaying a sequence gives identical decisions") {
    const auto sys = defaults::arc_system();
    auto models = constant_models(sys, "core4");
    std::vector<Trace> traces;
    for (std::uint64_t s = 1; s <= 3; ++s) traces.push_back(app_trace(s, 150'000));
    auto replay = [&] {
        HistoryTable h(2);
        std::ostringstream log;
        write_decision_log_header(log);
        for (int rep = 0; rep < 2; ++rep) {
            for (std::size_t i = 0; i < traces.size(); ++i) {
                auto d = run_application("app" + std::to_string(i), traces[i].events, sys, models, kNone, h,
                                         PowerModel{}, small_options(), INFINITY);
                write_decision_log_row(log, d);
            }
        }
        return std::make_pair(log.str(), h.recency_order());
    };
    CHECK(replay() == replay());
}

TEST_CASE("one app on a free machine matches run_application") {
    const auto sys = defaults::arc_system();
    const PowerModel power;
    auto t = app_trace(14);
    PlacementEvaluator probe(t.events, sys, power, small_options());
    const auto base = sys.cores[probe.fastest_on_interval()].id;
    auto models = constant_models(sys, base);

    HistoryTable h;
    auto d = run_application("x", t.events, sys, models, kNone, h, power, small_options(), INFINITY);
    std::vector<WorkloadApp> apps{{"x", t.events}};
    auto w = dispatch_workload(apps, sys, models, kNone, power, small_options(), sys.core("core4"));
    REQUIRE(w.placements.size() == 1);
    CHECK(w.placements[0].core == d.core);
    CHECK(w.placements[0].rank_position == 0);
    CHECK(w.placements[0].energy_j == doctest::Approx(d.total_energy_j).epsilon(1e-12));
    CHECK(w.placements[0].completion_time_s == doctest::Approx(d.total_time_s).epsilon(1e-12));
    CHECK(w.placements[0].migrations == d.migrations);
}

TEST_CASE("an occupied first choice falls to the next label") {
    const auto sys = defaults::arc_system();
    auto models = constant_models(sys, "core3");
    auto a = app_trace(1), b = app_trace(2);
    std::vector<WorkloadApp> apps{{"a", a.events}, {"b", b.events}};
    auto w = dispatch_workload(apps, sys, models, kNone, PowerModel{}, small_options(), sys.core("core4"));
    REQUIRE(w.placements.size() == 2);
    CHECK(w.placements[0].core == "core3");
    CHECK(w.placements[0].rank_position == 0);
    CHECK(w.placements[1].rank_position == 1);
    CHECK(w.placements[1].core == w.placements[1].ranking[1]);
    CHECK(w.placements[1].core != "core3");
}

TEST_CASE("workload size and booking") {
    auto sys = defaults::arc_system();
    auto models = constant_models(sys, "core1");
    std::vector<Trace> traces;
    for (std::uint64_t s = 1; s <= 5; ++s) traces.push_back(app_trace(s, 100'000));
    std::vector<WorkloadApp> apps;
    for (std::size_t i = 0; i < traces.size(); ++i) apps.push_back({"w" + std::to_string(i), traces[i].events});
    const auto base = sys.core("core4");
    CHECK_THROWS_AS(dispatch_workload(apps, sys, models, kNone, PowerModel{}, small_options(), base),
                    std::invalid_argument);

    sys.cluster_count = 2;
    auto w = dispatch_workload(apps, sys, models, kNone, PowerModel{}, small_options(), base);
    std::set<std::pair<int, std::string>> used;
    double total = 0.0, baseline = 0.0;
    for (const auto& p : w.placements) {
        CHECK(used.insert({p.cluster, p.core}).second);
        total += p.energy_j;
        baseline += p.baseline_energy_j;
    }
    CHECK(used.size() == 5);
    CHECK(w.placements[0].core == "core1");
    CHECK(w.placements[1].core == "core1");
    CHECK(w.placements[1].cluster == 1);
    CHECK(w.total_energy_j == doctest::Approx(total));
    CHECK(w.exceeds_baseline == (total > baseline));
}

TEST_CASE("decision log") {
    const auto sys = defaults::arc_system();
    auto models = constant_models(sys, "core1");
    HistoryTable h;
    auto t = app_trace(4, 120'000);
    auto d = run_application("logged", t.events, sys, models, kNone, h, PowerModel{}, small_options(), INFINITY);

    auto path = std::filesystem::temp_directory_path() / "arc_decisions_test.csv";
    std::filesystem::remove(path);
    std::vector<ScheduleDecision> ds{d};
    append_decision_log(path.string(), ds);
    append_decision_log(path.string(), ds);
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    std::filesystem::remove(path);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].rfind("app,constraint,core,", 0) == 0);
    CHECK(lines[1] == lines[2]);
    CHECK(lines[1].rfind("logged,none,", 0) == 0);
    CHECK(lines[1].find("profile:core1;predicted:core1") != std::string::npos);
}
