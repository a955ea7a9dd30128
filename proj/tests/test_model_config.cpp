#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <string>

#include "arc/config.hpp"
#include "arc/config_file.hpp"

using namespace arc;

namespace {

// Integer ceil(f * latency) with latency in picoseconds and f in MHz.
int oracle_cycles(std::int64_t mhz, std::int64_t latency_ps) {
    const std::int64_t num = mhz * latency_ps;
    const std::int64_t den = 1'000'000;
    return static_cast<int>((num + den - 1) / den);
}

std::int64_t ps(double ns) { return static_cast<std::int64_t>(ns * 1000.0 + 0.5); }

}  // namespace

TEST_CASE("access cycles at the published operating points") {
    CHECK(access_cycles(2.0, 1.389) == 3);
    CHECK(access_cycles(1.2, 0.769) == 1);
    CHECK(access_cycles(1.8, 0.601) == 2);
    CHECK(access_cycles(1.0, 1.0) == 1);
    CHECK(access_cycles(2.0, 0.5) == 1);
    CHECK(access_cycles(2.0, 0.0) == 0);
    CHECK_THROWS_AS(access_cycles(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(access_cycles(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("write-cycle map over the full grid matches integer arithmetic") {
    for (const auto& tech : defaults::technology_table()) {
        for (std::int64_t mhz = 800; mhz <= 2000; mhz += 200) {
            auto f = Frequency::from_mhz(mhz);
            CAPTURE(tech.name);
            CAPTURE(mhz);
            CHECK(access_cycles(f, tech.write_latency_ns) == oracle_cycles(mhz, ps(tech.write_latency_ns)));
            CHECK(access_cycles(f, tech.hit_latency_ns) == 1);
        }
    }
}

TEST_CASE("write-cycle bands of each retention time") {
    auto w = [](const MemTechnology& t, std::int64_t mhz) {
        return access_cycles(Frequency::from_mhz(mhz), t.write_latency_ns);
    };
    for (std::int64_t mhz = 800; mhz <= 1600; mhz += 200) CHECK(w(defaults::sttram_10us(), mhz) == 1);
    CHECK(w(defaults::sttram_10us(), 1800) == 2);
    for (std::int64_t mhz = 800; mhz <= 1200; mhz += 200) CHECK(w(defaults::sttram_26_5us(), mhz) == 1);
    CHECK(w(defaults::sttram_26_5us(), 1400) == 2);
    CHECK(w(defaults::sttram_75us(), 2000) == 2);
    CHECK(w(defaults::sttram_400us(), 2000) == 3);
    for (std::int64_t mhz = 800; mhz <= 2000; mhz += 200) CHECK(w(defaults::sram(), mhz) == 1);
}

TEST_CASE("access cycles are monotone in both arguments") {
    for (std::int64_t mhz = 100; mhz <= 4000; mhz += 100) {
        for (int lat = 1; lat < 3000; lat += 37) {
            double ns = lat / 1000.0;
            CHECK(access_cycles(Frequency::from_mhz(mhz), ns) <= access_cycles(Frequency::from_mhz(mhz + 100), ns));
            CHECK(access_cycles(Frequency::from_mhz(mhz), ns) <=
                  access_cycles(Frequency::from_mhz(mhz), ns + 0.037));
        }
    }
}

TEST_CASE("voltage curve") {
    DvfsRange d;
    CHECK(voltage_for_frequency(d, Frequency::from_mhz(800)) == doctest::Approx(0.90).epsilon(1e-12));
    CHECK(voltage_for_frequency(d, Frequency::from_mhz(2000)) == doctest::Approx(1.35).epsilon(1e-12));
    CHECK(voltage_for_frequency(d, Frequency::from_mhz(1400)) == doctest::Approx(1.125).epsilon(1e-12));
    double prev = 0.0;
    for (auto f : d.grid()) {
        double v = voltage_for_frequency(d, f);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(voltage_for_frequency(d, Frequency::from_mhz(900)), std::invalid_argument);
    CHECK_THROWS_AS(voltage_for_frequency(d, Frequency::from_mhz(2200)), std::invalid_argument);

    d.voltage_table = {{800, 0.9}, {1000, 0.95}, {1200, 1.0}, {1400, 1.1}, {1600, 1.2}, {1800, 1.3}, {2000, 1.35}};
    CHECK(voltage_for_frequency(d, Frequency::from_mhz(1400)) == doctest::Approx(1.1));
}

TEST_CASE("a capped core shares the curve of the full range") {
    auto sys = defaults::arc_system();
    const auto& c2 = sys.core("core2");
    CHECK(voltage_for_frequency(c2.dvfs, Frequency::from_mhz(1200)) ==
          doctest::Approx(voltage_for_frequency(DvfsRange{}, Frequency::from_mhz(1200))));
}

TEST_CASE("core validation") {
    auto sys = defaults::arc_system();
    auto r1 = validate_core_spec(sys.core("core1"));
    CHECK(r1.ok());
    CHECK(r1.write_cycles_at_cap == 1);
    CHECK(r1.read_cycles_at_cap == 1);
    CHECK(validate_core_spec(sys.core("core4")).write_cycles_at_cap == 3);

    auto fast = defaults::core("fast10", defaults::sttram_10us(), Frequency::from_mhz(1800), 1);
    auto bad = validate_core_spec(fast);
    CHECK_FALSE(bad.ok());
    CHECK(bad.write_cycles_at_cap == 2);

    for (std::int64_t cap = 800; cap <= 2000; cap += 200) {
        auto s = defaults::core("s", defaults::sram(), Frequency::from_mhz(cap), 1);
        auto r = validate_core_spec(s);
        CHECK(r.ok());
        CHECK(r.read_cycles_at_cap == 1);
        CHECK(r.write_cycles_at_cap == 1);
    }

    auto k1 = sys.cores[0];
    k1.counter_states = 1;
    CHECK_FALSE(validate_core_spec(k1).ok());
    auto offgrid = sys.cores[0];
    offgrid.operating_freq = Frequency::from_mhz(1500);
    CHECK_FALSE(validate_core_spec(offgrid).ok());
}

TEST_CASE("geometry and counter overhead") {
    CacheGeometry g;
    CHECK(g.sets() == 128);
    CHECK(g.blocks() == 512);
    CHECK(counter_bits(4) == 2);
    CHECK(counter_bits(2) == 1);
    CHECK(counter_bits(5) == 3);
    CHECK(monitor_counter_overhead_bytes(defaults::arc_system().cores[0]) == 128);
}

TEST_CASE("system validation") {
    auto sys = defaults::arc_system();
    CHECK(validate_system(sys).ok());
    auto dup = sys;
    dup.cores[1].id = "core1";
    CHECK_FALSE(validate_system(dup).ok());
    auto inverted = sys;
    inverted.cores[3].data_tech.write_latency_ns = 0.5;
    CHECK_FALSE(validate_system(inverted).ok());
    CHECK_FALSE(validate_system(ArcSystem{}).ok());
}

TEST_CASE("config file: defaults and overrides") {
    auto cfg = parse_config("");
    CHECK(cfg.system.cores.size() == 4);
    CHECK_FALSE(cfg.seed.has_value());

    auto c2 = parse_config(R"(seed: 9
constraint: slack10
system:
  clusters: 4
  cores:
    - {id: a, data: sttram_75us, cap_ghz: 2.0, write_cycle_budget: 2}
    - {id: b, data: sttram_400us, cap_ghz: 1.4, operating_ghz: 1.2}
runtime:
  profiling_instructions: 5000
  base_core: b
)");
    CHECK(*c2.seed == 9);
    CHECK(c2.constraint == Constraint{ConstraintKind::Slack10});
    CHECK(c2.system.cluster_count == 4);
    REQUIRE(c2.system.cores.size() == 2);
    CHECK(c2.system.cores[1].dvfs.max_freq == Frequency::from_mhz(1400));
    CHECK(c2.system.cores[1].operating_freq == Frequency::from_mhz(1200));
    CHECK(c2.runtime.profiling_instructions == 5000);
}

TEST_CASE("config file: errors carry line numbers") {
    auto line_of = [](const std::string& text) {
        try {
            parse_config(text, "t.yaml");
        } catch (const ConfigError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("seed: 1\nbogus: 2\n") == 2);
    CHECK(line_of("system:\n  cores:\n    - id: a\n      data: sttram_10us\n      colour: red\n") == 5);
    CHECK(line_of("system:\n  cores:\n    - id: a\n      data: nothing\n") == 4);
    CHECK(line_of("constraint: slack5\n") == 1);
    CHECK(line_of("system:\n  cores:\n    - {id: a, data: sttram_10us, cap_ghz: 1.8, write_cycle_budget: 1}\n") == 3);
    CHECK(line_of("seed: [1\n") > 0);
    CHECK(line_of("runtime:\n  base_core: core9\n") == 2);

    try {
        parse_config("seed: 1\n\nbogus: 2\n", "t.yaml");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("t.yaml:3:") == 0);
    }
}

TEST_CASE("config file: seeds and references") {
    auto cfg = parse_config("workloads:\n  suite: {count: 2}\n");
    CHECK(cfg.needs_seed());
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.seed = 3;
    CHECK_NOTHROW(cfg.validate());
    auto a = cfg.synthetic_workloads();
    auto b = cfg.synthetic_workloads();
    REQUIRE(a.size() == 2);
    CHECK(a[0].params.seed == b[0].params.seed);

    auto mix = parse_config("seed: 1\nworkloads:\n  suite: {count: 2}\n  mixes:\n    - [app0-hot, nope]\n");
    try {
        mix.validate();
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 5);
    }

    auto traced = parse_config("workloads:\n  list:\n    - {name: t, trace: x.trace}\n");
    CHECK_FALSE(traced.needs_seed());
    auto fixed = parse_config("workloads:\n  list:\n    - {name: s, seed: 4}\n");
    CHECK_FALSE(fixed.needs_seed());
    CHECK(fixed.synthetic_workloads()[0].params.seed == 4);
}

TEST_CASE("config file: technology rows") {
    auto cfg = parse_config(R"(technologies:
  - {name: sttram_1ms, kind: sttram, retention_us: 1000, hit_latency_ns: 0.44, write_latency_ns: 1.6,
     read_energy_nj: 0.003, write_energy_nj: 0.05, leakage_mw: 13.1448}
system:
  cores:
    - {id: slow, data: sttram_1ms, cap_ghz: 1.2}
)");
    CHECK(cfg.system.cores[0].data_tech.retention == from_seconds(1e-3));
    CHECK(cfg.system.cores[0].data_tech.write_energy_j == doctest::Approx(0.05e-9));
}
