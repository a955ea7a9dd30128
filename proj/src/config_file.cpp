#include "arc/config_file.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace arc {

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what),
      line_(line) {}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
        throw ConfigError(source_, line_of(at), what);
    }

    void expect_map(const YAML::Node& n, const std::string& what) const {
        if (!n.IsMap()) fail(n, what + " must be a mapping");
    }

    void only_keys(const YAML::Node& n, std::initializer_list<const char*> allowed, const std::string& where) const {
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& kv : n) {
            auto key = kv.first.as<std::string>();
            if (!ok.contains(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
        }
    }

    template <typename T>
    T get(const YAML::Node& n, const std::string& key) const {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, "bad value for '" + key + "'");
        }
    }

    template <typename T>
    void opt(const YAML::Node& map, const char* key, T& out) const {
        if (auto n = map[key]) out = get<T>(n, key);
    }

    template <typename T>
    T req(const YAML::Node& map, const char* key, const std::string& where) const {
        auto n = map[key];
        if (!n) fail(map, "missing '" + std::string(key) + "' in " + where);
        return get<T>(n, key);
    }

    double positive(const YAML::Node& map, const char* key, double fallback) const {
        double v = fallback;
        opt(map, key, v);
        if (map[key] && !(v > 0.0)) fail(map[key], "'" + std::string(key) + "' must be positive");
        return v;
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
};

Frequency ghz(const Reader& r, const YAML::Node& map, const char* key, Frequency fallback) {
    if (!map[key]) return fallback;
    double v = r.get<double>(map[key], key);
    if (!(v > 0.0)) r.fail(map[key], "'" + std::string(key) + "' must be positive");
    return Frequency::from_ghz(v);
}

MemTechnology parse_technology(const Reader& r, const YAML::Node& n) {
    r.expect_map(n, "technology");
    r.only_keys(n,
                {"name", "kind", "retention_us", "hit_latency_ns", "write_latency_ns", "read_energy_nj",
                 "write_energy_nj", "leakage_mw"},
                "technology");
    MemTechnology t;
    t.name = r.req<std::string>(n, "name", "technology");
    auto kind = r.req<std::string>(n, "kind", "technology");
    if (kind == "sram") {
        t.kind = MemKind::Sram;
        if (n["retention_us"]) r.fail(n["retention_us"], "an SRAM technology has no retention time");
    } else if (kind == "sttram") {
        t.kind = MemKind::SttRam;
        t.retention = from_seconds(r.req<double>(n, "retention_us", "technology") * 1e-6);
        if (t.retention <= SimTime::zero()) r.fail(n["retention_us"], "'retention_us' must be positive");
    } else {
        r.fail(n["kind"], "kind must be sram or sttram, got '" + kind + "'");
    }
    t.hit_latency_ns = r.req<double>(n, "hit_latency_ns", "technology");
    t.write_latency_ns = r.req<double>(n, "write_latency_ns", "technology");
    t.read_energy_j = r.req<double>(n, "read_energy_nj", "technology") * 1e-9;
    t.write_energy_j = r.req<double>(n, "write_energy_nj", "technology") * 1e-9;
    t.leakage_w = r.req<double>(n, "leakage_mw", "technology") * 1e-3;
    if (!(t.hit_latency_ns > 0.0) || !(t.write_latency_ns > 0.0)) r.fail(n, "latencies must be positive");
    if (t.read_energy_j < 0.0 || t.write_energy_j < 0.0 || t.leakage_w < 0.0) r.fail(n, "energies must be >= 0");
    return t;
}

const MemTechnology& find_tech(const Reader& r, const std::vector<MemTechnology>& techs, const YAML::Node& at) {
    auto name = r.get<std::string>(at, "technology name");
    for (const auto& t : techs) {
        if (t.name == name) return t;
    }
    r.fail(at, "unknown technology '" + name + "'");
}

void parse_dvfs(const Reader& r, const YAML::Node& n, DvfsRange& d) {
    r.expect_map(n, "dvfs");
    r.only_keys(n, {"min_ghz", "step_ghz", "min_voltage", "max_voltage", "voltage_max_ghz", "voltage_table"}, "dvfs");
    d.min_freq = ghz(r, n, "min_ghz", d.min_freq);
    d.step = ghz(r, n, "step_ghz", d.step);
    d.voltage_max_freq = ghz(r, n, "voltage_max_ghz", d.voltage_max_freq);
    r.opt(n, "min_voltage", d.min_voltage);
    r.opt(n, "max_voltage", d.max_voltage);
    if (auto vt = n["voltage_table"]) {
        r.expect_map(vt, "voltage_table");
        for (const auto& kv : vt) {
            auto f = Frequency::from_ghz(r.get<double>(kv.first, "voltage_table key"));
            d.voltage_table[f.mhz()] = r.get<double>(kv.second, "voltage_table value");
        }
    }
}

CoreSpec parse_core(const Reader& r, const YAML::Node& n, const std::vector<MemTechnology>& techs,
                    const DvfsRange& dvfs) {
    r.expect_map(n, "core");
    r.only_keys(n,
                {"id", "data", "instr", "cap_ghz", "operating_ghz", "write_cycle_budget", "counter_states",
                 "base_cpi", "miss_penalty_ns", "capacity_bytes", "line_size", "associativity"},
                "core");
    CoreSpec c;
    c.id = r.req<std::string>(n, "id", "core");
    if (!n["data"]) r.fail(n, "missing 'data' in core");
    c.data_tech = find_tech(r, techs, n["data"]);
    c.instr_tech = n["instr"] ? find_tech(r, techs, n["instr"]) : defaults::sttram_100ms_instr();
    c.dvfs = dvfs;
    c.dvfs.max_freq = ghz(r, n, "cap_ghz", dvfs.max_freq);
    c.operating_freq = ghz(r, n, "operating_ghz", c.dvfs.max_freq);
    if (n["write_cycle_budget"]) c.write_cycle_budget = r.get<int>(n["write_cycle_budget"], "write_cycle_budget");
    r.opt(n, "counter_states", c.counter_states);
    c.base_cpi = r.positive(n, "base_cpi", c.base_cpi);
    r.opt(n, "miss_penalty_ns", c.miss_penalty_ns);
    r.opt(n, "capacity_bytes", c.geometry.capacity_bytes);
    r.opt(n, "line_size", c.geometry.line_size);
    r.opt(n, "associativity", c.geometry.associativity);
    auto report = validate_core_spec(c);
    if (!report.ok()) r.fail(n, "core '" + c.id + "': " + report.violations.front());
    return c;
}

SuiteSpec parse_suite(const Reader& r, const YAML::Node& n, const std::string& where) {
    r.expect_map(n, where);
    r.only_keys(n, {"count", "instructions", "prefix", "seed"}, where);
    SuiteSpec s;
    s.prefix = where == "training" ? "train" : "app";
    s.count = r.req<std::size_t>(n, "count", where);
    r.opt(n, "instructions", s.instructions);
    r.opt(n, "prefix", s.prefix);
    if (n["seed"]) s.seed = r.get<std::uint64_t>(n["seed"], "seed");
    if (s.instructions == 0) r.fail(n["instructions"], "'instructions' must be positive");
    return s;
}

ReuseGaps parse_reuse(const Reader& r, const YAML::Node& n) {
    r.expect_map(n, "reuse");
    r.only_keys(n, {"kind", "min", "max", "short_mean", "long_mean", "short_weight", "spread"}, "reuse");
    ReuseGaps g;
    auto kind = r.req<std::string>(n, "kind", "reuse");
    if (kind == "uniform") {
        g.kind = ReuseGaps::Kind::Uniform;
        g.uniform_min = r.req<std::uint64_t>(n, "min", "reuse");
        g.uniform_max = r.req<std::uint64_t>(n, "max", "reuse");
    } else if (kind == "bimodal") {
        g.kind = ReuseGaps::Kind::Bimodal;
        r.opt(n, "short_mean", g.short_mean);
        r.opt(n, "long_mean", g.long_mean);
        r.opt(n, "short_weight", g.short_weight);
        r.opt(n, "spread", g.spread);
    } else {
        r.fail(n["kind"], "reuse kind must be uniform or bimodal, got '" + kind + "'");
    }
    return g;
}

WorkloadSpec parse_workload(const Reader& r, const YAML::Node& n) {
    r.expect_map(n, "workload");
    r.only_keys(n,
                {"name", "trace", "working_set_blocks", "reuse", "write_fraction", "memory_op_fraction",
                 "instructions", "hot_blocks", "streaming_fraction", "line_size", "seed"},
                "workload");
    WorkloadSpec w;
    w.name = r.req<std::string>(n, "name", "workload");
    if (n["trace"]) {
        for (const auto& kv : n) {
            auto key = kv.first.as<std::string>();
            if (key != "name" && key != "trace") r.fail(kv.first, "'" + key + "' does not apply to a trace workload");
        }
        w.trace_path = r.get<std::string>(n["trace"], "trace");
        return w;
    }
    SynthParams p;
    r.opt(n, "working_set_blocks", p.working_set_blocks);
    if (n["reuse"]) p.reuse = parse_reuse(r, n["reuse"]);
    r.opt(n, "write_fraction", p.write_fraction);
    r.opt(n, "memory_op_fraction", p.memory_op_fraction);
    r.opt(n, "instructions", p.total_instructions);
    r.opt(n, "hot_blocks", p.hot_blocks);
    r.opt(n, "streaming_fraction", p.streaming_fraction);
    r.opt(n, "line_size", p.line_size);
    if (n["seed"]) {
        p.seed = r.get<std::uint64_t>(n["seed"], "seed");
        w.explicit_seed = true;
    }
    try {
        p.validate();
    } catch (const std::exception& e) {
        r.fail(n, "workload '" + w.name + "': " + e.what());
    }
    w.synth = p;
    return w;
}

ExperimentConfig build(const YAML::Node& root, const std::string& source) {
    Reader r(source);
    ExperimentConfig cfg;
    cfg.source = source;
    if (!root || root.IsNull()) return cfg;
    r.expect_map(root, "the top level");
    r.only_keys(root,
                {"seed", "constraint", "output", "technologies", "dvfs", "system", "power", "runtime", "tree",
                 "training", "workloads"},
                "the top level");

    if (root["seed"]) cfg.seed = r.get<std::uint64_t>(root["seed"], "seed");
    if (auto c = root["constraint"]) {
        try {
            cfg.constraint = Constraint::parse(r.get<std::string>(c, "constraint"));
        } catch (const std::invalid_argument& e) {
            r.fail(c, e.what());
        }
    }
    r.opt(root, "output", cfg.output_dir);

    if (auto techs = root["technologies"]) {
        if (!techs.IsSequence()) r.fail(techs, "technologies must be a list");
        for (const auto& t : techs) {
            auto tech = parse_technology(r, t);
            bool replaced = false;
            for (auto& existing : cfg.technologies) {
                if (existing.name == tech.name) {
                    existing = tech;
                    replaced = true;
                }
            }
            if (!replaced) cfg.technologies.push_back(tech);
        }
    }

    DvfsRange dvfs;
    if (auto d = root["dvfs"]) parse_dvfs(r, d, dvfs);

    if (auto sys = root["system"]) {
        r.expect_map(sys, "system");
        r.only_keys(sys, {"clusters", "cores"}, "system");
        r.opt(sys, "clusters", cfg.system.cluster_count);
        if (cfg.system.cluster_count < 1) r.fail(sys["clusters"], "'clusters' must be at least 1");
        if (auto cores = sys["cores"]) {
            if (!cores.IsSequence() || cores.size() == 0) r.fail(cores, "cores must be a non-empty list");
            cfg.system.cores.clear();
            for (const auto& c : cores) cfg.system.cores.push_back(parse_core(r, c, cfg.technologies, dvfs));
        }
        auto report = validate_system(cfg.system);
        if (!report.ok()) r.fail(sys, report.violations.front());
    } else if (root["dvfs"]) {
        for (auto& c : cfg.system.cores) {
            auto cap = c.dvfs.max_freq;
            c.dvfs = dvfs;
            c.dvfs.max_freq = cap;
        }
        auto report = validate_system(cfg.system);
        if (!report.ok()) r.fail(root["dvfs"], report.violations.front());
    }

    if (auto p = root["power"]) {
        r.expect_map(p, "power");
        r.only_keys(p, {"effective_capacitance_f", "static_intercept_w", "static_slope_w_per_v", "static_table"},
                    "power");
        r.opt(p, "effective_capacitance_f", cfg.power.effective_capacitance_f);
        r.opt(p, "static_intercept_w", cfg.power.static_intercept_w);
        r.opt(p, "static_slope_w_per_v", cfg.power.static_slope_w_per_v);
        if (auto t = p["static_table"]) {
            if (!t.IsSequence()) r.fail(t, "static_table must be a list of [volts, watts]");
            for (const auto& pt : t) {
                if (!pt.IsSequence() || pt.size() != 2) r.fail(pt, "static_table entries are [volts, watts]");
                cfg.power.static_table.emplace_back(r.get<double>(pt[0], "volts"), r.get<double>(pt[1], "watts"));
            }
        }
        try {
            cfg.power.validate();
        } catch (const std::exception& e) {
            r.fail(p, e.what());
        }
    }

    if (auto rt = root["runtime"]) {
        r.expect_map(rt, "runtime");
        r.only_keys(rt,
                    {"profiling_instructions", "prediction_time_s", "migration_time_s", "profiling_core", "base_core",
                     "history_capacity"},
                    "runtime");
        r.opt(rt, "profiling_instructions", cfg.runtime.profiling_instructions);
        r.opt(rt, "prediction_time_s", cfg.runtime.prediction_time_s);
        r.opt(rt, "migration_time_s", cfg.runtime.migration_time_s);
        r.opt(rt, "profiling_core", cfg.runtime.profiling_core);
        r.opt(rt, "base_core", cfg.runtime.base_core);
        r.opt(rt, "history_capacity", cfg.runtime.history_capacity);
        if (cfg.runtime.profiling_instructions == 0) r.fail(rt, "'profiling_instructions' must be positive");
        if (cfg.runtime.history_capacity == 0) r.fail(rt, "'history_capacity' must be positive");
        if (cfg.runtime.prediction_time_s < 0.0 || cfg.runtime.migration_time_s < 0.0) {
            r.fail(rt, "overhead times must be >= 0");
        }
        const auto& pc = cfg.runtime.profiling_core;
        if (!pc.empty() && pc != "fastest" && !cfg.system.index_of(pc)) {
            r.fail(rt["profiling_core"], "unknown core '" + pc + "'");
        }
        if (!cfg.runtime.base_core.empty() && !cfg.system.index_of(cfg.runtime.base_core)) {
            r.fail(rt["base_core"], "unknown core '" + cfg.runtime.base_core + "'");
        }
    }

    if (auto t = root["tree"]) {
        r.expect_map(t, "tree");
        r.only_keys(t, {"max_depth", "min_samples_leaf"}, "tree");
        r.opt(t, "max_depth", cfg.tree.max_depth);
        r.opt(t, "min_samples_leaf", cfg.tree.min_samples_leaf);
        if (cfg.tree.max_depth < 0 || cfg.tree.min_samples_leaf == 0) r.fail(t, "bad tree parameters");
    }

    if (auto t = root["training"]) cfg.training = parse_suite(r, t, "training");

    if (auto w = root["workloads"]) {
        r.expect_map(w, "workloads");
        r.only_keys(w, {"suite", "list", "mixes"}, "workloads");
        if (auto s = w["suite"]) cfg.suite = parse_suite(r, s, "suite");
        if (auto list = w["list"]) {
            if (!list.IsSequence()) r.fail(list, "workloads.list must be a list");
            std::set<std::string> seen;
            for (const auto& item : list) {
                auto spec = parse_workload(r, item);
                if (!seen.insert(spec.name).second) r.fail(item, "duplicate workload '" + spec.name + "'");
                cfg.workloads.push_back(std::move(spec));
            }
        }
        if (auto mixes = w["mixes"]) {
            if (!mixes.IsSequence()) r.fail(mixes, "workloads.mixes must be a list of name lists");
            for (const auto& m : mixes) {
                if (!m.IsSequence() || m.size() == 0) r.fail(m, "each mix is a non-empty list of workload names");
                std::vector<std::string> names;
                for (const auto& name : m) names.push_back(r.get<std::string>(name, "mix entry"));
                cfg.mixes.push_back(std::move(names));
                cfg.mix_lines.push_back(line_of(m));
            }
        }
    }
    return cfg;
}

}  // namespace

bool ExperimentConfig::needs_seed() const {
    if (suite && !suite->seed) return true;
    if (training && !training->seed) return true;
    for (const auto& w : workloads) {
        if (w.synth && !w.explicit_seed) return true;
    }
    return false;
}

void ExperimentConfig::validate() const {
    if (needs_seed() && !seed) throw ConfigError(source, 0, "a seed is required for synthetic runs (seed: or --seed)");
    std::set<std::string> names;
    for (const auto& w : workloads) names.insert(w.name);
    if (suite) {
        for (const auto& w : synthetic_suite(suite->count, 0, suite->instructions, suite->prefix)) names.insert(w.name);
    }
    for (std::size_t i = 0; i < mixes.size(); ++i) {
        int line = i < mix_lines.size() ? mix_lines[i] : 0;
        std::set<std::string> in_mix;
        for (const auto& name : mixes[i]) {
            if (!names.contains(name)) throw ConfigError(source, line, "mix refers to unknown workload '" + name + "'");
            if (!in_mix.insert(name).second) throw ConfigError(source, line, "workload '" + name + "' repeats in a mix");
        }
        if (mixes[i].size() > system.cores.size() * static_cast<std::size_t>(system.cluster_count)) {
            throw ConfigError(source, line, "mix has more apps than cores");
        }
    }
}

std::vector<Workload> ExperimentConfig::synthetic_workloads() const {
    std::vector<Workload> out;
    std::uint64_t s = seed.value_or(0);
    for (std::size_t i = 0; i < workloads.size(); ++i) {
        const auto& w = workloads[i];
        if (!w.synth) continue;
        Workload wl{w.name, *w.synth};
        if (!w.explicit_seed) wl.params.seed = derive_seed(s, 1000 + i);
        out.push_back(std::move(wl));
    }
    if (suite) {
        auto gen = synthetic_suite(suite->count, suite->seed.value_or(derive_seed(s, 1)), suite->instructions,
                                   suite->prefix);
        out.insert(out.end(), gen.begin(), gen.end());
    }
    return out;
}

std::vector<Workload> ExperimentConfig::training_workloads() const {
    if (!training) return {};
    return synthetic_suite(training->count, training->seed.value_or(derive_seed(seed.value_or(0), 2)),
                           training->instructions, training->prefix);
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(source, e.mark.is_null() ? 0 : e.mark.line + 1, e.msg);
    }
    return build(root, source);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace arc
