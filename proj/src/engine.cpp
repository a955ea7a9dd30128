#include "arc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace arc {

double PowerModel::static_power(double volts) const {
    if (static_table.empty()) {
        return static_intercept_w + static_slope_w_per_v * volts;
    }
    if (volts <= static_table.front().first) return static_table.front().second;
    if (volts >= static_table.back().first) return static_table.back().second;
    for (std::size_t i = 1; i < static_table.size(); ++i) {
        const auto& [v1, p1] = static_table[i];
        if (volts <= v1) {
            const auto& [v0, p0] = static_table[i - 1];
            return p0 + (p1 - p0) * (volts - v0) / (v1 - v0);
        }
    }
    return static_table.back().second;
}

void PowerModel::validate() const {
    if (!(effective_capacitance_f > 0.0)) {
        throw std::invalid_argument("effective capacitance must be positive");
    }
    for (std::size_t i = 0; i < static_table.size(); ++i) {
        if (static_table[i].second < 0.0) throw std::invalid_argument("static power table has a negative entry");
        if (i > 0 && !(static_table[i].first > static_table[i - 1].first))
            throw std::invalid_argument("static power table voltages must ascend");
    }
    if (static_table.empty()) {
        // Non-negative over the supported voltage span [0.5, 2.0] V.
        if (static_power(0.5) < 0.0 || static_power(2.0) < 0.0)
            throw std::invalid_argument("static power model goes negative");
    }
}

double Constraint::slack() const {
    switch (kind) {
        case ConstraintKind::None: return std::numeric_limits<double>::infinity();
        case ConstraintKind::Slack20: return 0.20;
        case ConstraintKind::Slack10: return 0.10;
        case ConstraintKind::BestPerformance: return 0.0;
    }
    return 0.0;
}

double Constraint::deadline(double best_latency_s) const {
    if (kind == ConstraintKind::None) {
        return std::numeric_limits<double>::infinity();
    }
    return best_latency_s * (1.0 + slack());
}

std::string Constraint::name() const {
    switch (kind) {
        case ConstraintKind::None: return "none";
        case ConstraintKind::Slack20: return "slack20";
        case ConstraintKind::Slack10: return "slack10";
        case ConstraintKind::BestPerformance: return "best-perf";
    }
    return "none";
}

Constraint Constraint::parse(const std::string& name) {
    for (const auto& c : all()) {
        if (c.name() == name) return c;
    }
    throw std::invalid_argument("unknown constraint '" + name + "' (want none|slack20|slack10|best-perf)");
}

std::vector<Constraint> Constraint::all() {
    return {{ConstraintKind::None}, {ConstraintKind::Slack20}, {ConstraintKind::Slack10},
            {ConstraintKind::BestPerformance}};
}

CacheEnergy cache_energy(const CacheStats& stats, const MemTechnology& tech, double wall_time_s) {
    CacheEnergy e;
    e.dynamic_j = static_cast<double>(stats.array_reads()) * tech.read_energy_j +
                  static_cast<double>(stats.array_writes()) * tech.write_energy_j;
    e.leakage_j = tech.leakage_w * wall_time_s;
    return e;
}

CoreEnergy processor_energy(std::uint64_t active_cycles, double wall_time_s, const CoreSpec& core, Frequency freq,
                            const PowerModel& power) {
    const double v = voltage_for_frequency(core.dvfs, freq);
    CoreEnergy e;
    e.dynamic_j = power.effective_capacitance_f * v * v * static_cast<double>(active_cycles);
    e.static_j = power.static_power(v) * wall_time_s;
    return e;
}

double edp(double energy_j, double wall_time_s) { return energy_j * wall_time_s; }

void check_operating_point(const CoreSpec& core, Frequency freq) {
    if (freq > core.freq_cap()) {
        std::ostringstream msg;
        msg << "core '" << core.id << "': " << freq.ghz() << " GHz exceeds the frequency cap "
            << core.freq_cap().ghz() << " GHz";
        throw std::invalid_argument(msg.str());
    }
    if (!core.dvfs.on_grid(freq)) {
        std::ostringstream msg;
        msg << "core '" << core.id << "': " << freq.ghz() << " GHz is not on the DVFS grid";
        throw std::invalid_argument(msg.str());
    }
}

namespace {

// ceil(n * cpi), treating products within rounding noise of an integer as exact.
std::uint64_t base_cycles(std::uint64_t instructions, double cpi) {
    const double product = static_cast<double>(instructions) * cpi;
    const double nearest = std::round(product);
    if (std::abs(product - nearest) <= 1e-9 * std::max(1.0, nearest)) {
        return static_cast<std::uint64_t>(nearest);
    }
    return static_cast<std::uint64_t>(std::ceil(product));
}

}  // namespace

CoreRun::CoreRun(const CoreSpec& core, Frequency freq, const PowerModel& power)
    : core_(core),
      freq_(freq),
      power_(power),
      voltage_((check_operating_point(core, freq), voltage_for_frequency(core.dvfs, freq))),
      timing_(CacheTiming::for_core(core, freq)),
      cache_(core.geometry, core.data_tech, core.counter_states, timing_) {}

std::uint64_t CoreRun::cycles() const {
    return base_cycles(nonmem_instructions_, core_.base_cpi) + stall_cycles_;
}

std::size_t CoreRun::execute(std::span<const TraceEvent> events, std::uint64_t instruction_limit) {
    std::size_t consumed = 0;
    for (const auto& e : events) {
        if (nonmem_instructions_ + memory_accesses_ >= instruction_limit) {
            break;
        }
        nonmem_instructions_ += e.gap;
        const SimTime now = freq_.cycles_to_time(cycles());
        const auto expired = cache_.advance_retention(now);
        const auto outcome = cache_.access(e.addr, e.op, now);
        ++memory_accesses_;
        stall_cycles_ += outcome.stall_cycles;
        if (outcome.kind == AccessKind::Miss) {
            penalty_cycles_ += timing_.miss_penalty_cycles;
        }
        if (observer_) {
            observer_(e, outcome, now, expired);
        }
        ++consumed;
    }
    return consumed;
}

CoreRun::Mark CoreRun::mark() const {
    return {nonmem_instructions_ + memory_accesses_, memory_accesses_, cycles(), penalty_cycles_, cache_.snapshot()};
}

RunResult CoreRun::summarize(std::uint64_t instructions, std::uint64_t accesses, std::uint64_t cycles,
                             std::uint64_t penalty_cycles, CacheStats stats) const {
    RunResult r;
    r.core_id = core_.id;
    r.freq = freq_;
    r.instructions = instructions;
    r.memory_accesses = accesses;
    r.cycles = cycles;
    r.active_cycles = cycles - std::min(cycles, penalty_cycles);
    r.elapsed = freq_.cycles_to_time(cycles);
    r.wall_time_s = static_cast<double>(cycles) / freq_.hz();

    const auto busy = stats.mem_busy_read_cycles + stats.mem_busy_write_cycles;
    stats.mem_idle_cycles = cycles > busy ? cycles - busy : 0;
    r.stats = stats;

    const auto data = cache_energy(stats, core_.data_tech, r.wall_time_s);
    // Instruction cache: one fetch per instruction, no misses modeled.
    const double fetch_j = static_cast<double>(instructions) * core_.instr_tech.read_energy_j;
    const double instr_leak_j = core_.instr_tech.leakage_w * r.wall_time_s;
    r.cache_dynamic_energy = data.dynamic_j + fetch_j;
    r.cache_leakage_energy = data.leakage_j + instr_leak_j;

    const auto core_e = processor_energy(r.active_cycles, r.wall_time_s, core_, freq_, power_);
    r.core_dynamic_energy = core_e.dynamic_j;
    r.core_static_energy = core_e.static_j;
    r.total_energy = r.cache_dynamic_energy + r.cache_leakage_energy + r.core_dynamic_energy + r.core_static_energy;
    r.edp = edp(r.total_energy, r.wall_time_s);
    return r;
}

RunResult CoreRun::result() const {
    return summarize(nonmem_instructions_ + memory_accesses_, memory_accesses_, cycles(), penalty_cycles_,
                     cache_.stats());
}

RunResult CoreRun::window(const Mark& since) const {
    const auto now = mark();
    return summarize(now.instructions - since.instructions, now.memory_accesses - since.memory_accesses,
                     now.cycles - since.cycles, now.penalty_cycles - since.penalty_cycles,
                     cache_.delta_since(since.stats));
}

RunResult simulate_run(std::span<const TraceEvent> events, const CoreSpec& core, Frequency freq,
                       const PowerModel& power, std::optional<std::uint64_t> instruction_limit) {
    CoreRun run(core, freq, power);
    run.execute(events, instruction_limit.value_or(std::numeric_limits<std::uint64_t>::max()));
    return run.result();
}

std::optional<std::size_t> SweepTable::best_row_for_core(std::size_t core) const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (core_index[i] != core || rows[i].wall_time_s > deadline_s) continue;
        if (!best || rows[i].total_energy < rows[*best].total_energy ||
            (rows[i].total_energy == rows[*best].total_energy && rows[i].wall_time_s < rows[*best].wall_time_s)) {
            best = i;
        }
    }
    return best;
}

void SweepTable::select(double deadline) {
    if (rows.empty()) {
        throw std::logic_error("select on an empty sweep table");
    }
    deadline_s = deadline;
    std::optional<std::size_t> best;
    std::size_t fastest = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.wall_time_s < rows[fastest].wall_time_s) fastest = i;
        if (r.wall_time_s > deadline_s) continue;
        if (!best) {
            best = i;
            continue;
        }
        const auto& b = rows[*best];
        // Rows are visited in (core, frequency) order, so strict comparisons
        // keep the lower core index and lower frequency on full ties.
        if (r.total_energy < b.total_energy || (r.total_energy == b.total_energy && r.wall_time_s < b.wall_time_s)) {
            best = i;
        }
    }
    constraint_violated = !best;
    best_row = best.value_or(fastest);
}

SweepTable exhaustive_sweep(std::span<const TraceEvent> events, const ArcSystem& system, const PowerModel& power,
                            Constraint constraint, std::optional<double> deadline_override_s) {
    if (system.cores.empty()) {
        throw std::invalid_argument("exhaustive_sweep: system has no cores");
    }
    SweepTable t;
    for (std::size_t c = 0; c < system.cores.size(); ++c) {
        const auto& core = system.cores[c];
        for (const auto f : core.dvfs.grid()) {
            t.rows.push_back(simulate_run(events, core, f, power));
            t.core_index.push_back(c);
        }
    }

    std::size_t fastest = 0;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        if (t.rows[i].wall_time_s < t.rows[fastest].wall_time_s) fastest = i;
    }
    t.best_latency_s = t.rows[fastest].wall_time_s;
    t.select(deadline_override_s.value_or(constraint.deadline(t.best_latency_s)));
    return t;
}

std::vector<bool> pareto_flags(std::span<const RunResult> rows) {
    std::vector<bool> flags(rows.size(), true);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (i == j) continue;
            const bool no_worse = rows[j].total_energy <= rows[i].total_energy &&
                                  rows[j].wall_time_s <= rows[i].wall_time_s;
            const bool better = rows[j].total_energy < rows[i].total_energy ||
                                rows[j].wall_time_s < rows[i].wall_time_s;
            if (no_worse && better) {
                flags[i] = false;
                break;
            }
        }
    }
    return flags;
}

}  // namespace arc
