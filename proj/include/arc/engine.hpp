#ifndef ARC_ENGINE_HPP
#define ARC_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arc/cache.hpp"
#include "arc/config.hpp"
#include "arc/trace.hpp"

namespace arc {

/// Parametric whole-core power: switching energy C*V^2 per active cycle plus
/// voltage-dependent static power (linear, or piecewise-linear if a table is
/// given).
struct PowerModel {
    double effective_capacitance_f = 0.015e-9;
    double static_intercept_w = 0.08;
    double static_slope_w_per_v = 0.10;
    // (volts, watts) points, ascending in volts. Overrides the linear form.
    std::vector<std::pair<double, double>> static_table;

    double static_power(double volts) const;
    void validate() const;
};

enum class ConstraintKind { None, Slack20, Slack10, BestPerformance };

struct Constraint {
    ConstraintKind kind = ConstraintKind::None;

    // Allowed latency relaxation over the best achievable latency; infinite
    // for None.
    double slack() const;
    double deadline(double best_latency_s) const;
    std::string name() const;
    static Constraint parse(const std::string& name);
    static std::vector<Constraint> all();

    bool operator==(const Constraint&) const = default;
};

struct CacheEnergy {
    double dynamic_j = 0.0;
    double leakage_j = 0.0;
};

struct CoreEnergy {
    double dynamic_j = 0.0;
    double static_j = 0.0;
};

CacheEnergy cache_energy(const CacheStats& stats, const MemTechnology& tech, double wall_time_s);
CoreEnergy processor_energy(std::uint64_t active_cycles, double wall_time_s, const CoreSpec& core, Frequency freq,
                            const PowerModel& power);
double edp(double energy_j, double wall_time_s);

struct RunResult {
    std::string core_id;
    Frequency freq;
    std::uint64_t instructions = 0;
    std::uint64_t memory_accesses = 0;
    std::uint64_t cycles = 0;
    std::uint64_t active_cycles = 0;  // cycles not spent waiting on memory fills
    SimTime elapsed{};
    double wall_time_s = 0.0;
    double cache_dynamic_energy = 0.0;
    double cache_leakage_energy = 0.0;
    double core_dynamic_energy = 0.0;
    double core_static_energy = 0.0;
    double total_energy = 0.0;
    double edp = 0.0;
    CacheStats stats;
};

// Invoked after every access; used by tests and trace analysis.
using AccessObserver =
    std::function<void(const TraceEvent&, const AccessOutcome&, SimTime now, std::span<const ExpiredBlock> expired)>;

/// In-order, blocking-cache execution of a trace on one core at one fixed
/// frequency. Can be fed in slices; results cover everything executed so far
/// or a window since a mark.
class CoreRun {
public:
    struct Mark {
        std::uint64_t instructions = 0;
        std::uint64_t memory_accesses = 0;
        std::uint64_t cycles = 0;
        std::uint64_t penalty_cycles = 0;
        StatsSnapshot stats;
    };

    CoreRun(const CoreSpec& core, Frequency freq, const PowerModel& power);

    // Executes events until they run out or `instruction_limit` total
    // instructions have been retired. Returns the number of events consumed.
    std::size_t execute(std::span<const TraceEvent> events,
                        std::uint64_t instruction_limit = std::numeric_limits<std::uint64_t>::max());

    Mark mark() const;
    RunResult result() const;
    RunResult window(const Mark& since) const;

    void set_observer(AccessObserver obs) { observer_ = std::move(obs); }
    const CacheState& cache() const { return cache_; }
    const CoreSpec& core() const { return core_; }
    Frequency freq() const { return freq_; }
    double voltage() const { return voltage_; }
    std::uint64_t cycles() const;

private:
    RunResult summarize(std::uint64_t instructions, std::uint64_t accesses, std::uint64_t cycles,
                        std::uint64_t penalty_cycles, CacheStats stats) const;

    CoreSpec core_;
    Frequency freq_;
    PowerModel power_;
    double voltage_;
    CacheTiming timing_;
    CacheState cache_;
    std::uint64_t nonmem_instructions_ = 0;
    std::uint64_t memory_accesses_ = 0;
    std::uint64_t stall_cycles_ = 0;
    std::uint64_t penalty_cycles_ = 0;
    AccessObserver observer_;
};

// Checks `freq` is on the core's grid and within its cap.
void check_operating_point(const CoreSpec& core, Frequency freq);

RunResult simulate_run(std::span<const TraceEvent> events, const CoreSpec& core, Frequency freq,
                       const PowerModel& power, std::optional<std::uint64_t> instruction_limit = std::nullopt);

struct SweepTable {
    std::vector<RunResult> rows;  // core order, ascending frequency within a core
    std::vector<std::size_t> core_index;  // per row
    double best_latency_s = 0.0;
    double deadline_s = 0.0;
    std::size_t best_row = 0;
    bool constraint_violated = false;

    const RunResult& best() const { return rows.at(best_row); }
    // Re-selects best_row for another deadline without re-simulating.
    void select(double deadline);
    // Lowest-energy row of one core meeting the deadline, if any.
    std::optional<std::size_t> best_row_for_core(std::size_t core) const;
};

// ARC-exhaustive: every core at every grid frequency up to its cap. Best is
// the minimum-energy row meeting the deadline; ties go to lower latency, then
// lower core index, then lower frequency. With no feasible row the fastest
// row is returned and flagged.
SweepTable exhaustive_sweep(std::span<const TraceEvent> events, const ArcSystem& system, const PowerModel& power,
                            Constraint constraint, std::optional<double> deadline_override_s = std::nullopt);

// Non-dominated rows in (energy, latency).
std::vector<bool> pareto_flags(std::span<const RunResult> rows);

}  // namespace arc

#endif  // ARC_ENGINE_HPP
