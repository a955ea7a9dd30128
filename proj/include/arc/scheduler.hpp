#ifndef ARC_SCHEDULER_HPP
#define ARC_SCHEDULER_HPP

#include <cstdint>
#include <iosfwd>
#include <list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "arc/engine.hpp"
#include "arc/predictor.hpp"

namespace arc {

struct HistoryEntry {
    std::string core;
    Constraint constraint;
    std::uint64_t last_used = 0;
};

/// Bounded app -> core map with least-recently-used replacement. An entry
/// only answers lookups for the constraint it was recorded under.
class HistoryTable {
public:
    explicit HistoryTable(std::size_t capacity = 120);

    std::optional<HistoryEntry> lookup(const std::string& app, Constraint constraint);
    // Inserts or refreshes; returns the app evicted to make room, if any.
    std::optional<std::string> record(const std::string& app, const std::string& core, Constraint constraint);

    bool contains(const std::string& app) const { return index_.contains(app); }
    std::size_t size() const { return index_.size(); }
    std::size_t capacity() const { return capacity_; }
    // Apps from most to least recently used.
    std::vector<std::string> recency_order() const;

private:
    std::size_t capacity_;
    std::uint64_t clock_ = 0;
    std::list<std::string> order_;  // front = most recent
    std::unordered_map<std::string, std::pair<HistoryEntry, std::list<std::string>::iterator>> index_;
};

struct RuntimeOptions {
    std::uint64_t profiling_instructions = 3'000'000;
    double prediction_time_s = 3.23e-6;
    double migration_time_s = 7.94e-6;
    std::string profiling_core;  // empty: the shortest-retention core; "fastest": head of the escalation order
    std::string base_core;       // empty: fastest core over the profiled interval
    std::size_t history_capacity = 120;
};

/// One trained tree per constraint.
class ArcModels {
public:
    void set(Constraint c, DecisionTree tree) { trees_[c.name()] = std::move(tree); }
    bool has(Constraint c) const { return trees_.contains(c.name()); }
    const DecisionTree& get(Constraint c) const;
    const std::map<std::string, DecisionTree>& all() const { return trees_; }

    // Files are named model_<constraint>.txt.
    void save(const std::string& dir) const;
    static ArcModels load(const std::string& dir);

private:
    std::map<std::string, DecisionTree> trees_;
};

enum class PathReason { History, Profile, Predicted, EscalatedDeadline, RejectedEnergy };
std::string to_string(PathReason r);

struct PathStep {
    std::string core;
    PathReason reason;
};

struct ProfilingCost {
    std::uint64_t instructions = 0;
    double energy_j = 0.0;
    double time_s = 0.0;
};

struct ScheduleDecision {
    std::string app;
    Constraint constraint;
    std::string core;
    Frequency freq;
    std::vector<PathStep> path;
    ProfilingCost profiling;
    double prediction_time_s = 0.0;
    int migrations = 0;
    double migration_time_s = 0.0;
    double overhead_energy_j = 0.0;
    double run_energy_j = 0.0;  // execution after profiling on the final core
    double run_time_s = 0.0;
    double total_energy_j = 0.0;  // profiling + run + overheads
    double total_time_s = 0.0;
    double deadline_s = 0.0;
    bool deadline_met = true;
    bool flagged = false;  // no core met the deadline
    std::string base_core;
    double base_energy_j = 0.0;  // same flow placed directly on the base core
    std::vector<std::string> ranking;
};

double deadline_for(double best_latency_s, Constraint constraint);
// Best latency measured on the fastest core at its cap.
double best_latency_on_fastest_core(std::span<const TraceEvent> events, const ArcSystem& system,
                                    const PowerModel& power);

// Descending frequency cap, then ascending write cycles at the cap, then core index.
std::vector<std::size_t> escalation_order(const ArcSystem& system);
std::size_t default_profiling_core(const ArcSystem& system);
std::size_t resolve_profiling_core(const ArcSystem& system, const std::string& choice);

struct Execution {
    std::size_t core = 0;
    RunResult remainder;
    bool migrated = false;
    double overhead_time_s = 0.0;
    double overhead_energy_j = 0.0;
    double energy_j = 0.0;  // includes the profiling window
    double time_s = 0.0;
};

/// Executes one app as "profile on the profiling core, then continue on a
/// chosen core". Staying on the profiling core keeps the warm cache; moving
/// starts the target cold and costs one migration.
class PlacementEvaluator {
public:
    PlacementEvaluator(std::span<const TraceEvent> events, const ArcSystem& system, const PowerModel& power,
                       const RuntimeOptions& options);

    std::size_t profiling_core() const { return profiling_core_; }
    const RunResult& profile() const { return profile_; }
    const FeatureVector& features() const { return features_; }
    // Latency of the profiled interval on every core at its operating point.
    std::size_t fastest_on_interval() const;
    const Execution& place(std::size_t core);

private:
    std::span<const TraceEvent> events_;
    const ArcSystem& system_;
    const PowerModel& power_;
    RuntimeOptions options_;
    std::size_t profiling_core_;
    std::size_t prefix_events_;
    CoreRun profiler_;
    RunResult profile_;
    FeatureVector features_;
    std::map<std::size_t, Execution> cache_;
};

/// The runtime loop: history lookup, else profile + predict, then deadline
/// escalation and the energy check against the base core.
ScheduleDecision run_application(const std::string& app, std::span<const TraceEvent> events, const ArcSystem& system,
                                 const ArcModels& models, Constraint constraint, HistoryTable& history,
                                 const PowerModel& power, const RuntimeOptions& options, double deadline_s);

struct Placement {
    std::string app;
    int cluster = 0;
    std::string core;
    std::size_t rank_position = 0;  // 0 = the model's first choice
    std::vector<std::string> ranking;
    double start_time_s = 0.0;
    double completion_time_s = 0.0;
    double energy_j = 0.0;
    double baseline_energy_j = 0.0;  // the app alone on the homogeneous baseline core
    int migrations = 0;
};

struct WorkloadAssignment {
    std::vector<Placement> placements;
    double total_energy_j = 0.0;
    double baseline_energy_j = 0.0;
    double makespan_s = 0.0;
    bool exceeds_baseline = false;
};

struct WorkloadApp {
    std::string name;
    std::span<const TraceEvent> events;
};

// Apps are placed in listed order, each on its best-ranked free core, with no
// preemption. Rejects workloads larger than the machine.
WorkloadAssignment dispatch_workload(std::span<const WorkloadApp> apps, const ArcSystem& system,
                                     const ArcModels& models, Constraint constraint, const PowerModel& power,
                                     const RuntimeOptions& options, const CoreSpec& baseline_core);

void write_decision_log_header(std::ostream& out);
void write_decision_log_row(std::ostream& out, const ScheduleDecision& d);
// Appends to `path`, writing the header first if the file is new or empty.
void append_decision_log(const std::string& path, std::span<const ScheduleDecision> decisions);

}  // namespace arc

#endif  // ARC_SCHEDULER_HPP
