#ifndef ARC_REPORT_HPP
#define ARC_REPORT_HPP

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arc/config.hpp"
#include "arc/engine.hpp"
#include "arc/scheduler.hpp"

namespace arc {

/// One simulated run labelled with the app and the system it ran on.
struct RunRow {
    std::string app;
    std::string system;
    RunResult run;
    // Only core, frequency, instructions, time, energy and EDP are known.
    bool totals_only = false;
};

void write_run_csv(std::ostream& out, std::span<const RunRow> rows);

// Sweep rows with deadline feasibility, Pareto and best-row flags.
void write_sweep_csv(std::ostream& out, const std::string& app, const SweepTable& table);

/// The subset of a run CSV row that reports need.
struct RunMetrics {
    std::string app;
    std::string system;
    std::string core;
    double energy_j = 0.0;
    double time_s = 0.0;
    double edp = 0.0;
    std::optional<double> cache_energy_j;
};

// Reads any CSV carrying app, system, total_energy_j and wall_time_s columns.
std::vector<RunMetrics> read_run_csv(std::istream& in);

enum class Baseline { Sram, Homog400us, Self };
Baseline parse_baseline(const std::string& name);
std::string to_string(Baseline b);

struct NormalizedRow {
    std::string app;
    std::string system;
    double energy = 1.0;
    double time = 1.0;
    double edp = 1.0;
    std::optional<double> cache_energy;  // absent when either side lacks a breakdown
};

// Ratios against the baseline system's row for the same app. Baseline rows
// themselves are kept (all 1.0); a missing baseline row is an error.
std::vector<NormalizedRow> normalize(std::span<const RunMetrics> rows, Baseline baseline);
// Per-app rows followed by one arithmetic-mean row per system (app "mean").
void write_normalized_csv(std::ostream& out, std::span<const NormalizedRow> rows);

/// Latency, energy and miss behaviour of one trace on each technology over
/// the whole DVFS grid, uncapped. Time and energy are relative to SRAM at the
/// top of the grid; the miss-rate change is relative to the same technology
/// at the bottom of the grid.
struct FrequencyPoint {
    std::string technology;
    double retention_us = 0.0;  // 0 for SRAM
    Frequency freq;
    int write_cycles = 0;
    RunResult run;
    double miss_rate = 0.0;
    double miss_rate_change = 0.0;
    double time_vs_sram = 1.0;
    double energy_vs_sram = 1.0;
};

std::vector<FrequencyPoint> frequency_study(std::span<const TraceEvent> events,
                                            std::span<const MemTechnology> technologies, const PowerModel& power,
                                            const DvfsRange& dvfs = {});
void write_frequency_csv(std::ostream& out, const std::string& app, std::span<const FrequencyPoint> points,
                         bool header = true);

void write_assignment_csv(std::ostream& out, const std::string& workload, const WorkloadAssignment& a,
                          bool header = true);

}  // namespace arc

#endif  // ARC_REPORT_HPP
