#ifndef ARC_CONFIG_FILE_HPP
#define ARC_CONFIG_FILE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "arc/config.hpp"
#include "arc/engine.hpp"
#include "arc/predictor.hpp"
#include "arc/scheduler.hpp"
#include "arc/workloads.hpp"

namespace arc {

/// Bad configuration. `line` is 1-based, 0 when no position applies.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

struct SuiteSpec {
    std::size_t count = 0;
    std::uint64_t instructions = 2'000'000;
    std::string prefix = "app";
    std::optional<std::uint64_t> seed;  // defaults to a value derived from the experiment seed
};

struct WorkloadSpec {
    std::string name;
    std::string trace_path;            // set for trace files
    std::optional<SynthParams> synth;  // set for synthetic workloads
    bool explicit_seed = false;
};

struct ExperimentConfig {
    std::string source = "<config>";
    ArcSystem system = defaults::arc_system();
    std::vector<MemTechnology> technologies = defaults::technology_table();
    PowerModel power;
    RuntimeOptions runtime;
    TreeParams tree;
    Constraint constraint;
    std::string output_dir = "out";
    std::optional<std::uint64_t> seed;

    std::vector<WorkloadSpec> workloads;
    std::optional<SuiteSpec> suite;     // applications to schedule
    std::optional<SuiteSpec> training;  // applications to train on
    std::vector<std::vector<std::string>> mixes;  // multiprogrammed workloads, by workload name
    std::vector<int> mix_lines;

    bool needs_seed() const;
    // Throws ConfigError when a reference does not resolve or a synthetic run has no seed.
    void validate() const;
    // Named workloads plus the generated suite, with seeds filled in.
    std::vector<Workload> synthetic_workloads() const;
    std::vector<Workload> training_workloads() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

// Deterministic per-stream seed derivation (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace arc

#endif  // ARC_CONFIG_FILE_HPP
