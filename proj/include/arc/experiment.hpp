#ifndef ARC_EXPERIMENT_HPP
#define ARC_EXPERIMENT_HPP

#include <span>
#include <string>
#include <vector>

#include "arc/predictor.hpp"
#include "arc/scheduler.hpp"
#include "arc/workloads.hpp"

namespace arc {

/// Everything the training and evaluation flows need about one synthetic
/// application. The trace itself is regenerated on demand from `params`.
struct AppRecord {
    std::string name;
    SynthParams params;
    SweepTable sweep;  // unconstrained; re-select for other deadlines
    FeatureVector features;

    Trace trace() const { return gen_synthetic(params); }
    double deadline(Constraint c) const { return c.deadline(sweep.best_latency_s); }
    // Oracle label and best energy under a constraint.
    std::size_t best_row(Constraint c) const;
    std::string label(Constraint c) const { return sweep.rows[best_row(c)].core_id; }
};

AppRecord characterize(const Workload& w, const ArcSystem& system, const PowerModel& power,
                       const RuntimeOptions& options);

TrainingSet build_training_set(std::span<const AppRecord> apps, const ArcSystem& system, Constraint constraint);

ArcModels train_models(std::span<const AppRecord> apps, const ArcSystem& system, const TreeParams& params = {});

}  // namespace arc

#endif  // ARC_EXPERIMENT_HPP
