#include "arc/experiment.hpp"

#include <sstream>

namespace arc {

std::size_t AppRecord::best_row(Constraint c) const {
    SweepTable t = sweep;
    t.select(deadline(c));
    return t.best_row;
}

AppRecord characterize(const Workload& w, const ArcSystem& system, const PowerModel& power,
                       const RuntimeOptions& options) {
    AppRecord r;
    r.name = w.name;
    r.params = w.params;
    const auto trace = gen_synthetic(w.params);
    r.sweep = exhaustive_sweep(trace.events, system, power, Constraint{});
    r.features = PlacementEvaluator(trace.events, system, power, options).features();
    return r;
}

TrainingSet build_training_set(std::span<const AppRecord> apps, const ArcSystem& system, Constraint constraint) {
    TrainingSet set;
    set.feature_names = features::for_constraint(constraint);
    set.labels = system.labels();
    for (const auto& app : apps) {
        set.add(app.features, app.label(constraint));
    }
    std::ostringstream note;
    note << apps.size() << " apps, constraint " << constraint.name();
    set.provenance = note.str();
    return set;
}

ArcModels train_models(std::span<const AppRecord> apps, const ArcSystem& system, const TreeParams& params) {
    ArcModels models;
    for (const auto c : Constraint::all()) {
        auto tree = train_tree(build_training_set(apps, system, c), params);
        tree.metadata()["constraint"] = c.name();
        tree.metadata()["training_apps"] = std::to_string(apps.size());
        models.set(c, std::move(tree));
    }
    return models;
}

}  // namespace arc
