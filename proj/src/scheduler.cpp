#include "arc/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace arc {

HistoryTable::HistoryTable(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw std::invalid_argument("history table needs capacity >= 1");
    }
}

std::optional<HistoryEntry> HistoryTable::lookup(const std::string& app, Constraint constraint) {
    auto it = index_.find(app);
    if (it == index_.end() || it->second.first.constraint != constraint) {
        return std::nullopt;
    }
    order_.splice(order_.begin(), order_, it->second.second);
    it->second.first.last_used = ++clock_;
    return it->second.first;
}

std::optional<std::string> HistoryTable::record(const std::string& app, const std::string& core,
                                                Constraint constraint) {
    auto it = index_.find(app);
    if (it != index_.end()) {
        it->second.first = {core, constraint, ++clock_};
        order_.splice(order_.begin(), order_, it->second.second);
        return std::nullopt;
    }
    std::optional<std::string> evicted;
    if (index_.size() == capacity_) {
        evicted = order_.back();
        index_.erase(order_.back());
        order_.pop_back();
    }
    order_.push_front(app);
    index_.emplace(app, std::make_pair(HistoryEntry{core, constraint, ++clock_}, order_.begin()));
    return evicted;
}

std::vector<std::string> HistoryTable::recency_order() const { return {order_.begin(), order_.end()}; }

const DecisionTree& ArcModels::get(Constraint c) const {
    auto it = trees_.find(c.name());
    if (it == trees_.end()) {
        throw std::invalid_argument("no trained model for constraint '" + c.name() + "'");
    }
    return it->second;
}

void ArcModels::save(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, tree] : trees_) {
        tree.save((std::filesystem::path(dir) / ("model_" + name + ".txt")).string());
    }
}

ArcModels ArcModels::load(const std::string& dir) {
    ArcModels m;
    for (const auto& c : Constraint::all()) {
        const auto path = std::filesystem::path(dir) / ("model_" + c.name() + ".txt");
        if (std::filesystem::exists(path)) {
            m.set(c, DecisionTree::load(path.string()));
        }
    }
    if (m.trees_.empty()) {
        throw std::runtime_error("no model files found in '" + dir + "'");
    }
    return m;
}

std::string to_string(PathReason r) {
    switch (r) {
        case PathReason::History: return "history";
        case PathReason::Profile: return "profile";
        case PathReason::Predicted: return "predicted";
        case PathReason::EscalatedDeadline: return "escalated-deadline";
        case PathReason::RejectedEnergy: return "rejected-energy";
    }
    return "?";
}

double deadline_for(double best_latency_s, Constraint constraint) { return constraint.deadline(best_latency_s); }

std::vector<std::size_t> escalation_order(const ArcSystem& system) {
    std::vector<std::size_t> order(system.cores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto write_cycles = [&](std::size_t i) {
        const auto& c = system.cores[i];
        return access_cycles(c.freq_cap(), c.data_tech.write_latency_ns);
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto fa = system.cores[a].freq_cap();
        const auto fb = system.cores[b].freq_cap();
        if (fa != fb) return fa > fb;
        return write_cycles(a) < write_cycles(b);
    });
    return order;
}

double best_latency_on_fastest_core(std::span<const TraceEvent> events, const ArcSystem& system,
                                    const PowerModel& power) {
    const auto& core = system.cores.at(escalation_order(system).front());
    return simulate_run(events, core, core.freq_cap(), power).wall_time_s;
}

std::size_t default_profiling_core(const ArcSystem& system) {
    if (system.cores.empty()) throw std::invalid_argument("system has no cores");
    std::size_t best = 0;
    for (std::size_t i = 1; i < system.cores.size(); ++i) {
        if (system.cores[i].data_tech.retention < system.cores[best].data_tech.retention) best = i;
    }
    return best;
}

namespace {

std::size_t resolve_core(const ArcSystem& system, const std::string& id) {
    auto idx = system.index_of(id);
    if (!idx) throw std::invalid_argument("unknown core '" + id + "'");
    return *idx;
}

std::size_t position_in(const std::vector<std::size_t>& order, std::size_t core) {
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), core) - order.begin());
}

}  // namespace

std::size_t resolve_profiling_core(const ArcSystem& system, const std::string& choice) {
    if (choice.empty()) return default_profiling_core(system);
    if (choice == "fastest") return escalation_order(system).front();
    return resolve_core(system, choice);
}

PlacementEvaluator::PlacementEvaluator(std::span<const TraceEvent> events, const ArcSystem& system,
                                       const PowerModel& power, const RuntimeOptions& options)
    : events_(events),
      system_(system),
      power_(power),
      options_(options),
      profiling_core_(resolve_profiling_core(system, options.profiling_core)),
      prefix_events_(0),
      profiler_(system.cores[profiling_core_], system.cores[profiling_core_].operating_freq, power) {
    prefix_events_ = profiler_.execute(events_, options_.profiling_instructions);
    profile_ = profiler_.result();
    features_ = extract_features(profile_);
}

std::size_t PlacementEvaluator::fastest_on_interval() const {
    const auto prefix = events_.first(prefix_events_);
    std::size_t best = 0;
    double best_time = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < system_.cores.size(); ++i) {
        const auto& c = system_.cores[i];
        const double t = simulate_run(prefix, c, c.operating_freq, power_).wall_time_s;
        if (t < best_time) {
            best_time = t;
            best = i;
        }
    }
    return best;
}

const Execution& PlacementEvaluator::place(std::size_t core) {
    if (auto it = cache_.find(core); it != cache_.end()) {
        return it->second;
    }
    Execution ex;
    ex.core = core;
    const auto rest = events_.subspan(prefix_events_);
    if (core == profiling_core_) {
        CoreRun cont = profiler_;
        const auto m = cont.mark();
        cont.execute(rest);
        ex.remainder = cont.window(m);
    } else {
        const auto& c = system_.cores.at(core);
        ex.remainder = simulate_run(rest, c, c.operating_freq, power_);
        ex.migrated = !rest.empty();
    }
    ex.overhead_time_s = options_.prediction_time_s + (ex.migrated ? options_.migration_time_s : 0.0);
    ex.overhead_energy_j = ex.overhead_time_s * power_.static_power(profiler_.voltage());
    ex.energy_j = profile_.total_energy + ex.remainder.total_energy + ex.overhead_energy_j;
    ex.time_s = profile_.wall_time_s + ex.remainder.wall_time_s + ex.overhead_time_s;
    return cache_.emplace(core, std::move(ex)).first->second;
}

ScheduleDecision run_application(const std::string& app, std::span<const TraceEvent> events, const ArcSystem& system,
                                 const ArcModels& models, Constraint constraint, HistoryTable& history,
                                 const PowerModel& power, const RuntimeOptions& options, double deadline_s) {
    if (system.cores.empty()) throw std::invalid_argument("system has no cores");
    ScheduleDecision d;
    d.app = app;
    d.constraint = constraint;
    d.deadline_s = deadline_s;
    const auto order = escalation_order(system);

    std::optional<std::size_t> stored;
    if (auto hit = history.lookup(app, constraint)) {
        stored = system.index_of(hit->core);
    }

    if (stored) {
        // Known app: no profiling and no prediction, run straight on the stored core.
        auto full = [&](std::size_t c) {
            const auto& core = system.cores[c];
            return simulate_run(events, core, core.operating_freq, power);
        };
        std::size_t candidate = *stored;
        d.path.push_back({system.cores[candidate].id, PathReason::History});
        RunResult run = full(candidate);
        while (run.wall_time_s > deadline_s) {
            const auto pos = position_in(order, candidate);
            if (pos == 0) {
                d.flagged = true;
                break;
            }
            candidate = order[pos - 1];
            d.path.push_back({system.cores[candidate].id, PathReason::EscalatedDeadline});
            run = full(candidate);
        }
        const std::size_t base = options.base_core.empty() ? order.front() : resolve_core(system, options.base_core);
        d.base_core = system.cores[base].id;
        d.base_energy_j = run.total_energy;
        if (candidate != base && !d.flagged) {
            const auto base_run = full(base);
            d.base_energy_j = base_run.total_energy;
            if (base_run.total_energy < run.total_energy && base_run.wall_time_s <= deadline_s) {
                candidate = base;
                run = base_run;
                d.path.push_back({system.cores[candidate].id, PathReason::RejectedEnergy});
            }
        }
        d.core = system.cores[candidate].id;
        d.freq = system.cores[candidate].operating_freq;
        d.run_energy_j = run.total_energy;
        d.run_time_s = run.wall_time_s;
        d.total_energy_j = run.total_energy;
        d.total_time_s = run.wall_time_s;
        d.deadline_met = d.total_time_s <= deadline_s;
        if (system.cores[candidate].id != system.cores[*stored].id) {
            history.record(app, d.core, constraint);
        }
        return d;
    }

    PlacementEvaluator ev(events, system, power, options);
    const auto& tree = models.get(constraint);
    d.ranking = tree.rank(ev.features());
    const auto predicted = resolve_core(system, d.ranking.front());
    d.path.push_back({system.cores[ev.profiling_core()].id, PathReason::Profile});
    d.path.push_back({system.cores[predicted].id, PathReason::Predicted});

    std::size_t candidate = predicted;
    while (ev.place(candidate).time_s > deadline_s) {
        const auto pos = position_in(order, candidate);
        if (pos == 0) {
            d.flagged = true;
            break;
        }
        candidate = order[pos - 1];
        d.path.push_back({system.cores[candidate].id, PathReason::EscalatedDeadline});
    }

    const std::size_t base = options.base_core.empty() ? ev.fastest_on_interval() : resolve_core(system, options.base_core);
    const auto& base_ex = ev.place(base);
    d.base_core = system.cores[base].id;
    d.base_energy_j = base_ex.energy_j;
    if (!d.flagged && candidate != base && base_ex.energy_j < ev.place(candidate).energy_j &&
        base_ex.time_s <= deadline_s) {
        candidate = base;
        d.path.push_back({system.cores[candidate].id, PathReason::RejectedEnergy});
    }

    const auto& ex = ev.place(candidate);
    d.core = system.cores[candidate].id;
    d.freq = system.cores[candidate].operating_freq;
    d.profiling = {ev.profile().instructions, ev.profile().total_energy, ev.profile().wall_time_s};
    d.prediction_time_s = options.prediction_time_s;
    d.migrations = ex.migrated ? 1 : 0;
    d.migration_time_s = ex.migrated ? options.migration_time_s : 0.0;
    d.overhead_energy_j = ex.overhead_energy_j;
    d.run_energy_j = ex.remainder.total_energy;
    d.run_time_s = ex.remainder.wall_time_s;
    d.total_energy_j = ex.energy_j;
    d.total_time_s = ex.time_s;
    d.deadline_met = d.total_time_s <= deadline_s;
    history.record(app, d.core, constraint);
    return d;
}

WorkloadAssignment dispatch_workload(std::span<const WorkloadApp> apps, const ArcSystem& system,
                                     const ArcModels& models, Constraint constraint, const PowerModel& power,
                                     const RuntimeOptions& options, const CoreSpec& baseline_core) {
    const auto per_cluster = system.cores.size();
    const auto clusters = static_cast<std::size_t>(std::max(1, system.cluster_count));
    if (apps.size() > per_cluster * clusters) {
        throw std::invalid_argument("workload has " + std::to_string(apps.size()) + " apps but the machine has " +
                                    std::to_string(per_cluster * clusters) + " cores");
    }
    const auto& tree = models.get(constraint);
    std::vector<std::vector<bool>> busy(clusters, std::vector<bool>(per_cluster, false));

    WorkloadAssignment w;
    for (const auto& app : apps) {
        PlacementEvaluator ev(app.events, system, power, options);
        Placement p;
        p.app = app.name;
        p.ranking = tree.rank(ev.features());
        bool placed = false;
        for (std::size_t pos = 0; pos < p.ranking.size() && !placed; ++pos) {
            const auto core = resolve_core(system, p.ranking[pos]);
            for (std::size_t cl = 0; cl < clusters; ++cl) {
                if (busy[cl][core]) continue;
                busy[cl][core] = true;
                const auto& ex = ev.place(core);
                p.cluster = static_cast<int>(cl);
                p.core = p.ranking[pos];
                p.rank_position = pos;
                p.completion_time_s = ex.time_s;
                p.energy_j = ex.energy_j;
                p.migrations = ex.migrated ? 1 : 0;
                placed = true;
                break;
            }
        }
        if (!placed) {
            throw std::logic_error("no free core for '" + app.name + "'");
        }
        p.baseline_energy_j =
            simulate_run(app.events, baseline_core, baseline_core.operating_freq, power).total_energy;
        w.total_energy_j += p.energy_j;
        w.baseline_energy_j += p.baseline_energy_j;
        w.makespan_s = std::max(w.makespan_s, p.completion_time_s);
        w.placements.push_back(std::move(p));
    }
    w.exceeds_baseline = w.total_energy_j > w.baseline_energy_j;
    return w;
}

void write_decision_log_header(std::ostream& out) {
    out << "app,constraint,core,freq_ghz,path,ranking,profiling_instructions,profiling_energy_j,profiling_time_s,"
           "prediction_time_s,migrations,migration_time_s,overhead_energy_j,run_energy_j,run_time_s,"
           "total_energy_j,total_time_s,deadline_s,deadline_met,flagged,base_core,base_energy_j\n";
}

void write_decision_log_row(std::ostream& out, const ScheduleDecision& d) {
    std::ostringstream path;
    for (std::size_t i = 0; i < d.path.size(); ++i) {
        path << (i ? ";" : "") << to_string(d.path[i].reason) << ':' << d.path[i].core;
    }
    std::ostringstream ranking;
    for (std::size_t i = 0; i < d.ranking.size(); ++i) {
        ranking << (i ? ">" : "") << d.ranking[i];
    }
    std::ostringstream row;
    row.precision(10);
    row << d.app << ',' << d.constraint.name() << ',' << d.core << ',' << d.freq.ghz() << ',' << path.str() << ','
        << ranking.str() << ',' << d.profiling.instructions << ',' << d.profiling.energy_j << ','
        << d.profiling.time_s << ',' << d.prediction_time_s << ',' << d.migrations << ',' << d.migration_time_s
        << ',' << d.overhead_energy_j << ',' << d.run_energy_j << ',' << d.run_time_s << ',' << d.total_energy_j
        << ',' << d.total_time_s << ',';
    if (std::isinf(d.deadline_s)) {
        row << "inf";
    } else {
        row << d.deadline_s;
    }
    row << ',' << (d.deadline_met ? 1 : 0) << ',' << (d.flagged ? 1 : 0) << ',' << d.base_core << ','
        << d.base_energy_j << '\n';
    out << row.str();
}

void append_decision_log(const std::string& path, std::span<const ScheduleDecision> decisions) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open decision log '" + path + "'");
    if (fresh) write_decision_log_header(out);
    for (const auto& d : decisions) write_decision_log_row(out, d);
}

}  // namespace arc
