#include "arc/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "arc/config_file.hpp"
#include "arc/experiment.hpp"
#include "arc/report.hpp"

namespace fs = std::filesystem;

namespace arc {

namespace {

struct Common {
    std::string config;
    std::string out;
    std::string constraint;
    std::string baseline = "homog-400us";
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool no_timestamp = false;
};

struct Target {
    std::string trace;
    std::string workload;
};

struct App {
    std::string name;
    Trace trace;
};

ExperimentConfig load(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? parse_config("", "<defaults>") : load_config(c.config);
    if (c.seed_given) cfg.seed = c.seed;
    if (!c.out.empty()) cfg.output_dir = c.out;
    if (!c.constraint.empty()) {
        try {
            cfg.constraint = Constraint::parse(c.constraint);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("--constraint", 0, e.what());
        }
    }
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& file) {
    return (fs::path(cfg.output_dir) / file).string();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
}

std::vector<App> all_apps(const ExperimentConfig& cfg) {
    std::vector<App> apps;
    for (const auto& w : cfg.workloads) {
        if (!w.trace_path.empty()) apps.push_back({w.name, load_trace(w.trace_path)});
    }
    for (const auto& w : cfg.synthetic_workloads()) apps.push_back({w.name, gen_synthetic(w.params)});
    return apps;
}

App resolve_app(const ExperimentConfig& cfg, const Target& t) {
    if (!t.trace.empty()) return {fs::path(t.trace).stem().string(), load_trace(t.trace)};
    if (t.workload.empty()) throw ConfigError(cfg.source, 0, "give --trace or --workload");
    for (const auto& w : cfg.workloads) {
        if (w.name == t.workload && !w.trace_path.empty()) return {w.name, load_trace(w.trace_path)};
    }
    for (const auto& w : cfg.synthetic_workloads()) {
        if (w.name == t.workload) return {w.name, gen_synthetic(w.params)};
    }
    throw ConfigError(cfg.source, 0, "unknown workload '" + t.workload + "'");
}

void write_manifest(const ExperimentConfig& cfg, const Common& c, const std::string& command) {
    auto f = open_out(out_path(cfg, "manifest.txt"));
    f << "command=" << command << '\n';
    f << "config=" << (c.config.empty() ? "<defaults>" : c.config) << '\n';
    f << "seed=" << (cfg.seed ? std::to_string(*cfg.seed) : "none") << '\n';
    f << "constraint=" << cfg.constraint.name() << '\n';
    if (!c.no_timestamp) {
        auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        f << "timestamp=" << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\n';
    }
}

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? sep : "") + items[i];
    return s;
}

std::string models_dir(const ExperimentConfig& cfg, const std::string& flag) {
    return flag.empty() ? out_path(cfg, "models") : flag;
}

int cmd_gen_trace(const Common& c, const std::string& workload, std::ostream& out) {
    auto cfg = load(c);
    auto synth = cfg.synthetic_workloads();
    if (synth.empty()) throw ConfigError(cfg.source, 0, "no synthetic workloads configured");
    fs::create_directories(out_path(cfg, "traces"));
    bool found = false;
    for (const auto& w : synth) {
        if (!workload.empty() && w.name != workload) continue;
        found = true;
        auto trace = gen_synthetic(w.params);
        trace.header.insert(trace.header.begin(), " " + w.name + " " + w.params.describe());
        auto path = out_path(cfg, "traces/" + w.name + ".trace");
        save_trace(path, trace);
        out << path << " events=" << trace.events.size() << " instructions=" << trace.instructions() << '\n';
    }
    if (!found) throw ConfigError(cfg.source, 0, "unknown workload '" + workload + "'");
    write_manifest(cfg, c, "gen-trace");
    return kExitOk;
}

int cmd_simulate(const Common& c, const Target& t, const std::string& core_id, double freq_ghz,
                 std::ostream& out) {
    auto cfg = load(c);
    auto app = resolve_app(cfg, t);
    const auto& core = core_id.empty() ? cfg.system.cores.front() : cfg.system.core(core_id);
    auto freq = freq_ghz > 0.0 ? Frequency::from_ghz(freq_ghz) : core.operating_freq;
    auto r = simulate_run(app.trace.events, core, freq, cfg.power);
    out << "app=" << app.name << '\n'
        << "core=" << r.core_id << '\n'
        << "freq_ghz=" << r.freq.ghz() << '\n'
        << "instructions=" << r.instructions << '\n'
        << "cycles=" << r.cycles << '\n'
        << "wall_time_s=" << r.wall_time_s << '\n'
        << "hits=" << r.stats.hits() << '\n'
        << "misses=" << r.stats.misses() << '\n'
        << "expiration_misses=" << r.stats.expiration_misses << '\n'
        << "total_energy_j=" << r.total_energy << '\n';
    std::vector<RunRow> rows{{app.name, "single", r}};
    auto f = open_out(out_path(cfg, "simulate.csv"));
    write_run_csv(f, rows);
    write_manifest(cfg, c, "simulate");
    return kExitOk;
}

int cmd_sweep(const Common& c, const Target& t, std::ostream& out) {
    auto cfg = load(c);
    auto app = resolve_app(cfg, t);
    auto table = exhaustive_sweep(app.trace.events, cfg.system, cfg.power, cfg.constraint);
    auto f = open_out(out_path(cfg, "sweep.csv"));
    write_sweep_csv(f, app.name, table);
    const auto& best = table.best();
    out << "rows=" << table.rows.size() << '\n'
        << "best=" << best.core_id << '@' << best.freq.ghz() << "GHz\n"
        << "best_energy_j=" << best.total_energy << '\n'
        << "deadline_s=" << table.deadline_s << '\n'
        << "constraint_violated=" << (table.constraint_violated ? 1 : 0) << '\n';
    write_manifest(cfg, c, "sweep");
    return table.constraint_violated ? kExitFlagged : kExitOk;
}

int cmd_train(const Common& c, std::ostream& out) {
    auto cfg = load(c);
    auto workloads = cfg.training_workloads();
    if (workloads.empty()) throw ConfigError(cfg.source, 0, "no training section configured");
    std::vector<AppRecord> apps;
    for (const auto& w : workloads) apps.push_back(characterize(w, cfg.system, cfg.power, cfg.runtime));
    auto models = train_models(apps, cfg.system, cfg.tree);
    auto dir = out_path(cfg, "models");
    fs::create_directories(dir);
    models.save(dir);

    auto f = open_out(out_path(cfg, "training.csv"));
    auto names = features::universe();
    f << "app";
    for (const auto cst : Constraint::all()) f << ",label_" << cst.name();
    for (const auto& n : names) f << ',' << n;
    f << '\n';
    f.precision(12);
    for (const auto& a : apps) {
        f << a.name;
        for (const auto cst : Constraint::all()) f << ',' << a.label(cst);
        for (const auto& n : names) f << ',' << a.features.at(n);
        f << '\n';
    }
    for (const auto cst : Constraint::all()) {
        const auto& tree = models.get(cst);
        std::size_t correct = 0;
        for (const auto& a : apps) correct += tree.predict(a.features) == a.label(cst);
        out << "model=" << cst.name() << " depth=" << tree.depth() << " leaves=" << tree.leaf_count()
            << " training_accuracy=" << correct << '/' << apps.size() << '\n';
    }
    out << "models=" << dir << '\n';
    write_manifest(cfg, c, "train");
    return kExitOk;
}

int cmd_predict(const Common& c, const Target& t, const std::string& models_flag, std::ostream& out) {
    auto cfg = load(c);
    auto app = resolve_app(cfg, t);
    auto models = ArcModels::load(models_dir(cfg, models_flag));
    PlacementEvaluator ev(app.trace.events, cfg.system, cfg.power, cfg.runtime);
    const auto& tree = models.get(cfg.constraint);
    out << "app=" << app.name << '\n'
        << "constraint=" << cfg.constraint.name() << '\n'
        << "profiling_core=" << cfg.system.cores[ev.profiling_core()].id << '\n'
        << "predicted=" << tree.predict(ev.features()) << '\n'
        << "ranking=" << join(tree.rank(ev.features()), ">") << '\n';
    for (const auto& name : tree.feature_names()) out << "feature." << name << '=' << ev.features().at(name) << '\n';
    write_manifest(cfg, c, "predict");
    return kExitOk;
}

int cmd_schedule_single(const Common& c, const ExperimentConfig& cfg, const ArcModels& models, std::ostream& out) {
    auto apps = all_apps(cfg);
    if (apps.empty()) throw ConfigError(cfg.source, 0, "no workloads configured");
    HistoryTable history(cfg.runtime.history_capacity);
    const auto sram = defaults::sram_reference_core();
    const auto homog = defaults::homogeneous_400us_core();

    std::vector<ScheduleDecision> decisions;
    std::vector<RunRow> runs;
    std::size_t flagged = 0;
    for (const auto& app : apps) {
        const auto& events = app.trace.events;
        auto sweep = exhaustive_sweep(events, cfg.system, cfg.power, cfg.constraint);
        auto d = run_application(app.name, events, cfg.system, models, cfg.constraint, history, cfg.power,
                                 cfg.runtime, sweep.deadline_s);
        RunResult arc_run;
        arc_run.core_id = d.core;
        arc_run.freq = d.freq;
        arc_run.instructions = app.trace.instructions();
        arc_run.wall_time_s = d.total_time_s;
        arc_run.total_energy = d.total_energy_j;
        arc_run.edp = edp(d.total_energy_j, d.total_time_s);
        runs.push_back({app.name, "arc", arc_run, true});
        runs.push_back({app.name, "arc-exhaustive", sweep.best()});
        runs.push_back({app.name, "sram", simulate_run(events, sram, sram.operating_freq, cfg.power)});
        runs.push_back({app.name, "homog-400us", simulate_run(events, homog, homog.operating_freq, cfg.power)});
        flagged += d.flagged;
        out << app.name << " core=" << d.core << " path=";
        for (std::size_t i = 0; i < d.path.size(); ++i) {
            out << (i ? ";" : "") << to_string(d.path[i].reason) << ':' << d.path[i].core;
        }
        out << " energy_j=" << d.total_energy_j << " deadline_met=" << d.deadline_met
            << " flagged=" << d.flagged << '\n';
        decisions.push_back(std::move(d));
    }

    {
        auto f = open_out(out_path(cfg, "decisions.csv"));
        write_decision_log_header(f);
        for (const auto& d : decisions) write_decision_log_row(f, d);
    }
    {
        auto f = open_out(out_path(cfg, "runs.csv"));
        write_run_csv(f, runs);
    }
    std::vector<RunMetrics> metrics;
    {
        std::ifstream in(out_path(cfg, "runs.csv"));
        metrics = read_run_csv(in);
    }
    auto baseline = parse_baseline(c.baseline);
    auto normalized = normalize(metrics, baseline);
    auto f = open_out(out_path(cfg, "report.csv"));
    write_normalized_csv(f, normalized);
    out << "apps=" << apps.size() << " flagged=" << flagged << '\n';
    return flagged ? kExitFlagged : kExitOk;
}

int cmd_schedule_dispatch(const ExperimentConfig& cfg, const ArcModels& models, std::ostream& out) {
    if (cfg.mixes.empty()) throw ConfigError(cfg.source, 0, "dispatch needs workloads.mixes");
    auto apps = all_apps(cfg);
    std::map<std::string, const App*> by_name;
    for (const auto& a : apps) by_name[a.name] = &a;
    const auto homog = defaults::homogeneous_400us_core();

    auto detail = open_out(out_path(cfg, "dispatch.csv"));
    auto summary = open_out(out_path(cfg, "workloads.csv"));
    summary << "workload,apps,total_energy_j,baseline_energy_j,energy_ratio,makespan_s,exceeds_baseline\n";
    summary.precision(12);
    for (std::size_t i = 0; i < cfg.mixes.size(); ++i) {
        std::vector<WorkloadApp> mix;
        for (const auto& name : cfg.mixes[i]) mix.push_back({name, by_name.at(name)->trace.events});
        auto a = dispatch_workload(mix, cfg.system, models, cfg.constraint, cfg.power, cfg.runtime, homog);
        auto label = "workload" + std::to_string(i + 1);
        write_assignment_csv(detail, label, a, i == 0);
        summary << label << ',' << join(cfg.mixes[i], ";") << ',' << a.total_energy_j << ',' << a.baseline_energy_j
                << ',' << a.total_energy_j / a.baseline_energy_j << ',' << a.makespan_s << ','
                << (a.exceeds_baseline ? 1 : 0) << '\n';
        out << label << " energy_ratio=" << a.total_energy_j / a.baseline_energy_j
            << (a.exceeds_baseline ? " exceeds_baseline" : "") << '\n';
    }
    return kExitOk;
}

int cmd_schedule(const Common& c, const std::string& models_flag, bool dispatch, std::ostream& out) {
    auto cfg = load(c);
    auto models = ArcModels::load(models_dir(cfg, models_flag));
    int rc = dispatch ? cmd_schedule_dispatch(cfg, models, out) : cmd_schedule_single(c, cfg, models, out);
    write_manifest(cfg, c, dispatch ? "schedule --dispatch" : "schedule");
    return rc;
}

int cmd_report(const Common& c, const std::string& input, bool frequency, const Target& t, std::ostream& out) {
    auto cfg = load(c);
    if (frequency) {
        auto app = resolve_app(cfg, t);
        std::vector<MemTechnology> techs{defaults::sram()};
        std::map<SimTime, MemTechnology> stt;
        for (const auto& core : cfg.system.cores) {
            if (core.data_tech.kind == MemKind::Sram) {
                techs.front() = core.data_tech;
            } else {
                stt.emplace(core.data_tech.retention, core.data_tech);
            }
        }
        for (const auto& [ret, tech] : stt) techs.push_back(tech);
        DvfsRange dvfs = cfg.system.cores.front().dvfs;
        auto points = frequency_study(app.trace.events, techs, cfg.power, dvfs);
        auto path = out_path(cfg, "frequency.csv");
        auto f = open_out(path);
        write_frequency_csv(f, app.name, points);
        out << "rows=" << points.size() << '\n' << "wrote=" << path << '\n';
        write_manifest(cfg, c, "report --frequency-study");
        return kExitOk;
    }
    auto baseline = parse_baseline(c.baseline);
    auto in_path = input.empty() ? out_path(cfg, "runs.csv") : input;
    std::ifstream in(in_path);
    if (!in) throw std::runtime_error("cannot read " + in_path);
    auto rows = normalize(read_run_csv(in), baseline);
    auto path = out_path(cfg, "report_" + to_string(baseline) + ".csv");
    {
        auto f = open_out(path);
        write_normalized_csv(f, rows);
    }
    std::ostringstream table;
    write_normalized_csv(table, rows);
    out << table.str() << "wrote=" << path << '\n';
    write_manifest(cfg, c, "report");
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Asymmetric-retention core simulator and scheduler"};
    app.require_subcommand(1);
    app.fallthrough();

    Common c;
    app.add_option("--config", c.config, "experiment YAML");
    auto* seed = app.add_option("--seed", c.seed, "seed for synthetic workloads");
    app.add_option("--out", c.out, "output directory");
    app.add_option("--constraint", c.constraint, "none|slack20|slack10|best-perf");
    app.add_option("--baseline", c.baseline, "sram|homog-400us|self");
    app.add_flag("--no-timestamp", c.no_timestamp, "omit the timestamp from manifest.txt");

    Target target;
    auto add_target = [&](CLI::App* sub) {
        sub->add_option("--trace", target.trace, "trace file");
        sub->add_option("--workload", target.workload, "workload name from the config");
    };

    std::string workload, core_id, models, input;
    double freq = 0.0;
    bool dispatch = false, frequency = false;

    auto* gen = app.add_subcommand("gen-trace", "write synthetic traces");
    gen->add_option("--workload", workload, "only this workload");
    auto* sim = app.add_subcommand("simulate", "one trace on one core at one frequency");
    add_target(sim);
    sim->add_option("--core", core_id, "core id (default: first core)");
    sim->add_option("--freq", freq, "GHz (default: the core's operating point)");
    auto* sweep = app.add_subcommand("sweep", "every core at every admissible frequency");
    add_target(sweep);
    auto* train = app.add_subcommand("train", "label the training suite and fit per-constraint trees");
    auto* predict = app.add_subcommand("predict", "profile a trace and rank the cores");
    add_target(predict);
    predict->add_option("--models", models, "model directory (default: <out>/models)");
    auto* schedule = app.add_subcommand("schedule", "run the runtime scheduler over the configured workloads");
    schedule->add_option("--models", models, "model directory (default: <out>/models)");
    schedule->add_flag("--dispatch", dispatch, "multiprogrammed dispatch of workloads.mixes");
    auto* report = app.add_subcommand("report", "normalize run CSVs against a baseline");
    report->add_option("--input", input, "run CSV (default: <out>/runs.csv)");
    report->add_flag("--frequency-study", frequency, "per-technology frequency study of one trace");
    add_target(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    c.seed_given = seed->count() > 0;
    try {
        parse_baseline(c.baseline);
    } catch (const std::invalid_argument& e) {
        err << "config error: --baseline: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*gen) return cmd_gen_trace(c, workload, out);
        if (*sim) return cmd_simulate(c, target, core_id, freq, out);
        if (*sweep) return cmd_sweep(c, target, out);
        if (*train) return cmd_train(c, out);
        if (*predict) return cmd_predict(c, target, models, out);
        if (*schedule) return cmd_schedule(c, models, dispatch, out);
        if (*report) return cmd_report(c, input, frequency, target, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const TraceParseError& e) {
        err << "trace error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}

}  // namespace arc
