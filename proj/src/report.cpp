#include "arc/report.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace arc {

namespace {

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(12);
    ss << v;
    return ss.str();
}

const char* kRunColumns =
    "app,system,core,freq_ghz,instructions,memory_accesses,cycles,active_cycles,wall_time_s,read_hits,write_hits,"
    "read_misses,write_misses,expiration_misses,early_writebacks,writebacks,cache_dynamic_j,cache_leakage_j,"
    "core_dynamic_j,core_static_j,total_energy_j,edp";

void totals_fields(std::ostream& out, const std::string& app, const std::string& system, const RunResult& r) {
    out << app << ',' << system << ',' << r.core_id << ',' << num(r.freq.ghz()) << ',' << r.instructions
        << ",,,," << num(r.wall_time_s) << ",,,,,,,,,,,," << num(r.total_energy) << ',' << num(r.edp);
}

void run_fields(std::ostream& out, const std::string& app, const std::string& system, const RunResult& r) {
    const auto& s = r.stats;
    out << app << ',' << system << ',' << r.core_id << ',' << num(r.freq.ghz()) << ',' << r.instructions << ','
        << r.memory_accesses << ',' << r.cycles << ',' << r.active_cycles << ',' << num(r.wall_time_s) << ','
        << s.read_hits << ',' << s.write_hits << ',' << s.read_misses << ',' << s.write_misses << ','
        << s.expiration_misses << ',' << s.early_writebacks << ',' << s.writebacks << ','
        << num(r.cache_dynamic_energy) << ',' << num(r.cache_leakage_energy) << ',' << num(r.core_dynamic_energy)
        << ',' << num(r.core_static_energy) << ',' << num(r.total_energy) << ',' << num(r.edp);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double ratio(double v, double base) { return base == 0.0 ? (v == 0.0 ? 1.0 : 0.0) : v / base; }

}  // namespace

void write_run_csv(std::ostream& out, std::span<const RunRow> rows) {
    out << kRunColumns << '\n';
    for (const auto& row : rows) {
        if (row.totals_only) {
            totals_fields(out, row.app, row.system, row.run);
        } else {
            run_fields(out, row.app, row.system, row.run);
        }
        out << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::string& app, const SweepTable& table) {
    out << kRunColumns << ",meets_deadline,pareto,best\n";
    auto pareto = pareto_flags(table.rows);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        run_fields(out, app, "sweep", r);
        out << ',' << (r.wall_time_s <= table.deadline_s ? 1 : 0) << ',' << (pareto[i] ? 1 : 0) << ','
            << (i == table.best_row ? 1 : 0) << '\n';
    }
}

std::vector<RunMetrics> read_run_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty run CSV");
    auto header = split(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* need : {"app", "system", "total_energy_j", "wall_time_s"}) {
        if (!col.contains(need)) throw std::runtime_error(std::string("run CSV lacks column '") + need + "'");
    }
    std::vector<RunMetrics> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("run CSV line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(header.size()) + " fields");
        }
        auto number = [&](const char* name) {
            try {
                return std::stod(cells.at(col.at(name)));
            } catch (const std::exception&) {
                throw std::runtime_error("run CSV line " + std::to_string(lineno) + ": bad " + name);
            }
        };
        RunMetrics m;
        m.app = cells[col["app"]];
        m.system = cells[col["system"]];
        if (col.contains("core")) m.core = cells[col["core"]];
        m.energy_j = number("total_energy_j");
        m.time_s = number("wall_time_s");
        m.edp = col.contains("edp") ? number("edp") : m.energy_j * m.time_s;
        if (col.contains("cache_dynamic_j") && col.contains("cache_leakage_j") &&
            !cells[col["cache_dynamic_j"]].empty() && !cells[col["cache_leakage_j"]].empty()) {
            m.cache_energy_j = number("cache_dynamic_j") + number("cache_leakage_j");
        }
        rows.push_back(std::move(m));
    }
    return rows;
}

Baseline parse_baseline(const std::string& name) {
    if (name == "sram") return Baseline::Sram;
    if (name == "homog-400us") return Baseline::Homog400us;
    if (name == "self") return Baseline::Self;
    throw std::invalid_argument("unknown baseline '" + name + "' (want sram|homog-400us|self)");
}

std::string to_string(Baseline b) {
    switch (b) {
        case Baseline::Sram: return "sram";
        case Baseline::Homog400us: return "homog-400us";
        case Baseline::Self: return "self";
    }
    return "self";
}

std::vector<NormalizedRow> normalize(std::span<const RunMetrics> rows, Baseline baseline) {
    std::map<std::string, const RunMetrics*> base;
    if (baseline != Baseline::Self) {
        auto name = to_string(baseline);
        for (const auto& r : rows) {
            if (r.system == name) base.emplace(r.app, &r);
        }
    }
    std::vector<NormalizedRow> out;
    for (const auto& r : rows) {
        const RunMetrics* b = &r;
        if (baseline != Baseline::Self) {
            auto it = base.find(r.app);
            if (it == base.end()) {
                throw std::runtime_error("no " + to_string(baseline) + " baseline row for app '" + r.app + "'");
            }
            b = it->second;
        }
        NormalizedRow n{r.app, r.system, ratio(r.energy_j, b->energy_j), ratio(r.time_s, b->time_s),
                        ratio(r.edp, b->edp), std::nullopt};
        if (r.cache_energy_j && b->cache_energy_j) n.cache_energy = ratio(*r.cache_energy_j, *b->cache_energy_j);
        out.push_back(n);
    }
    return out;
}

void write_normalized_csv(std::ostream& out, std::span<const NormalizedRow> rows) {
    out << "app,system,energy_ratio,time_ratio,edp_ratio,cache_energy_ratio\n";
    struct Sum {
        double e = 0, t = 0, edp = 0, c = 0;
        std::size_t n = 0, nc = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Sum> sums;
    for (const auto& r : rows) {
        out << r.app << ',' << r.system << ',' << num(r.energy) << ',' << num(r.time) << ',' << num(r.edp) << ','
            << (r.cache_energy ? num(*r.cache_energy) : "") << '\n';
        if (!sums.contains(r.system)) order.push_back(r.system);
        auto& s = sums[r.system];
        s.e += r.energy;
        s.t += r.time;
        s.edp += r.edp;
        if (r.cache_energy) {
            s.c += *r.cache_energy;
            ++s.nc;
        }
        ++s.n;
    }
    for (const auto& system : order) {
        const auto& s = sums[system];
        double n = static_cast<double>(s.n);
        out << "mean," << system << ',' << num(s.e / n) << ',' << num(s.t / n) << ',' << num(s.edp / n) << ','
            << (s.nc ? num(s.c / static_cast<double>(s.nc)) : "") << '\n';
    }
}

std::vector<FrequencyPoint> frequency_study(std::span<const TraceEvent> events,
                                            std::span<const MemTechnology> technologies, const PowerModel& power,
                                            const DvfsRange& dvfs) {
    DvfsRange range = dvfs;
    range.max_freq = range.voltage_max_freq;
    auto grid = range.grid();
    if (grid.empty()) throw std::invalid_argument("empty frequency grid");

    auto make_core = [&](const MemTechnology& tech) {
        CoreSpec c = defaults::core("study-" + tech.name, tech, range.max_freq, 1);
        c.dvfs = range;
        c.write_cycle_budget.reset();
        if (tech.kind == MemKind::Sram) c.instr_tech = tech;
        return c;
    };

    const MemTechnology* sram = nullptr;
    for (const auto& t : technologies) {
        if (t.kind == MemKind::Sram) sram = &t;
    }
    RunResult reference;
    if (sram) reference = simulate_run(events, make_core(*sram), grid.back(), power);

    std::vector<FrequencyPoint> out;
    for (const auto& tech : technologies) {
        auto core = make_core(tech);
        double base_rate = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            FrequencyPoint p;
            p.technology = tech.name;
            p.retention_us = tech.infinite_retention() ? 0.0 : to_seconds(tech.retention) * 1e6;
            p.freq = grid[i];
            p.write_cycles = access_cycles(grid[i], tech.write_latency_ns);
            p.run = simulate_run(events, core, grid[i], power);
            auto acc = p.run.stats.accesses();
            p.miss_rate = acc ? static_cast<double>(p.run.stats.misses()) / static_cast<double>(acc) : 0.0;
            if (i == 0) base_rate = p.miss_rate;
            p.miss_rate_change = p.miss_rate - base_rate;
            if (sram) {
                p.time_vs_sram = ratio(p.run.wall_time_s, reference.wall_time_s);
                p.energy_vs_sram = ratio(p.run.total_energy, reference.total_energy);
            }
            out.push_back(std::move(p));
        }
    }
    return out;
}

void write_frequency_csv(std::ostream& out, const std::string& app, std::span<const FrequencyPoint> points,
                         bool header) {
    if (header) {
        out << "app,technology,retention_us,freq_ghz,write_cycles,misses,expiration_misses,miss_rate,"
               "miss_rate_change,wall_time_s,total_energy_j,time_vs_sram,energy_vs_sram\n";
    }
    for (const auto& p : points) {
        out << app << ',' << p.technology << ',' << num(p.retention_us) << ',' << num(p.freq.ghz()) << ','
            << p.write_cycles << ',' << p.run.stats.misses() << ',' << p.run.stats.expiration_misses << ','
            << num(p.miss_rate) << ',' << num(p.miss_rate_change) << ',' << num(p.run.wall_time_s) << ','
            << num(p.run.total_energy) << ',' << num(p.time_vs_sram) << ',' << num(p.energy_vs_sram) << '\n';
    }
}

void write_assignment_csv(std::ostream& out, const std::string& workload, const WorkloadAssignment& a,
                          bool header) {
    if (header) {
        out << "workload,app,cluster,core,rank_position,ranking,energy_j,completion_time_s,baseline_energy_j,"
               "migrations\n";
    }
    for (const auto& p : a.placements) {
        std::string ranking;
        for (std::size_t i = 0; i < p.ranking.size(); ++i) ranking += (i ? ">" : "") + p.ranking[i];
        out << workload << ',' << p.app << ',' << p.cluster << ',' << p.core << ',' << p.rank_position << ','
            << ranking << ',' << num(p.energy_j) << ',' << num(p.completion_time_s) << ','
            << num(p.baseline_energy_j) << ',' << p.migrations << '\n';
    }
}

}  // namespace arc
