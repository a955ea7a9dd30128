#include "arc/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace arc {

SimTime from_seconds(double seconds) {
    if (!std::isfinite(seconds)) {
        return kNever;
    }
    return SimTime(static_cast<std::int64_t>(std::llround(seconds * 1.0e15)));
}

Frequency Frequency::from_ghz(double ghz) {
    if (!std::isfinite(ghz)) {
        throw std::invalid_argument("frequency must be finite");
    }
    return Frequency(static_cast<std::int64_t>(std::llround(ghz * 1000.0)));
}

SimTime Frequency::cycles_to_time(std::uint64_t cycles) const {
    if (mhz_ <= 0) {
        throw std::invalid_argument("frequency must be positive");
    }
    // One cycle lasts 1e9 / mhz femtoseconds. Split the product so it stays
    // inside 64 bits for any realistic run length.
    const auto mhz = static_cast<std::uint64_t>(mhz_);
    constexpr std::uint64_t kFsPerUs = 1'000'000'000;
    const std::uint64_t whole = cycles / mhz;
    const std::uint64_t rem = cycles % mhz;
    const std::uint64_t fs = whole * kFsPerUs + (rem * kFsPerUs + mhz / 2) / mhz;
    return SimTime(static_cast<std::int64_t>(fs));
}

std::string to_string(MemKind kind) {
    return kind == MemKind::Sram ? "sram" : "sttram";
}

bool DvfsRange::on_grid(Frequency f) const {
    if (f < min_freq || f > max_freq || step.mhz() <= 0) {
        return false;
    }
    return (f.mhz() - min_freq.mhz()) % step.mhz() == 0;
}

std::vector<Frequency> DvfsRange::grid() const {
    std::vector<Frequency> out;
    if (step.mhz() <= 0) {
        return out;
    }
    for (auto mhz = min_freq.mhz(); mhz <= max_freq.mhz(); mhz += step.mhz()) {
        out.push_back(Frequency::from_mhz(mhz));
    }
    return out;
}

const CoreSpec& ArcSystem::core(const std::string& id) const {
    for (const auto& c : cores) {
        if (c.id == id) {
            return c;
        }
    }
    throw std::invalid_argument("unknown core '" + id + "'");
}

std::optional<std::size_t> ArcSystem::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < cores.size(); ++i) {
        if (cores[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

std::vector<std::string> ArcSystem::labels() const {
    std::vector<std::string> out;
    out.reserve(cores.size());
    for (const auto& c : cores) {
        out.push_back(c.id);
    }
    return out;
}

int access_cycles(Frequency freq, double latency_ns) {
    if (freq.mhz() <= 0) {
        throw std::invalid_argument("access_cycles: frequency must be positive");
    }
    if (!(latency_ns >= 0.0)) {
        throw std::invalid_argument("access_cycles: latency must be non-negative");
    }
    if (latency_ns == 0.0) {
        return 0;
    }
    const double product = static_cast<double>(freq.mhz()) * latency_ns / 1000.0;
    const double nearest = std::round(product);
    double cycles = std::ceil(product);
    if (std::abs(product - nearest) <= 1e-9 * std::max(1.0, nearest)) {
        cycles = nearest;
    }
    return std::max(1, static_cast<int>(cycles));
}

int access_cycles(double freq_ghz, double latency_ns) {
    if (!(freq_ghz > 0.0)) {
        throw std::invalid_argument("access_cycles: frequency must be positive");
    }
    return access_cycles(Frequency::from_ghz(freq_ghz), latency_ns);
}

double voltage_for_frequency(const DvfsRange& dvfs, Frequency freq) {
    if (!dvfs.on_grid(freq)) {
        std::ostringstream msg;
        msg << "frequency " << freq.ghz() << " GHz is not on the DVFS grid ["
            << dvfs.min_freq.ghz() << ", " << dvfs.max_freq.ghz() << "] step "
            << dvfs.step.ghz();
        throw std::invalid_argument(msg.str());
    }
    if (!dvfs.voltage_table.empty()) {
        auto it = dvfs.voltage_table.find(freq.mhz());
        if (it == dvfs.voltage_table.end()) {
            throw std::invalid_argument("voltage table has no entry for " +
                                        std::to_string(freq.mhz()) + " MHz");
        }
        return it->second;
    }
    const auto span = dvfs.voltage_max_freq.mhz() - dvfs.min_freq.mhz();
    if (span == 0) {
        return dvfs.max_voltage;
    }
    const double t = static_cast<double>(freq.mhz() - dvfs.min_freq.mhz()) / static_cast<double>(span);
    return dvfs.min_voltage + t * (dvfs.max_voltage - dvfs.min_voltage);
}

int counter_bits(int counter_states) {
    int bits = 0;
    while ((1 << bits) < counter_states) {
        ++bits;
    }
    return bits;
}

std::uint64_t monitor_counter_overhead_bytes(const CoreSpec& core) {
    const auto bits = core.geometry.blocks() * static_cast<std::uint64_t>(counter_bits(core.counter_states));
    return (bits + 7) / 8;
}

namespace {

bool power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

void check_tech(const MemTechnology& t, const std::string& where, std::vector<std::string>& out) {
    if (!(t.hit_latency_ns > 0.0)) out.push_back(where + ": hit latency must be > 0");
    if (!(t.write_latency_ns > 0.0)) out.push_back(where + ": write latency must be > 0");
    if (!(t.read_energy_j >= 0.0)) out.push_back(where + ": read energy must be >= 0");
    if (!(t.write_energy_j >= 0.0)) out.push_back(where + ": write energy must be >= 0");
    if (!(t.leakage_w >= 0.0)) out.push_back(where + ": leakage power must be >= 0");
    if (t.kind == MemKind::Sram && !t.infinite_retention()) {
        out.push_back(where + ": SRAM must have infinite retention");
    }
    if (t.kind == MemKind::SttRam && !t.infinite_retention() && t.retention.count() <= 0) {
        out.push_back(where + ": retention must be positive");
    }
}

}  // namespace

ValidationReport validate_core_spec(const CoreSpec& spec) {
    ValidationReport report;
    auto& v = report.violations;
    const std::string who = "core '" + spec.id + "'";

    if (spec.id.empty()) v.push_back("core id must not be empty");
    check_tech(spec.data_tech, who + " data cache", v);
    check_tech(spec.instr_tech, who + " instruction cache", v);

    const auto& g = spec.geometry;
    if (!power_of_two(g.capacity_bytes) || !power_of_two(g.line_size) || !power_of_two(g.associativity)) {
        v.push_back(who + ": capacity, line size and associativity must be powers of two");
    } else if (g.capacity_bytes < g.line_size * g.associativity) {
        v.push_back(who + ": geometry yields zero sets");
    }

    const auto& d = spec.dvfs;
    if (d.min_freq.mhz() <= 0 || d.step.mhz() <= 0) {
        v.push_back(who + ": DVFS frequencies and step must be positive");
    } else if (d.min_freq > d.max_freq) {
        v.push_back(who + ": min frequency exceeds the cap");
    } else if ((d.max_freq.mhz() - d.min_freq.mhz()) % d.step.mhz() != 0) {
        v.push_back(who + ": frequency range is not a multiple of the step");
    } else if (!d.on_grid(spec.operating_freq)) {
        v.push_back(who + ": operating frequency is not on the DVFS grid");
    }
    if (d.min_voltage > d.max_voltage || d.min_voltage <= 0.0) {
        v.push_back(who + ": invalid voltage range");
    }
    if (d.voltage_table.empty() && d.voltage_max_freq < d.max_freq) {
        v.push_back(who + ": the cap lies beyond the top of the voltage curve");
    }
    for (const auto& f : d.voltage_table.empty() ? std::vector<Frequency>{} : d.grid()) {
        if (!d.voltage_table.contains(f.mhz())) {
            v.push_back(who + ": voltage table misses " + std::to_string(f.mhz()) + " MHz");
        }
    }

    if (spec.counter_states < 2) v.push_back(who + ": counter needs at least 2 states");
    if (!(spec.base_cpi > 0.0)) v.push_back(who + ": base CPI must be positive");
    if (!(spec.miss_penalty_ns >= 0.0)) v.push_back(who + ": miss penalty must be non-negative");

    if (d.max_freq.mhz() > 0 && spec.data_tech.hit_latency_ns > 0.0 && spec.data_tech.write_latency_ns > 0.0) {
        report.read_cycles_at_cap = access_cycles(d.max_freq, spec.data_tech.hit_latency_ns);
        report.write_cycles_at_cap = access_cycles(d.max_freq, spec.data_tech.write_latency_ns);
        if (report.read_cycles_at_cap != 1) {
            v.push_back(who + ": read takes " + std::to_string(report.read_cycles_at_cap) +
                        " cycles at the cap, expected 1");
        }
        if (spec.write_cycle_budget && *spec.write_cycle_budget != report.write_cycles_at_cap) {
            v.push_back(who + ": write takes " + std::to_string(report.write_cycles_at_cap) +
                        " cycles at the cap, declared budget is " + std::to_string(*spec.write_cycle_budget));
        }
    }
    return report;
}

ValidationReport validate_system(const ArcSystem& system) {
    ValidationReport report;
    auto& v = report.violations;
    if (system.cores.empty()) v.push_back("system has no cores");
    if (system.cluster_count < 1) v.push_back("cluster count must be >= 1");

    std::set<std::string> seen;
    for (const auto& c : system.cores) {
        if (!seen.insert(c.id).second) v.push_back("duplicate core label '" + c.id + "'");
        auto sub = validate_core_spec(c);
        v.insert(v.end(), sub.violations.begin(), sub.violations.end());
    }

    // Relaxing retention must buy write latency: order STT-RAM rows by retention.
    std::map<SimTime, const MemTechnology*> by_retention;
    for (const auto& c : system.cores) {
        if (c.data_tech.kind == MemKind::SttRam) by_retention.emplace(c.data_tech.retention, &c.data_tech);
    }
    const MemTechnology* prev = nullptr;
    for (const auto& [ret, tech] : by_retention) {
        if (prev && !(tech->write_latency_ns > prev->write_latency_ns)) {
            v.push_back("write latency of '" + tech->name + "' does not exceed that of shorter-retention '" +
                        prev->name + "'");
        }
        prev = tech;
    }
    return report;
}

namespace defaults {

namespace {
constexpr double kNano = 1e-9;
constexpr double kMilli = 1e-3;

MemTechnology stt(std::string name, double retention_s, double hit, double write, double re, double we) {
    MemTechnology t;
    t.name = std::move(name);
    t.kind = MemKind::SttRam;
    t.retention = from_seconds(retention_s);
    t.hit_latency_ns = hit;
    t.write_latency_ns = write;
    t.read_energy_j = re * kNano;
    t.write_energy_j = we * kNano;
    t.leakage_w = 13.1448 * kMilli;
    return t;
}
}  // namespace

MemTechnology sram() {
    MemTechnology t;
    t.name = "sram";
    t.kind = MemKind::Sram;
    t.retention = kNever;
    t.hit_latency_ns = 0.453;
    t.write_latency_ns = 0.312;
    t.read_energy_j = 0.007 * kNano;
    t.write_energy_j = 0.006 * kNano;
    t.leakage_w = 50.328 * kMilli;
    return t;
}

MemTechnology sttram_10us() { return stt("sttram_10us", 10e-6, 0.464, 0.601, 0.003, 0.026); }
MemTechnology sttram_26_5us() { return stt("sttram_26.5us", 26.5e-6, 0.454, 0.769, 0.003, 0.030); }
MemTechnology sttram_75us() { return stt("sttram_75us", 75e-6, 0.445, 0.981, 0.003, 0.035); }
MemTechnology sttram_400us() { return stt("sttram_400us", 400e-6, 0.443, 1.389, 0.003, 0.045); }

MemTechnology sttram_100ms_instr(double scale) {
    MemTechnology t = sttram_400us();
    t.name = "sttram_100ms";
    t.retention = from_seconds(100e-3);
    t.hit_latency_ns *= scale;
    t.write_latency_ns *= scale;
    t.read_energy_j *= scale;
    t.write_energy_j *= scale;
    t.leakage_w *= scale;
    return t;
}

std::vector<MemTechnology> technology_table() {
    return {sram(), sttram_10us(), sttram_26_5us(), sttram_75us(), sttram_400us(), sttram_100ms_instr()};
}

CoreSpec core(std::string id, MemTechnology data, Frequency cap, int write_budget) {
    CoreSpec c;
    c.id = std::move(id);
    c.data_tech = std::move(data);
    c.instr_tech = sttram_100ms_instr();
    c.dvfs.max_freq = cap;
    c.operating_freq = cap;
    c.write_cycle_budget = write_budget;
    return c;
}

ArcSystem arc_system() {
    ArcSystem s;
    s.cores.push_back(core("core1", sttram_10us(), Frequency::from_mhz(1600), 1));
    s.cores.push_back(core("core2", sttram_26_5us(), Frequency::from_mhz(1200), 1));
    s.cores.push_back(core("core3", sttram_75us(), Frequency::from_mhz(2000), 2));
    s.cores.push_back(core("core4", sttram_400us(), Frequency::from_mhz(2000), 3));
    return s;
}

CoreSpec sram_reference_core() {
    auto c = core("sram", sram(), Frequency::from_mhz(2000), 1);
    c.instr_tech = sram();
    return c;
}

CoreSpec homogeneous_400us_core() {
    return core("homog-400us", sttram_400us(), Frequency::from_mhz(2000), 3);
}

}  // namespace defaults

}  // namespace arc
