#ifndef ARC_CONFIG_HPP
#define ARC_CONFIG_HPP

#include <chrono>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ratio>
#include <string>
#include <vector>

namespace arc {

// Simulated wall-clock time. Femtosecond resolution keeps retention ticks
// (retention / k) integral for every retention time in the device table.
using SimTime = std::chrono::duration<std::int64_t, std::femto>;

inline constexpr SimTime kNever = SimTime::max();

inline double to_seconds(SimTime t) { return std::chrono::duration<double>(t).count(); }
SimTime from_seconds(double seconds);

// Clock frequency held in integer MHz so the DVFS grid is exact.
class Frequency {
public:
    constexpr Frequency() = default;
    static constexpr Frequency from_mhz(std::int64_t mhz) { return Frequency(mhz); }
    static Frequency from_ghz(double ghz);

    constexpr std::int64_t mhz() const { return mhz_; }
    constexpr double ghz() const { return static_cast<double>(mhz_) / 1000.0; }
    constexpr double hz() const { return static_cast<double>(mhz_) * 1.0e6; }

    // Time taken by `cycles` clock cycles, rounded to the nearest femtosecond.
    SimTime cycles_to_time(std::uint64_t cycles) const;

    constexpr auto operator<=>(const Frequency&) const = default;

private:
    constexpr explicit Frequency(std::int64_t mhz) : mhz_(mhz) {}
    std::int64_t mhz_ = 0;
};

enum class MemKind { Sram, SttRam };

std::string to_string(MemKind kind);

/// One row of the device table: an SRAM array or an STT-RAM array with a
/// given retention time. Latencies in ns, energies in J/access, power in W.
struct MemTechnology {
    std::string name;
    MemKind kind = MemKind::SttRam;
    SimTime retention = kNever;  // kNever for SRAM
    double hit_latency_ns = 0.0;
    double write_latency_ns = 0.0;
    double read_energy_j = 0.0;
    double write_energy_j = 0.0;
    double leakage_w = 0.0;

    bool infinite_retention() const { return retention == kNever; }
};

struct CacheGeometry {
    std::uint64_t capacity_bytes = 32 * 1024;
    std::uint64_t line_size = 64;
    std::uint64_t associativity = 4;

    std::uint64_t sets() const { return capacity_bytes / (line_size * associativity); }
    std::uint64_t blocks() const { return capacity_bytes / line_size; }
};

/// Per-core frequency range; max_freq is the core's cap. Voltage is linear
/// from (min_freq, min_voltage) to (voltage_max_freq, max_voltage) unless an
/// explicit table is supplied, so a capped core runs a shared V/f curve.
struct DvfsRange {
    Frequency min_freq = Frequency::from_mhz(800);
    Frequency max_freq = Frequency::from_mhz(2000);
    Frequency step = Frequency::from_mhz(200);
    double min_voltage = 0.9;
    double max_voltage = 1.35;
    Frequency voltage_max_freq = Frequency::from_mhz(2000);
    // Optional override keyed by MHz. When present every grid point must appear.
    std::map<std::int64_t, double> voltage_table;

    bool on_grid(Frequency f) const;
    std::vector<Frequency> grid() const;
};

struct CoreSpec {
    std::string id;
    MemTechnology data_tech;
    MemTechnology instr_tech;
    CacheGeometry geometry;
    DvfsRange dvfs;
    Frequency operating_freq = Frequency::from_mhz(2000);
    int counter_states = 4;
    double base_cpi = 1.0;
    double miss_penalty_ns = 50.0;
    // Expected write cycles at the frequency cap. Unset means "not declared".
    std::optional<int> write_cycle_budget;

    Frequency freq_cap() const { return dvfs.max_freq; }
};

struct ArcSystem {
    std::vector<CoreSpec> cores;
    int cluster_count = 1;

    const CoreSpec& core(const std::string& id) const;
    std::optional<std::size_t> index_of(const std::string& id) const;
    std::vector<std::string> labels() const;
};

/// ceil(frequency * latency). A product that is an integer up to rounding
/// noise maps to itself; any positive latency costs at least one cycle.
int access_cycles(Frequency freq, double latency_ns);
int access_cycles(double freq_ghz, double latency_ns);

double voltage_for_frequency(const DvfsRange& dvfs, Frequency freq);

// Bits of monitor-counter state per block: ceil(log2(k)).
int counter_bits(int counter_states);
std::uint64_t monitor_counter_overhead_bytes(const CoreSpec& core);

struct ValidationReport {
    std::vector<std::string> violations;
    int read_cycles_at_cap = 0;
    int write_cycles_at_cap = 0;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate_core_spec(const CoreSpec& spec);

// Checks ArcSystem-level invariants (non-empty, unique labels, per-core
// validity) and that STT-RAM write latency strictly increases with retention.
ValidationReport validate_system(const ArcSystem& system);

/// Device table defaults: SRAM plus the four relaxed-retention STT-RAM rows,
/// and the 100 ms instruction-cache entry.
namespace defaults {
MemTechnology sram();
MemTechnology sttram_10us();
MemTechnology sttram_26_5us();
MemTechnology sttram_75us();
MemTechnology sttram_400us();
// No published row exists for 100 ms: reuses the 400 us row scaled by `scale`.
MemTechnology sttram_100ms_instr(double scale = 1.0);
std::vector<MemTechnology> technology_table();

CoreSpec core(std::string id, MemTechnology data, Frequency cap, int write_budget);
// Four asymmetric-retention cores with their frequency caps.
ArcSystem arc_system();
// Reference cores used for normalized reports.
CoreSpec sram_reference_core();
CoreSpec homogeneous_400us_core();
}  // namespace defaults

}  // namespace arc

#endif  // ARC_CONFIG_HPP
