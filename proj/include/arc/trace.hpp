#ifndef ARC_TRACE_HPP
#define ARC_TRACE_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arc/cache.hpp"

namespace arc {

struct TraceEvent {
    std::uint64_t gap = 0;  // non-memory instructions before this access
    AccessOp op = AccessOp::Read;
    std::uint64_t addr = 0;

    bool operator==(const TraceEvent&) const = default;
};

struct Trace {
    std::vector<std::string> header;  // leading comment lines, without the '#'
    std::vector<TraceEvent> events;

    std::uint64_t instructions() const;
    bool operator==(const Trace&) const = default;
};

class TraceParseError : public std::runtime_error {
public:
    TraceParseError(std::size_t line, const std::string& what, const std::string& source = "");
    std::size_t line() const { return line_; }
    const std::string& reason() const { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

// Format: one `<gap> <R|W> 0x<hex>` per line; `#` starts a comment line.
Trace parse_trace(std::istream& in);
Trace parse_trace_string(const std::string& text);
Trace load_trace(const std::string& path);
void write_trace(std::ostream& out, const Trace& trace);
std::string serialize_trace(const Trace& trace);
void save_trace(const std::string& path, const Trace& trace);

// Reuse-gap distribution, in instructions between two references to the same
// working-set block.
struct ReuseGaps {
    enum class Kind { Uniform, Bimodal };
    Kind kind = Kind::Bimodal;
    // Uniform: [min, max].
    std::uint64_t uniform_min = 1000;
    std::uint64_t uniform_max = 20000;
    // Bimodal: each mode is uniform on mean * [1 - spread, 1 + spread].
    std::uint64_t short_mean = 2000;
    std::uint64_t long_mean = 60000;
    double short_weight = 0.2;
    double spread = 0.25;

    double mean() const;
};

struct SynthParams {
    std::uint64_t working_set_blocks = 256;
    ReuseGaps reuse;
    double write_fraction = 0.3;
    double memory_op_fraction = 0.3;
    std::uint64_t total_instructions = 1'000'000;
    std::uint64_t seed = 1;
    std::uint64_t line_size = 64;
    // Small, frequently touched set that soaks up memory operations beyond
    // the working-set schedule.
    std::uint64_t hot_blocks = 16;
    // Share of filler operations that stream through never-reused lines.
    double streaming_fraction = 0.0;
    std::uint64_t base_addr = 0x10000000;

    void validate() const;
    std::string describe() const;
};

Trace gen_synthetic(const SynthParams& params);

struct TraceSummary {
    std::uint64_t events = 0;
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;
    std::uint64_t instructions = 0;
    std::uint64_t unique_blocks = 0;
    // Gap histogram in power-of-two buckets: key b counts gaps in [2^(b-1), 2^b), key 0 counts gap 0.
    std::map<int, std::uint64_t> gap_histogram;

    double write_fraction() const { return events ? static_cast<double>(writes) / static_cast<double>(events) : 0.0; }
};

TraceSummary trace_stats(const Trace& trace, std::uint64_t line_size = 64);

// First `instructions` instructions of a trace, and the rest. An access is an
// instruction; the split never breaks an event.
std::span<const TraceEvent> trace_prefix(std::span<const TraceEvent> events, std::uint64_t instructions);

}  // namespace arc

#endif  // ARC_TRACE_HPP
