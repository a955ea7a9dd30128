#ifndef ARC_CACHE_HPP
#define ARC_CACHE_HPP

#include <cstdint>
#include <queue>
#include <vector>

#include "arc/config.hpp"

namespace arc {

enum class AccessOp { Read, Write };
enum class AccessKind { Hit, Miss };
enum class MissClass { None, Expiration, Other };

struct CacheStats {
    std::uint64_t read_hits = 0;
    std::uint64_t write_hits = 0;
    std::uint64_t read_misses = 0;
    std::uint64_t write_misses = 0;
    std::uint64_t expiration_misses = 0;
    std::uint64_t early_writebacks = 0;  // dirty blocks flushed by the monitor counter
    std::uint64_t writebacks = 0;        // dirty victims on replacement
    std::uint64_t evictions = 0;
    // Memory-controller side.
    std::uint64_t mem_busy_read_cycles = 0;
    std::uint64_t mem_busy_write_cycles = 0;
    std::uint64_t mem_idle_cycles = 0;  // derived: total cycles - busy, filled in by the engine
    std::uint64_t mem_read_hits = 0;    // fills served by memory
    std::uint64_t bus_read_requests = 0;
    std::uint64_t bus_write_requests = 0;

    std::uint64_t hits() const { return read_hits + write_hits; }
    std::uint64_t misses() const { return read_misses + write_misses; }
    std::uint64_t accesses() const { return hits() + misses(); }
    std::uint64_t read_accesses() const { return read_hits + read_misses; }

    // Array operations charged for dynamic energy. Every read request reads
    // the array once; fills, write hits and both kinds of write-back count as
    // array writes.
    std::uint64_t array_reads() const { return read_accesses(); }
    std::uint64_t array_writes() const { return write_hits + misses() + writebacks + early_writebacks; }

    CacheStats operator-(const CacheStats& rhs) const;
    bool operator==(const CacheStats&) const = default;
};

// Cycle costs of one cache at one operating frequency.
struct CacheTiming {
    int read_cycles = 1;
    int write_cycles = 1;
    std::uint64_t miss_penalty_cycles = 0;
    std::uint64_t writeback_cycles = 0;

    static CacheTiming for_core(const CoreSpec& core, Frequency freq);
};

struct AccessOutcome {
    AccessKind kind = AccessKind::Hit;
    MissClass miss_class = MissClass::None;
    std::uint64_t stall_cycles = 0;
    bool writeback_issued = false;
};

// A block removed by its monitor counter.
struct ExpiredBlock {
    std::uint64_t set = 0;
    std::uint32_t way = 0;
    std::uint64_t block_addr = 0;
    SimTime fill_time{};
    SimTime expired_at{};  // fill_time + (k-1) * retention / k
    bool was_dirty = false;
};

struct StatsSnapshot {
    CacheGeometry geometry;
    CacheStats stats;
};

/// Plain set-associative LRU tag store with no retention limit. The primary
/// cache uses it for storage; on its own it is the infinite-retention shadow.
class TagArray {
public:
    struct Line {
        std::uint64_t block = 0;
        bool valid = false;
        bool dirty = false;
        std::uint64_t lru_stamp = 0;
        SimTime fill_time{};
        std::uint64_t generation = 0;
    };

    explicit TagArray(const CacheGeometry& geometry);

    std::uint64_t set_of(std::uint64_t block) const { return block % sets_; }
    std::uint32_t ways() const { return ways_; }
    std::uint64_t sets() const { return sets_; }

    // Way holding `block`, or -1.
    int find(std::uint64_t block) const;
    // Invalid way with the lowest index, else the least recently used way.
    std::uint32_t victim(std::uint64_t set) const;
    void touch(std::uint64_t set, std::uint32_t way) { line(set, way).lru_stamp = ++clock_; }

    Line& line(std::uint64_t set, std::uint32_t way) { return lines_[set * ways_ + way]; }
    const Line& line(std::uint64_t set, std::uint32_t way) const { return lines_[set * ways_ + way]; }

    // Shadow-style access: LRU update on hit, fill on miss. Returns hit.
    bool access(std::uint64_t block, AccessOp op);

private:
    std::uint64_t sets_;
    std::uint32_t ways_;
    std::uint64_t clock_ = 0;
    std::vector<Line> lines_;
};

/// L1 data cache with relaxed retention. Blocks carry a k-state monitor
/// counter that ticks every retention/k from the block's fill (or last
/// write); on reaching state k-1 the block is written back if dirty and
/// invalidated. Misses are classed as expiration misses iff an
/// infinite-retention shadow of the same geometry hits the same access.
class CacheState {
public:
    CacheState(const CacheGeometry& geometry, const MemTechnology& tech, int counter_states,
               const CacheTiming& timing);

    /// Applies every monitor-counter expiry up to `now`. Throws
    /// std::invalid_argument if `now` precedes an earlier call.
    std::vector<ExpiredBlock> advance_retention(SimTime now);

    /// Caller must have advanced retention to `now` first.
    AccessOutcome access(std::uint64_t addr, AccessOp op, SimTime now);

    const CacheStats& stats() const { return stats_; }
    StatsSnapshot snapshot() const { return {geometry_, stats_}; }
    CacheStats delta_since(const StatsSnapshot& start) const;

    // Current monitor-counter state of a way; 0 for invalid ways.
    int counter_state(std::uint64_t set, std::uint32_t way, SimTime now) const;
    const TagArray& lines() const { return primary_; }
    const TagArray& shadow() const { return shadow_; }
    const CacheGeometry& geometry() const { return geometry_; }
    const MemTechnology& tech() const { return tech_; }
    int counter_states() const { return counter_states_; }
    // Age at which a block is invalidated; kNever for infinite retention.
    SimTime block_lifetime() const { return lifetime_; }
    SimTime last_advance() const { return last_advance_; }

private:
    struct Expiry {
        SimTime at;
        std::uint64_t set;
        std::uint32_t way;
        std::uint64_t generation;
        bool operator>(const Expiry& o) const {
            if (at != o.at) return at > o.at;
            if (set != o.set) return set > o.set;
            return way > o.way;
        }
    };

    void schedule_expiry(std::uint64_t set, std::uint32_t way);
    void compact_heap();

    CacheGeometry geometry_;
    MemTechnology tech_;
    int counter_states_;
    CacheTiming timing_;
    SimTime tick_{};
    SimTime lifetime_ = kNever;
    TagArray primary_;
    TagArray shadow_;
    CacheStats stats_;
    SimTime last_advance_{};
    std::priority_queue<Expiry, std::vector<Expiry>, std::greater<>> expiries_;
};

}  // namespace arc

#endif  // ARC_CACHE_HPP
