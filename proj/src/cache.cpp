#include "arc/cache.hpp"

#include <stdexcept>

namespace arc {

CacheStats CacheStats::operator-(const CacheStats& rhs) const {
    CacheStats d;
    d.read_hits = read_hits - rhs.read_hits;
    d.write_hits = write_hits - rhs.write_hits;
    d.read_misses = read_misses - rhs.read_misses;
    d.write_misses = write_misses - rhs.write_misses;
    d.expiration_misses = expiration_misses - rhs.expiration_misses;
    d.early_writebacks = early_writebacks - rhs.early_writebacks;
    d.writebacks = writebacks - rhs.writebacks;
    d.evictions = evictions - rhs.evictions;
    d.mem_busy_read_cycles = mem_busy_read_cycles - rhs.mem_busy_read_cycles;
    d.mem_busy_write_cycles = mem_busy_write_cycles - rhs.mem_busy_write_cycles;
    d.mem_idle_cycles = mem_idle_cycles - rhs.mem_idle_cycles;
    d.mem_read_hits = mem_read_hits - rhs.mem_read_hits;
    d.bus_read_requests = bus_read_requests - rhs.bus_read_requests;
    d.bus_write_requests = bus_write_requests - rhs.bus_write_requests;
    return d;
}

CacheTiming CacheTiming::for_core(const CoreSpec& core, Frequency freq) {
    CacheTiming t;
    t.read_cycles = access_cycles(freq, core.data_tech.hit_latency_ns);
    t.write_cycles = access_cycles(freq, core.data_tech.write_latency_ns);
    t.miss_penalty_cycles = static_cast<std::uint64_t>(access_cycles(freq, core.miss_penalty_ns));
    t.writeback_cycles = t.miss_penalty_cycles;
    return t;
}

TagArray::TagArray(const CacheGeometry& geometry)
    : sets_(geometry.sets()), ways_(static_cast<std::uint32_t>(geometry.associativity)) {
    if (sets_ == 0 || ways_ == 0) {
        throw std::invalid_argument("cache geometry yields no blocks");
    }
    lines_.resize(sets_ * ways_);
}

int TagArray::find(std::uint64_t block) const {
    const auto set = set_of(block);
    for (std::uint32_t w = 0; w < ways_; ++w) {
        const auto& l = line(set, w);
        if (l.valid && l.block == block) {
            return static_cast<int>(w);
        }
    }
    return -1;
}

std::uint32_t TagArray::victim(std::uint64_t set) const {
    std::uint32_t best = 0;
    for (std::uint32_t w = 0; w < ways_; ++w) {
        const auto& l = line(set, w);
        if (!l.valid) {
            return w;
        }
        if (l.lru_stamp < line(set, best).lru_stamp) {
            best = w;
        }
    }
    return best;
}

bool TagArray::access(std::uint64_t block, AccessOp op) {
    const auto set = set_of(block);
    const int way = find(block);
    if (way >= 0) {
        touch(set, static_cast<std::uint32_t>(way));
        if (op == AccessOp::Write) {
            line(set, static_cast<std::uint32_t>(way)).dirty = true;
        }
        return true;
    }
    const auto v = victim(set);
    auto& l = line(set, v);
    l.block = block;
    l.valid = true;
    l.dirty = op == AccessOp::Write;
    touch(set, v);
    return false;
}

CacheState::CacheState(const CacheGeometry& geometry, const MemTechnology& tech, int counter_states,
                       const CacheTiming& timing)
    : geometry_(geometry),
      tech_(tech),
      counter_states_(counter_states),
      timing_(timing),
      primary_(geometry),
      shadow_(geometry) {
    if (counter_states < 2) {
        throw std::invalid_argument("monitor counter needs at least 2 states");
    }
    if (!tech.infinite_retention()) {
        tick_ = tech.retention / counter_states;
        if (tick_.count() <= 0) {
            throw std::invalid_argument("retention time too short for the counter resolution");
        }
        lifetime_ = tick_ * (counter_states - 1);
    }
}

void CacheState::schedule_expiry(std::uint64_t set, std::uint32_t way) {
    if (lifetime_ == kNever) {
        return;
    }
    const auto& l = primary_.line(set, way);
    expiries_.push({l.fill_time + lifetime_, set, way, l.generation});
    if (expiries_.size() > 4 * geometry_.blocks() + 64) {
        compact_heap();
    }
}

void CacheState::compact_heap() {
    std::vector<Expiry> live;
    live.reserve(geometry_.blocks());
    while (!expiries_.empty()) {
        const auto e = expiries_.top();
        expiries_.pop();
        const auto& l = primary_.line(e.set, e.way);
        if (l.valid && l.generation == e.generation) {
            live.push_back(e);
        }
    }
    expiries_ = decltype(expiries_)(std::greater<>{}, std::move(live));
}

std::vector<ExpiredBlock> CacheState::advance_retention(SimTime now) {
    if (now < last_advance_) {
        throw std::invalid_argument("advance_retention: time moved backwards");
    }
    last_advance_ = now;
    std::vector<ExpiredBlock> out;
    while (!expiries_.empty() && expiries_.top().at <= now) {
        const auto e = expiries_.top();
        expiries_.pop();
        auto& l = primary_.line(e.set, e.way);
        if (!l.valid || l.generation != e.generation) {
            continue;  // refreshed by a write or replaced since scheduling
        }
        ExpiredBlock x{e.set, e.way, l.block, l.fill_time, e.at, l.dirty};
        if (l.dirty) {
            ++stats_.early_writebacks;
            ++stats_.bus_write_requests;
            stats_.mem_busy_write_cycles += timing_.writeback_cycles;
        }
        l.valid = false;
        l.dirty = false;
        ++l.generation;
        out.push_back(x);
    }
    return out;
}

AccessOutcome CacheState::access(std::uint64_t addr, AccessOp op, SimTime now) {
    if (now < last_advance_) {
        throw std::invalid_argument("cache access before the last retention update");
    }
    const std::uint64_t block = addr / geometry_.line_size;
    const std::uint64_t set = primary_.set_of(block);
    const bool shadow_hit = shadow_.access(block, op);
    const bool is_write = op == AccessOp::Write;
    const auto access_cycles = static_cast<std::uint64_t>(is_write ? timing_.write_cycles : timing_.read_cycles);

    AccessOutcome out;
    const int found = primary_.find(block);
    if (found >= 0) {
        const auto way = static_cast<std::uint32_t>(found);
        primary_.touch(set, way);
        if (is_write) {
            auto& l = primary_.line(set, way);
            l.dirty = true;
            l.fill_time = now;  // a write fully re-magnetizes the cell
            ++l.generation;
            schedule_expiry(set, way);
            ++stats_.write_hits;
        } else {
            ++stats_.read_hits;
        }
        out.kind = AccessKind::Hit;
        out.stall_cycles = access_cycles;
        return out;
    }

    out.kind = AccessKind::Miss;
    out.miss_class = shadow_hit ? MissClass::Expiration : MissClass::Other;
    if (shadow_hit) {
        ++stats_.expiration_misses;
    }
    ++(is_write ? stats_.write_misses : stats_.read_misses);

    const auto way = primary_.victim(set);
    auto& l = primary_.line(set, way);
    if (l.valid) {
        ++stats_.evictions;
        if (l.dirty) {
            ++stats_.writebacks;
            ++stats_.bus_write_requests;
            stats_.mem_busy_write_cycles += timing_.writeback_cycles;
            out.writeback_issued = true;
        }
    }
    l.block = block;
    l.valid = true;
    l.dirty = is_write;
    l.fill_time = now;
    ++l.generation;
    primary_.touch(set, way);
    schedule_expiry(set, way);

    ++stats_.mem_read_hits;
    ++stats_.bus_read_requests;
    stats_.mem_busy_read_cycles += timing_.miss_penalty_cycles;
    out.stall_cycles = access_cycles + timing_.miss_penalty_cycles;
    return out;
}

CacheStats CacheState::delta_since(const StatsSnapshot& start) const {
    const auto& g = start.geometry;
    if (g.capacity_bytes != geometry_.capacity_bytes || g.line_size != geometry_.line_size ||
        g.associativity != geometry_.associativity) {
        throw std::invalid_argument("snapshot was taken from a cache of different geometry");
    }
    const auto& s = start.stats;
    const auto& c = stats_;
    if (s.read_hits > c.read_hits || s.write_hits > c.write_hits || s.read_misses > c.read_misses ||
        s.write_misses > c.write_misses || s.expiration_misses > c.expiration_misses ||
        s.early_writebacks > c.early_writebacks || s.writebacks > c.writebacks || s.evictions > c.evictions ||
        s.mem_busy_read_cycles > c.mem_busy_read_cycles || s.mem_busy_write_cycles > c.mem_busy_write_cycles ||
        s.mem_read_hits > c.mem_read_hits || s.bus_read_requests > c.bus_read_requests ||
        s.bus_write_requests > c.bus_write_requests) {
        throw std::invalid_argument("snapshot is ahead of the cache it is compared with");
    }
    CacheStats d = c - s;
    d.mem_idle_cycles = 0;  // derived counter; the engine recomputes it for the window
    return d;
}

int CacheState::counter_state(std::uint64_t set, std::uint32_t way, SimTime now) const {
    const auto& l = primary_.line(set, way);
    if (!l.valid || lifetime_ == kNever) {
        return 0;
    }
    const auto age = now - l.fill_time;
    const auto state = age / tick_;
    return static_cast<int>(std::min<std::int64_t>(state, counter_states_ - 1));
}

}  // namespace arc
