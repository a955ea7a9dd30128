#include "arc/trace.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string_view>

namespace arc {

std::uint64_t Trace::instructions() const {
    std::uint64_t n = 0;
    for (const auto& e : events) {
        n += e.gap + 1;
    }
    return n;
}

TraceParseError::TraceParseError(std::size_t line, const std::string& what, const std::string& source)
    : std::runtime_error(source.empty() ? "line " + std::to_string(line) + ": " + what
                                        : source + ":" + std::to_string(line) + ": " + what),
      line_(line),
      reason_(what) {}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string_view next_token(std::string_view& s) {
    s = trim(s);
    std::size_t n = 0;
    while (n < s.size() && s[n] != ' ' && s[n] != '\t') ++n;
    auto tok = s.substr(0, n);
    s.remove_prefix(n);
    return tok;
}

TraceEvent parse_event(std::string_view line, std::size_t lineno) {
    TraceEvent e;
    auto rest = line;
    const auto gap_tok = next_token(rest);
    const auto op_tok = next_token(rest);
    const auto addr_tok = next_token(rest);
    if (gap_tok.empty() || op_tok.empty() || addr_tok.empty() || !trim(rest).empty()) {
        throw TraceParseError(lineno, "expected '<gap> <R|W> <0xaddr>'");
    }
    auto [p, ec] = std::from_chars(gap_tok.data(), gap_tok.data() + gap_tok.size(), e.gap);
    if (ec != std::errc{} || p != gap_tok.data() + gap_tok.size()) {
        throw TraceParseError(lineno, "bad instruction gap '" + std::string(gap_tok) + "'");
    }
    if (op_tok == "R") {
        e.op = AccessOp::Read;
    } else if (op_tok == "W") {
        e.op = AccessOp::Write;
    } else {
        throw TraceParseError(lineno, "bad operation '" + std::string(op_tok) + "' (want R or W)");
    }
    if (addr_tok.size() < 3 || addr_tok[0] != '0' || (addr_tok[1] != 'x' && addr_tok[1] != 'X')) {
        throw TraceParseError(lineno, "address '" + std::string(addr_tok) + "' is not 0x-prefixed hex");
    }
    const auto hex = addr_tok.substr(2);
    auto [q, ec2] = std::from_chars(hex.data(), hex.data() + hex.size(), e.addr, 16);
    if (ec2 != std::errc{} || q != hex.data() + hex.size()) {
        throw TraceParseError(lineno, "address '" + std::string(addr_tok) + "' is not valid hex");
    }
    return e;
}

}  // namespace

Trace parse_trace(std::istream& in) {
    Trace t;
    std::string line;
    std::size_t lineno = 0;
    bool in_header = true;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = trim(line);
        if (body.empty()) {
            continue;
        }
        if (body.front() == '#') {
            if (in_header) {
                auto text = body.substr(1);
                if (!text.empty() && text.front() == ' ') text.remove_prefix(1);
                t.header.emplace_back(text);
            }
            continue;
        }
        in_header = false;
        t.events.push_back(parse_event(body, lineno));
    }
    return t;
}

Trace parse_trace_string(const std::string& text) {
    std::istringstream in(text);
    return parse_trace(in);
}

Trace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open trace '" + path + "'");
    }
    try {
        return parse_trace(in);
    } catch (const TraceParseError& e) {
        throw TraceParseError(e.line(), e.reason(), path);
    }
}

void write_trace(std::ostream& out, const Trace& trace) {
    for (const auto& h : trace.header) {
        out << "# " << h << '\n';
    }
    char buf[64];
    for (const auto& e : trace.events) {
        auto* p = std::to_chars(buf, buf + sizeof buf, e.gap).ptr;
        *p++ = ' ';
        *p++ = e.op == AccessOp::Read ? 'R' : 'W';
        *p++ = ' ';
        *p++ = '0';
        *p++ = 'x';
        p = std::to_chars(p, buf + sizeof buf, e.addr, 16).ptr;
        *p++ = '\n';
        out.write(buf, p - buf);
    }
}

std::string serialize_trace(const Trace& trace) {
    std::ostringstream out;
    write_trace(out, trace);
    return out.str();
}

void save_trace(const std::string& path, const Trace& trace) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write trace '" + path + "'");
    }
    write_trace(out, trace);
}

double ReuseGaps::mean() const {
    if (kind == Kind::Uniform) {
        return (static_cast<double>(uniform_min) + static_cast<double>(uniform_max)) / 2.0;
    }
    return short_weight * static_cast<double>(short_mean) + (1.0 - short_weight) * static_cast<double>(long_mean);
}

void SynthParams::validate() const {
    if (working_set_blocks < 1) throw std::invalid_argument("working set needs at least one block");
    if (!(write_fraction >= 0.0 && write_fraction <= 1.0)) throw std::invalid_argument("write fraction out of [0,1]");
    if (!(memory_op_fraction > 0.0 && memory_op_fraction <= 1.0))
        throw std::invalid_argument("memory-op fraction out of (0,1]");
    if (!(streaming_fraction >= 0.0 && streaming_fraction <= 1.0))
        throw std::invalid_argument("streaming fraction out of [0,1]");
    if (line_size == 0 || (line_size & (line_size - 1)) != 0) throw std::invalid_argument("line size must be a power of two");
    if (reuse.kind == ReuseGaps::Kind::Uniform) {
        if (reuse.uniform_min < 1 || reuse.uniform_min > reuse.uniform_max)
            throw std::invalid_argument("uniform reuse gaps need 1 <= min <= max");
    } else {
        if (reuse.short_mean < 1 || reuse.long_mean < 1) throw std::invalid_argument("reuse gap means must be >= 1");
        if (!(reuse.short_weight >= 0.0 && reuse.short_weight <= 1.0))
            throw std::invalid_argument("short-gap weight out of [0,1]");
        if (!(reuse.spread >= 0.0 && reuse.spread < 1.0)) throw std::invalid_argument("gap spread out of [0,1)");
    }
}

std::string SynthParams::describe() const {
    std::ostringstream s;
    s << "synthetic working_set=" << working_set_blocks;
    if (reuse.kind == ReuseGaps::Kind::Uniform) {
        s << " reuse=uniform:" << reuse.uniform_min << ':' << reuse.uniform_max;
    } else {
        s << " reuse=bimodal:" << reuse.short_mean << ':' << reuse.long_mean << ':' << reuse.short_weight << ':'
          << reuse.spread;
    }
    s << " write_fraction=" << write_fraction << " mem_fraction=" << memory_op_fraction
      << " instructions=" << total_instructions << " hot=" << hot_blocks << " streaming=" << streaming_fraction
      << " seed=" << seed;
    return s.str();
}

Trace gen_synthetic(const SynthParams& params) {
    params.validate();
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto sample_gap = [&]() -> std::uint64_t {
        const auto& r = params.reuse;
        if (r.kind == ReuseGaps::Kind::Uniform) {
            return std::uniform_int_distribution<std::uint64_t>(r.uniform_min, r.uniform_max)(rng);
        }
        const bool is_short = unit(rng) < r.short_weight;
        const double mean = static_cast<double>(is_short ? r.short_mean : r.long_mean);
        const auto lo = static_cast<std::uint64_t>(std::max(1.0, mean * (1.0 - r.spread)));
        const auto hi = static_cast<std::uint64_t>(std::max(1.0, mean * (1.0 + r.spread)));
        return std::uniform_int_distribution<std::uint64_t>(lo, std::max(lo, hi))(rng);
    };

    using Slot = std::pair<std::uint64_t, std::uint64_t>;  // (instruction index, block)
    std::priority_queue<Slot, std::vector<Slot>, std::greater<>> schedule;
    for (std::uint64_t b = 0; b < params.working_set_blocks; ++b) {
        const auto first = sample_gap();
        schedule.emplace(std::uniform_int_distribution<std::uint64_t>(0, first - 1)(rng), b);
    }

    const double ws_rate = static_cast<double>(params.working_set_blocks) / std::max(1.0, params.reuse.mean());
    double fill_prob = 0.0;
    if (ws_rate < params.memory_op_fraction) {
        fill_prob = (params.memory_op_fraction - ws_rate) / (1.0 - std::min(ws_rate, 0.999));
        fill_prob = std::clamp(fill_prob, 0.0, 1.0);
    }

    const std::uint64_t line = params.line_size;
    const std::uint64_t hot_base = params.base_addr + params.working_set_blocks * line;
    const std::uint64_t stream_base = params.base_addr + (std::uint64_t{1} << 36);
    std::uint64_t stream_next = 0;

    Trace t;
    t.header.push_back(params.describe());
    std::uint64_t gap = 0;
    auto emit = [&](std::uint64_t addr) {
        const auto op = unit(rng) < params.write_fraction ? AccessOp::Write : AccessOp::Read;
        t.events.push_back({gap, op, addr});
        gap = 0;
    };

    for (std::uint64_t i = 0; i < params.total_instructions; ++i) {
        if (!schedule.empty() && schedule.top().first <= i) {
            const auto block = schedule.top().second;
            schedule.pop();
            emit(params.base_addr + block * line);
            schedule.emplace(i + std::max<std::uint64_t>(1, sample_gap()), block);
            continue;
        }
        if (fill_prob > 0.0 && unit(rng) < fill_prob) {
            if (params.streaming_fraction > 0.0 && unit(rng) < params.streaming_fraction) {
                emit(stream_base + (stream_next++) * line);
            } else if (params.hot_blocks > 0) {
                const auto h = std::uniform_int_distribution<std::uint64_t>(0, params.hot_blocks - 1)(rng);
                emit(hot_base + h * line);
            } else {
                ++gap;
            }
            continue;
        }
        ++gap;
    }
    return t;
}

TraceSummary trace_stats(const Trace& trace, std::uint64_t line_size) {
    TraceSummary s;
    std::set<std::uint64_t> blocks;
    for (const auto& e : trace.events) {
        ++s.events;
        ++(e.op == AccessOp::Read ? s.reads : s.writes);
        s.instructions += e.gap + 1;
        blocks.insert(e.addr / line_size);
        int bucket = 0;
        for (auto g = e.gap; g > 0; g >>= 1) ++bucket;
        ++s.gap_histogram[bucket];
    }
    s.unique_blocks = blocks.size();
    return s;
}

std::span<const TraceEvent> trace_prefix(std::span<const TraceEvent> events, std::uint64_t instructions) {
    std::uint64_t n = 0;
    std::size_t count = 0;
    while (count < events.size() && n < instructions) {
        n += events[count].gap + 1;
        ++count;
    }
    return events.first(count);
}

}  // namespace arc
