#include "arc/workloads.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace arc {

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

struct Family {
    const char* tag;
    double gap_lo, gap_hi;
    double ws_lo, ws_hi;
    double stream_lo, stream_hi;
    double short_gap;  // bimodal short mode, as a fraction of the long one (<1) or in instructions
};

// Short-lived blocks, mid-lived large working sets, and streaming code whose
// few reused blocks outlive every retention time.
constexpr std::array<Family, 3> kFamilies{{
    {"hot", 600.0, 2'500.0, 32.0, 96.0, 0.0, 0.01, 0.125},
    {"mid", 11'000.0, 25'000.0, 250.0, 480.0, 0.0, 0.02, 0.125},
    {"stream", 150'000.0, 400'000.0, 32.0, 128.0, 0.05, 0.12, 1'500.0},
}};

}  // namespace

std::vector<Workload> synthetic_suite(std::size_t count, std::uint64_t seed, std::uint64_t instructions,
                                      const std::string& prefix) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Workload> suite;
    suite.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& fam = kFamilies[i % kFamilies.size()];
        SynthParams p;
        p.total_instructions = instructions;
        p.seed = rng();
        const double gap = log_uniform(rng, fam.gap_lo, fam.gap_hi);
        if ((i / kFamilies.size()) % 2 == 0) {
            p.reuse.kind = ReuseGaps::Kind::Uniform;
            p.reuse.uniform_min = static_cast<std::uint64_t>(gap * 0.7);
            p.reuse.uniform_max = static_cast<std::uint64_t>(gap * 1.3);
        } else {
            p.reuse.kind = ReuseGaps::Kind::Bimodal;
            p.reuse.long_mean = static_cast<std::uint64_t>(gap);
            p.reuse.short_mean = static_cast<std::uint64_t>(fam.short_gap < 1.0 ? gap * fam.short_gap : fam.short_gap);
            p.reuse.short_weight = 0.2 + 0.3 * unit(rng);
        }
        p.memory_op_fraction = 0.2 + 0.2 * unit(rng);
        const double ws_cap = 0.25 * p.memory_op_fraction * p.reuse.mean();
        const double ws_hi = std::clamp(ws_cap, fam.ws_lo, fam.ws_hi);
        p.working_set_blocks = static_cast<std::uint64_t>(log_uniform(rng, std::min(fam.ws_lo, ws_hi), ws_hi));
        p.write_fraction = 0.05 + 0.3 * unit(rng);
        p.hot_blocks = 8 + static_cast<std::uint64_t>(24 * unit(rng));
        p.streaming_fraction = fam.stream_lo + (fam.stream_hi - fam.stream_lo) * unit(rng);
        suite.push_back({prefix + std::to_string(i) + "-" + fam.tag, p});
    }
    return suite;
}

}  // namespace arc
