#ifndef ARC_WORKLOADS_HPP
#define ARC_WORKLOADS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "arc/trace.hpp"

namespace arc {

struct Workload {
    std::string name;
    SynthParams params;
};

/// Seeded synthetic applications cycling through three families (short-lived
/// hot sets, mid-lived large sets, streaming). Reuse gaps alternate between
/// uniform and bimodal every three apps.
std::vector<Workload> synthetic_suite(std::size_t count, std::uint64_t seed, std::uint64_t instructions,
                                      const std::string& prefix = "app");

}  // namespace arc

#endif  // ARC_WORKLOADS_HPP
