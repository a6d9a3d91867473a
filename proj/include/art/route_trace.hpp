#pragma once

#include <cstdint>
#include <vector>

// Message accounting.  A skeleton hop is a message between two cluster-peers,
// an intra-cluster hop a message between peers inside one cluster.  Only
// messages count; local computation is free.

namespace art {

enum class HopKind : std::uint8_t { skeleton, intra_cluster };

struct Hop {
  HopKind kind;
  std::uint64_t from;
  std::uint64_t to;
};

struct RouteTrace {
  std::uint32_t skeleton_hops = 0;
  std::uint32_t intra_hops = 0;
  std::uint32_t retries = 0;
  bool success = true;
  bool record = false;          // keep the hop list (costs allocations)
  std::vector<Hop> hops;

  void add(HopKind kind, std::uint64_t from, std::uint64_t to) {
    if (kind == HopKind::skeleton)
      ++skeleton_hops;
    else
      ++intra_hops;
    if (record) hops.push_back({kind, from, to});
  }

  void add_intra(std::uint64_t cluster, std::uint32_t count) {
    intra_hops += count;
    if (record)
      for (std::uint32_t i = 0; i < count; ++i)
        hops.push_back({HopKind::intra_cluster, cluster, cluster});
  }

  std::uint64_t total_hops() const noexcept {
    return static_cast<std::uint64_t>(skeleton_hops) + intra_hops;
  }
};

}  // namespace art
