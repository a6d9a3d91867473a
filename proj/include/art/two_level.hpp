#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "art/geometry.hpp"

// Two-layer collection index.  Each skeleton level with Z collections is
// covered by a first-layer tree over ceil((log2 Z)^(2c)) buckets; every bucket
// organizes a run of ceil(Z / buckets) consecutive collections in a second
// layer.  The representative of a bucket is the first cluster of its first
// collection, so every entry point is derivable from labels alone; only the
// shape needs to be carried around.

namespace art {

struct LayerShape {
  Count collections = 0;  // Z at this level
  Count buckets = 0;      // first-layer size, <= Z
  Count width = 0;        // collections per bucket
};

inline LayerShape layer_shape(Count z, std::uint32_t c) {
  if (z == 0) return {0, 0, 0};
  const double lg = std::log2(static_cast<double>(z));
  auto buckets = static_cast<Count>(std::ceil(std::pow(lg, 2.0 * c)));
  if (buckets < 1) buckets = 1;
  if (buckets > z) buckets = z;
  const Count width = (z + buckets - 1) / buckets;
  return {z, (z + width - 1) / width, width};
}

// Shapes for every level of one geometry.  Index 0 is unused (the root level
// has no collections).
struct IndexShapes {
  std::vector<LayerShape> by_level;

  static IndexShapes for_geometry(const TreeGeometry& g, std::uint32_t c) {
    IndexShapes shapes;
    shapes.by_level.resize(g.height());
    for (Level i = 1; i < g.height(); ++i)
      shapes.by_level[i] = layer_shape(g.collection_count(i), c);
    return shapes;
  }
};

namespace detail {

inline Count isqrt_ceil(Count w) {
  Count r = static_cast<Count>(std::ceil(std::sqrt(static_cast<double>(w))));
  while (r > 0 && (r - 1) * (r - 1) >= w) --r;
  while (r * r < w) ++r;
  return r;
}

inline void widest_bucket_walk(Fanout b, Count nodes, std::uint32_t c, Count& worst) {
  if (nodes < 2) return;
  const TreeGeometry g(b, nodes);
  for (Level i = 1; i < g.height(); ++i) {
    const LayerShape shape = layer_shape(g.collection_count(i), c);
    if (shape.width > worst) worst = shape.width;
    // Recurse on the distinct nested sizes: a full collection and the
    // partial tail, when present.
    const Count size = g.collection_size(i);
    const Count present = g.level_node_count(i);
    if (present >= size && size < nodes) widest_bucket_walk(b, size, c, worst);
    const Count tail = present % size;
    if (tail != 0 && tail < nodes && tail > 1) widest_bucket_walk(b, tail, c, worst);
  }
}

}  // namespace detail

// Budget accounting for the routing state one cluster must hold: its
// random-spine table (one stored target per level) plus the worst-case
// second-layer table of the single representative role a cluster can occupy.
// First-layer entry points and spine labels are derivable from label
// arithmetic and carry no stored pointers.
inline Count max_routing_entries(Fanout b, Count n_clusters, std::uint32_t c) {
  const TreeGeometry g(b, n_clusters);
  Count worst_width = 0;
  detail::widest_bucket_walk(b, n_clusters, c, worst_width);
  const Count second_layer = worst_width > 1 ? detail::isqrt_ceil(worst_width) : (worst_width ? 1 : 0);
  return g.height() + second_layer;
}

}  // namespace art
