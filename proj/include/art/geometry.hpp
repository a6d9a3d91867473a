#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "art/errors.hpp"

// Level-range-tree arithmetic.  A tree with fanout b (b a double-exponential
// power of two) holds one node at level 0 and b^(2^(i-1)) nodes at level
// i >= 1, labelled level by level with consecutive integers starting at 1.
// Level populations square from one level to the next, which gives the tree
// its O(log log N) height and makes every structural quantity (level starts,
// collection boundaries, nesting depth) closed-form in the label value.
//
// Everything in this header is a pure function of immutable inputs.

namespace art {

using Count = std::uint64_t;
using Label = std::uint64_t;
using Level = std::uint32_t;

// Fanout restricted to b = 2^(2^j): 2, 4, 16, 256, 65536, ...
// validate() is the only constructor.
class Fanout {
 public:
  static Fanout validate(std::uint64_t b) {
    if (b < 2 || !std::has_single_bit(b)) throw InvalidFanout(b);
    const auto e = static_cast<std::uint64_t>(std::countr_zero(b));
    if (!std::has_single_bit(e)) throw InvalidFanout(b);
    return Fanout(b);
  }

  std::uint64_t value() const noexcept { return b_; }

  bool operator==(const Fanout&) const = default;

 private:
  explicit Fanout(std::uint64_t b) noexcept : b_(b) {}
  std::uint64_t b_;
};

// Population of one level; saturated is set once the nominal population
// exceeds the node count (or the representable range), so bound computations
// stay total instead of erroring.
struct LevelPopulation {
  Count value = 0;
  bool saturated = false;
};

// Collection m (1-based) of a level: the group of same-level nodes sharing
// one parent.
struct CollectionRef {
  Level level = 0;
  Count index = 0;

  bool operator==(const CollectionRef&) const = default;
};

namespace detail {

// Marker for populations past 2^64.  True populations are powers of the form
// 2^(e * 2^k); the largest representable one is 2^32, so any square of a
// value above 2^32 has genuinely overflowed.
inline constexpr Count kPopOverflow = ~Count{0};

inline Count saturating_square(Count v) noexcept {
  if (v > (Count{1} << 32)) return kPopOverflow;
  const Count s = v * v;
  return s == 0 ? kPopOverflow : s;  // v == 2^32 wraps to 0
}

}  // namespace detail

// The arithmetic skeleton of a tree over n labelled entities.
class TreeGeometry {
 public:
  static constexpr Level kMaxLevels = 12;

  TreeGeometry(Fanout fanout, Count node_count)
      : fanout_(fanout), node_count_(node_count) {
    if (node_count_ == 0) throw Error("tree geometry needs at least one node");
    pop_[0] = 1;
    start_[0] = 1;
    Level i = 0;
    // Grow levels until the next start label passes the last node.  Start
    // labels stay exact until they leave the 64-bit range, which never
    // happens before the tree is covered.
    while (start_[i] <= node_count_ && start_[i] != ~Count{0} && i < kMaxLevels) {
      pop_[i + 1] = (i == 0) ? fanout_.value() : detail::saturating_square(pop_[i]);
      if (pop_[i] == detail::kPopOverflow || start_[i] > ~Count{0} - pop_[i]) {
        start_[i + 1] = ~Count{0};
      } else {
        start_[i + 1] = start_[i] + pop_[i];
      }
      ++i;
    }
    height_ = i;  // start_[height_] is the first label beyond the tree
  }

  Fanout fanout() const noexcept { return fanout_; }
  Count node_count() const noexcept { return node_count_; }

  // Smallest number of levels whose cumulative population covers node_count.
  Level height() const noexcept { return height_; }

  // Nominal population of level i: 1 for the root level, b^(2^(i-1)) above.
  LevelPopulation level_population(Level i) const noexcept {
    const Count v = nominal_population(i);
    return {v, v > node_count_ || v == detail::kPopOverflow};
  }

  // Number of nodes actually present at level i (the deepest level may be
  // partially filled).
  Count level_node_count(Level i) const {
    require_level(i);
    const Count nominal = pop_[i];
    const Count remaining = node_count_ - (start_[i] - 1);
    return remaining < nominal ? remaining : nominal;
  }

  // First label of level i.  start(height()) is the first label past the
  // tree; beyond that the recurrence is extended with saturation.
  Label level_start_label(Level i) const {
    if (i <= height_) return start_[i];
    Count pop = pop_[height_];
    Label s = start_[height_];
    for (Level k = height_; k < i; ++k) {
      if (pop == detail::kPopOverflow || s > ~Count{0} - pop) return ~Count{0};
      s += pop;
      pop = detail::saturating_square(pop);
    }
    return s;
  }

  // The unique level i with start(i) <= j < start(i+1), found by walking the
  // spine labels the same way a routing node would.
  Level level_of_label(Label j) const {
    if (j < 1 || j > node_count_)
      throw LabelOutOfRange("label " + std::to_string(j) + " not in [1, " +
                            std::to_string(node_count_) + "]");
    Level i = 0;
    while (i + 1 < height_ && j >= start_[i + 1]) ++i;
    return i;
  }

  // Number of members of each collection at level i >= 1.  Collections are
  // the child groups of level i-1 nodes, so the size equals the degree of
  // that level: b for i = 1, t(i-1) above.
  Count collection_size(Level i) const {
    if (i == 0) throw InvalidCollection("level 0 has no collections");
    require_level(i);
    return i == 1 ? fanout_.value() : pop_[i - 1];
  }

  // Collections actually present at level i (the last one may be partial).
  Count collection_count(Level i) const {
    const Count size = collection_size(i);
    return (level_node_count(i) + size - 1) / size;
  }

  CollectionRef collection_of(Level i, Label j) const {
    const Count size = collection_size(i);
    if (j < start_[i] || j >= start_[i] + level_node_count(i))
      throw LabelOutOfRange("label " + std::to_string(j) + " is not at level " +
                            std::to_string(i));
    return {i, (j - start_[i]) / size + 1};
  }

  // Inclusive first/last labels of a collection; the left inverse of
  // collection_of on every label in the returned range.
  std::pair<Label, Label> collection_bounds(CollectionRef ref) const {
    const Count size = collection_size(ref.level);
    if (ref.index < 1 || ref.index > collection_count(ref.level))
      throw InvalidCollection("collection " + std::to_string(ref.index) +
                              " does not exist at level " +
                              std::to_string(ref.level));
    const Label first = start_[ref.level] + (ref.index - 1) * size;
    const Label level_end = start_[ref.level] + level_node_count(ref.level) - 1;
    return {first, std::min(first + size - 1, level_end)};
  }

  // Nesting levels of the recursive collection organization: recurse on the
  // largest fully-populated collection until it holds at most b members.  A
  // partially filled tail collection re-nests with strictly smaller height
  // and never extends the chain of complete structures.
  Level max_nesting_depth() const {
    Level depth = 1;
    Count m = node_count_;
    while (true) {
      const TreeGeometry g(fanout_, m);
      if (g.height() <= 2) break;
      const Level deepest = g.height() - 1;
      Count c;
      if (g.level_node_count(deepest) >= g.collection_size(deepest)) {
        c = g.collection_size(deepest);
      } else if (deepest >= 2) {
        c = g.collection_size(deepest - 1);
      } else {
        break;
      }
      if (c <= fanout_.value()) break;
      m = c;
      ++depth;
    }
    return depth;
  }

 private:
  Count nominal_population(Level i) const noexcept {
    if (i == 0) return 1;
    if (i <= height_) return pop_[i];
    Count v = pop_[height_];
    for (Level k = height_; k < i && v != detail::kPopOverflow; ++k)
      v = detail::saturating_square(v);
    return v;
  }

  void require_level(Level i) const {
    if (i >= height_)
      throw LabelOutOfRange("level " + std::to_string(i) + " beyond height " +
                            std::to_string(height_));
  }

  Fanout fanout_;
  Count node_count_;
  std::array<Count, kMaxLevels + 2> pop_{};
  std::array<Label, kMaxLevels + 2> start_{};
  Level height_ = 0;
};

// Worst-case per-node second-layer routing size, N^(1/4) / (log2 N)^c.
inline double routing_overhead_estimate(Count n, std::uint32_t c) {
  if (n < 2) throw Error("routing overhead needs n >= 2");
  if (c < 1) throw Error("routing overhead needs c >= 1");
  const double dn = static_cast<double>(n);
  return std::pow(dn, 0.25) / std::pow(std::log2(dn), static_cast<double>(c));
}

// Asymptotic skeleton-hop budget (log_b log2 N)^2, used by the benchmark
// suite as a scaled ceiling.
inline double t1_hop_bound(Count n, Fanout b) {
  if (n < b.value()) throw Error("hop bound needs n >= b");
  const double l2 = std::log2(static_cast<double>(n));
  if (l2 <= 1.0) return 0.0;
  const double v = std::log(l2) / std::log(static_cast<double>(b.value()));
  return v * v;
}

}  // namespace art
