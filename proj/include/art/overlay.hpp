#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "art/errors.hpp"
#include "art/geometry.hpp"
#include "art/inner_overlay.hpp"
#include "art/keyspace.hpp"
#include "art/rng.hpp"
#include "art/route_trace.hpp"
#include "art/two_level.hpp"

// The overlay skeleton: a tree of cluster-peers whose shape never changes
// while peers churn.  Each cluster holds a random-spine table (RSI) with one
// stored target per skeleton level; collection indexes are arithmetic views
// re-rooted on label sub-ranges, so lookups descend by recomputing geometry
// instead of consulting stored tables.
//
// Hop accounting for a lookup, per nesting step on the current sub-tree:
//   - one skeleton hop through RSI[level(target)] at the top tree (the random
//     spine spreads entry load; nested views enter through their root, which
//     is where the previous step landed);
//   - one skeleton hop to the bucket representative when the level's
//     collection index has two layers;
//   - one skeleton hop to the collection representative (the collection's
//     first cluster), which roots the next nesting level;
//   - targets at level 1 of a sub-tree are direct children of its root and
//     cost a single hop.
// Dead clusters on the path are skipped by scanning to the next live cluster
// of the same structural group; every skip counts as a retry.  Dead RSI
// targets are repaired in place by re-sampling among live clusters of the
// level.

namespace art {

struct RsiEntry {
  std::uint32_t target = 0;
  std::uint32_t draw = 0;  // draw counter; bumped by each re-sample
};

struct BuildConfig {
  Fanout fanout = Fanout::validate(4);
  std::uint32_t c = 1;
  InnerKind inner = InnerKind::finger_ring;
  std::uint64_t seed = 1;
};

struct SearchResult {
  PeerId peer = 0;
  ClusterId cluster = 0;
  std::size_t peer_index = 0;
  bool key_present = false;
  RouteTrace trace;
};

struct RangeResult {
  std::vector<Key> keys;
  RouteTrace trace;
};

struct JoinResult {
  PeerId peer = 0;
  ClusterId cluster = 0;
  RouteTrace trace;
};

struct FailureOutcome {
  ClusterId cluster = 0;
  std::uint64_t keys_lost = 0;
  bool cluster_emptied = false;  // skeleton break
  bool representative_changed = false;
};

class ArtSkeleton {
 public:
  ArtSkeleton(const KeyUniverse& universe, const BuildConfig& config)
      : uni_(universe),
        cfg_(config),
        geom_(config.fanout, universe.cluster_count()),
        n_clusters_(universe.cluster_count()) {
    clusters_.reserve(n_clusters_);
    rsi_.resize(n_clusters_);
    const Key span = uni_.peer_span();
    for (ClusterId id = 1; id <= n_clusters_; ++id) {
      const auto [lo, hi] = uni_.cluster_key_range(id);
      const std::uint64_t peers = (hi - lo) / span + 1;
      clusters_.emplace_back(id, lo, hi, (lo / span) + 1, peers, span, cfg_.inner);
      initial_peers_ += peers;
    }
    live_peers_ = initial_peers_;
    next_peer_id_ = initial_peers_ + 1;
    for (ClusterId id = 1; id <= n_clusters_; ++id) {
      auto& table = rsi_[id - 1];
      table.resize(geom_.height());
      for (Level i = 0; i < geom_.height(); ++i) {
        const Label first = geom_.level_start_label(i);
        const Count present = geom_.level_node_count(i);
        const std::uint64_t pick =
            stream_below(cfg_.seed, Stream::rsi_init, id * TreeGeometry::kMaxLevels + i, present);
        table[i] = {static_cast<std::uint32_t>(first + pick), 0};
      }
    }
  }

  static ArtSkeleton build(std::uint64_t n_clusters, const BuildConfig& config,
                           Key universe_hint = 1'000'000'000) {
    return ArtSkeleton(KeyUniverse::for_cluster_count(n_clusters, universe_hint), config);
  }

  const KeyUniverse& universe() const noexcept { return uni_; }
  const TreeGeometry& geometry() const noexcept { return geom_; }
  const BuildConfig& config() const noexcept { return cfg_; }
  std::uint64_t cluster_count() const noexcept { return n_clusters_; }
  std::uint64_t initial_peer_count() const noexcept { return initial_peers_; }
  std::uint64_t live_peer_count() const noexcept { return live_peers_; }
  bool trace_detail() const noexcept { return trace_detail_; }
  void set_trace_detail(bool on) noexcept { trace_detail_ = on; }

  const ClusterPeer& cluster(ClusterId id) const {
    require_cluster(id);
    return clusters_[id - 1];
  }
  ClusterPeer& cluster_mut(ClusterId id) {
    require_cluster(id);
    return clusters_[id - 1];
  }

  const std::vector<RsiEntry>& rsi_table(ClusterId id) const {
    require_cluster(id);
    return rsi_[id - 1];
  }

  ClusterId cluster_of_peer(PeerId p) const {
    if (const auto it = joined_.find(p); it != joined_.end()) return it->second;
    if (p >= 1 && p <= initial_peers_) {
      const ClusterId cand = (p - 1) / uni_.peers_per_cluster() + 1;
      if (cand <= n_clusters_ && clusters_[cand - 1].has_peer(p)) return cand;
    }
    throw UnknownPeer(p);
  }

  // ---- lookup ---------------------------------------------------------

  // Route from cluster `from` to cluster `to`; returns the cluster reached.
  ClusterId art_lookup(ClusterId from, ClusterId to, RouteTrace& trace) {
    require_cluster(from);
    require_cluster(to);
    if (clusters_[to - 1].empty()) {
      trace.success = false;
      throw UnreachableAfterRepair("target cluster " + std::to_string(to) +
                                   " has no live peers");
    }
    ClusterId pos = from;
    Label frame_lo = 1;
    Count frame_size = n_clusters_;
    std::uint32_t depth = 0;
    while (pos != to) {
      const Count rel = to - frame_lo + 1;
      const TreeGeometry g(cfg_.fanout, frame_size);
      const Level i = g.level_of_label(rel);
      if (depth == 0) {
        // Enter the level through the stored random spine.
        const ClusterId x = rsi_target(pos, i, trace);
        if (x != pos) {
          trace.add(HopKind::skeleton, pos, x);
          pos = x;
        }
        if (pos == to) break;
      }
      if (i == 0) {
        // Target roots the current frame; reachable only through a stand-in,
        // which means it has no live peers.
        trace.success = false;
        throw UnreachableAfterRepair("frame root " + std::to_string(to) + " unreachable");
      }
      if (i == 1) {
        // Direct child of the frame root.
        trace.add(HopKind::skeleton, pos, to);
        pos = to;
        break;
      }
      const CollectionRef ref = g.collection_of(i, rel);
      const auto [cfirst, clast] = g.collection_bounds(ref);
      const LayerShape shape = layer_shape(g.collection_count(i), cfg_.c);
      if (shape.width > 1) {
        // First layer: hop to the representative of the target's bucket.
        const Count bucket_first = ((ref.index - 1) / shape.width) * shape.width + 1;
        const Label bfirst = g.collection_bounds({i, bucket_first}).first;
        const ClusterId bucket_rep =
            resolve_live(frame_lo + bfirst - 1, frame_lo + clast - 1, trace);
        if (bucket_rep != pos) {
          trace.add(HopKind::skeleton, pos, bucket_rep);
          pos = bucket_rep;
          if (pos == to) break;
        }
      }
      // Second layer: hop to the collection representative and re-root.
      const ClusterId rep = resolve_live(frame_lo + cfirst - 1, frame_lo + clast - 1, trace);
      if (rep != pos) {
        trace.add(HopKind::skeleton, pos, rep);
        pos = rep;
      }
      frame_lo = frame_lo + cfirst - 1;
      frame_size = clast - cfirst + 1;
      ++depth;
    }
    return pos;
  }

  SearchResult exact_search(PeerId from_peer, Key k) {
    return exact_search_from_cluster(cluster_of_peer(from_peer), k);
  }

  SearchResult exact_search_from_cluster(ClusterId from, Key k) {
    SearchResult out;
    out.trace.record = trace_detail_;
    const ClusterId target = uni_.cluster_for_key(k);
    art_lookup(from, target, out.trace);
    const ClusterPeer& cl = clusters_[target - 1];
    const LocateResult loc = cl.locate(k);
    out.trace.add_intra(target, loc.hops);
    out.peer = loc.peer;
    out.peer_index = loc.index;
    out.cluster = target;
    out.key_present = key_present_at(cl, loc.index, k);
    return out;
  }

  RangeResult range_search(PeerId from_peer, Key k_lo, Key k_hi) {
    return range_search_from_cluster(cluster_of_peer(from_peer), k_lo, k_hi);
  }

  RangeResult range_search_from_cluster(ClusterId from, Key k_lo, Key k_hi) {
    if (k_lo > k_hi) throw InvalidRange("empty range: lo exceeds hi");
    RangeResult out;
    out.trace.record = trace_detail_;
    const ClusterId target = uni_.cluster_for_key(k_lo);
    art_lookup(from, target, out.trace);
    const ClusterPeer& first = clusters_[target - 1];
    const LocateResult loc = first.locate(k_lo);
    out.trace.add_intra(target, loc.hops);
    // Linear scan rightward until the range end is covered.
    ClusterId c = target;
    std::size_t idx = loc.index;
    while (true) {
      const ClusterPeer& cl = clusters_[c - 1];
      if (!cl.empty()) {
        cl.collect_range(idx, k_lo, k_hi, out.keys);
        if (cl.sub_range_hi(idx) >= k_hi) break;
        if (idx + 1 < cl.peer_count()) {
          ++idx;
          out.trace.add_intra(c, 1);
          continue;
        }
      } else if (cl.key_hi() >= k_hi) {
        break;
      }
      if (c == n_clusters_) break;
      trace_successor_hop(out.trace, c);
      ++c;
      idx = 0;
    }
    return out;
  }

  SearchResult insert_key(PeerId from_peer, Key k) {
    return insert_key_from_cluster(cluster_of_peer(from_peer), k);
  }

  SearchResult insert_key_from_cluster(ClusterId from, Key k) {
    SearchResult out;
    out.trace.record = trace_detail_;
    const ClusterId target = uni_.cluster_for_key(k);
    art_lookup(from, target, out.trace);
    bool inserted = false;
    const std::uint32_t hops = clusters_[target - 1].insert_key(k, inserted);
    out.trace.add_intra(target, hops);
    out.cluster = target;
    out.key_present = !inserted;  // flagged duplicate
    const LocateResult loc = clusters_[target - 1].locate(k);
    out.peer = loc.peer;
    out.peer_index = loc.index;
    return out;
  }

  SearchResult delete_key(PeerId from_peer, Key k) {
    return delete_key_from_cluster(cluster_of_peer(from_peer), k);
  }

  SearchResult delete_key_from_cluster(ClusterId from, Key k) {
    SearchResult out;
    out.trace.record = trace_detail_;
    const ClusterId target = uni_.cluster_for_key(k);
    art_lookup(from, target, out.trace);
    bool deleted = false;
    const std::uint32_t hops = clusters_[target - 1].delete_key(k, deleted);
    out.trace.add_intra(target, hops);
    out.cluster = target;
    out.key_present = deleted;
    return out;
  }

  // ---- churn ----------------------------------------------------------

  JoinResult join_peer(PeerId entrance, Key w_key) {
    return join_peer_from_cluster(cluster_of_peer(entrance), w_key);
  }

  JoinResult join_peer_from_cluster(ClusterId from, Key w_key) {
    JoinResult out;
    out.trace.record = trace_detail_;
    const ClusterId target = uni_.cluster_for_key(w_key);
    art_lookup(from, target, out.trace);
    const PeerId id = next_peer_id_;
    const std::uint32_t hops = clusters_[target - 1].add_peer(id, w_key);
    ++next_peer_id_;  // only consumed once the insert went through
    out.trace.add_intra(target, hops);
    joined_.emplace(id, target);
    ++live_peers_;
    out.peer = id;
    out.cluster = target;
    return out;
  }

  // Departure is initiated at the leaving peer itself; only its own cluster
  // is touched.
  RouteTrace leave_peer(PeerId w) {
    const ClusterId c = cluster_of_peer(w);
    RouteTrace trace;
    trace.record = trace_detail_;
    const std::uint32_t hops = clusters_[c - 1].remove_peer(w);
    trace.add_intra(c, hops);
    forget_peer(w);
    return trace;
  }

  RouteTrace leave_peer_at(ClusterId c, std::size_t index) {
    require_cluster(c);
    RouteTrace trace;
    trace.record = trace_detail_;
    ClusterPeer& cl = clusters_[c - 1];
    cl.materialize();
    const PeerId id = cl.peer_id_at(index);
    const std::uint32_t hops = cl.remove_peer_at(index);
    trace.add_intra(c, hops);
    forget_peer(id);
    return trace;
  }

  FailureOutcome fail_peer(PeerId w) {
    const ClusterId c = cluster_of_peer(w);
    ClusterPeer& cl = clusters_[c - 1];
    cl.materialize();
    std::size_t index = 0;
    while (cl.peer_id_at(index) != w) ++index;
    return fail_peer_at(c, index);
  }

  FailureOutcome fail_peer_at(ClusterId c, std::size_t index) {
    require_cluster(c);
    ClusterPeer& cl = clusters_[c - 1];
    cl.materialize();
    const PeerId id = cl.peer_id_at(index);
    const PeerId old_rep = cl.representative();
    FailureOutcome out;
    out.cluster = c;
    out.keys_lost = cl.fail_peer_at(index);
    out.cluster_emptied = cl.empty();
    out.representative_changed = out.cluster_emptied || cl.representative() != old_rep;
    forget_peer(id);
    return out;
  }

  // Replace one RSI entry with a fresh uniform pick among the level's
  // clusters that still have a live representative.
  ClusterId rsi_resample(ClusterId c, Level level) {
    require_cluster(c);
    if (level >= geom_.height())
      throw LabelOutOfRange("level " + std::to_string(level) + " beyond skeleton");
    const Label first = geom_.level_start_label(level);
    const Count present = geom_.level_node_count(level);
    Count live = 0;
    for (Count k = 0; k < present; ++k)
      if (!clusters_[first + k - 1].empty()) ++live;
    if (live == 0)
      throw LevelExhausted("no live cluster at level " + std::to_string(level));
    RsiEntry& entry = rsi_[c - 1][level];
    ++entry.draw;
    const std::uint64_t pick = stream_below(
        cfg_.seed, Stream::rsi_resample,
        mix64(c * TreeGeometry::kMaxLevels + level) + entry.draw, live);
    Count seen = 0;
    for (Count k = 0; k < present; ++k) {
      if (clusters_[first + k - 1].empty()) continue;
      if (seen++ == pick) {
        entry.target = static_cast<std::uint32_t>(first + k);
        return entry.target;
      }
    }
    throw LevelExhausted("re-sample raced past the live set");
  }

  // ---- bulk and reporting ---------------------------------------------

  void place_key(Key k) { clusters_[uni_.cluster_for_key(k) - 1].place_key(k); }

  std::uint64_t key_count() const noexcept {
    std::uint64_t total = 0;
    for (const auto& cl : clusters_) total += cl.key_count();
    return total;
  }

  IndexShapes index_shapes() const { return IndexShapes::for_geometry(geom_, cfg_.c); }

  Count max_routing_entries() const {
    return art::max_routing_entries(cfg_.fanout, n_clusters_, cfg_.c);
  }

  // Skeleton-only snapshot: cluster directory, RSI tables and index shapes.
  // Peer membership and stored keys are deliberately absent; churn must not
  // change a single byte of this.
  std::string snapshot() const {
    std::ostringstream os;
    os << "art-skeleton v1\n";
    os << "fanout " << cfg_.fanout.value() << " c " << cfg_.c << " inner "
       << to_string(cfg_.inner) << "\n";
    os << "clusters " << n_clusters_ << " universe " << uni_.universe() << " peer-span "
       << uni_.peer_span() << "\n";
    os << "levels " << geom_.height() << "\n";
    const IndexShapes shapes = index_shapes();
    for (Level i = 1; i < geom_.height(); ++i) {
      const LayerShape& s = shapes.by_level[i];
      os << "level " << i << " start " << geom_.level_start_label(i) << " present "
         << geom_.level_node_count(i) << " collections " << s.collections << " buckets "
         << s.buckets << " width " << s.width << "\n";
    }
    for (ClusterId id = 1; id <= n_clusters_; ++id) {
      const ClusterPeer& cl = clusters_[id - 1];
      os << "cluster " << id << " keys " << cl.key_lo() << " " << cl.key_hi() << " rsi";
      for (const RsiEntry& e : rsi_[id - 1]) os << " " << e.target;
      os << "\n";
    }
    return os.str();
  }

 private:
  void require_cluster(ClusterId id) const {
    if (id < 1 || id > n_clusters_) throw UnknownCluster(id);
  }

  static bool key_present_at(const ClusterPeer& cl, std::size_t index, Key k) {
    std::vector<Key> probe;
    cl.collect_range(index, k, k, probe);
    return !probe.empty();
  }

  void trace_successor_hop(RouteTrace& trace, ClusterId c) {
    trace.add(HopKind::skeleton, c, c + 1);
  }

  void forget_peer(PeerId id) {
    joined_.erase(id);
    --live_peers_;
  }

  // The stored RSI entry for (cluster, level), repaired in place when its
  // target has died.
  ClusterId rsi_target(ClusterId c, Level level, RouteTrace& trace) {
    RsiEntry& entry = rsi_[c - 1][level];
    if (!clusters_[entry.target - 1].empty()) return entry.target;
    ++trace.retries;
    try {
      return rsi_resample(c, level);
    } catch (const LevelExhausted&) {
      trace.success = false;
      throw UnreachableAfterRepair("level " + std::to_string(level) +
                                   " exhausted while routing");
    }
  }

  // First live cluster in [first, last]; counts skipped dead clusters as
  // retries.  Callers guarantee the window contains a live cluster.
  ClusterId resolve_live(ClusterId first, ClusterId last, RouteTrace& trace) {
    for (ClusterId c = first; c <= last; ++c) {
      if (!clusters_[c - 1].empty()) {
        trace.retries += static_cast<std::uint32_t>(c - first);
        return c;
      }
    }
    trace.success = false;
    throw UnreachableAfterRepair("no live cluster in [" + std::to_string(first) + ", " +
                                 std::to_string(last) + "]");
  }

  KeyUniverse uni_;
  BuildConfig cfg_;
  TreeGeometry geom_;
  std::uint64_t n_clusters_;
  std::vector<ClusterPeer> clusters_;
  std::vector<std::vector<RsiEntry>> rsi_;
  std::unordered_map<PeerId, ClusterId> joined_;
  std::uint64_t initial_peers_ = 0;
  std::uint64_t live_peers_ = 0;
  PeerId next_peer_id_ = 1;
  bool trace_detail_ = false;
};

}  // namespace art
