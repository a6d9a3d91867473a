#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "art/overlay.hpp"

using namespace art;

namespace {

ArtSkeleton small_skeleton(std::uint64_t n_clusters, std::uint64_t b, InnerKind inner,
                           std::uint64_t seed = 7, Key span = 4) {
  BuildConfig cfg;
  cfg.fanout = Fanout::validate(b);
  cfg.inner = inner;
  cfg.seed = seed;
  return ArtSkeleton(KeyUniverse(n_clusters * span * span, span), cfg);
}

// Flat oracle: scan the global directory for the peer owning k.
PeerId oracle_peer(const ArtSkeleton& skel, Key k) {
  const ClusterId c = skel.universe().cluster_for_key(k);
  const ClusterPeer& cl = skel.cluster(c);
  for (std::size_t i = 0; i < cl.peer_count(); ++i)
    if (cl.sub_range_lo(i) <= k && k <= cl.sub_range_hi(i)) return cl.peer_id_at(i);
  return 0;
}

std::vector<Key> all_stored_keys(const ArtSkeleton& skel) {
  std::vector<Key> out;
  for (ClusterId c = 1; c <= skel.cluster_count(); ++c) {
    const ClusterPeer& cl = skel.cluster(c);
    for (std::size_t i = 0; i < cl.peer_count(); ++i)
      cl.collect_range(i, cl.key_lo(), cl.key_hi(), out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Snapshot with the random-spine lines blanked, for shape comparisons.
std::string shape_only(const std::string& snapshot) {
  std::string out;
  std::istringstream in(snapshot);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t rsi = line.find(" rsi");
    out += rsi == std::string::npos ? line : line.substr(0, rsi);
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("single-cluster skeleton answers everything locally") {
  ArtSkeleton skel = small_skeleton(1, 2, InnerKind::direct_oracle);
  CHECK(skel.cluster_count() == 1);
  for (Key k = 0; k < skel.universe().universe(); ++k) {
    const SearchResult res = skel.exact_search_from_cluster(1, k);
    CHECK(res.trace.skeleton_hops == 0);
    CHECK(res.peer == oracle_peer(skel, k));
  }
}

TEST_CASE("build shapes the configured level populations") {
  ArtSkeleton skel = small_skeleton(11, 2, InnerKind::finger_ring);
  const TreeGeometry& g = skel.geometry();
  CHECK(g.height() == 4);
  CHECK(g.level_population(0).value == 1);
  CHECK(g.level_population(1).value == 2);
  CHECK(g.level_population(2).value == 4);
  CHECK(g.level_population(3).value == 16);
  CHECK(g.level_node_count(3) == 4);  // partially filled last level
}

TEST_CASE("skeleton shape is seed independent, spine targets are not") {
  ArtSkeleton a = small_skeleton(64, 4, InnerKind::finger_ring, 1);
  ArtSkeleton b = small_skeleton(64, 4, InnerKind::finger_ring, 2);
  CHECK(shape_only(a.snapshot()) == shape_only(b.snapshot()));
  CHECK(a.snapshot() != b.snapshot());
}

TEST_CASE("random spine entries always point at their level") {
  ArtSkeleton skel = small_skeleton(300, 2, InnerKind::finger_ring);
  const TreeGeometry& g = skel.geometry();
  for (ClusterId c = 1; c <= skel.cluster_count(); ++c) {
    const auto& table = skel.rsi_table(c);
    REQUIRE(table.size() == g.height());
    for (Level i = 0; i < g.height(); ++i)
      CHECK(g.level_of_label(table[i].target) == i);
  }
}

TEST_CASE("lookup from a cluster to itself is free") {
  ArtSkeleton skel = small_skeleton(64, 2, InnerKind::finger_ring);
  RouteTrace trace;
  CHECK(skel.art_lookup(17, 17, trace) == 17);
  CHECK(trace.skeleton_hops == 0);
}

TEST_CASE("first hop follows the spine entry of the target's level") {
  ArtSkeleton skel = small_skeleton(300, 2, InnerKind::finger_ring);
  const TreeGeometry& g = skel.geometry();
  // Levels 4 and 5 exist for 300 clusters with b = 2.
  for (const Level level : {4u, 5u}) {
    const Label target = g.level_start_label(level) + 3;
    REQUIRE(g.level_of_label(target) == level);
    const ClusterId expected = skel.rsi_table(3)[level].target;
    RouteTrace trace;
    trace.record = true;
    skel.art_lookup(3, target, trace);
    REQUIRE(!trace.hops.empty());
    CHECK(trace.hops[0].from == 3);
    CHECK(trace.hops[0].to == expected);
  }
}

TEST_CASE("every pair routes to the exact target") {
  for (const std::uint64_t b : {2ULL, 4ULL}) {
    ArtSkeleton skel = small_skeleton(256, b, InnerKind::finger_ring);
    for (ClusterId s = 1; s <= 256; ++s) {
      for (ClusterId t = 1; t <= 256; ++t) {
        RouteTrace trace;
        REQUIRE(skel.art_lookup(s, t, trace) == t);
      }
    }
  }
}

TEST_CASE("trace entries are connected and match the counters") {
  ArtSkeleton skel = small_skeleton(256, 2, InnerKind::finger_ring);
  skel.set_trace_detail(true);
  for (std::uint64_t q = 0; q < 500; ++q) {
    const ClusterId s = 1 + stream_below(5, Stream::query_start, 2 * q, 256);
    const Key k = stream_below(5, Stream::key_draw, q, skel.universe().universe());
    const SearchResult res = skel.exact_search_from_cluster(s, k);
    std::uint32_t skeleton = 0;
    std::uint32_t intra = 0;
    for (std::size_t i = 0; i < res.trace.hops.size(); ++i) {
      const Hop& h = res.trace.hops[i];
      if (h.kind == HopKind::skeleton)
        ++skeleton;
      else
        ++intra;
      if (i > 0) CHECK(res.trace.hops[i - 1].to == h.from);
    }
    CHECK(skeleton == res.trace.skeleton_hops);
    CHECK(intra == res.trace.intra_hops);
  }
}

TEST_CASE("exact search equals the flat directory oracle") {
  for (const InnerKind inner : {InnerKind::direct_oracle, InnerKind::finger_ring}) {
    ArtSkeleton skel = small_skeleton(64, 2, inner);
    for (Key k = 0; k < skel.universe().universe(); ++k) {
      const SearchResult res = skel.exact_search_from_cluster(1 + k % 64, k);
      CHECK(res.peer == oracle_peer(skel, k));
    }
  }
}

TEST_CASE("exact search still matches the oracle after churn") {
  ArtSkeleton skel = small_skeleton(64, 4, InnerKind::finger_ring, 7, 16);
  for (std::uint64_t i = 0; i < 500; ++i) {
    const Key k = stream_below(11, Stream::churn_pick, i, skel.universe().universe());
    skel.join_peer_from_cluster(1 + i % 64, k);
  }
  for (Key k = 0; k < skel.universe().universe(); ++k) {
    const SearchResult res = skel.exact_search_from_cluster(1 + k % 64, k);
    CHECK(res.peer == oracle_peer(skel, k));
  }
}

TEST_CASE("range answers equal the brute-force filter") {
  ArtSkeleton skel = small_skeleton(64, 2, InnerKind::finger_ring);
  for (std::uint64_t i = 0; i < 2000; ++i)
    skel.place_key(stream_below(3, Stream::load_key, i, skel.universe().universe()));
  const std::vector<Key> all = all_stored_keys(skel);

  for (std::uint64_t q = 0; q < 1000; ++q) {
    const Key lo = stream_below(4, Stream::range_key, 2 * q, skel.universe().universe());
    const Key width = stream_below(4, Stream::range_key, 2 * q + 1, 100);
    const Key hi = std::min(lo + width, skel.universe().universe() - 1);
    const RangeResult res = skel.range_search_from_cluster(1 + q % 64, lo, hi);
    std::vector<Key> expect;
    for (const Key k : all)
      if (k >= lo && k <= hi) expect.push_back(k);
    REQUIRE(res.keys == expect);
  }
  CHECK_THROWS_AS(skel.range_search_from_cluster(1, 10, 9), InvalidRange);
}

TEST_CASE("a stored singleton range costs exactly the lookup") {
  ArtSkeleton skel = small_skeleton(64, 2, InnerKind::direct_oracle);
  const Key k = 777;
  skel.place_key(k);
  const SearchResult point = skel.exact_search_from_cluster(5, k);
  const RangeResult res = skel.range_search_from_cluster(5, k, k);
  REQUIRE(res.keys == std::vector<Key>{k});
  CHECK(res.trace.skeleton_hops == point.trace.skeleton_hops);
  CHECK(res.trace.intra_hops == point.trace.intra_hops);
}

TEST_CASE("a range spanning three clusters adds two successor hops") {
  ArtSkeleton skel = small_skeleton(64, 2, InnerKind::direct_oracle);
  const Key span = skel.universe().cluster_span();
  const ClusterId c = 10;
  const Key lo = (c - 1) * span;      // first key of cluster 10
  const Key hi = (c + 1) * span + 2;  // a few keys into cluster 12
  const SearchResult point = skel.exact_search_from_cluster(3, lo);
  const RangeResult res = skel.range_search_from_cluster(3, lo, hi);
  CHECK(res.trace.skeleton_hops == point.trace.skeleton_hops + 2);
}

TEST_CASE("inserted keys are found and duplicates flagged") {
  ArtSkeleton skel = small_skeleton(64, 4, InnerKind::finger_ring);
  const Key k = 321;
  const SearchResult ins = skel.insert_key_from_cluster(9, k);
  CHECK_FALSE(ins.key_present);  // fresh
  const SearchResult found = skel.exact_search_from_cluster(40, k);
  CHECK(found.key_present);
  CHECK(found.peer == ins.peer);
  const SearchResult dup = skel.insert_key_from_cluster(9, k);
  CHECK(dup.key_present);  // flagged duplicate
  CHECK(skel.key_count() == 1);
}

TEST_CASE("interleaved inserts and deletes replay a flat set oracle") {
  ArtSkeleton skel = small_skeleton(256, 4, InnerKind::finger_ring);
  std::set<Key> oracle;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const Key k = stream_below(21, Stream::load_key, i, skel.universe().universe());
    const ClusterId s = 1 + stream_below(21, Stream::query_start, i, 256);
    if (stream_value(21, Stream::churn_coin, i) % 3 == 0) {
      skel.delete_key_from_cluster(s, k);
      oracle.erase(k);
    } else {
      skel.insert_key_from_cluster(s, k);
      oracle.insert(k);
    }
  }
  const std::vector<Key> stored = all_stored_keys(skel);
  CHECK(stored == std::vector<Key>(oracle.begin(), oracle.end()));
  // Delete of an absent key reports no change.
  skel.delete_key_from_cluster(1, 1);
  const SearchResult res = skel.delete_key_from_cluster(1, 1);
  CHECK_FALSE(res.key_present);
}

TEST_CASE("joins into the entrance cluster stay local") {
  ArtSkeleton skel = small_skeleton(64, 2, InnerKind::finger_ring);
  const ClusterId c = 30;
  const Key inside = skel.cluster(c).key_lo() + 1;
  const std::uint64_t before = skel.cluster(c).peer_count();
  const JoinResult res = skel.join_peer_from_cluster(c, inside);
  CHECK(res.cluster == c);
  CHECK(res.trace.skeleton_hops == 0);
  CHECK(skel.cluster(c).peer_count() == before + 1);
}

TEST_CASE("join then leave restores the cluster") {
  ArtSkeleton skel = small_skeleton(64, 2, InnerKind::finger_ring);
  const ClusterId c = 12;
  skel.cluster_mut(c).materialize();
  const auto snapshot_peers = [&] {
    std::vector<std::pair<PeerId, Key>> v;
    const ClusterPeer& cl = skel.cluster(c);
    for (std::size_t i = 0; i < cl.peer_count(); ++i)
      v.emplace_back(cl.peer_id_at(i), cl.sub_range_lo(i));
    return v;
  };
  const auto before = snapshot_peers();
  const JoinResult join = skel.join_peer_from_cluster(5, skel.cluster(c).key_lo() + 2);
  REQUIRE(join.cluster == c);
  skel.leave_peer(join.peer);
  CHECK(snapshot_peers() == before);
}

TEST_CASE("representative survives departures") {
  ArtSkeleton skel = small_skeleton(64, 2, InnerKind::finger_ring);
  const ClusterId c = 8;
  skel.cluster_mut(c).materialize();
  const PeerId rep = skel.cluster(c).representative();
  // A non-representative leave keeps the representative.
  const PeerId other = skel.cluster(c).peer_id_at(2);
  skel.leave_peer(other);
  CHECK(skel.cluster(c).representative() == rep);
  // The representative leaving promotes another live peer.
  skel.leave_peer(rep);
  const PeerId fresh = skel.cluster(c).representative();
  CHECK(fresh != rep);
  CHECK(skel.cluster(c).has_peer(fresh));
  CHECK_THROWS_AS(skel.leave_peer(99999), UnknownPeer);
}

TEST_CASE("join hop budget stays within skeleton plus ring walk") {
  ArtSkeleton skel = small_skeleton(1024, 4, InnerKind::finger_ring, 7, 16);
  const double skeleton_budget = 4.0 * t1_hop_bound(1024, Fanout::validate(4));
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const Key k = stream_below(31, Stream::load_key, i, skel.universe().universe());
    const ClusterId target = skel.universe().cluster_for_key(k);
    const std::uint64_t size_before = skel.cluster(target).peer_count();
    const ClusterId s = 1 + stream_below(31, Stream::query_start, i, 1024);
    const JoinResult res = skel.join_peer_from_cluster(s, k);
    CHECK(res.trace.skeleton_hops <= skeleton_budget);
    CHECK(res.trace.intra_hops <= std::bit_width(size_before) + 1);
  }
}

TEST_CASE("failing the representative keeps the cluster routable") {
  ArtSkeleton skel = small_skeleton(64, 2, InnerKind::finger_ring);
  const ClusterId c = 22;
  const PeerId rep = skel.cluster(c).representative();
  const FailureOutcome out = skel.fail_peer(rep);
  CHECK(out.representative_changed);
  CHECK_FALSE(out.cluster_emptied);
  const Key k = skel.cluster(c).key_lo() + 1;
  const SearchResult res = skel.exact_search_from_cluster(1, k);
  CHECK(res.cluster == c);
  CHECK(res.peer == oracle_peer(skel, k));
}

TEST_CASE("lookups survive dead spine targets via re-sampling") {
  ArtSkeleton skel = small_skeleton(300, 2, InnerKind::finger_ring);
  const TreeGeometry& g = skel.geometry();
  const Label target = g.level_start_label(4) + 7;  // somewhere at level 4
  const ClusterId stale = skel.rsi_table(3)[4].target;
  REQUIRE(stale != target);
  // Kill every peer of the spine target so the stored entry goes stale.
  while (!skel.cluster(stale).empty()) skel.fail_peer_at(stale, 0);

  RouteTrace trace;
  const ClusterId reached = skel.art_lookup(3, target, trace);
  CHECK(reached == target);
  CHECK(trace.retries >= 1);
  // The entry was repaired in place and points at a live level-4 cluster.
  const ClusterId repaired = skel.rsi_table(3)[4].target;
  CHECK(repaired != stale);
  CHECK(g.level_of_label(repaired) == 4);
  CHECK_FALSE(skel.cluster(repaired).empty());
  // Routing into the dead cluster itself reports unreachability.
  RouteTrace dead;
  CHECK_THROWS_AS(skel.art_lookup(3, stale, dead), UnreachableAfterRepair);
}

TEST_CASE("re-sampling is deterministic and honours exhaustion") {
  ArtSkeleton skel = small_skeleton(7, 2, InnerKind::finger_ring);
  // Level 2 holds clusters 4..7; keep only cluster 5 alive.
  for (const ClusterId c : {4ULL, 6ULL, 7ULL})
    while (!skel.cluster(c).empty()) skel.fail_peer_at(c, 0);
  CHECK(skel.rsi_resample(1, 2) == 5);
  CHECK(skel.rsi_table(1)[2].target == 5);
  while (!skel.cluster(5).empty()) skel.fail_peer_at(5, 0);
  CHECK_THROWS_AS(skel.rsi_resample(1, 2), LevelExhausted);
}

TEST_CASE("churn and data never touch the skeleton snapshot") {
  ArtSkeleton skel = small_skeleton(64, 4, InnerKind::finger_ring);
  const std::string before = skel.snapshot();
  CHECK(before.rfind("art-skeleton v1\n", 0) == 0);
  std::vector<PeerId> joined;
  for (std::uint64_t i = 0; i < 400; ++i) {
    const Key k = stream_below(13, Stream::load_key, i, skel.universe().universe());
    switch (i % 4) {
      case 0:
        joined.push_back(skel.join_peer_from_cluster(1 + i % 64, k).peer);
        break;
      case 1:
        skel.insert_key_from_cluster(1 + i % 64, k);
        break;
      case 2:
        skel.delete_key_from_cluster(1 + i % 64, k);
        break;
      default:
        if (!joined.empty()) {
          skel.leave_peer(joined.back());
          joined.pop_back();
        }
    }
  }
  CHECK(skel.snapshot() == before);
}

TEST_CASE("unknown clusters are rejected") {
  ArtSkeleton skel = small_skeleton(16, 2, InnerKind::finger_ring);
  RouteTrace trace;
  CHECK_THROWS_AS(skel.art_lookup(0, 5, trace), UnknownCluster);
  CHECK_THROWS_AS(skel.art_lookup(1, 17, trace), UnknownCluster);
}
