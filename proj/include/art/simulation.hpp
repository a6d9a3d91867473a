#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "art/experiment_config.hpp"
#include "art/hop_ledger.hpp"
#include "art/overlay.hpp"

// Deterministic experiment engine.  Every run is a pure function of
// (config, seed): workload keys, query start points, churn coins and failure
// picks all come from disjoint counter-based streams.

namespace art {

// Disjoint index blocks so loaded data, queries and churn keys draw from the
// same distribution without being the same values.
inline constexpr std::uint64_t kLoadIndexBase = 0;
inline constexpr std::uint64_t kExactIndexBase = std::uint64_t{1} << 40;
inline constexpr std::uint64_t kRangeIndexBase = std::uint64_t{1} << 41;
inline constexpr std::uint64_t kChurnIndexBase = std::uint64_t{1} << 42;

struct MetricsRow {
  std::string experiment;
  std::uint64_t n_total = 0;
  std::uint64_t n_clusters = 0;
  std::uint64_t b = 0;
  std::uint32_t c = 0;
  std::string inner;
  std::string distribution;
  std::string op_class;
  double hops_mean = 0.0;
  double hops_p50 = 0.0;
  double hops_p99 = 0.0;
  std::uint64_t hops_max = 0;
  double skeleton_hops_mean = 0.0;
  double success_rate = 1.0;
  std::uint64_t max_routing_entries = 0;
  std::uint64_t cluster_size_max = 0;
  std::uint64_t violations = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct ChurnSummary {
  std::uint64_t steps = 0;
  std::uint64_t violation_steps = 0;
  std::uint64_t rejected_departures = 0;
  std::uint64_t rejected_joins = 0;  // target sub-range too small to split
  std::uint64_t size_ceiling = 0;
  std::uint64_t max_cluster_size = 0;
  std::uint64_t min_cluster_size = 0;
  bool snapshot_identical = true;
};

struct FailureSummary {
  double baseline_mean = 0.0;
  double degraded_mean = 0.0;
  double inflation = 1.0;
  double degraded_success_rate = 1.0;
  std::uint64_t failed_peers = 0;
  std::uint64_t skeleton_breaks = 0;
  std::uint64_t dead_target_lookups = 0;  // excluded from the success denominator
};

struct LoadSummary {
  std::uint64_t keys_loaded = 0;
  std::uint64_t max_cluster_keys = 0;
  std::uint64_t min_cluster_keys = 0;
  double mean_cluster_keys = 0.0;
  std::uint64_t overload_events = 0;
  std::uint64_t rebalance_messages = 0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  ChurnSummary churn;
  FailureSummary failure;
  LoadSummary load;
};

// ---- internals ----------------------------------------------------------

namespace detail {

// Fenwick tree over per-cluster live peer counts; picks a uniform live peer
// as (cluster, index-within-cluster) in O(log N').
class PeerPicker {
 public:
  explicit PeerPicker(const ArtSkeleton& skel) : tree_(skel.cluster_count() + 1, 0) {
    for (ClusterId c = 1; c <= skel.cluster_count(); ++c)
      add(c, static_cast<std::int64_t>(skel.cluster(c).peer_count()));
  }

  std::uint64_t total() const noexcept { return total_; }

  void add(ClusterId c, std::int64_t delta) {
    total_ = static_cast<std::uint64_t>(static_cast<std::int64_t>(total_) + delta);
    for (std::size_t i = c; i < tree_.size(); i += i & (~i + 1))
      tree_[i] = static_cast<std::uint64_t>(static_cast<std::int64_t>(tree_[i]) + delta);
  }

  // r in [0, total) -> (cluster, offset within cluster).
  std::pair<ClusterId, std::uint64_t> pick(std::uint64_t r) const {
    std::size_t pos = 0;
    std::size_t mask = std::bit_floor(tree_.size() - 1);
    std::uint64_t rest = r;
    while (mask > 0) {
      const std::size_t next = pos + mask;
      if (next < tree_.size() && tree_[next] <= rest) {
        rest -= tree_[next];
        pos = next;
      }
      mask >>= 1;
    }
    return {static_cast<ClusterId>(pos + 1), rest};
  }

 private:
  std::vector<std::uint64_t> tree_;
  std::uint64_t total_ = 0;
};

// O(1) running extrema over cluster sizes under +/-1 updates.
class SizeTracker {
 public:
  explicit SizeTracker(const ArtSkeleton& skel) {
    std::uint64_t biggest = 0;
    for (ClusterId c = 1; c <= skel.cluster_count(); ++c)
      biggest = std::max(biggest, skel.cluster(c).peer_count());
    counts_.assign(biggest * 2 + 16, 0);
    min_ = ~std::uint64_t{0};
    max_ = 0;
    for (ClusterId c = 1; c <= skel.cluster_count(); ++c) {
      const std::uint64_t s = skel.cluster(c).peer_count();
      ++counts_[s];
      min_ = std::min(min_, s);
      max_ = std::max(max_, s);
    }
  }

  void move(std::uint64_t from, std::uint64_t to) {
    if (to + 1 >= counts_.size()) counts_.resize(to * 2 + 16, 0);
    --counts_[from];
    ++counts_[to];
    if (to > max_) max_ = to;
    if (to < min_) min_ = to;
    while (counts_[max_] == 0) --max_;
    while (counts_[min_] == 0) ++min_;
  }

  std::uint64_t max() const noexcept { return max_; }
  std::uint64_t min() const noexcept { return min_; }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t min_ = 0;
  std::uint64_t max_ = 0;
};

inline std::uint64_t max_cluster_peer_count(const ArtSkeleton& skel) {
  std::uint64_t biggest = 0;
  for (ClusterId c = 1; c <= skel.cluster_count(); ++c)
    biggest = std::max(biggest, skel.cluster(c).peer_count());
  return biggest;
}

inline MetricsRow make_row(const ArtSkeleton& skel, const ExperimentConfig& cfg,
                           const std::string& experiment, const std::string& op_class,
                           const HopLedger& ledger) {
  MetricsRow row;
  row.experiment = experiment;
  row.n_total = skel.initial_peer_count();
  row.n_clusters = skel.cluster_count();
  row.b = cfg.b;
  row.c = cfg.c;
  row.inner = to_string(cfg.inner);
  row.distribution = to_string(cfg.distribution);
  row.op_class = op_class;
  const HopStats stats = ledger.stats();
  row.hops_mean = stats.mean;
  row.hops_p50 = stats.p50;
  row.hops_p99 = stats.p99;
  row.hops_max = stats.max;
  row.skeleton_hops_mean = ledger.mean_skeleton();
  row.success_rate = ledger.success_rate();
  row.max_routing_entries = skel.max_routing_entries();
  row.cluster_size_max = max_cluster_peer_count(skel);
  row.violations = 0;
  row.seed = cfg.seed;
  row.config_hash = cfg.hash();
  return row;
}

// Start cluster for the q-th query: a uniform pick over the initial peers.
inline ClusterId pristine_start_cluster(const ArtSkeleton& skel,
                                        const ExperimentConfig& cfg, std::uint64_t q) {
  const std::uint64_t r =
      stream_below(cfg.seed, Stream::query_start, q, skel.initial_peer_count());
  return r / skel.universe().peers_per_cluster() + 1;
}

}  // namespace detail

inline ArtSkeleton build_skeleton(const ExperimentConfig& cfg) {
  cfg.validate();
  BuildConfig build;
  build.fanout = Fanout::validate(cfg.b);
  build.c = cfg.c;
  build.inner = cfg.inner;
  build.seed = cfg.seed;
  return ArtSkeleton(KeyUniverse::for_cluster_count(cfg.n_clusters, cfg.universe), build);
}

// Place data_multiplier keys per peer, drawn from the configured
// distribution (batch insertion, no message accounting).
inline std::uint64_t load_data(ArtSkeleton& skel, const ExperimentConfig& cfg) {
  const DistributionSpec spec = cfg.distribution_spec();
  const std::uint64_t count = cfg.data_multiplier * skel.initial_peer_count();
  for (std::uint64_t i = 0; i < count; ++i)
    skel.place_key(sample_key(spec, skel.universe(), kLoadIndexBase + i));
  return count;
}

// ---- experiments --------------------------------------------------------

// Seeded exact and range query workload; reports aggregated hop statistics.
inline MetricsReport run_query_bench(ArtSkeleton& skel, const ExperimentConfig& cfg,
                                     std::vector<RouteTrace>* event_log = nullptr) {
  cfg.validate();
  if (cfg.data_multiplier > 0 && skel.key_count() == 0) load_data(skel, cfg);
  const DistributionSpec spec = cfg.distribution_spec();
  const std::uint64_t n_peers = skel.initial_peer_count();
  HopLedger exact;
  HopLedger range;
  for (std::uint64_t q = 0; q < cfg.queries; ++q) {
    const ClusterId start = detail::pristine_start_cluster(skel, cfg, q);
    const Key k = sample_key(spec, skel.universe(), kExactIndexBase + q);
    try {
      SearchResult res = skel.exact_search_from_cluster(start, k);
      exact.record(res.trace);
      if (event_log) event_log->push_back(std::move(res.trace));
    } catch (const UnreachableAfterRepair&) {
      exact.record_failure();
    }
  }
  for (std::uint64_t q = 0; q < cfg.queries; ++q) {
    const ClusterId start = detail::pristine_start_cluster(skel, cfg, cfg.queries + q);
    const Key lo = sample_key(spec, skel.universe(), kRangeIndexBase + q);
    const std::uint32_t alpha = static_cast<std::uint32_t>(
        1 + stream_below(cfg.seed, Stream::query_alpha, q, cfg.alpha_max));
    const Key width = range_width(skel.universe(), n_peers, alpha);
    const Key hi = std::min(lo + (width == 0 ? 0 : width - 1),
                            skel.universe().universe() - 1);
    try {
      RangeResult res = skel.range_search_from_cluster(start, lo, hi);
      range.record(res.trace);
      if (event_log) event_log->push_back(std::move(res.trace));
    } catch (const UnreachableAfterRepair&) {
      range.record_failure();
    }
  }
  MetricsReport report;
  report.rows.push_back(detail::make_row(skel, cfg, "query", "exact", exact));
  report.rows.push_back(detail::make_row(skel, cfg, "query", "range", range));
  return report;
}

// Seeded uniform join/leave churn.  Joins draw their key from the data
// distribution; departures pick a uniform live peer.  Lemma-style size
// violations (an empty cluster, a cluster past the polylog ceiling, or a
// departure that would empty a cluster) are counted per step.
inline MetricsReport run_churn_bench(ArtSkeleton& skel, const ExperimentConfig& cfg) {
  cfg.validate();
  const DistributionSpec spec = cfg.distribution_spec();
  const std::uint64_t n_total = skel.initial_peer_count();
  const std::uint64_t steps =
      cfg.churn_steps == kChurnAuto ? 10 * n_total : cfg.churn_steps;
  const double log2_total = std::log2(static_cast<double>(std::max<std::uint64_t>(n_total, 2)));
  const auto ceiling = static_cast<std::uint64_t>(8.0 * log2_total * log2_total);

  const std::string before = skel.snapshot();
  detail::PeerPicker picker(skel);
  detail::SizeTracker sizes(skel);
  HopLedger join;
  HopLedger leave;
  ChurnSummary churn;
  churn.steps = steps;
  churn.size_ceiling = ceiling;
  churn.max_cluster_size = sizes.max();
  churn.min_cluster_size = sizes.min();

  for (std::uint64_t step = 0; step < steps; ++step) {
    const bool do_join = (stream_value(cfg.seed, Stream::churn_coin, step) & 1) == 0;
    bool rejected = false;
    if (do_join) {
      const std::uint64_t r =
          stream_below(cfg.seed, Stream::churn_pick, step, picker.total());
      const auto [entrance, offset] = picker.pick(r);
      (void)offset;
      const Key w_key = sample_key(spec, skel.universe(), kChurnIndexBase + step);
      const std::uint64_t old_size =
          skel.cluster(skel.universe().cluster_for_key(w_key)).peer_count();
      try {
        JoinResult res = skel.join_peer_from_cluster(entrance, w_key);
        picker.add(res.cluster, +1);
        sizes.move(old_size, old_size + 1);
        join.record(res.trace);
      } catch (const DuplicatePeerPosition&) {
        ++churn.rejected_joins;
        rejected = true;
      }
    } else {
      const std::uint64_t r =
          stream_below(cfg.seed, Stream::churn_pick, step, picker.total());
      const auto [victim, offset] = picker.pick(r);
      const std::uint64_t old_size = skel.cluster(victim).peer_count();
      if (old_size <= 1) {
        // Departure would empty the cluster: reject and record.
        ++churn.rejected_departures;
        rejected = true;
      } else {
        RouteTrace trace = skel.leave_peer_at(victim, offset);
        picker.add(victim, -1);
        sizes.move(old_size, old_size - 1);
        leave.record(trace);
      }
    }
    if (sizes.min() == 0 || sizes.max() > ceiling || rejected) ++churn.violation_steps;
    churn.max_cluster_size = std::max(churn.max_cluster_size, sizes.max());
    churn.min_cluster_size = std::min(churn.min_cluster_size, sizes.min());
  }

  churn.snapshot_identical = (before == skel.snapshot());

  MetricsReport report;
  report.churn = churn;
  MetricsRow join_row = detail::make_row(skel, cfg, "churn", "join", join);
  MetricsRow leave_row = detail::make_row(skel, cfg, "churn", "leave", leave);
  join_row.violations = churn.violation_steps;
  leave_row.violations = churn.violation_steps;
  join_row.cluster_size_max = churn.max_cluster_size;
  leave_row.cluster_size_max = churn.max_cluster_size;
  report.rows.push_back(std::move(join_row));
  report.rows.push_back(std::move(leave_row));
  return report;
}

// Fail a fraction of the peers in seeded random order (no recovery), checking
// a lookup workload after every five-percent increment.  Success is counted
// over keys whose responsible cluster still has live peers.
inline MetricsReport run_failure_bench(ArtSkeleton& skel, const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.failure_fraction == 0.0) return run_query_bench(skel, cfg);
  const DistributionSpec spec = cfg.distribution_spec();

  HopLedger baseline;
  for (std::uint64_t q = 0; q < cfg.queries; ++q) {
    const ClusterId start = detail::pristine_start_cluster(skel, cfg, q);
    const Key k = sample_key(spec, skel.universe(), kExactIndexBase + q);
    SearchResult res = skel.exact_search_from_cluster(start, k);
    baseline.record(res.trace);
  }

  detail::PeerPicker picker(skel);
  const std::uint64_t n_total = skel.initial_peer_count();
  const auto to_fail = static_cast<std::uint64_t>(cfg.failure_fraction *
                                                  static_cast<double>(n_total));
  const std::uint64_t batch =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(0.05 * static_cast<double>(n_total)));

  FailureSummary summary;
  HopLedger degraded;
  std::uint64_t failed = 0;
  std::uint64_t round = 0;
  while (failed < to_fail) {
    const std::uint64_t quota = std::min(batch, to_fail - failed);
    for (std::uint64_t k = 0; k < quota; ++k) {
      const std::uint64_t r =
          stream_below(cfg.seed, Stream::fail_pick, failed + k, picker.total());
      const auto [victim, offset] = picker.pick(r);
      const FailureOutcome out = skel.fail_peer_at(victim, offset);
      picker.add(victim, -1);
      if (out.cluster_emptied) ++summary.skeleton_breaks;
    }
    failed += quota;
    ++round;
    for (std::uint64_t q = 0; q < cfg.queries; ++q) {
      const std::uint64_t qi = round * cfg.queries + q;
      const std::uint64_t r =
          stream_below(cfg.seed, Stream::query_start, qi, picker.total());
      const ClusterId start = picker.pick(r).first;
      const Key k = sample_key(spec, skel.universe(), kExactIndexBase + qi);
      const ClusterId target = skel.universe().cluster_for_key(k);
      if (skel.cluster(target).empty()) {
        ++summary.dead_target_lookups;  // no live owner; excluded
        continue;
      }
      try {
        SearchResult res = skel.exact_search_from_cluster(start, k);
        degraded.record(res.trace);
      } catch (const UnreachableAfterRepair&) {
        degraded.record_failure();
      }
    }
  }

  summary.failed_peers = failed;
  summary.baseline_mean = baseline.mean_total();
  summary.degraded_mean = degraded.mean_total();
  summary.inflation = summary.baseline_mean > 0.0
                          ? summary.degraded_mean / summary.baseline_mean
                          : 1.0;
  summary.degraded_success_rate = degraded.success_rate();

  MetricsReport report;
  report.failure = summary;
  report.rows.push_back(detail::make_row(skel, cfg, "failure", "exact", baseline));
  MetricsRow row = detail::make_row(skel, cfg, "failure", "exact_degraded", degraded);
  row.violations = summary.skeleton_breaks;
  report.rows.push_back(std::move(row));
  return report;
}

// Load data per the configured distribution and report how it spreads across
// clusters, plus the intra-cluster rebalance messages the overload events
// would trigger.
inline MetricsReport run_loadbal_bench(ArtSkeleton& skel, const ExperimentConfig& cfg) {
  cfg.validate();
  LoadSummary summary;
  summary.keys_loaded = load_data(skel, cfg);

  std::uint64_t max_keys = 0;
  std::uint64_t min_keys = ~std::uint64_t{0};
  double total_keys = 0.0;
  std::uint64_t events = 0;
  std::uint64_t messages = 0;
  HopLedger rebalance;
  for (ClusterId c = 1; c <= skel.cluster_count(); ++c) {
    const ClusterPeer& cl = skel.cluster(c);
    const std::uint64_t keys = cl.key_count();
    max_keys = std::max(max_keys, keys);
    min_keys = std::min(min_keys, keys);
    total_keys += static_cast<double>(keys);
    if (cl.empty()) continue;
    const double mean = static_cast<double>(keys) / static_cast<double>(cl.peer_count());
    const double threshold = 2.0 * std::max(1.0, mean);
    const auto per_event = static_cast<std::uint32_t>(
        cl.inner_kind() == InnerKind::direct_oracle
            ? 1
            : std::floor(std::log2(static_cast<double>(cl.peer_count()))) + 1);
    for (std::size_t p = 0; p < cl.peer_count(); ++p) {
      if (static_cast<double>(cl.peer_key_count(p)) > threshold) {
        ++events;
        messages += per_event;
        RouteTrace t;
        t.add_intra(c, per_event);
        rebalance.record(t);
      }
    }
  }
  summary.max_cluster_keys = max_keys;
  summary.min_cluster_keys = min_keys == ~std::uint64_t{0} ? 0 : min_keys;
  summary.mean_cluster_keys = total_keys / static_cast<double>(skel.cluster_count());
  summary.overload_events = events;
  summary.rebalance_messages = messages;

  MetricsReport report;
  report.load = summary;
  MetricsRow row = detail::make_row(skel, cfg, "load", "load", rebalance);
  row.violations = events;
  row.cluster_size_max = max_keys;
  report.rows.push_back(std::move(row));
  return report;
}

}  // namespace art
