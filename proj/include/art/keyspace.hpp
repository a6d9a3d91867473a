#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "art/errors.hpp"
#include "art/rng.hpp"

// Key-to-peer and key-to-cluster mapping plus the seeded workload
// distributions.  Keys are 0-based integers in [0, U-1] internally; reports
// present the 1-based universe.

namespace art {

using Key = std::uint64_t;
using PeerId = std::uint64_t;
using ClusterId = std::uint64_t;

// Sizing of a deployment: peers cover spans of S consecutive keys, clusters
// cover spans of S^2.
class KeyUniverse {
 public:
  // Paper-style sizing: S = ceil(ln n) for a deployment expected to hold n
  // keys.
  static KeyUniverse for_deployment(Key universe, std::uint64_t n) {
    if (universe == 0 || n < 2) throw Error("universe and key count must be positive");
    const auto s = static_cast<Key>(std::ceil(std::log(static_cast<double>(n))));
    return KeyUniverse(universe, s < 1 ? 1 : s);
  }

  // Benchmark sizing: pick the span so that the universe tiles into exactly
  // n_clusters cluster ranges near the requested universe size.
  static KeyUniverse for_cluster_count(std::uint64_t n_clusters, Key universe_hint) {
    if (n_clusters == 0) throw Error("cluster count must be positive");
    const double per = static_cast<double>(universe_hint) / static_cast<double>(n_clusters);
    auto s = static_cast<Key>(std::llround(std::sqrt(per > 1.0 ? per : 1.0)));
    if (s < 1) s = 1;
    return KeyUniverse(n_clusters * s * s, s);
  }

  KeyUniverse(Key universe, Key peer_span) : universe_(universe), span_(peer_span) {
    if (universe_ == 0 || span_ == 0) throw Error("universe and span must be positive");
  }

  Key universe() const noexcept { return universe_; }
  Key peer_span() const noexcept { return span_; }
  Key cluster_span() const noexcept { return span_ * span_; }

  std::uint64_t peer_count() const noexcept {
    return (universe_ + span_ - 1) / span_;
  }
  std::uint64_t cluster_count() const noexcept {
    return (universe_ + cluster_span() - 1) / cluster_span();
  }
  // Peers each cluster starts with.
  std::uint64_t peers_per_cluster() const noexcept { return span_; }

  bool contains(Key k) const noexcept { return k < universe_; }

  // Peer i covers keys [(i-1)*S, i*S - 1].
  PeerId peer_for_key(Key k) const {
    require(k);
    return k / span_ + 1;
  }

  // Cluster i' covers keys [(i'-1)*S^2, i'*S^2 - 1].
  ClusterId cluster_for_key(Key k) const {
    require(k);
    return k / cluster_span() + 1;
  }

  std::pair<Key, Key> cluster_key_range(ClusterId c) const {
    const Key lo = (c - 1) * cluster_span();
    if (c == 0 || lo >= universe_) throw UnknownCluster(c);
    const Key hi = std::min(lo + cluster_span() - 1, universe_ - 1);
    return {lo, hi};
  }

 private:
  void require(Key k) const {
    if (k >= universe_) throw KeyOutOfUniverse(k);
  }

  Key universe_;
  Key span_;
};

enum class DistKind { uniform, normal, beta, power_law };

inline const char* to_string(DistKind k) {
  switch (k) {
    case DistKind::uniform: return "uniform";
    case DistKind::normal: return "normal";
    case DistKind::beta: return "beta";
    case DistKind::power_law: return "power-law";
  }
  return "?";
}

// A workload distribution; sampling is a pure function of (spec, index).
// Unset parameters (0) fall back to documented defaults at sample time:
// normal(mu = U/2, sigma = U/8), beta(2, 2), power-law(exponent 2).
struct DistributionSpec {
  DistKind kind = DistKind::uniform;
  double p1 = 0.0;
  double p2 = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    switch (kind) {
      case DistKind::uniform:
        break;
      case DistKind::normal:
        if (p2 < 0.0)
          throw InvalidDistributionParameters("normal sigma must be positive");
        break;
      case DistKind::beta:
        if (p1 < 0.0 || p2 < 0.0)
          throw InvalidDistributionParameters("beta parameters must be positive");
        break;
      case DistKind::power_law:
        if (p1 != 0.0 && p1 <= 1.0)
          throw InvalidDistributionParameters("power-law exponent must exceed 1");
        break;
    }
  }
};

namespace detail {

inline double gamma_draw(SplitMix64& rng, double shape) {
  // Marsaglia-Tsang; shapes below 1 via the boost X = G(a+1) * U^(1/a).
  if (shape < 1.0) {
    const double u = rng.next_open_double();
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x;
    double v;
    do {
      const double u1 = rng.next_open_double();
      const double u2 = rng.next_open_double();
      x = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_open_double();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

inline Key clamp_key(double x, Key universe) {
  if (x < 0.0) return 0;
  const double top = static_cast<double>(universe) - 1.0;
  if (x > top) return universe - 1;
  return static_cast<Key>(x);
}

}  // namespace detail

// The index-th key of a workload stream.
inline Key sample_key(const DistributionSpec& spec, const KeyUniverse& u,
                      std::uint64_t index) {
  spec.validate();
  const Key universe = u.universe();
  SplitMix64 rng(stream_value(spec.seed, Stream::key_draw, index));
  switch (spec.kind) {
    case DistKind::uniform:
      return rng.next_below(universe);
    case DistKind::normal: {
      const double mu = spec.p1 != 0.0 ? spec.p1 : static_cast<double>(universe) / 2.0;
      const double sigma = spec.p2 != 0.0 ? spec.p2 : static_cast<double>(universe) / 8.0;
      // Truncated: retry a few times, then clamp.
      for (int attempt = 0; attempt < 16; ++attempt) {
        const double u1 = rng.next_open_double();
        const double u2 = rng.next_open_double();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        const double x = mu + sigma * z;
        if (x >= 0.0 && x < static_cast<double>(universe)) return static_cast<Key>(x);
      }
      return detail::clamp_key(mu, universe);
    }
    case DistKind::beta: {
      const double a = spec.p1 != 0.0 ? spec.p1 : 2.0;
      const double b = spec.p2 != 0.0 ? spec.p2 : 2.0;
      const double ga = detail::gamma_draw(rng, a);
      const double gb = detail::gamma_draw(rng, b);
      const double x = ga / (ga + gb);
      return detail::clamp_key(x * static_cast<double>(universe), universe);
    }
    case DistKind::power_law: {
      const double a = spec.p1 != 0.0 ? spec.p1 : 2.0;
      // Inverse CDF of a Pareto on [1, U], truncated at the universe edge.
      const double xmax = static_cast<double>(universe);
      const double uu = rng.next_double();
      const double one_minus_a = 1.0 - a;
      const double x = std::pow(1.0 - uu * (1.0 - std::pow(xmax, one_minus_a)),
                                1.0 / one_minus_a);
      return detail::clamp_key(x - 1.0, universe);
    }
  }
  throw InvalidDistributionParameters("unhandled distribution kind");
}

inline std::vector<Key> sample_keys(const DistributionSpec& spec, const KeyUniverse& u,
                                    std::uint64_t count) {
  std::vector<Key> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(sample_key(spec, u, i));
  return out;
}

// Width of a benchmark range query: the universe divided by the peer count,
// scaled by alpha.
inline Key range_width(const KeyUniverse& u, std::uint64_t total_peers,
                       std::uint32_t alpha) {
  if (total_peers == 0) throw Error("range width needs at least one peer");
  return (u.universe() / total_peers) * alpha;
}

}  // namespace art
