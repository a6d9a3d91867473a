#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "art/route_trace.hpp"

// Per-operation message accounting, aggregated as an exact histogram over
// total hop counts (hops are small integers, so percentiles are exact and
// recomputable from any raw event log).

namespace art {

struct HopStats {
  double mean = 0.0;
  double p50 = 0.0;
  double p99 = 0.0;
  std::uint64_t max = 0;
};

class HopLedger {
 public:
  static constexpr std::size_t kBins = 512;

  void record(const RouteTrace& trace) {
    const std::uint64_t total = trace.total_hops();
    ++count_;
    sum_total_ += total;
    sum_skeleton_ += trace.skeleton_hops;
    sum_intra_ += trace.intra_hops;
    sum_retries_ += trace.retries;
    if (total > max_total_) max_total_ = total;
    if (trace.skeleton_hops > max_skeleton_) max_skeleton_ = trace.skeleton_hops;
    ++bins_[total < kBins ? total : kBins - 1];
    if (trace.success)
      ++successes_;
    else
      ++failures_;
  }

  void record_failure() {
    ++count_;
    ++failures_;
  }

  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t successes() const noexcept { return successes_; }
  std::uint64_t failures() const noexcept { return failures_; }
  std::uint64_t total_hop_sum() const noexcept { return sum_total_; }
  std::uint64_t skeleton_hop_sum() const noexcept { return sum_skeleton_; }
  std::uint64_t intra_hop_sum() const noexcept { return sum_intra_; }
  std::uint64_t retry_sum() const noexcept { return sum_retries_; }
  std::uint64_t max_skeleton_hops() const noexcept { return max_skeleton_; }

  double success_rate() const noexcept {
    const std::uint64_t n = successes_ + failures_;
    return n == 0 ? 1.0 : static_cast<double>(successes_) / static_cast<double>(n);
  }

  double mean_total() const noexcept {
    const std::uint64_t n = recorded();
    return n == 0 ? 0.0 : static_cast<double>(sum_total_) / static_cast<double>(n);
  }

  double mean_skeleton() const noexcept {
    const std::uint64_t n = recorded();
    return n == 0 ? 0.0 : static_cast<double>(sum_skeleton_) / static_cast<double>(n);
  }

  HopStats stats() const noexcept {
    HopStats s;
    s.mean = mean_total();
    s.p50 = percentile(0.50);
    s.p99 = percentile(0.99);
    s.max = max_total_;
    return s;
  }

 private:
  std::uint64_t recorded() const noexcept {
    std::uint64_t n = 0;
    for (const auto b : bins_) n += b;
    return n;
  }

  double percentile(double q) const noexcept {
    const std::uint64_t n = recorded();
    if (n == 0) return 0.0;
    const auto rank = static_cast<std::uint64_t>(q * static_cast<double>(n - 1));
    std::uint64_t seen = 0;
    for (std::size_t h = 0; h < kBins; ++h) {
      seen += bins_[h];
      if (seen > rank) return static_cast<double>(h);
    }
    return static_cast<double>(kBins - 1);
  }

  std::array<std::uint64_t, kBins> bins_{};
  std::uint64_t count_ = 0;
  std::uint64_t successes_ = 0;
  std::uint64_t failures_ = 0;
  std::uint64_t sum_total_ = 0;
  std::uint64_t sum_skeleton_ = 0;
  std::uint64_t sum_intra_ = 0;
  std::uint64_t sum_retries_ = 0;
  std::uint64_t max_total_ = 0;
  std::uint64_t max_skeleton_ = 0;
};

}  // namespace art
