#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

#include "art/errors.hpp"
#include "art/keyspace.hpp"

// The organization of the peers inside one cluster-peer.  Peers partition the
// cluster's key range into contiguous sub-ranges; the inner overlay contract
// is "locate the peer responsible for a key and report how many messages that
// took".  Two hop models implement the contract:
//
//   finger-ring   peers on a ring ordered by sub-range start with successor
//                 links and fingers at power-of-two distances; locating a peer
//                 d positions away costs popcount(d) hops, at most
//                 floor(log2 B) + 1 for B peers.
//   direct-oracle every peer knows the full directory; locate costs exactly
//                 one hop (zero when the asking peer is responsible).  Used to
//                 isolate skeleton hops in measurements.
//
// A freshly built cluster keeps its initial uniform peer layout implicit (one
// peer per S-key span) and only materializes explicit peer records when churn
// or data first touches it.

namespace art {

enum class InnerKind : std::uint8_t { finger_ring, direct_oracle };

inline const char* to_string(InnerKind k) {
  return k == InnerKind::finger_ring ? "finger-ring" : "direct-oracle";
}

struct InnerPeer {
  PeerId id;
  Key lo;                  // first key of the sub-range; the end is implicit
  std::vector<Key> keys;   // stored keys, sorted
};

struct LocateResult {
  PeerId peer = 0;
  std::size_t index = 0;
  std::uint32_t hops = 0;
};

class ClusterPeer {
 public:
  ClusterPeer() = default;

  ClusterPeer(ClusterId id, Key lo, Key hi, PeerId first_peer, std::uint64_t peer_count,
              Key pristine_span, InnerKind kind)
      : id_(id), lo_(lo), hi_(hi), kind_(kind), first_pristine_(first_peer),
        pristine_count_(peer_count), pristine_span_(pristine_span) {}

  ClusterId id() const noexcept { return id_; }
  Key key_lo() const noexcept { return lo_; }
  Key key_hi() const noexcept { return hi_; }
  InnerKind inner_kind() const noexcept { return kind_; }

  std::uint64_t peer_count() const noexcept {
    return materialized_ ? peers_.size() : pristine_count_;
  }
  std::uint64_t key_count() const noexcept { return key_count_; }
  bool empty() const noexcept { return peer_count() == 0; }

  // Lowest-key live peer; re-elected implicitly on departure or failure.
  PeerId representative() const {
    if (empty()) throw EmptyCluster("cluster " + std::to_string(id_) + " has no peers");
    return materialized_ ? peers_.front().id : first_pristine_;
  }

  bool has_peer(PeerId p) const noexcept {
    if (!materialized_)
      return p >= first_pristine_ && p < first_pristine_ + pristine_count_;
    for (const auto& peer : peers_)
      if (peer.id == p) return true;
    return false;
  }

  PeerId peer_id_at(std::size_t index) const {
    return materialized_ ? peers_[index].id : first_pristine_ + index;
  }

  // Responsible peer for k, asked from the representative.
  LocateResult locate(Key k) const { return locate_from(0, k); }

  LocateResult locate_from(std::size_t from_index, Key k) const {
    if (empty()) throw EmptyCluster("cluster " + std::to_string(id_) + " has no peers");
    if (k < lo_ || k > hi_)
      throw KeyOutsideCluster("key " + std::to_string(k) + " outside cluster " +
                              std::to_string(id_));
    const std::size_t target = owner_index(k);
    return {peer_id_at(target), target, walk_hops(from_index, target)};
  }

  // Insert (delete) a key at its responsible peer; reports whether the
  // multiset changed plus the messages spent.
  std::uint32_t insert_key(Key k, bool& inserted) {
    materialize();
    const LocateResult at = locate(k);
    auto& keys = peers_[at.index].keys;
    const auto it = std::lower_bound(keys.begin(), keys.end(), k);
    inserted = (it == keys.end() || *it != k);
    if (inserted) {
      keys.insert(it, k);
      ++key_count_;
    }
    return at.hops;
  }

  std::uint32_t delete_key(Key k, bool& deleted) {
    materialize();
    const LocateResult at = locate(k);
    auto& keys = peers_[at.index].keys;
    const auto it = std::lower_bound(keys.begin(), keys.end(), k);
    deleted = (it != keys.end() && *it == k);
    if (deleted) {
      keys.erase(it);
      --key_count_;
    }
    return at.hops;
  }

  // Place a key at its responsible peer without message accounting (batch
  // loading).
  void place_key(Key k) {
    materialize();
    auto& keys = peers_[owner_index(k)].keys;
    const auto it = std::lower_bound(keys.begin(), keys.end(), k);
    if (it == keys.end() || *it != k) {
      keys.insert(it, k);
      ++key_count_;
    }
  }

  // New peer enters at the position of anchor's owner and takes the lower
  // half of that owner's sub-range, split at the owner's median stored key
  // (midpoint of the span when the owner holds no keys).
  std::uint32_t add_peer(PeerId id, Key anchor) {
    if (anchor < lo_ || anchor > hi_)
      throw KeyOutsideCluster("anchor " + std::to_string(anchor) +
                              " outside cluster " + std::to_string(id_));
    materialize();
    if (peers_.empty()) {
      peers_.push_back({id, lo_, {}});
      return 0;
    }
    const std::size_t owner = owner_index(anchor);
    const std::uint32_t hops = walk_hops(0, owner);
    InnerPeer& split = peers_[owner];
    const Key owner_hi = sub_range_hi(owner);

    Key cut = 0;
    bool have_cut = false;
    if (!split.keys.empty()) {
      const Key median = split.keys[split.keys.size() / 2];
      if (median > split.lo && median <= owner_hi) {
        cut = median;
        have_cut = true;
      }
    }
    if (!have_cut) {
      if (owner_hi == split.lo)
        throw DuplicatePeerPosition("sub-range at key " + std::to_string(anchor) +
                                    " cannot split further");
      cut = split.lo + (owner_hi - split.lo + 1) / 2;
    }

    InnerPeer fresh{id, split.lo, {}};
    const auto mid = std::lower_bound(split.keys.begin(), split.keys.end(), cut);
    fresh.keys.assign(split.keys.begin(), mid);
    split.keys.erase(split.keys.begin(), mid);
    split.lo = cut;
    peers_.insert(peers_.begin() + static_cast<std::ptrdiff_t>(owner), std::move(fresh));
    return hops;
  }

  // Graceful departure: keys merge into the successor (predecessor for the
  // last peer).  Removing the final peer is escalated, never executed.
  std::uint32_t remove_peer(PeerId id) {
    materialize();
    return remove_peer_at(index_of(id));
  }

  std::uint32_t remove_peer_at(std::size_t index) {
    materialize();
    if (peers_.size() == 1) throw LastPeerInCluster(id_);
    const std::uint32_t hops = walk_hops(0, index);
    merge_out(index, /*keep_keys=*/true);
    return hops;
  }

  // Crash: the peer's sub-range passes to its neighbour but the stored keys
  // are lost.  Failing the last peer empties the cluster.
  std::uint64_t fail_peer(PeerId id) {
    materialize();
    return fail_peer_at(index_of(id));
  }

  std::uint64_t fail_peer_at(std::size_t index) {
    materialize();
    const std::uint64_t lost = peers_[index].keys.size();
    if (peers_.size() == 1) {
      key_count_ = 0;
      peers_.clear();
      return lost;
    }
    merge_out(index, /*keep_keys=*/false);
    return lost;
  }

  // Keys in [ka, kb] stored by the peer at index, appended in order.
  void collect_range(std::size_t index, Key ka, Key kb, std::vector<Key>& out) const {
    if (!materialized_) return;  // pristine clusters hold no keys
    const auto& keys = peers_[index].keys;
    auto it = std::lower_bound(keys.begin(), keys.end(), ka);
    for (; it != keys.end() && *it <= kb; ++it) out.push_back(*it);
  }

  Key sub_range_lo(std::size_t index) const {
    return materialized_ ? peers_[index].lo : lo_ + index * pristine_span_;
  }

  Key sub_range_hi(std::size_t index) const {
    if (!materialized_)
      return index + 1 < pristine_count_ ? lo_ + (index + 1) * pristine_span_ - 1 : hi_;
    return index + 1 < peers_.size() ? peers_[index + 1].lo - 1 : hi_;
  }

  std::uint64_t peer_key_count(std::size_t index) const {
    return materialized_ ? peers_[index].keys.size() : 0;
  }

  std::size_t owner_index(Key k) const {
    if (!materialized_) {
      const std::size_t idx = static_cast<std::size_t>((k - lo_) / pristine_span_);
      return idx < pristine_count_ ? idx : pristine_count_ - 1;
    }
    // Last peer whose sub-range start is <= k.
    std::size_t lo = 0;
    std::size_t hi = peers_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (peers_[mid].lo <= k)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

  void materialize() {
    if (materialized_) return;
    peers_.reserve(pristine_count_);
    for (std::uint64_t i = 0; i < pristine_count_; ++i)
      peers_.push_back({first_pristine_ + i, lo_ + i * pristine_span_, {}});
    materialized_ = true;
  }

  bool materialized() const noexcept { return materialized_; }

 private:
  std::size_t index_of(PeerId id) const {
    for (std::size_t i = 0; i < peers_.size(); ++i)
      if (peers_[i].id == id) return i;
    throw UnknownPeer(id);
  }

  void merge_out(std::size_t index, bool keep_keys) {
    InnerPeer leaving = std::move(peers_[index]);
    peers_.erase(peers_.begin() + static_cast<std::ptrdiff_t>(index));
    const std::size_t heir = index < peers_.size() ? index : index - 1;
    InnerPeer& next = peers_[heir];
    if (heir == index) next.lo = leaving.lo;  // successor absorbs the range
    if (keep_keys && !leaving.keys.empty()) {
      std::vector<Key> merged;
      merged.reserve(next.keys.size() + leaving.keys.size());
      std::merge(next.keys.begin(), next.keys.end(), leaving.keys.begin(),
                 leaving.keys.end(), std::back_inserter(merged));
      next.keys = std::move(merged);
    } else if (!keep_keys) {
      key_count_ -= leaving.keys.size();
    }
  }

  // Messages to reach peer `to` from peer `from` along the ring.
  std::uint32_t walk_hops(std::size_t from, std::size_t to) const {
    if (from == to) return 0;
    const std::uint64_t n = peer_count();
    const std::uint64_t d = to >= from ? to - from : n - (from - to);
    if (kind_ == InnerKind::direct_oracle) return 1;
    return static_cast<std::uint32_t>(std::popcount(d));
  }

  ClusterId id_ = 0;
  Key lo_ = 0;
  Key hi_ = 0;
  InnerKind kind_ = InnerKind::finger_ring;
  bool materialized_ = false;
  PeerId first_pristine_ = 0;
  std::uint64_t pristine_count_ = 0;
  Key pristine_span_ = 1;
  std::vector<InnerPeer> peers_;
  std::uint64_t key_count_ = 0;
};

}  // namespace art
