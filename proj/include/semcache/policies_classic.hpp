#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <list>
#include <optional>
#include <random>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semcache/flat_index.hpp"
#include "semcache/ordered_keys.hpp"
#include "semcache/policy.hpp"

namespace semcache {

using Rng = std::mt19937_64;

/// Evicts the oldest insertion.
class FifoPolicy : public EvictionPolicy {
 public:
  std::string_view name() const noexcept override { return "fifo"; }
  void on_hit(const HitEvent&) override {}
  void on_insert(const CacheEntry& e) override { resident_.insert(e.id); }
  void on_evict(EntryId id) override { resident_.erase(id); }
  EntryId choose_victim() override;

 private:
  std::set<EntryId> resident_;
};

/// Evicts a uniformly random resident. Residents are indexed in ascending id
/// order before drawing, so a seed fixes the victim sequence.
class RandomPolicy : public EvictionPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  std::string_view name() const noexcept override { return "random"; }
  void on_hit(const HitEvent&) override {}
  void on_insert(const CacheEntry& e) override { resident_.insert(e.id); }
  void on_evict(EntryId id) override { resident_.erase(id); }
  EntryId choose_victim() override;

 private:
  Rng rng_;
  std::set<EntryId> resident_;
};

class LruPolicy : public EvictionPolicy {
 public:
  std::string_view name() const noexcept override { return "lru"; }
  void on_hit(const HitEvent& ev) override { last_.set(ev.top.id, ev.request_index); }
  void on_insert(const CacheEntry& e) override { last_.set(e.id, e.inserted_at); }
  void on_evict(EntryId id) override { last_.erase(id); }
  EntryId choose_victim() override { return last_.min(); }

  std::size_t last_access(EntryId id) const { return last_.key(id); }

 private:
  OrderedKeys<std::size_t> last_;
};

/// Counters start at 0 on insertion and count hits on the top item.
class LfuPolicy : public EvictionPolicy {
 public:
  std::string_view name() const noexcept override { return "lfu"; }
  void on_hit(const HitEvent& ev) override;
  void on_insert(const CacheEntry& e) override { freq_.set(e.id, 0.0); }
  void on_evict(EntryId id) override { freq_.erase(id); }
  EntryId choose_victim() override { return freq_.min(); }

  double frequency(EntryId id) const { return freq_.key(id); }

 protected:
  OrderedKeys<double> freq_;
};

/// LFU with dynamic aging: key = hits + L, and L takes the key of each victim.
class LfudaPolicy : public EvictionPolicy {
 public:
  std::string_view name() const noexcept override { return "lfuda"; }
  void on_hit(const HitEvent& ev) override;
  void on_insert(const CacheEntry& e) override;
  void on_evict(EntryId id) override;
  EntryId choose_victim() override { return keys_.min(); }

  double age() const noexcept { return age_; }
  double priority(EntryId id) const { return keys_.key(id); }

 private:
  double age_ = 0.0;
  std::unordered_map<EntryId, double> hits_;
  OrderedKeys<double> keys_;
};

/// Evicts the entry whose K-th most recent access is oldest. Entries with
/// fewer than K accesses go first, in LRU order. Insertion counts as access.
class LruKPolicy : public EvictionPolicy {
 public:
  explicit LruKPolicy(std::size_t k);
  std::string_view name() const noexcept override { return "lru-k"; }
  void on_hit(const HitEvent& ev) override { touch(ev.top.id, ev.request_index); }
  void on_insert(const CacheEntry& e) override { touch(e.id, e.inserted_at); }
  void on_evict(EntryId id) override;
  EntryId choose_victim() override { return keys_.min(); }

  std::size_t k() const noexcept { return k_; }

 private:
  void touch(EntryId id, std::size_t when);

  std::size_t k_;
  std::unordered_map<EntryId, std::deque<std::size_t>> history_;  // most recent first
  // (K-th access + 1 or 0 when history is short, last access)
  OrderedKeys<std::pair<std::size_t, std::size_t>> keys_;
};

/// Adaptive Replacement Cache. Ghost lists keep copies of evicted vectors; a
/// missed request whose nearest ghost lies within the threshold counts as a
/// ghost hit on that ghost.
class ArcPolicy : public Policy {
 public:
  ArcPolicy(std::size_t capacity, std::size_t dim, Threshold threshold);

  std::string_view name() const noexcept override { return "arc"; }
  void on_hit(const HitEvent& ev) override;
  PolicyDecision on_miss(const MissEvent& ev) override;
  void on_insert(const CacheEntry& e) override;
  void on_evict(EntryId id) override;

  std::size_t t1_size() const noexcept { return t1_.size(); }
  std::size_t t2_size() const noexcept { return t2_.size(); }
  std::size_t b1_size() const noexcept { return b1_.size(); }
  std::size_t b2_size() const noexcept { return b2_.size(); }
  double target() const noexcept { return p_; }
  bool in_t1(EntryId id) const noexcept { return where_.contains(id) && where_.at(id).list == List::T1; }
  bool in_t2(EntryId id) const noexcept { return where_.contains(id) && where_.at(id).list == List::T2; }

 private:
  enum class List { T1, T2, B1, B2 };
  struct Slot {
    List list;
    std::list<EntryId>::iterator pos;
  };

  std::list<EntryId>& list_of(List l);
  void push_mru(List l, EntryId id);
  void unlink(EntryId id);
  void add_ghost(List l, EntryId id, std::span<const float> v);
  void drop_ghost_lru(List l);
  EntryId replace(bool ghost_in_b2);

  std::size_t c_;
  Threshold threshold_;
  double p_ = 0.0;
  // LRU at front, MRU at back.
  std::list<EntryId> t1_, t2_, b1_, b2_;
  std::unordered_map<EntryId, Slot> where_;
  FlatIndex ghost_vectors_;
  std::unordered_map<EntryId, EntryId> ghost_slot_;  // entry id -> ghost index id
  std::unordered_map<EntryId, EntryId> ghost_owner_;  // ghost index id -> entry id
  std::unordered_map<EntryId, std::vector<float>> resident_vectors_;

  // Set by on_miss, consumed by on_evict / on_insert.
  std::optional<List> pending_victim_dest_;
  bool pending_to_t2_ = false;
};

/// True with probability 1/(c+1).
bool rap_admit(double c, Rng& rng);

/// LFU whose replacement of the least-frequent entry (counter C) happens only
/// with probability 1/(C+1); otherwise the missed request is not admitted.
class RapPolicy : public LfuPolicy {
 public:
  explicit RapPolicy(std::uint64_t seed) : rng_(seed) {}
  std::string_view name() const noexcept override { return "rap"; }
  PolicyDecision on_miss(const MissEvent& ev) override;

 private:
  Rng rng_;
};

}  // namespace semcache
