#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "semcache/flat_index.hpp"

namespace semcache {

/// What a policy sees about a freshly stored entry. The vector view is only
/// valid for the duration of the callback.
struct CacheEntry {
  EntryId id;
  std::span<const float> vector;
  std::optional<float> surprisal;
  std::size_t inserted_at = 0;
};

struct HitEvent {
  std::span<const float> query;
  const Neighbor& top;
  std::span<const Neighbor> neighbors;  // full in-threshold neighborhood, top first
  std::size_t request_index = 0;
};

struct MissEvent {
  std::span<const float> query;
  std::optional<float> surprisal;
  std::size_t request_index = 0;
  bool cache_full = false;
};

/// Admission verdict for a missed request. A victim is named only when the
/// cache is full and the request is admitted.
struct PolicyDecision {
  bool admit = true;
  std::optional<EntryId> victim;
};

/// Replacement policy driven by SemanticCache.
///
/// Per request the cache calls exactly one of on_hit / on_miss, then on_evict
/// for the victim (if any), then on_insert for the admitted entry (if any),
/// then on_request_complete.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string_view name() const noexcept = 0;
  virtual bool requires_surprisal() const noexcept { return false; }

  virtual void on_hit(const HitEvent& ev) = 0;
  virtual PolicyDecision on_miss(const MissEvent& ev) = 0;
  virtual void on_insert(const CacheEntry& entry) = 0;
  virtual void on_evict(EntryId id) = 0;
  virtual void on_request_complete(std::size_t /*request_index*/) {}
};

/// Policies that always admit and only choose a victim when full.
class EvictionPolicy : public Policy {
 public:
  PolicyDecision on_miss(const MissEvent& ev) override {
    if (!ev.cache_full) return {};
    return {true, choose_victim()};
  }

  /// Precondition: at least one entry is tracked.
  virtual EntryId choose_victim() = 0;
};

}  // namespace semcache
