#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "semcache/flat_index.hpp"
#include "semcache/policy.hpp"
#include "semcache/trace.hpp"
#include "semcache/vector_core.hpp"

namespace semcache {

struct CacheConfig {
  std::size_t dim = 0;
  std::size_t capacity = 0;
  Threshold threshold{0.9};
  /// Reject requests whose vector is not unit-norm. Off for raw-vector traces.
  bool require_normalized = true;
};

struct RequestOutcome {
  bool hit = false;
  std::optional<Neighbor> top;
  std::vector<Neighbor> neighbors;
  std::size_t request_index = 0;
  bool inserted = false;
  std::optional<EntryId> evicted;
};

/// Semantic cache: a request hits if any stored vector lies strictly within
/// the threshold. Each request is one atomic query + update cycle.
class SemanticCache {
 public:
  SemanticCache(CacheConfig config, std::unique_ptr<Policy> policy);

  const CacheConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return index_.size(); }
  bool full() const noexcept { return index_.size() >= config_.capacity; }
  const FlatIndex& index() const noexcept { return index_; }
  Policy& policy() noexcept { return *policy_; }
  const Policy& policy() const noexcept { return *policy_; }

  /// Requests are indexed by arrival order starting at 0; that counter is the
  /// only clock the policies see.
  RequestOutcome process(std::span<const float> vector,
                         std::optional<float> surprisal = std::nullopt);
  RequestOutcome process_request(const TraceEntry& entry);
  std::vector<RequestOutcome> batch_process(std::span<const TraceEntry> entries);

  std::size_t requests() const noexcept { return next_request_; }
  std::size_t hits() const noexcept { return hits_; }
  double hit_distance_sum() const noexcept { return hit_distance_sum_; }

 private:
  CacheConfig config_;
  std::unique_ptr<Policy> policy_;
  FlatIndex index_;
  std::size_t next_request_ = 0;
  std::size_t hits_ = 0;
  double hit_distance_sum_ = 0.0;
};

}  // namespace semcache
