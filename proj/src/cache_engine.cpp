#include "semcache/cache_engine.hpp"

#include <stdexcept>
#include <string>

#include "semcache/errors.hpp"

namespace semcache {

SemanticCache::SemanticCache(CacheConfig config, std::unique_ptr<Policy> policy)
    : config_(config), policy_(std::move(policy)), index_(config.dim) {
  if (config_.capacity == 0) throw ConfigError("cache capacity must be at least 1");
  if (!policy_) throw std::invalid_argument("cache requires a policy");
}

RequestOutcome SemanticCache::process(std::span<const float> vector,
                                      std::optional<float> surprisal) {
  if (vector.size() != config_.dim) {
    throw DataError("request dimension " + std::to_string(vector.size()) +
                    " does not match cache dimension " + std::to_string(config_.dim));
  }
  if (config_.require_normalized && !is_unit(vector)) {
    throw DataError("request " + std::to_string(next_request_) + " is not unit-norm");
  }
  if (surprisal && !(*surprisal >= 0.0f)) {
    throw DataError("request " + std::to_string(next_request_) + " has negative surprisal");
  }

  RequestOutcome out;
  out.request_index = next_request_++;
  out.neighbors = index_.query_range(vector, config_.threshold);

  if (!out.neighbors.empty()) {
    out.hit = true;
    out.top = out.neighbors.front();
    ++hits_;
    hit_distance_sum_ += out.top->dist;
    policy_->on_hit(HitEvent{vector, *out.top, out.neighbors, out.request_index});
  } else {
    const bool was_full = full();
    const PolicyDecision decision =
        policy_->on_miss(MissEvent{vector, surprisal, out.request_index, was_full});
    if (decision.victim) {
      if (!decision.admit || !was_full) {
        throw std::logic_error(std::string(policy_->name()) +
                               ": victim named without a full-cache admission");
      }
      if (!index_.contains(*decision.victim)) {
        throw std::logic_error(std::string(policy_->name()) + ": victim " +
                               std::to_string(decision.victim->value) + " is not cached");
      }
      index_.remove(*decision.victim);
      policy_->on_evict(*decision.victim);
      out.evicted = decision.victim;
    } else if (decision.admit && was_full) {
      throw std::logic_error(std::string(policy_->name()) +
                             ": admitted into a full cache without a victim");
    }
    if (decision.admit) {
      const EntryId id = index_.insert(vector);
      policy_->on_insert(CacheEntry{id, index_.vector(id), surprisal, out.request_index});
      out.inserted = true;
    }
  }
  policy_->on_request_complete(out.request_index);
  if (index_.size() > config_.capacity) {
    throw std::logic_error("cache size exceeded capacity");
  }
  return out;
}

RequestOutcome SemanticCache::process_request(const TraceEntry& entry) {
  return process(entry.vector, entry.surprisal);
}

std::vector<RequestOutcome> SemanticCache::batch_process(std::span<const TraceEntry> entries) {
  std::vector<RequestOutcome> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(process_request(e));
  return out;
}

}  // namespace semcache
