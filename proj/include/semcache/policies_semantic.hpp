#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semcache/ordered_keys.hpp"
#include "semcache/policies_classic.hpp"
#include "semcache/policy.hpp"
#include "semcache/vector_core.hpp"

namespace semcache {

struct ClusterId {
  std::uint64_t value = 0;
  auto operator<=>(const ClusterId&) const = default;
};

}  // namespace semcache

template <>
struct std::hash<semcache::ClusterId> {
  std::size_t operator()(const semcache::ClusterId& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};

namespace semcache {

// ---------------------------------------------------------------------------
// SphereLFU
// ---------------------------------------------------------------------------

/// Soft-frequency kernel parameters. halve_every == 0 disables the periodic
/// rescaling of all counters; top_k limits how many nearest neighbors share
/// the unit of mass each hit distributes.
struct SphereParams {
  double kappa = 8.0;
  double alpha = 1.0;
  double gamma = 1.0;
  std::optional<std::size_t> top_k;
  std::size_t halve_every = 0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct SphereNeighbor {
  EntryId id;
  double dist = 0.0;
  double counter = 0.0;
};

struct Responsibility {
  EntryId id;
  double r = 0.0;
};

/// Posterior share of each neighbor under a (c + alpha)-weighted Gaussian
/// kernel on distance:
///
///   r_i = (c_i + alpha) exp(-kappa d_i^2 / 2) / sum_j (c_j + alpha) exp(-kappa d_j^2 / 2)
///
/// Evaluated in the log domain so large kappa does not underflow.
/// Throws std::invalid_argument on an empty neighborhood.
std::vector<Responsibility> sphere_responsibilities(std::span<const SphereNeighbor> neighbors,
                                                    const SphereParams& params);

/// Each hit spreads one unit of mass over the in-threshold neighborhood
/// (c_i <- gamma c_i + r_i); the entry with the least mass is evicted.
class SphereLfuPolicy : public EvictionPolicy {
 public:
  explicit SphereLfuPolicy(SphereParams params);

  std::string_view name() const noexcept override { return "sphere-lfu"; }
  void on_hit(const HitEvent& ev) override;
  void on_insert(const CacheEntry& e) override { mass_.set(e.id, 0.0); }
  void on_evict(EntryId id) override { mass_.erase(id); }
  void on_request_complete(std::size_t request_index) override;
  EntryId choose_victim() override { return mass_.min(); }

  double counter(EntryId id) const { return mass_.key(id); }
  double total_mass() const;
  const SphereParams& params() const noexcept { return params_; }

 private:
  SphereParams params_;
  OrderedKeys<double> mass_;
};

// ---------------------------------------------------------------------------
// LFU variants
// ---------------------------------------------------------------------------

/// MissLFU admission rule: insert only when no stored vector is within the
/// threshold.
inline bool misslfu_admit(std::span<const Neighbor> neighbors) noexcept {
  return neighbors.empty();
}

/// Under the cache's hit semantics a request reaching on_miss has an empty
/// neighborhood, so MissLFU admits every miss and evicts like LFU.
class MissLfuPolicy : public LfuPolicy {
 public:
  std::string_view name() const noexcept override { return "miss-lfu"; }
};

/// Hit increments the top entry's counter by 1 - d / threshold.
class DistanceLfuPolicy : public LfuPolicy {
 public:
  explicit DistanceLfuPolicy(Threshold threshold) : threshold_(threshold) {}
  std::string_view name() const noexcept override { return "distance-lfu"; }
  void on_hit(const HitEvent& ev) override;

  static double increment(double dist, const Threshold& t) noexcept {
    return 1.0 - dist / t.value();
  }

 private:
  Threshold threshold_;
};

/// Evicts the entry with the largest surprisal.
class SurprisalPolicy : public EvictionPolicy {
 public:
  std::string_view name() const noexcept override { return "surprisal"; }
  bool requires_surprisal() const noexcept override { return true; }
  void on_hit(const HitEvent&) override {}
  void on_insert(const CacheEntry& e) override;
  void on_evict(EntryId id) override { keys_.erase(id); }
  EntryId choose_victim() override { return keys_.min(); }

 private:
  OrderedKeys<double> keys_;  // -surprisal
};

/// Among the entries with the lowest LFU counter, evicts the largest surprisal.
class SurprisalLfuPolicy : public EvictionPolicy {
 public:
  std::string_view name() const noexcept override { return "surprisal-lfu"; }
  bool requires_surprisal() const noexcept override { return true; }
  void on_hit(const HitEvent& ev) override;
  void on_insert(const CacheEntry& e) override;
  void on_evict(EntryId id) override { keys_.erase(id); }
  EntryId choose_victim() override { return keys_.min(); }

  double frequency(EntryId id) const { return keys_.key(id).first; }

 private:
  OrderedKeys<std::pair<double, double>> keys_;  // (counter, -surprisal)
};

// ---------------------------------------------------------------------------
// Greedy online clustering
// ---------------------------------------------------------------------------

struct Cluster {
  std::vector<float> representative;  // first member's vector, never updated
  std::set<EntryId> members;
  double counter = 0.0;
  std::size_t last_access = 0;
};

/// Online greedy clustering: a vector joins the cluster with the nearest
/// representative strictly within the threshold, or founds a new one.
class ClusterState {
 public:
  /// Nearest cluster within t; ties go to the oldest cluster.
  std::optional<ClusterId> nearest(std::span<const float> q, const Threshold& t) const;

  /// Adds member to its cluster, creating one if needed. Returns the cluster
  /// and whether it is new.
  std::pair<ClusterId, bool> assign(EntryId member, std::span<const float> q, const Threshold& t);

  /// Removes member; an emptied cluster is dropped. Returns the cluster it
  /// belonged to and whether that cluster was dropped.
  std::pair<ClusterId, bool> remove(EntryId member);

  ClusterId cluster_of(EntryId member) const { return cluster_of_.at(member); }
  const Cluster& cluster(ClusterId id) const { return clusters_.at(id); }
  Cluster& cluster(ClusterId id) { return clusters_.at(id); }
  std::size_t num_clusters() const noexcept { return clusters_.size(); }
  std::size_t num_members() const noexcept { return cluster_of_.size(); }
  const std::map<ClusterId, Cluster>& clusters() const noexcept { return clusters_; }

 private:
  std::map<ClusterId, Cluster> clusters_;
  std::unordered_map<EntryId, ClusterId> cluster_of_;
  std::uint64_t next_id_ = 0;
};

/// Places q into state (see ClusterState::assign).
ClusterId cluster_assign(EntryId member, std::span<const float> q, ClusterState& state,
                         const Threshold& t);

/// ClusterLFU / ClusterLRU: pick the cluster with the smallest hit counter
/// (resp. oldest access, where joining counts as access), then evict a
/// uniformly random member of it. `radius` is the clustering threshold; when
/// it equals the cache threshold every cluster stays a singleton, since a
/// request within reach of a live representative is a hit.
class ClusterPolicy : public EvictionPolicy {
 public:
  enum class Mode { Lfu, Lru };

  ClusterPolicy(Mode mode, Threshold radius, std::uint64_t seed);

  std::string_view name() const noexcept override {
    return mode_ == Mode::Lfu ? "cluster-lfu" : "cluster-lru";
  }
  void on_hit(const HitEvent& ev) override;
  void on_insert(const CacheEntry& e) override;
  void on_evict(EntryId id) override;
  EntryId choose_victim() override;

  const ClusterState& state() const noexcept { return state_; }

 private:
  double key_of(const Cluster& c) const noexcept {
    return mode_ == Mode::Lfu ? c.counter : static_cast<double>(c.last_access);
  }

  Mode mode_;
  Threshold threshold_;
  Rng rng_;
  ClusterState state_;
  OrderedKeys<double, ClusterId> keys_;
};

}  // namespace semcache
