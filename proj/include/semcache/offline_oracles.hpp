#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "semcache/policy.hpp"
#include "semcache/trace.hpp"
#include "semcache/vector_core.hpp"

namespace semcache {

inline constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();

/// cover(i) = { j > i : d(r_i, r_j) < t }, stored in CSR form with each row
/// sorted ascending.
class CoverTable {
 public:
  static constexpr std::size_t kDefaultCap = 100'000;

  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const std::uint32_t> cover(std::size_t i) const;
  /// Smallest j > t in cover(i), or kNever.
  std::size_t next_cover(std::size_t i, std::size_t t) const;
  std::size_t total_pairs() const noexcept { return targets_.size(); }

 private:
  friend CoverTable build_cover_table(const Trace&, const Threshold&, std::size_t);

  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> targets_;
};

/// Exact O(n^2) pairwise scan. Throws ConfigError when the trace is longer
/// than cap.
CoverTable build_cover_table(const Trace& trace, const Threshold& t,
                             std::size_t cap = CoverTable::kDefaultCap);

/// Key per request such that bitwise-identical vectors share a key (the index
/// of their first occurrence).
std::vector<std::uint64_t> exact_keys(const Trace& trace);

struct BeladyResult {
  std::vector<bool> hit;
  std::vector<bool> admitted;  // false on hits and on bypassed misses
  std::size_t hits = 0;
};

/// Belady's MIN over exact keys: on a miss with a full cache, evict the
/// resident whose next request is farthest away. With allow_bypass the missed
/// key itself is a candidate, i.e. it is not cached when its own next request
/// is at least as far as every resident's.
BeladyResult belady_opt(std::span<const std::uint64_t> keys, std::size_t capacity,
                        bool allow_bypass = false);

struct ClusterCover {
  std::vector<std::uint32_t> cluster_of;
  std::size_t num_clusters = 0;
};

/// Greedy clique cover of the similarity graph given by the cover table.
/// Repeatedly seeds a clique at the unassigned node of largest remaining
/// degree (lowest index on ties) and grows it over the seed's unassigned
/// neighbors in ascending order.
ClusterCover crvb_cluster(const CoverTable& cover);

/// Per-request result of an offline replay.
struct OracleReplay {
  std::vector<bool> hit;
  std::vector<double> hit_distance;  // NaN on misses
  std::size_t hits = 0;
};

/// Belady with bypass over cluster ids, one cache slot per cluster. The vector
/// cached for a cluster is the request that brought it in.
OracleReplay crvb_replay(const Trace& trace, const ClusterCover& clusters, std::size_t capacity);

enum class VolumeScore {
  Marginal,  // future requests covered by no other resident
  Plain,     // every covered future request
};

/// Offline policies replayed through SemanticCache. Both assume the request
/// index equals the trace position.
class FgrvbPolicy : public Policy {
 public:
  FgrvbPolicy(const CoverTable& cover, VolumeScore score = VolumeScore::Marginal);

  std::string_view name() const noexcept override { return "fgrvb"; }
  void on_hit(const HitEvent&) override {}
  PolicyDecision on_miss(const MissEvent& ev) override;
  void on_insert(const CacheEntry& e) override { origin_.emplace(e.id, e.inserted_at); }
  void on_evict(EntryId id) override { origin_.erase(id); }

 private:
  const CoverTable* cover_;
  VolumeScore score_;
  std::map<EntryId, std::size_t> origin_;  // resident -> trace position
  std::vector<std::uint32_t> covered_by_;  // scratch, indexed by trace position
};

class RgrvbPolicy : public Policy {
 public:
  explicit RgrvbPolicy(const CoverTable& cover) : cover_(&cover) {}

  std::string_view name() const noexcept override { return "rgrvb"; }
  void on_hit(const HitEvent&) override {}
  PolicyDecision on_miss(const MissEvent& ev) override;
  void on_insert(const CacheEntry& e) override { origin_.emplace(e.id, e.inserted_at); }
  void on_evict(EntryId id) override { origin_.erase(id); }

 private:
  const CoverTable* cover_;
  std::map<EntryId, std::size_t> origin_;
};

OracleReplay fgrvb_replay(const Trace& trace, const CoverTable& cover, std::size_t capacity,
                          const Threshold& t, VolumeScore score = VolumeScore::Marginal);
OracleReplay rgrvb_replay(const Trace& trace, const CoverTable& cover, std::size_t capacity,
                          const Threshold& t);

struct VoptLimits {
  std::size_t max_distinct = 63;
  std::size_t max_k = 4;
  /// Bound on the number of cache states, sum_{i<=k} C(distinct, i).
  std::size_t max_states = 200'000;
};

/// Maximum achievable hit count for a semantic cache of the given capacity on
/// the trace. Exhaustive dynamic program over cache contents: after each
/// request the cache may keep any subset (up to capacity) of its previous
/// contents plus the request. Throws ConfigError when the instance exceeds
/// the limits.
std::size_t vopt_bruteforce(const Trace& trace, const Threshold& t, std::size_t capacity,
                            const VoptLimits& limits = {});

}  // namespace semcache
