#include "semcache/offline_oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

#include <Eigen/Dense>

#include "semcache/cache_engine.hpp"
#include "semcache/errors.hpp"

namespace semcache {

std::span<const std::uint32_t> CoverTable::cover(std::size_t i) const {
  if (i + 1 >= offsets_.size()) throw std::out_of_range("cover: index out of range");
  return {targets_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::size_t CoverTable::next_cover(std::size_t i, std::size_t t) const {
  const auto row = cover(i);
  const auto it = std::upper_bound(row.begin(), row.end(), t,
                                   [](std::size_t v, std::uint32_t e) { return v < e; });
  return it == row.end() ? kNever : static_cast<std::size_t>(*it);
}

CoverTable build_cover_table(const Trace& trace, const Threshold& t, std::size_t cap) {
  const std::size_t n = trace.size();
  if (n > cap) {
    throw ConfigError("cover table: trace has " + std::to_string(n) +
                      " requests, above the cap of " + std::to_string(cap) +
                      "; use --limit to replay a prefix");
  }
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("cover table: trace too long for 32-bit indices");
  }
  const std::size_t dim = trace.dim;
  using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = trace.entries[i].vector;
    if (v.size() != dim) throw DataError("cover table: mixed vector dimensions");
    std::copy(v.begin(), v.end(), x.row(static_cast<Eigen::Index>(i)).data());
    sq[i] = dot(v, v);
  }

  // Float Gram blocks give an approximate squared distance for every pair.
  // Pairs that are clearly outside are dropped; the rest go through the exact
  // predicate. The slack bounds the float rounding error of the dot product.
  const double eps = 4.0 * static_cast<double>(dim) * std::numeric_limits<float>::epsilon();
  const double cutoff = t.squared_cutoff();

  std::vector<std::vector<std::uint32_t>> rows(n);
  constexpr std::size_t kRowBlock = 256;
  constexpr std::size_t kColBlock = 2048;
  Eigen::MatrixXf gram;
  for (std::size_t lo = 0; lo < n; lo += kRowBlock) {
    const std::size_t hi = std::min(n, lo + kRowBlock);
    const auto a = x.middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo));
    for (std::size_t clo = lo; clo < n; clo += kColBlock) {
      const std::size_t chi = std::min(n, clo + kColBlock);
      const auto b =
          x.middleRows(static_cast<Eigen::Index>(clo), static_cast<Eigen::Index>(chi - clo));
      gram.noalias() = a * b.transpose();
      for (std::size_t i = lo; i < hi; ++i) {
        const auto ri = static_cast<Eigen::Index>(i - lo);
        for (std::size_t j = std::max(clo, i + 1); j < chi; ++j) {
          const double g = gram(ri, static_cast<Eigen::Index>(j - clo));
          const double norms = sq[i] + sq[j];
          if (norms - 2.0 * g >= cutoff + eps * norms + 1e-12) continue;
          if (within(trace.vector(i), trace.vector(j), t)) {
            rows[i].push_back(static_cast<std::uint32_t>(j));
          }
        }
      }
    }
  }

  CoverTable table;
  table.offsets_.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) table.offsets_[i + 1] = table.offsets_[i] + rows[i].size();
  table.targets_.reserve(table.offsets_[n]);
  for (auto& r : rows) {
    table.targets_.insert(table.targets_.end(), r.begin(), r.end());
    std::vector<std::uint32_t>().swap(r);
  }
  return table;
}

namespace {

std::vector<std::uint32_t> bit_pattern(std::span<const float> v) {
  std::vector<std::uint32_t> bits(v.size());
  std::memcpy(bits.data(), v.data(), v.size() * sizeof(float));
  return bits;
}

}  // namespace

std::vector<std::uint64_t> exact_keys(const Trace& trace) {
  std::map<std::vector<std::uint32_t>, std::uint64_t> seen;
  std::vector<std::uint64_t> keys(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    keys[i] = seen.try_emplace(bit_pattern(trace.vector(i)), i).first->second;
  }
  return keys;
}

BeladyResult belady_opt(std::span<const std::uint64_t> keys, std::size_t capacity,
                        bool allow_bypass) {
  if (capacity == 0) throw std::invalid_argument("belady: capacity must be positive");
  const std::size_t n = keys.size();
  std::vector<std::size_t> next_use(n, kNever);
  {
    std::unordered_map<std::uint64_t, std::size_t> upcoming;
    for (std::size_t i = n; i-- > 0;) {
      const auto it = upcoming.find(keys[i]);
      if (it != upcoming.end()) next_use[i] = it->second;
      upcoming[keys[i]] = i;
    }
  }

  BeladyResult out;
  out.hit.assign(n, false);
  out.admitted.assign(n, false);
  // Residents ordered by next use; kNever ties broken by key for determinism.
  std::set<std::pair<std::size_t, std::uint64_t>> by_next;
  std::unordered_map<std::uint64_t, std::size_t> resident;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t key = keys[i];
    if (const auto it = resident.find(key); it != resident.end()) {
      out.hit[i] = true;
      ++out.hits;
      by_next.erase({it->second, key});
      it->second = next_use[i];
      by_next.emplace(next_use[i], key);
      continue;
    }
    if (resident.size() >= capacity) {
      const auto farthest = std::prev(by_next.end());
      if (allow_bypass && next_use[i] >= farthest->first) continue;
      resident.erase(farthest->second);
      by_next.erase(farthest);
    }
    resident.emplace(key, next_use[i]);
    by_next.emplace(next_use[i], key);
    out.admitted[i] = true;
  }
  return out;
}

ClusterCover crvb_cluster(const CoverTable& cover) {
  const std::size_t n = cover.size();
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t j : cover.cover(i)) {
      adj[i].push_back(j);
      adj[j].push_back(static_cast<std::uint32_t>(i));
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  auto adjacent = [&](std::uint32_t u, std::uint32_t v) {
    return std::binary_search(adj[u].begin(), adj[u].end(), v);
  };

  constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();
  ClusterCover out;
  out.cluster_of.assign(n, kUnassigned);
  std::vector<std::size_t> degree(n);
  // (-remaining degree, node): begin() is the highest degree, lowest index.
  std::set<std::pair<std::int64_t, std::uint32_t>> order;
  for (std::size_t i = 0; i < n; ++i) {
    degree[i] = adj[i].size();
    order.emplace(-static_cast<std::int64_t>(degree[i]), static_cast<std::uint32_t>(i));
  }

  std::vector<std::uint32_t> clique;
  while (!order.empty()) {
    const std::uint32_t seed = order.begin()->second;
    clique.assign(1, seed);
    for (std::uint32_t cand : adj[seed]) {
      if (out.cluster_of[cand] != kUnassigned) continue;
      const bool fits = std::all_of(clique.begin(), clique.end(),
                                    [&](std::uint32_t m) { return adjacent(cand, m); });
      if (fits) clique.push_back(cand);
    }
    const auto id = static_cast<std::uint32_t>(out.num_clusters++);
    for (std::uint32_t m : clique) {
      out.cluster_of[m] = id;
      order.erase({-static_cast<std::int64_t>(degree[m]), m});
    }
    for (std::uint32_t m : clique) {
      for (std::uint32_t nb : adj[m]) {
        if (out.cluster_of[nb] != kUnassigned) continue;
        order.erase({-static_cast<std::int64_t>(degree[nb]), nb});
        --degree[nb];
        order.emplace(-static_cast<std::int64_t>(degree[nb]), nb);
      }
    }
  }
  return out;
}

OracleReplay crvb_replay(const Trace& trace, const ClusterCover& clusters, std::size_t capacity) {
  if (clusters.cluster_of.size() != trace.size()) {
    throw std::invalid_argument("crvb: cluster cover does not match trace");
  }
  std::vector<std::uint64_t> keys(clusters.cluster_of.begin(), clusters.cluster_of.end());
  const BeladyResult opt = belady_opt(keys, capacity, /*allow_bypass=*/true);

  OracleReplay out;
  out.hit = opt.hit;
  out.hits = opt.hits;
  out.hit_distance.assign(trace.size(), std::numeric_limits<double>::quiet_NaN());
  std::unordered_map<std::uint64_t, std::size_t> cached_request;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (opt.hit[i]) {
      out.hit_distance[i] = l2_distance(trace.vector(cached_request.at(keys[i])), trace.vector(i));
    } else if (opt.admitted[i]) {
      cached_request[keys[i]] = i;
    }
  }
  return out;
}

FgrvbPolicy::FgrvbPolicy(const CoverTable& cover, VolumeScore score)
    : cover_(&cover), score_(score), covered_by_(cover.size(), 0) {}

PolicyDecision FgrvbPolicy::on_miss(const MissEvent& ev) {
  if (!ev.cache_full) return {};
  const std::size_t now = ev.request_index;
  if (now >= cover_->size()) throw std::logic_error("fgrvb: request beyond the cover table");

  auto future = [&](std::size_t origin) {
    const auto row = cover_->cover(origin);
    const auto first = std::upper_bound(row.begin(), row.end(), now,
                                        [](std::size_t v, std::uint32_t e) { return v < e; });
    return std::span<const std::uint32_t>(first, row.end());
  };

  if (score_ == VolumeScore::Marginal) {
    for (const auto& [id, origin] : origin_) {
      for (std::uint32_t j : future(origin)) ++covered_by_[j];
    }
  }
  auto score_of = [&](std::span<const std::uint32_t> fut, std::uint32_t unique_count) {
    if (score_ == VolumeScore::Plain) return fut.size();
    return static_cast<std::size_t>(std::count_if(
        fut.begin(), fut.end(), [&](std::uint32_t j) { return covered_by_[j] == unique_count; }));
  };

  std::optional<EntryId> victim;
  std::size_t victim_score = 0;
  for (const auto& [id, origin] : origin_) {
    const std::size_t s = score_of(future(origin), 1);
    if (!victim || s < victim_score) {
      victim = id;
      victim_score = s;
    }
  }
  const std::size_t missed_score = score_of(cover_->cover(now), 0);

  if (score_ == VolumeScore::Marginal) {
    for (const auto& [id, origin] : origin_) {
      for (std::uint32_t j : future(origin)) covered_by_[j] = 0;
    }
  }
  if (victim && missed_score > victim_score) return {true, victim};
  return {false, std::nullopt};
}

PolicyDecision RgrvbPolicy::on_miss(const MissEvent& ev) {
  if (!ev.cache_full) return {};
  const std::size_t now = ev.request_index;
  const std::size_t missed_next = cover_->next_cover(now, now);
  std::optional<EntryId> victim;
  std::size_t victim_next = 0;
  for (const auto& [id, origin] : origin_) {
    const std::size_t next = cover_->next_cover(origin, now);
    if (next == missed_next) return {false, std::nullopt};
    if (!victim || next > victim_next) {
      victim = id;
      victim_next = next;
    }
  }
  if (!victim) return {false, std::nullopt};
  return {true, victim};
}

namespace {

OracleReplay replay_with(const Trace& trace, std::unique_ptr<Policy> policy,
                         std::size_t capacity, const Threshold& t) {
  SemanticCache cache(CacheConfig{trace.dim, capacity, t, trace.normalized}, std::move(policy));
  OracleReplay out;
  out.hit.reserve(trace.size());
  out.hit_distance.reserve(trace.size());
  for (const auto& e : trace.entries) {
    const auto r = cache.process_request(e);
    out.hit.push_back(r.hit);
    out.hit_distance.push_back(r.hit ? r.top->dist : std::numeric_limits<double>::quiet_NaN());
    out.hits += r.hit ? 1 : 0;
  }
  return out;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

OracleReplay fgrvb_replay(const Trace& trace, const CoverTable& cover, std::size_t capacity,
                          const Threshold& t, VolumeScore score) {
  return replay_with(trace, std::make_unique<FgrvbPolicy>(cover, score), capacity, t);
}

OracleReplay rgrvb_replay(const Trace& trace, const CoverTable& cover, std::size_t capacity,
                          const Threshold& t) {
  return replay_with(trace, std::make_unique<RgrvbPolicy>(cover), capacity, t);
}

std::size_t vopt_bruteforce(const Trace& trace, const Threshold& t, std::size_t capacity,
                            const VoptLimits& limits) {
  if (capacity == 0) throw std::invalid_argument("vopt: capacity must be positive");
  const auto keys = exact_keys(trace);
  std::vector<std::size_t> distinct_of(trace.size());
  std::vector<std::size_t> representative;
  {
    std::unordered_map<std::uint64_t, std::size_t> ids;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const auto [it, fresh] = ids.try_emplace(keys[i], representative.size());
      if (fresh) representative.push_back(i);
      distinct_of[i] = it->second;
    }
  }
  const std::size_t m = representative.size();
  const std::size_t k = std::min(capacity, m);
  std::size_t states = 0;
  for (std::size_t i = 0; i <= k; ++i) states += binomial(m, i);
  if (m > limits.max_distinct || k > limits.max_k || states > limits.max_states) {
    throw ConfigError("vopt: instance too large for exhaustive search (" + std::to_string(m) +
                      " distinct vectors, capacity " + std::to_string(capacity) + ")");
  }

  // covers[a] has bit b set when distinct vector a serves a request for b.
  std::vector<std::uint64_t> covers(m, 0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (within(trace.vector(representative[a]), trace.vector(representative[b]), t)) {
        covers[a] |= std::uint64_t{1} << b;
      }
    }
  }

  std::unordered_map<std::uint64_t, std::size_t> best{{0, 0}};
  std::unordered_map<std::uint64_t, std::size_t> next;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const std::size_t x = distinct_of[i];
    next.clear();
    for (const auto& [state, hits] : best) {
      bool hit = false;
      for (std::uint64_t s = state; s != 0; s &= s - 1) {
        if (covers[static_cast<std::size_t>(std::countr_zero(s))] >> x & 1U) {
          hit = true;
          break;
        }
      }
      const std::size_t value = hits + (hit ? 1 : 0);
      const std::uint64_t pool = state | (std::uint64_t{1} << x);
      // Every subset of pool that fits, including the empty set.
      for (std::uint64_t sub = pool;; sub = (sub - 1) & pool) {
        if (static_cast<std::size_t>(std::popcount(sub)) <= k) {
          auto& slot = next[sub];
          slot = std::max(slot, value);
        }
        if (sub == 0) break;
      }
    }
    std::swap(best, next);
  }
  std::size_t result = 0;
  for (const auto& [state, hits] : best) result = std::max(result, hits);
  return result;
}

}  // namespace semcache
