#include "semcache/policies_semantic.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <stdexcept>

#include "semcache/errors.hpp"

namespace semcache {

void SphereParams::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("sphere-lfu: kappa must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("sphere-lfu: alpha must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("sphere-lfu: gamma must lie in (0, 1]");
  }
  if (top_k && *top_k == 0) throw std::invalid_argument("sphere-lfu: top-k must be positive");
}

std::vector<Responsibility> sphere_responsibilities(std::span<const SphereNeighbor> neighbors,
                                                    const SphereParams& params) {
  if (neighbors.empty()) throw std::invalid_argument("sphere-lfu: empty neighborhood");
  std::vector<double> logw(neighbors.size());
  double max_logw = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const auto& n = neighbors[i];
    logw[i] = std::log(n.counter + params.alpha) - 0.5 * params.kappa * n.dist * n.dist;
    max_logw = std::max(max_logw, logw[i]);
  }
  double total = 0.0;
  for (double& w : logw) {
    w = std::exp(w - max_logw);
    total += w;
  }
  std::vector<Responsibility> out(neighbors.size());
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    out[i] = {neighbors[i].id, logw[i] / total};
  }
  return out;
}

SphereLfuPolicy::SphereLfuPolicy(SphereParams params) : params_(params) { params_.validate(); }

void SphereLfuPolicy::on_hit(const HitEvent& ev) {
  std::size_t n = ev.neighbors.size();
  if (params_.top_k) n = std::min(n, *params_.top_k);
  std::vector<SphereNeighbor> hood;
  hood.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nb = ev.neighbors[i];
    hood.push_back({nb.id, nb.dist, mass_.key(nb.id)});
  }
  for (const auto& [id, r] : sphere_responsibilities(hood, params_)) {
    mass_.set(id, params_.gamma * mass_.key(id) + r);
  }
}

void SphereLfuPolicy::on_request_complete(std::size_t request_index) {
  if (params_.halve_every == 0 || (request_index + 1) % params_.halve_every != 0) return;
  std::vector<std::pair<EntryId, double>> halved;
  halved.reserve(mass_.size());
  for (const auto& [m, id] : mass_) halved.emplace_back(id, m * 0.5);
  for (const auto& [id, m] : halved) mass_.set(id, m);
}

double SphereLfuPolicy::total_mass() const {
  double s = 0.0;
  for (const auto& [m, id] : mass_) s += m;
  return s;
}

void DistanceLfuPolicy::on_hit(const HitEvent& ev) {
  freq_.set(ev.top.id, freq_.key(ev.top.id) + increment(ev.top.dist, threshold_));
}

namespace {

double require_surprisal(const CacheEntry& e, std::string_view policy) {
  if (!e.surprisal) {
    throw ConfigError(std::string(policy) + " requires surprisal values in the trace");
  }
  return *e.surprisal;
}

}  // namespace

void SurprisalPolicy::on_insert(const CacheEntry& e) {
  keys_.set(e.id, -require_surprisal(e, name()));
}

void SurprisalLfuPolicy::on_hit(const HitEvent& ev) {
  auto key = keys_.key(ev.top.id);
  key.first += 1.0;
  keys_.set(ev.top.id, key);
}

void SurprisalLfuPolicy::on_insert(const CacheEntry& e) {
  keys_.set(e.id, {0.0, -require_surprisal(e, name())});
}

std::optional<ClusterId> ClusterState::nearest(std::span<const float> q,
                                               const Threshold& t) const {
  std::optional<ClusterId> best;
  double best_dist = 0.0;
  for (const auto& [id, c] : clusters_) {
    const auto d = distance_within(q, c.representative, t);
    if (d && (!best || *d < best_dist)) {
      best = id;
      best_dist = *d;
    }
  }
  return best;
}

std::pair<ClusterId, bool> ClusterState::assign(EntryId member, std::span<const float> q,
                                                const Threshold& t) {
  if (cluster_of_.contains(member)) throw std::logic_error("cluster: member already assigned");
  bool created = false;
  auto id = nearest(q, t);
  if (!id) {
    id = ClusterId{next_id_++};
    clusters_[*id].representative.assign(q.begin(), q.end());
    created = true;
  }
  clusters_.at(*id).members.insert(member);
  cluster_of_.emplace(member, *id);
  return {*id, created};
}

std::pair<ClusterId, bool> ClusterState::remove(EntryId member) {
  const auto it = cluster_of_.find(member);
  if (it == cluster_of_.end()) throw std::out_of_range("cluster: unknown member");
  const ClusterId id = it->second;
  cluster_of_.erase(it);
  auto& c = clusters_.at(id);
  c.members.erase(member);
  if (c.members.empty()) {
    clusters_.erase(id);
    return {id, true};
  }
  return {id, false};
}

ClusterId cluster_assign(EntryId member, std::span<const float> q, ClusterState& state,
                         const Threshold& t) {
  return state.assign(member, q, t).first;
}

ClusterPolicy::ClusterPolicy(Mode mode, Threshold threshold, std::uint64_t seed)
    : mode_(mode), threshold_(threshold), rng_(seed) {}

void ClusterPolicy::on_hit(const HitEvent& ev) {
  const ClusterId id = state_.cluster_of(ev.top.id);
  Cluster& c = state_.cluster(id);
  if (mode_ == Mode::Lfu) {
    c.counter += 1.0;
  } else {
    c.last_access = ev.request_index;
  }
  keys_.set(id, key_of(c));
}

void ClusterPolicy::on_insert(const CacheEntry& e) {
  const auto [id, created] = state_.assign(e.id, e.vector, threshold_);
  Cluster& c = state_.cluster(id);
  if (mode_ == Mode::Lru) c.last_access = e.inserted_at;
  if (created || mode_ == Mode::Lru) keys_.set(id, key_of(c));
}

void ClusterPolicy::on_evict(EntryId id) {
  const auto [cid, dropped] = state_.remove(id);
  if (dropped) keys_.erase(cid);
}

EntryId ClusterPolicy::choose_victim() {
  const Cluster& c = state_.cluster(keys_.min());
  std::uniform_int_distribution<std::size_t> pick(0, c.members.size() - 1);
  return *std::next(c.members.begin(), static_cast<std::ptrdiff_t>(pick(rng_)));
}

}  // namespace semcache
