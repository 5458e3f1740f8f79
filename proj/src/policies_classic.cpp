#include "semcache/policies_classic.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

namespace semcache {

EntryId FifoPolicy::choose_victim() {
  if (resident_.empty()) throw std::logic_error("fifo: no residents");
  return *resident_.begin();
}

EntryId RandomPolicy::choose_victim() {
  if (resident_.empty()) throw std::logic_error("random: no residents");
  std::uniform_int_distribution<std::size_t> pick(0, resident_.size() - 1);
  return *std::next(resident_.begin(), static_cast<std::ptrdiff_t>(pick(rng_)));
}

void LfuPolicy::on_hit(const HitEvent& ev) { freq_.set(ev.top.id, freq_.key(ev.top.id) + 1.0); }

void LfudaPolicy::on_hit(const HitEvent& ev) {
  double& h = hits_.at(ev.top.id);
  h += 1.0;
  keys_.set(ev.top.id, h + age_);
}

void LfudaPolicy::on_insert(const CacheEntry& e) {
  hits_[e.id] = 0.0;
  keys_.set(e.id, age_);
}

void LfudaPolicy::on_evict(EntryId id) {
  age_ = keys_.key(id);
  keys_.erase(id);
  hits_.erase(id);
}

LruKPolicy::LruKPolicy(std::size_t k) : k_(k) {
  if (k == 0) throw std::invalid_argument("lru-k: K must be at least 1");
}

void LruKPolicy::touch(EntryId id, std::size_t when) {
  auto& h = history_[id];
  h.push_front(when);
  if (h.size() > k_) h.pop_back();
  const std::size_t kth = h.size() >= k_ ? h[k_ - 1] + 1 : 0;
  keys_.set(id, {kth, h.front()});
}

void LruKPolicy::on_evict(EntryId id) {
  keys_.erase(id);
  history_.erase(id);
}

ArcPolicy::ArcPolicy(std::size_t capacity, std::size_t dim, Threshold threshold)
    : c_(capacity), threshold_(threshold), ghost_vectors_(dim) {
  if (capacity == 0) throw std::invalid_argument("arc: capacity must be positive");
}

std::list<EntryId>& ArcPolicy::list_of(List l) {
  switch (l) {
    case List::T1: return t1_;
    case List::T2: return t2_;
    case List::B1: return b1_;
    case List::B2: return b2_;
  }
  throw std::logic_error("arc: bad list");
}

void ArcPolicy::push_mru(List l, EntryId id) {
  auto& lst = list_of(l);
  lst.push_back(id);
  where_[id] = Slot{l, std::prev(lst.end())};
}

void ArcPolicy::unlink(EntryId id) {
  const auto it = where_.find(id);
  if (it == where_.end()) throw std::logic_error("arc: unknown entry");
  list_of(it->second.list).erase(it->second.pos);
  if (it->second.list == List::B1 || it->second.list == List::B2) {
    const EntryId gid = ghost_slot_.at(id);
    ghost_vectors_.remove(gid);
    ghost_owner_.erase(gid);
    ghost_slot_.erase(id);
  }
  where_.erase(it);
}

void ArcPolicy::add_ghost(List l, EntryId id, std::span<const float> v) {
  push_mru(l, id);
  const EntryId gid = ghost_vectors_.insert(v);
  ghost_slot_[id] = gid;
  ghost_owner_[gid] = id;
}

void ArcPolicy::drop_ghost_lru(List l) {
  auto& lst = list_of(l);
  if (!lst.empty()) unlink(lst.front());
}

EntryId ArcPolicy::replace(bool ghost_in_b2) {
  const double t1 = static_cast<double>(t1_.size());
  if (!t1_.empty() && ((ghost_in_b2 && t1 == p_) || t1 > p_)) {
    pending_victim_dest_ = List::B1;
    return t1_.front();
  }
  pending_victim_dest_ = List::B2;
  return t2_.front();
}

void ArcPolicy::on_hit(const HitEvent& ev) {
  unlink(ev.top.id);
  push_mru(List::T2, ev.top.id);
}

PolicyDecision ArcPolicy::on_miss(const MissEvent& ev) {
  pending_victim_dest_.reset();
  pending_to_t2_ = false;
  PolicyDecision decision;

  std::optional<EntryId> ghost;
  if (!ghost_vectors_.empty()) {
    const auto nearest = ghost_vectors_.query_topm(ev.query, 1, threshold_);
    if (!nearest.empty()) ghost = ghost_owner_.at(nearest.front().id);
  }

  const double c = static_cast<double>(c_);
  if (ghost && where_.at(*ghost).list == List::B1) {
    const double b1 = static_cast<double>(b1_.size());
    const double b2 = static_cast<double>(b2_.size());
    p_ = std::min(c, p_ + std::max(b2 / b1, 1.0));
    if (ev.cache_full) decision.victim = replace(false);
    unlink(*ghost);
    pending_to_t2_ = true;
  } else if (ghost) {
    const double b1 = static_cast<double>(b1_.size());
    const double b2 = static_cast<double>(b2_.size());
    p_ = std::max(0.0, p_ - std::max(b1 / b2, 1.0));
    if (ev.cache_full) decision.victim = replace(true);
    unlink(*ghost);
    pending_to_t2_ = true;
  } else {
    const std::size_t l1 = t1_.size() + b1_.size();
    const std::size_t total = l1 + t2_.size() + b2_.size();
    if (l1 == c_) {
      if (t1_.size() < c_) {
        drop_ghost_lru(List::B1);
        if (ev.cache_full) decision.victim = replace(false);
      } else {
        // T1 alone fills the cache: its LRU leaves without a ghost.
        decision.victim = t1_.front();
      }
    } else if (total >= c_) {
      if (total == 2 * c_) drop_ghost_lru(List::B2);
      if (ev.cache_full) decision.victim = replace(false);
    }
  }
  return decision;
}

void ArcPolicy::on_evict(EntryId id) {
  unlink(id);
  const auto it = resident_vectors_.find(id);
  if (pending_victim_dest_) add_ghost(*pending_victim_dest_, id, it->second);
  resident_vectors_.erase(it);
  pending_victim_dest_.reset();
}

void ArcPolicy::on_insert(const CacheEntry& e) {
  push_mru(pending_to_t2_ ? List::T2 : List::T1, e.id);
  resident_vectors_.emplace(e.id, std::vector<float>(e.vector.begin(), e.vector.end()));
  pending_to_t2_ = false;
}

bool rap_admit(double c, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < 1.0 / (c + 1.0);
}

PolicyDecision RapPolicy::on_miss(const MissEvent& ev) {
  if (!ev.cache_full) return {};
  const EntryId candidate = freq_.min();
  if (rap_admit(freq_.key(candidate), rng_)) return {true, candidate};
  return {false, std::nullopt};
}

}  // namespace semcache
