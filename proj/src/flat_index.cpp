#include "semcache/flat_index.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace semcache {

FlatIndex::FlatIndex(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("index dimension must be positive");
}

EntryId FlatIndex::insert(std::span<const float> v) {
  if (v.size() != dim_) {
    throw std::invalid_argument("insert: dimension " + std::to_string(v.size()) +
                                " does not match index dimension " + std::to_string(dim_));
  }
  const EntryId id{next_id_++};
  slot_of_.emplace(id.value, ids_.size());
  ids_.push_back(id);
  data_.insert(data_.end(), v.begin(), v.end());
  return id;
}

void FlatIndex::remove(EntryId id) {
  const auto it = slot_of_.find(id.value);
  if (it == slot_of_.end()) {
    throw std::out_of_range("remove: entry " + std::to_string(id.value) + " is not stored");
  }
  const std::size_t slot = it->second;
  const std::size_t last = ids_.size() - 1;
  if (slot != last) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(last * dim_), dim_,
                data_.begin() + static_cast<std::ptrdiff_t>(slot * dim_));
    ids_[slot] = ids_[last];
    slot_of_[ids_[slot].value] = slot;
  }
  ids_.pop_back();
  data_.resize(last * dim_);
  slot_of_.erase(it);
}

std::span<const float> FlatIndex::vector(EntryId id) const {
  const auto it = slot_of_.find(id.value);
  if (it == slot_of_.end()) {
    throw std::out_of_range("entry " + std::to_string(id.value) + " is not stored");
  }
  return {data_.data() + it->second * dim_, dim_};
}

std::vector<Neighbor> FlatIndex::query_range(std::span<const float> q, const Threshold& t) const {
  return query_topm(q, std::numeric_limits<std::size_t>::max(), t);
}

std::vector<Neighbor> FlatIndex::query_topm(std::span<const float> q, std::size_t m,
                                            const Threshold& t) const {
  if (q.size() != dim_) {
    throw std::invalid_argument("query: dimension " + std::to_string(q.size()) +
                                " does not match index dimension " + std::to_string(dim_));
  }
  std::vector<Neighbor> out;
  if (m == 0) return out;
  for (std::size_t slot = 0; slot < ids_.size(); ++slot) {
    const std::span<const float> stored{data_.data() + slot * dim_, dim_};
    if (auto d = distance_within(q, stored, t)) out.push_back({ids_[slot], *d});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.dist != b.dist ? a.dist < b.dist : a.id < b.id;
  });
  if (out.size() > m) out.resize(m);
  return out;
}

std::vector<EntryId> FlatIndex::ids() const {
  std::vector<EntryId> out = ids_;
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace semcache
