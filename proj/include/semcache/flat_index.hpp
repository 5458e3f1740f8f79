#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "semcache/vector_core.hpp"

namespace semcache {

/// Identifier of a stored vector. Handed out in increasing order and never
/// reused, so comparing ids compares insertion order.
struct EntryId {
  std::uint64_t value = 0;
  auto operator<=>(const EntryId&) const = default;
};

struct Neighbor {
  EntryId id;
  double dist = 0.0;
};

/// Exact brute-force vector store. Results are sorted by (distance, id).
class FlatIndex {
 public:
  explicit FlatIndex(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  EntryId insert(std::span<const float> v);
  /// Throws std::out_of_range if id is not stored.
  void remove(EntryId id);
  bool contains(EntryId id) const noexcept { return slot_of_.contains(id.value); }
  std::span<const float> vector(EntryId id) const;

  /// Up to m closest stored vectors with distance < t.
  std::vector<Neighbor> query_topm(std::span<const float> q, std::size_t m,
                                   const Threshold& t) const;
  /// Every stored vector with distance < t.
  std::vector<Neighbor> query_range(std::span<const float> q, const Threshold& t) const;

  /// Stored ids in ascending order.
  std::vector<EntryId> ids() const;

 private:
  std::size_t dim_;
  std::uint64_t next_id_ = 0;
  std::vector<float> data_;  // slot-major, size() * dim_
  std::vector<EntryId> ids_;
  std::unordered_map<std::uint64_t, std::size_t> slot_of_;
};

}  // namespace semcache

template <>
struct std::hash<semcache::EntryId> {
  std::size_t operator()(const semcache::EntryId& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};
