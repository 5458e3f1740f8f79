#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "semcache/flat_index.hpp"

namespace semcache {

/// Per-entry priority keys with O(log n) access to the minimum. Equal keys
/// are ordered by id, i.e. oldest insertion first.
template <typename Key, typename Id = EntryId>
class OrderedKeys {
 public:
  bool contains(Id id) const noexcept { return keys_.contains(id); }
  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }

  const Key& key(Id id) const {
    const auto it = keys_.find(id);
    if (it == keys_.end()) throw std::out_of_range("untracked entry");
    return it->second;
  }

  void set(Id id, Key key) {
    if (auto it = keys_.find(id); it != keys_.end()) {
      order_.erase({it->second, id});
      it->second = key;
    } else {
      keys_.emplace(id, key);
    }
    order_.emplace(std::move(key), id);
  }

  void erase(Id id) {
    const auto it = keys_.find(id);
    if (it == keys_.end()) throw std::out_of_range("untracked entry");
    order_.erase({it->second, id});
    keys_.erase(it);
  }

  Id min() const {
    if (order_.empty()) throw std::logic_error("no tracked entries");
    return order_.begin()->second;
  }

  auto begin() const noexcept { return order_.begin(); }
  auto end() const noexcept { return order_.end(); }

 private:
  std::unordered_map<Id, Key> keys_;
  std::set<std::pair<Key, Id>> order_;
};

}  // namespace semcache
