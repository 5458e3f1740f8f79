#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace semcache {

/// One request of a trace.
struct TraceEntry {
  std::vector<float> vector;
  std::optional<float> surprisal;  // nats
  std::size_t index = 0;           // position in the trace
};

struct Trace {
  std::size_t dim = 0;
  bool normalized = true;
  bool has_surprisal = false;
  std::vector<TraceEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  std::span<const float> vector(std::size_t i) const { return entries[i].vector; }
};

}  // namespace semcache
