#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "exact_sim.hpp"
#include "semcache/mcp_reduction.hpp"
#include "semcache/trace.hpp"

namespace semcache::testsupport {

/// Uniform random keys in [0, distinct).
std::vector<std::uint64_t> random_keys(std::size_t length, std::size_t distinct, std::uint64_t seed);

/// Trace whose request i is the pool vector for keys[i]. The pool holds
/// random unit vectors pairwise farther apart than min_separation. Request i
/// carries the surprisal assigned to its key.
struct KeyedTrace {
  Trace trace;
  std::vector<ExactRequest> requests;
  double min_pairwise = 0.0;  // smallest distance between distinct pool vectors
};
KeyedTrace keyed_trace(const std::vector<std::uint64_t>& keys, std::size_t distinct,
                       std::size_t dim, std::uint64_t seed);

/// Requests drawn from groups of near-identical unit vectors placed on
/// orthogonal axes, so the similarity graph at threshold 0.9 is a disjoint
/// union of cliques.
Trace transitive_trace(std::size_t groups, std::size_t per_group, std::size_t length,
                       std::uint64_t seed);

/// Requests drawn from `distinct` random unit vectors in a low dimension, so
/// the similarity graph is arbitrary.
Trace random_semantic_trace(std::size_t distinct, std::size_t length, std::size_t dim,
                            std::uint64_t seed);

/// Optimum by enumerating every subset of at most k sets as a bitmask.
std::size_t bitmask_max_coverage(const MCPInstance& instance);

/// Number of distinct vectors (bitwise) in a trace.
std::size_t distinct_vectors(const Trace& trace);

}  // namespace semcache::testsupport
