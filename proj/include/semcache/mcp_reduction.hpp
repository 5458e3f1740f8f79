#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "semcache/trace.hpp"
#include "semcache/vector_core.hpp"

namespace semcache {

/// Maximum Coverage instance: choose at most k sets maximizing the union.
struct MCPInstance {
  std::size_t n_elements = 0;
  std::vector<std::vector<std::size_t>> sets;
  std::size_t k = 1;

  /// Throws std::invalid_argument on empty sets, duplicate or out-of-range
  /// elements, or k == 0.
  void validate() const;
  std::size_t max_set_size() const noexcept;
};

/// Scales of the geometric embedding: element e_i -> alpha u_i,
/// set S_j -> sum_{e in S_j} beta u_e + gamma w_j.
struct ReductionParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double d_thresh = 0.0;
};

/// Picks alpha^2 and gamma^2 at the midpoints of their open feasibility
/// intervals, with beta = alpha / K_max:
///
///   D^2/2 < alpha^2 < (D^2/2) K_max / (K_max - 1)
///   D^2/2 < gamma^2 < D^2 - alpha^2 (K_max - 1) / K_max
///
/// Throws std::invalid_argument when K_max < 2 (the instance is trivial).
ReductionParams choose_params(const MCPInstance& instance, const Threshold& t);

/// True when the three strict inequalities hold for these params.
bool params_feasible(const ReductionParams& p, std::size_t k_max);

struct ReductionVectors {
  std::size_t dim = 0;  // n_elements + number of sets
  std::vector<std::vector<float>> set_vectors;
  std::vector<std::vector<float>> element_vectors;
};

ReductionVectors build_vectors(const MCPInstance& instance, const ReductionParams& params);

struct ConditionCheck {
  std::size_t pairs = 0;
  std::size_t passed = 0;
  /// Smallest signed slack over all pairs: distance - t for separation
  /// conditions, t - distance for coverage. Positive means every pair passed.
  double worst_margin = 0.0;

  bool ok() const noexcept { return pairs == passed; }
};

struct ReductionReport {
  ConditionCheck element_separation;
  ConditionCheck set_separation;
  ConditionCheck membership;
  ConditionCheck non_membership;

  bool ok() const noexcept {
    return element_separation.ok() && set_separation.ok() && membership.ok() &&
           non_membership.ok();
  }
};

/// Exhaustively checks the four geometric conditions against t.
ReductionReport validate_reduction(const ReductionVectors& vectors, const MCPInstance& instance,
                                   const Threshold& t);

/// Set vectors first, then element vectors. Vectors are raw (not unit-norm).
Trace build_trace(const MCPInstance& instance, const ReductionVectors& vectors);

struct CoverageResult {
  std::vector<std::size_t> chosen;  // set indices in pick order
  std::size_t covered = 0;
};

/// k rounds of picking the set that covers the most uncovered elements,
/// lowest index on ties.
CoverageResult greedy_max_coverage(const MCPInstance& instance);

/// Optimum over every choice of at most k sets. Throws std::invalid_argument
/// for more than 24 sets.
CoverageResult exact_max_coverage(const MCPInstance& instance);

/// Random instance with every set non-empty and K_max >= 2 when possible.
MCPInstance random_mcp_instance(std::size_t n_elements, std::size_t n_sets, std::size_t k,
                                std::uint64_t seed);

}  // namespace semcache
