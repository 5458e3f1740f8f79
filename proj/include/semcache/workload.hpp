#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "semcache/trace.hpp"
#include "semcache/vector_core.hpp"

namespace semcache {

struct ZipfParams {
  std::size_t num_clusters = 1000;
  std::size_t requests = 50'000;
  double zipf_s = 1.0;
  double intra_radius = 0.35;
  std::size_t dim = 64;
  std::uint64_t seed = 42;
  /// Center sets failing the separation check are redrawn this many times.
  std::size_t max_center_attempts = 16;
};

/// Clustered requests with Zipf(s) cluster popularity over ranks 1..num_clusters.
/// Cluster centers are random unit vectors that must be pairwise farther
/// apart than 2 * intra_radius. Each request is its center plus a random
/// direction scaled by a length drawn uniformly from [0, intra_radius],
/// re-normalized. Every request carries a synthetic surprisal that grows with
/// the cluster's popularity rank. Throws ConfigError on invalid parameters or
/// when no separated center set is found.
Trace generate_zipf_workload(const ZipfParams& params);

/// Same generator, also reporting the cluster drawn for every request.
Trace generate_zipf_workload(const ZipfParams& params, std::vector<std::size_t>& cluster_of);

/// Unit vectors drawn uniformly from the sphere.
std::vector<std::vector<float>> random_unit_vectors(std::size_t count, std::size_t dim,
                                                    std::uint64_t seed);

enum class HopkinsReference {
  SphereProjected,  // uniform in the bounding box, then normalized
  BoundingBox,      // uniform in the bounding box as drawn
};

std::string_view to_string(HopkinsReference r) noexcept;

struct StatsOptions {
  std::size_t sample_pairs = 200'000;
  std::size_t exact_pairs_below = 5'000;  // entry count under which all pairs are used
  std::uint64_t seed = 0;
  HopkinsReference hopkins_reference = HopkinsReference::SphereProjected;
};

struct DatasetStats {
  std::size_t n = 0;
  std::size_t dim = 0;
  double threshold = 0.0;

  double cos_sim_avg = 0.0;
  double cos_sim_std = 0.0;
  double l2_mean = 0.0;
  double l2_std = 0.0;
  std::size_t pairs_used = 0;
  bool exact_pairs = false;

  double pca_entropy = 0.0;  // bits

  std::size_t num_clusters = 0;
  double cluster_avg = 0.0;
  double cluster_std = 0.0;

  double hopkins = 0.0;
  std::size_t hopkins_sample = 0;
  HopkinsReference hopkins_reference = HopkinsReference::SphereProjected;
};

/// Throws DataError for fewer than two entries, mixed dimensions or zero vectors.
DatasetStats compute_stats(const Trace& trace, const Threshold& t, const StatsOptions& options = {});

/// Shannon entropy in bits of the normalized eigenvalue spectrum of the
/// sample covariance. Zero for a degenerate spectrum.
double pca_entropy(const Trace& trace);

/// Sizes of the greedy threshold clusters, in creation order.
std::vector<std::size_t> greedy_cluster_sizes(const Trace& trace, const Threshold& t);

struct DensityCurve {
  double threshold = 0.0;
  /// counts[i] = |{ j != i : d(r_i, r_j) < threshold }|
  std::vector<std::size_t> counts;
  /// neighbor count -> number of points with that count
  std::map<std::size_t, std::size_t> histogram;
  /// counts sorted in descending order
  std::vector<std::size_t> rank_curve;
};

/// Thresholds are raw distances and may exceed 2. Exact O(n^2 dim).
std::vector<DensityCurve> point_density_curve(const Trace& trace,
                                              const std::vector<double>& thresholds);

}  // namespace semcache
