#include "semcache/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "semcache/errors.hpp"
#include "semcache/policies_semantic.hpp"

namespace semcache {

namespace {

using Rng = std::mt19937_64;

std::vector<float> random_direction(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<float> v(dim);
  for (;;) {
    for (auto& x : v) x = static_cast<float>(gauss(rng));
    if (l2_norm(v) > 1e-6) return normalize(v);
  }
}

double min_pairwise_distance(const std::vector<std::vector<float>>& points) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::min(best, l2_distance(points[i], points[j]));
    }
  }
  return best;
}

void check_trace(const Trace& trace) {
  if (trace.size() < 2) throw DataError("stats need at least two entries");
  for (const auto& e : trace.entries) {
    if (e.vector.size() != trace.dim) throw DataError("stats: mixed vector dimensions");
  }
}

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double stddev() const { return n == 0 ? 0.0 : std::sqrt(std::max(0.0, m2 / static_cast<double>(n))); }
};

double nearest_distance(std::span<const float> q, const Trace& trace, std::size_t skip) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < trace.size(); ++j) {
    if (j == skip) continue;
    best = std::min(best, l2_distance(q, trace.vector(j)));
  }
  return best;
}

double hopkins_statistic(const Trace& trace, std::size_t m, HopkinsReference reference, Rng& rng) {
  const std::size_t n = trace.size();
  const std::size_t dim = trace.dim;

  std::vector<float> lo(dim, std::numeric_limits<float>::infinity());
  std::vector<float> hi(dim, -std::numeric_limits<float>::infinity());
  for (const auto& e : trace.entries) {
    for (std::size_t d = 0; d < dim; ++d) {
      lo[d] = std::min(lo[d], e.vector[d]);
      hi[d] = std::max(hi[d], e.vector[d]);
    }
  }

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> picks;
  std::sample(all.begin(), all.end(), std::back_inserter(picks), m, rng);

  double w_sum = 0.0;
  for (std::size_t i : picks) w_sum += nearest_distance(trace.vector(i), trace, i);

  double u_sum = 0.0;
  std::vector<float> y(dim);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t d = 0; d < dim; ++d) {
      y[d] = lo[d] == hi[d] ? lo[d]
                            : static_cast<float>(std::uniform_real_distribution<double>(lo[d], hi[d])(rng));
    }
    if (reference == HopkinsReference::SphereProjected && l2_norm(y) > 0.0) y = normalize(y);
    u_sum += nearest_distance(y, trace, n);
  }

  const double denom = u_sum + w_sum;
  return denom > 0.0 ? u_sum / denom : 0.5;
}

}  // namespace

std::vector<std::vector<float>> random_unit_vectors(std::size_t count, std::size_t dim,
                                                    std::uint64_t seed) {
  if (dim == 0) throw ConfigError("dim must be positive");
  Rng rng(seed);
  std::vector<std::vector<float>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_direction(dim, rng));
  return out;
}

Trace generate_zipf_workload(const ZipfParams& params) {
  std::vector<std::size_t> ignored;
  return generate_zipf_workload(params, ignored);
}

Trace generate_zipf_workload(const ZipfParams& p, std::vector<std::size_t>& cluster_of) {
  if (p.num_clusters == 0) throw ConfigError("zipf: num_clusters must be positive");
  if (p.dim < 2) throw ConfigError("zipf: dim must be at least 2");
  if (!(p.zipf_s >= 0.0) || !std::isfinite(p.zipf_s)) throw ConfigError("zipf: s must be >= 0");
  if (!(p.intra_radius >= 0.0) || !std::isfinite(p.intra_radius)) {
    throw ConfigError("zipf: intra_radius must be >= 0");
  }
  if (p.max_center_attempts == 0) throw ConfigError("zipf: need at least one center attempt");

  // Centers come from sub-seeds so a rejected set does not shift the request stream.
  std::seed_seq root{p.seed, std::uint64_t{0x5eed}};
  std::vector<std::uint64_t> sub(p.max_center_attempts + 1);
  {
    std::vector<std::uint32_t> raw(2 * sub.size());
    root.generate(raw.begin(), raw.end());
    for (std::size_t i = 0; i < sub.size(); ++i) {
      sub[i] = (std::uint64_t{raw[2 * i]} << 32) | raw[2 * i + 1];
    }
  }

  std::vector<std::vector<float>> centers;
  bool separated = false;
  double min_dist = 0.0;
  for (std::size_t attempt = 0; attempt < p.max_center_attempts && !separated; ++attempt) {
    centers = random_unit_vectors(p.num_clusters, p.dim, sub[attempt]);
    min_dist = p.num_clusters > 1 ? min_pairwise_distance(centers)
                                  : std::numeric_limits<double>::infinity();
    separated = min_dist > 2.0 * p.intra_radius;
  }
  if (!separated) {
    throw ConfigError(fmt::format(
        "zipf: centers not separated after {} attempts (min distance {:.4f} <= 2 * radius {:.4f})",
        p.max_center_attempts, min_dist, 2.0 * p.intra_radius));
  }

  std::vector<double> cdf(p.num_clusters);
  double acc = 0.0;
  for (std::size_t r = 0; r < p.num_clusters; ++r) {
    acc += std::pow(static_cast<double>(r + 1), -p.zipf_s);
    cdf[r] = acc;
  }
  for (auto& c : cdf) c /= acc;

  Rng rng(sub.back());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Trace trace;
  trace.dim = p.dim;
  trace.normalized = true;
  trace.has_surprisal = true;
  trace.entries.reserve(p.requests);
  cluster_of.assign(p.requests, 0);

  std::vector<float> point(p.dim);
  for (std::size_t i = 0; i < p.requests; ++i) {
    const double u = unit(rng);
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const std::size_t c = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()),
                                                p.num_clusters - 1);
    cluster_of[i] = c;

    const auto dir = random_direction(p.dim, rng);
    const double len = p.intra_radius * unit(rng);
    for (std::size_t d = 0; d < p.dim; ++d) {
      point[d] = static_cast<float>(centers[c][d] + len * dir[d]);
    }
    const float surprisal = static_cast<float>(std::log(static_cast<double>(c) + 2.0) + unit(rng));
    trace.entries.push_back({normalize(point), surprisal, i});
  }
  return trace;
}

std::string_view to_string(HopkinsReference r) noexcept {
  return r == HopkinsReference::SphereProjected ? "bounding-box-normalized" : "bounding-box";
}

double pca_entropy(const Trace& trace) {
  check_trace(trace);
  const auto n = static_cast<Eigen::Index>(trace.size());
  const auto dim = static_cast<Eigen::Index>(trace.dim);
  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = trace.entries[static_cast<std::size_t>(i)].vector;
    for (Eigen::Index d = 0; d < dim; ++d) x(i, d) = v[static_cast<std::size_t>(d)];
  }
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = solver.eigenvalues().cwiseMax(0.0);
  const double total = ev.sum();
  if (!(total > 1e-12)) return 0.0;
  double h = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    const double p = ev(k) / total;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

std::vector<std::size_t> greedy_cluster_sizes(const Trace& trace, const Threshold& t) {
  ClusterState state;
  for (std::size_t i = 0; i < trace.size(); ++i) state.assign(EntryId{i}, trace.vector(i), t);
  std::vector<std::size_t> sizes;
  sizes.reserve(state.num_clusters());
  for (const auto& [id, c] : state.clusters()) sizes.push_back(c.members.size());
  return sizes;
}

DatasetStats compute_stats(const Trace& trace, const Threshold& t, const StatsOptions& options) {
  check_trace(trace);
  for (const auto& e : trace.entries) {
    if (!(l2_norm(e.vector) > 0.0)) throw DataError("stats: zero vector in trace");
  }
  DatasetStats s;
  s.n = trace.size();
  s.dim = trace.dim;
  s.threshold = t.value();
  s.hopkins_reference = options.hopkins_reference;

  Rng rng(options.seed);
  Moments cos_m;
  Moments l2_m;
  auto add_pair = [&](std::size_t i, std::size_t j) {
    const auto a = trace.vector(i);
    const auto b = trace.vector(j);
    cos_m.add(dot(a, b) / (l2_norm(a) * l2_norm(b)));
    l2_m.add(l2_distance(a, b));
  };
  if (s.n < options.exact_pairs_below) {
    s.exact_pairs = true;
    for (std::size_t i = 0; i < s.n; ++i) {
      for (std::size_t j = i + 1; j < s.n; ++j) add_pair(i, j);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, s.n - 1);
    for (std::size_t k = 0; k < options.sample_pairs; ++k) {
      const std::size_t i = pick(rng);
      std::size_t j = pick(rng);
      while (j == i) j = pick(rng);
      add_pair(i, j);
    }
  }
  s.pairs_used = cos_m.n;
  s.cos_sim_avg = cos_m.mean;
  s.cos_sim_std = cos_m.stddev();
  s.l2_mean = l2_m.mean;
  s.l2_std = l2_m.stddev();

  s.pca_entropy = pca_entropy(trace);

  const auto sizes = greedy_cluster_sizes(trace, t);
  s.num_clusters = sizes.size();
  s.cluster_avg = static_cast<double>(s.n) / static_cast<double>(s.num_clusters);
  Moments size_m;
  for (std::size_t sz : sizes) size_m.add(static_cast<double>(sz));
  s.cluster_std = size_m.stddev();

  s.hopkins_sample = std::max<std::size_t>(1, std::min<std::size_t>(s.n / 10, 500));
  s.hopkins = hopkins_statistic(trace, s.hopkins_sample, options.hopkins_reference, rng);
  return s;
}

std::vector<DensityCurve> point_density_curve(const Trace& trace,
                                              const std::vector<double>& thresholds) {
  for (const auto& e : trace.entries) {
    if (e.vector.size() != trace.dim) throw DataError("density: mixed vector dimensions");
  }
  const std::size_t n = trace.size();
  std::vector<DensityCurve> curves(thresholds.size());
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (!(thresholds[k] > 0.0) || !std::isfinite(thresholds[k])) {
      throw ConfigError("density: thresholds must be positive and finite");
    }
    curves[k].threshold = thresholds[k];
    curves[k].counts.assign(n, 0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = l2_distance(trace.vector(i), trace.vector(j));
      for (auto& c : curves) {
        if (d < c.threshold) {
          ++c.counts[i];
          ++c.counts[j];
        }
      }
    }
  }
  for (auto& c : curves) {
    for (std::size_t v : c.counts) ++c.histogram[v];
    c.rank_curve = c.counts;
    std::sort(c.rank_curve.begin(), c.rank_curve.end(), std::greater<>());
  }
  return curves;
}

}  // namespace semcache
