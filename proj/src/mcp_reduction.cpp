#include "semcache/mcp_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace semcache {

void MCPInstance::validate() const {
  if (k == 0) throw std::invalid_argument("mcp: k must be at least 1");
  if (sets.empty()) throw std::invalid_argument("mcp: no sets");
  for (std::size_t j = 0; j < sets.size(); ++j) {
    const auto& s = sets[j];
    if (s.empty()) throw std::invalid_argument("mcp: set " + std::to_string(j) + " is empty");
    std::set<std::size_t> seen;
    for (std::size_t e : s) {
      if (e >= n_elements) {
        throw std::invalid_argument("mcp: element " + std::to_string(e) + " out of range");
      }
      if (!seen.insert(e).second) {
        throw std::invalid_argument("mcp: set " + std::to_string(j) + " repeats an element");
      }
    }
  }
}

std::size_t MCPInstance::max_set_size() const noexcept {
  std::size_t m = 0;
  for (const auto& s : sets) m = std::max(m, s.size());
  return m;
}

bool params_feasible(const ReductionParams& p, std::size_t k_max) {
  const double d2 = p.d_thresh * p.d_thresh;
  const double a2 = p.alpha * p.alpha;
  const double g2 = p.gamma * p.gamma;
  const double km = static_cast<double>(k_max);
  return 2.0 * a2 > d2 && 2.0 * g2 > d2 && a2 * (1.0 - 1.0 / km) + g2 < d2;
}

ReductionParams choose_params(const MCPInstance& instance, const Threshold& t) {
  instance.validate();
  const std::size_t k_max = instance.max_set_size();
  if (k_max < 2) throw std::invalid_argument("mcp: K_max < 2, the instance is trivial");
  const double km = static_cast<double>(k_max);
  const double d2 = t.value() * t.value();
  const double half = d2 / 2.0;

  const double alpha2 = 0.5 * (half + half * km / (km - 1.0));
  const double gamma2 = 0.5 * (half + (d2 - alpha2 * (km - 1.0) / km));

  ReductionParams p;
  p.d_thresh = t.value();
  p.alpha = std::sqrt(alpha2);
  p.gamma = std::sqrt(gamma2);
  p.beta = p.alpha / km;
  if (!params_feasible(p, k_max)) {
    throw std::logic_error("mcp: midpoint parameters violate the feasibility constraints");
  }
  return p;
}

ReductionVectors build_vectors(const MCPInstance& instance, const ReductionParams& params) {
  instance.validate();
  const std::size_t n = instance.n_elements;
  const std::size_t m = instance.sets.size();
  ReductionVectors out;
  out.dim = n + m;
  out.element_vectors.assign(n, std::vector<float>(out.dim, 0.0f));
  for (std::size_t i = 0; i < n; ++i) out.element_vectors[i][i] = static_cast<float>(params.alpha);
  out.set_vectors.assign(m, std::vector<float>(out.dim, 0.0f));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t e : instance.sets[j]) out.set_vectors[j][e] = static_cast<float>(params.beta);
    out.set_vectors[j][n + j] = static_cast<float>(params.gamma);
  }
  return out;
}

namespace {

void record(ConditionCheck& c, double margin) {
  if (c.pairs == 0 || margin < c.worst_margin) c.worst_margin = margin;
  ++c.pairs;
  if (margin > 0.0) ++c.passed;
}

}  // namespace

ReductionReport validate_reduction(const ReductionVectors& vectors, const MCPInstance& instance,
                                   const Threshold& t) {
  const double d = t.value();
  ReductionReport r;
  const auto& ev = vectors.element_vectors;
  const auto& sv = vectors.set_vectors;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    for (std::size_t l = i + 1; l < ev.size(); ++l) {
      record(r.element_separation, l2_distance(ev[i], ev[l]) - d);
    }
  }
  for (std::size_t j = 0; j < sv.size(); ++j) {
    for (std::size_t l = j + 1; l < sv.size(); ++l) {
      record(r.set_separation, l2_distance(sv[j], sv[l]) - d);
    }
  }
  for (std::size_t j = 0; j < sv.size(); ++j) {
    const std::set<std::size_t> members(instance.sets[j].begin(), instance.sets[j].end());
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const double dist = l2_distance(sv[j], ev[i]);
      if (members.contains(i)) {
        record(r.membership, d - dist);
      } else {
        record(r.non_membership, dist - d);
      }
    }
  }
  return r;
}

Trace build_trace(const MCPInstance& instance, const ReductionVectors& vectors) {
  Trace trace;
  trace.dim = vectors.dim;
  trace.normalized = false;
  trace.has_surprisal = false;
  for (const auto& v : vectors.set_vectors) {
    trace.entries.push_back({v, std::nullopt, trace.entries.size()});
  }
  for (const auto& v : vectors.element_vectors) {
    trace.entries.push_back({v, std::nullopt, trace.entries.size()});
  }
  (void)instance;
  return trace;
}

CoverageResult greedy_max_coverage(const MCPInstance& instance) {
  instance.validate();
  std::vector<bool> covered(instance.n_elements, false);
  std::vector<bool> used(instance.sets.size(), false);
  CoverageResult out;
  const std::size_t rounds = std::min(instance.k, instance.sets.size());
  for (std::size_t round = 0; round < rounds; ++round) {
    std::size_t best = 0;
    std::size_t best_gain = 0;
    bool found = false;
    for (std::size_t j = 0; j < instance.sets.size(); ++j) {
      if (used[j]) continue;
      std::size_t gain = 0;
      for (std::size_t e : instance.sets[j]) gain += covered[e] ? 0 : 1;
      if (!found || gain > best_gain) {
        best = j;
        best_gain = gain;
        found = true;
      }
    }
    used[best] = true;
    out.chosen.push_back(best);
    for (std::size_t e : instance.sets[best]) {
      if (!covered[e]) {
        covered[e] = true;
        ++out.covered;
      }
    }
  }
  return out;
}

namespace {

void search(const MCPInstance& inst, std::size_t start, std::vector<std::size_t>& chosen,
            std::vector<std::size_t>& count, std::size_t covered, CoverageResult& best) {
  if (covered > best.covered || best.chosen.empty()) {
    best.covered = covered;
    best.chosen = chosen;
  }
  if (chosen.size() == inst.k) return;
  for (std::size_t j = start; j < inst.sets.size(); ++j) {
    std::size_t gain = 0;
    for (std::size_t e : inst.sets[j]) gain += count[e]++ == 0 ? 1 : 0;
    chosen.push_back(j);
    search(inst, j + 1, chosen, count, covered + gain, best);
    chosen.pop_back();
    for (std::size_t e : inst.sets[j]) --count[e];
  }
}

}  // namespace

CoverageResult exact_max_coverage(const MCPInstance& instance) {
  instance.validate();
  if (instance.sets.size() > 24) {
    throw std::invalid_argument("mcp: exhaustive coverage limited to 24 sets");
  }
  CoverageResult best;
  std::vector<std::size_t> chosen;
  std::vector<std::size_t> count(instance.n_elements, 0);
  search(instance, 0, chosen, count, 0, best);
  return best;
}

MCPInstance random_mcp_instance(std::size_t n_elements, std::size_t n_sets, std::size_t k,
                                std::uint64_t seed) {
  if (n_elements == 0 || n_sets == 0) throw std::invalid_argument("mcp: empty instance");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size_dist(1, n_elements);
  MCPInstance inst;
  inst.n_elements = n_elements;
  inst.k = k;
  std::vector<std::size_t> universe(n_elements);
  for (std::size_t i = 0; i < n_elements; ++i) universe[i] = i;
  for (std::size_t j = 0; j < n_sets; ++j) {
    std::shuffle(universe.begin(), universe.end(), rng);
    std::vector<std::size_t> s(universe.begin(),
                               universe.begin() + static_cast<std::ptrdiff_t>(size_dist(rng)));
    std::sort(s.begin(), s.end());
    inst.sets.push_back(std::move(s));
  }
  if (n_elements >= 2 && inst.max_set_size() < 2) {
    inst.sets.front() = {0, 1};
  }
  return inst;
}

}  // namespace semcache
