#include "semcache/policy_registry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "semcache/errors.hpp"
#include "semcache/policies_classic.hpp"
#include "semcache/policies_semantic.hpp"

namespace semcache {

const std::vector<std::string>& online_policy_names() {
  static const std::vector<std::string> names = {
      "fifo",      "random",     "lru",         "lfu",          "lfuda",
      "lru-k",     "arc",        "rap",         "sphere-lfu",   "miss-lfu",
      "cluster-lfu", "cluster-lru", "distance-lfu", "surprisal", "surprisal-lfu",
  };
  return names;
}

const std::vector<std::string>& oracle_names() {
  static const std::vector<std::string> names = {"opt-exact", "crvb", "fgrvb", "rgrvb",
                                                 "vopt-brute"};
  return names;
}

bool is_online_policy(std::string_view name) {
  const auto& n = online_policy_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

bool is_oracle(std::string_view name) {
  const auto& n = oracle_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

void parse_param(std::string_view kv, ParamMap& out) {
  const auto eq = kv.find('=');
  if (eq == std::string_view::npos || eq == 0 || eq + 1 == kv.size()) {
    throw ConfigError(fmt::format("parameter '{}' is not key=value", kv));
  }
  std::string key(kv.substr(0, eq));
  if (out.contains(key)) throw ConfigError(fmt::format("parameter '{}' given twice", key));
  out.emplace(std::move(key), std::string(kv.substr(eq + 1)));
}

double param_double(const ParamMap& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  const std::string& s = it->second;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(fmt::format("parameter {}={} is not a finite number", key, s));
  }
  return v;
}

std::size_t param_size(const ParamMap& params, const std::string& key, std::size_t fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  const std::string& s = it->second;
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("parameter {}={} is not a non-negative integer", key, s));
  }
  return v;
}

void require_known_params(std::string_view policy, const ParamMap& params,
                          const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : params) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("policy {} does not accept parameter '{}'", policy, key));
    }
  }
}

std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyOptions& o) {
  if (o.capacity == 0) throw ConfigError("cache size must be at least 1");
  if (!is_online_policy(name)) throw ConfigError(fmt::format("unknown policy '{}'", name));

  if (name == "lru-k") {
    require_known_params(name, o.params, {"k"});
    const std::size_t k = param_size(o.params, "k", 2);
    if (k == 0) throw ConfigError("lru-k: k must be at least 1");
    return std::make_unique<LruKPolicy>(k);
  }
  if (name == "sphere-lfu") {
    require_known_params(name, o.params, {"kappa", "alpha", "gamma", "top-k", "halve-every"});
    SphereParams sp;
    sp.kappa = param_double(o.params, "kappa", sp.kappa);
    sp.alpha = param_double(o.params, "alpha", sp.alpha);
    sp.gamma = param_double(o.params, "gamma", sp.gamma);
    if (o.params.contains("top-k")) sp.top_k = param_size(o.params, "top-k", 0);
    sp.halve_every = param_size(o.params, "halve-every", o.capacity);
    try {
      sp.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return std::make_unique<SphereLfuPolicy>(sp);
  }

  if (name == "cluster-lfu" || name == "cluster-lru") {
    require_known_params(name, o.params, {"radius"});
    const double radius = param_double(o.params, "radius", o.threshold.value());
    if (!(radius > 0.0 && radius < 2.0)) throw ConfigError("cluster radius must lie in (0, 2)");
    const auto mode = name == "cluster-lfu" ? ClusterPolicy::Mode::Lfu : ClusterPolicy::Mode::Lru;
    return std::make_unique<ClusterPolicy>(mode, Threshold(radius), o.seed);
  }

  require_known_params(name, o.params, {});
  if (name == "fifo") return std::make_unique<FifoPolicy>();
  if (name == "random") return std::make_unique<RandomPolicy>(o.seed);
  if (name == "lru") return std::make_unique<LruPolicy>();
  if (name == "lfu") return std::make_unique<LfuPolicy>();
  if (name == "lfuda") return std::make_unique<LfudaPolicy>();
  if (name == "arc") return std::make_unique<ArcPolicy>(o.capacity, o.dim, o.threshold);
  if (name == "rap") return std::make_unique<RapPolicy>(o.seed);
  if (name == "miss-lfu") return std::make_unique<MissLfuPolicy>();
  if (name == "distance-lfu") return std::make_unique<DistanceLfuPolicy>(o.threshold);
  if (name == "surprisal") return std::make_unique<SurprisalPolicy>();
  if (name == "surprisal-lfu") return std::make_unique<SurprisalLfuPolicy>();
  throw ConfigError(fmt::format("unknown policy '{}'", name));
}

}  // namespace semcache
