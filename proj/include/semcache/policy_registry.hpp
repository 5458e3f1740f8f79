#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "semcache/policy.hpp"
#include "semcache/vector_core.hpp"

namespace semcache {

using ParamMap = std::map<std::string, std::string>;

struct PolicyOptions {
  std::size_t capacity = 1;
  std::size_t dim = 0;
  Threshold threshold{0.9};
  std::uint64_t seed = 0;
  ParamMap params;
};

/// Online policy names accepted by make_policy, in display order.
const std::vector<std::string>& online_policy_names();

/// Offline oracle names handled by the bench runner.
const std::vector<std::string>& oracle_names();

bool is_online_policy(std::string_view name);
bool is_oracle(std::string_view name);

/// Builds a fresh policy. Throws ConfigError for unknown names, unknown
/// parameter keys and unparsable or out-of-range values.
std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyOptions& options);

/// Parses "key=value" into the map. Throws ConfigError on a malformed pair or
/// a repeated key.
void parse_param(std::string_view kv, ParamMap& out);

double param_double(const ParamMap& params, const std::string& key, double fallback);
std::size_t param_size(const ParamMap& params, const std::string& key, std::size_t fallback);

/// Throws ConfigError when params holds a key outside allowed.
void require_known_params(std::string_view policy, const ParamMap& params,
                          const std::vector<std::string>& allowed);

}  // namespace semcache
