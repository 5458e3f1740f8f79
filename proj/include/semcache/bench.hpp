#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semcache/policy_registry.hpp"
#include "semcache/trace.hpp"

namespace semcache {

struct RunConfig {
  std::filesystem::path trace_path;
  std::string policy;
  std::size_t capacity = 0;
  double threshold = 0.9;
  std::uint64_t seed = 0;
  std::optional<std::size_t> limit;
  ParamMap params;
};

struct RunReport {
  RunConfig config;
  std::size_t requests = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  double hit_rate = 0.0;
  std::optional<double> mean_hit_distance;  // empty when there are no hits
  double throughput_ops = 0.0;
  double wall_seconds = 0.0;
  double setup_seconds = 0.0;  // oracle precomputation, excluded from throughput
  /// Largest cache occupancy observed; for oracles replayed outside the
  /// engine, the bound min(capacity, misses).
  std::size_t peak_size = 0;
};

/// Cold-start replay of the trace prefix. Only the replay loop is timed.
/// Throws ConfigError for unknown policies, bad parameters, a limit beyond the
/// trace length, surprisal policies on traces without surprisal, and oracle
/// size guards.
RunReport run_single(const RunConfig& config, const Trace& trace);

/// Loads config.trace_path, then runs.
RunReport run_single(const RunConfig& config);

/// Sort key: (trace path, policy, threshold, capacity, seed, limit, params).
bool config_less(const RunConfig& a, const RunConfig& b);

/// Runs every config, up to jobs at a time, and returns reports sorted by
/// config_less. Each trace file is loaded once.
std::vector<RunReport> run_matrix(std::vector<RunConfig> grid, std::size_t jobs = 1);

/// n sizes from lo to hi, geometric, rounded and deduplicated.
std::vector<std::size_t> log_spaced_sizes(std::size_t lo, std::size_t hi, std::size_t n);

const std::vector<std::string>& csv_columns();
void write_csv(std::ostream& out, const std::vector<RunReport>& reports);

/// One parsed CSV row.
struct CsvRow {
  std::string policy;
  std::size_t cache_size = 0;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  std::string params;  // k=v pairs joined by ';'
  std::size_t requests = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  double hit_rate = 0.0;
  std::optional<double> mean_hit_distance;
  double throughput_ops = 0.0;
  double wall_seconds = 0.0;
  double setup_seconds = 0.0;
};

/// Throws DataError on a bad header or malformed row.
std::vector<CsvRow> read_csv(std::istream& in);

/// Writes <dir>/<metric>.csv for hit_rate, mean_hit_distance and
/// throughput_ops with columns policy,size,threshold,value. Rows keep CSV
/// order; a blank mean hit distance stays blank. Returns the written paths.
std::vector<std::filesystem::path> emit_plotdata(const std::vector<CsvRow>& rows,
                                                 const std::filesystem::path& dir);

}  // namespace semcache
