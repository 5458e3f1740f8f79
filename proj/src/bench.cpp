#include "semcache/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "semcache/cache_engine.hpp"
#include "semcache/errors.hpp"
#include "semcache/offline_oracles.hpp"
#include "semcache/trace_io.hpp"

namespace semcache {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string join_params(const ParamMap& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out += ';';
    out += k + '=' + v;
  }
  return out;
}

Trace prefix(const Trace& trace, std::size_t n) {
  Trace out;
  out.dim = trace.dim;
  out.normalized = trace.normalized;
  out.has_surprisal = trace.has_surprisal;
  out.entries.assign(trace.entries.begin(),
                     trace.entries.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

void finish(RunReport& r, std::size_t hits, double distance_sum, bool distances_known) {
  r.hits = hits;
  r.misses = r.requests - hits;
  r.hit_rate = r.requests == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(r.requests);
  if (hits > 0 && distances_known) r.mean_hit_distance = distance_sum / static_cast<double>(hits);
  r.throughput_ops = r.wall_seconds > 0.0 ? static_cast<double>(r.requests) / r.wall_seconds : 0.0;
}

void run_online(RunReport& r, const Trace& trace, const Threshold& t) {
  PolicyOptions opts{r.config.capacity, trace.dim, t, r.config.seed, r.config.params};
  auto policy = make_policy(r.config.policy, opts);
  if (policy->requires_surprisal() && !trace.has_surprisal) {
    throw ConfigError(fmt::format("policy {} requires a trace with surprisal values",
                                  r.config.policy));
  }
  SemanticCache cache(CacheConfig{trace.dim, r.config.capacity, t, trace.normalized},
                      std::move(policy));
  std::size_t peak = 0;
  const auto start = Clock::now();
  for (const auto& e : trace.entries) {
    cache.process(e.vector, e.surprisal);
    peak = std::max(peak, cache.size());
  }
  r.wall_seconds = seconds_since(start);
  r.peak_size = peak;
  finish(r, cache.hits(), cache.hit_distance_sum(), true);
}

void accumulate(RunReport& r, const OracleReplay& replay) {
  double sum = 0.0;
  for (std::size_t i = 0; i < replay.hit.size(); ++i) {
    if (replay.hit[i]) sum += replay.hit_distance[i];
  }
  r.peak_size = std::min(r.config.capacity, r.requests - replay.hits);
  finish(r, replay.hits, sum, true);
}

void run_oracle(RunReport& r, const Trace& trace, const Threshold& t) {
  const std::string& name = r.config.policy;
  if (name == "fgrvb") {
    require_known_params(name, r.config.params, {"score"});
  } else {
    require_known_params(name, r.config.params, {});
  }

  if (name == "opt-exact") {
    auto setup = Clock::now();
    const auto keys = exact_keys(trace);
    r.setup_seconds = seconds_since(setup);
    const auto start = Clock::now();
    const auto res = belady_opt(keys, r.config.capacity);
    r.wall_seconds = seconds_since(start);
    std::size_t admitted = 0;
    for (bool a : res.admitted) admitted += a ? 1 : 0;
    r.peak_size = std::min(r.config.capacity, admitted);
    finish(r, res.hits, 0.0, true);
    return;
  }
  if (name == "vopt-brute") {
    const auto start = Clock::now();
    const std::size_t hits = vopt_bruteforce(trace, t, r.config.capacity);
    r.wall_seconds = seconds_since(start);
    r.peak_size = std::min(r.config.capacity, r.requests - hits);
    finish(r, hits, 0.0, false);
    return;
  }

  const auto setup = Clock::now();
  const CoverTable cover = build_cover_table(trace, t);
  if (name == "crvb") {
    const ClusterCover clusters = crvb_cluster(cover);
    r.setup_seconds = seconds_since(setup);
    const auto start = Clock::now();
    const auto replay = crvb_replay(trace, clusters, r.config.capacity);
    r.wall_seconds = seconds_since(start);
    accumulate(r, replay);
    return;
  }
  r.setup_seconds = seconds_since(setup);
  const auto start = Clock::now();
  OracleReplay replay;
  if (name == "fgrvb") {
    VolumeScore score = VolumeScore::Marginal;
    if (const auto it = r.config.params.find("score"); it != r.config.params.end()) {
      if (it->second == "marginal") {
        score = VolumeScore::Marginal;
      } else if (it->second == "plain") {
        score = VolumeScore::Plain;
      } else {
        throw ConfigError("fgrvb: score must be marginal or plain");
      }
    }
    replay = fgrvb_replay(trace, cover, r.config.capacity, t, score);
  } else {
    replay = rgrvb_replay(trace, cover, r.config.capacity, t);
  }
  r.wall_seconds = seconds_since(start);
  accumulate(r, replay);
}

Threshold make_threshold(double value) {
  try {
    return Threshold(value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("threshold {}: {}", value, e.what()));
  }
}

}  // namespace

RunReport run_single(const RunConfig& config, const Trace& full) {
  if (config.capacity == 0) throw ConfigError("cache size must be at least 1");
  if (!is_online_policy(config.policy) && !is_oracle(config.policy)) {
    throw ConfigError(fmt::format("unknown policy '{}'", config.policy));
  }
  const Threshold t = make_threshold(config.threshold);
  if (config.limit && *config.limit > full.size()) {
    throw ConfigError(fmt::format("limit {} exceeds trace length {}", *config.limit, full.size()));
  }
  const std::size_t n = config.limit.value_or(full.size());
  const Trace limited = n == full.size() ? Trace{} : prefix(full, n);
  const Trace& trace = n == full.size() ? full : limited;

  RunReport r;
  r.config = config;
  r.requests = trace.size();
  if (is_online_policy(config.policy)) {
    run_online(r, trace, t);
  } else {
    run_oracle(r, trace, t);
  }
  return r;
}

RunReport run_single(const RunConfig& config) {
  const Trace trace = read_trace(config.trace_path);
  return run_single(config, trace);
}

bool config_less(const RunConfig& a, const RunConfig& b) {
  const auto la = a.limit.value_or(SIZE_MAX);
  const auto lb = b.limit.value_or(SIZE_MAX);
  return std::tie(a.trace_path, a.policy, a.threshold, a.capacity, a.seed, la, a.params) <
         std::tie(b.trace_path, b.policy, b.threshold, b.capacity, b.seed, lb, b.params);
}

std::vector<RunReport> run_matrix(std::vector<RunConfig> grid, std::size_t jobs) {
  std::stable_sort(grid.begin(), grid.end(), config_less);
  std::map<std::filesystem::path, Trace> traces;
  for (const auto& c : grid) {
    if (!traces.contains(c.trace_path)) traces.emplace(c.trace_path, read_trace(c.trace_path));
  }

  std::vector<std::optional<RunReport>> out(grid.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      {
        std::lock_guard lock(error_mutex);
        if (error) return;
      }
      try {
        out[i] = run_single(grid[i], traces.at(grid[i].trace_path));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, grid.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<RunReport> reports;
  reports.reserve(out.size());
  for (auto& r : out) reports.push_back(std::move(*r));
  return reports;
}

std::vector<std::size_t> log_spaced_sizes(std::size_t lo, std::size_t hi, std::size_t n) {
  if (lo == 0 || hi < lo || n == 0) throw ConfigError("log_spaced_sizes: need 0 < lo <= hi, n > 0");
  std::set<std::size_t> sizes;
  if (n == 1) return {lo};
  const double step = std::log(static_cast<double>(hi) / static_cast<double>(lo)) /
                      static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = static_cast<double>(lo) * std::exp(step * static_cast<double>(i));
    sizes.insert(std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(v)), lo, hi));
  }
  return {sizes.begin(), sizes.end()};
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "policy",   "cache_size",        "threshold",      "seed",         "params",
      "requests", "hits",              "misses",         "hit_rate",     "mean_hit_distance",
      "throughput_ops", "wall_seconds", "setup_seconds",
  };
  return cols;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw DataError("csv: unterminated quote");
  return fields;
}

template <typename T>
T parse_number(const std::string& s, const char* column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError(fmt::format("csv: bad {} value '{}'", column, s));
  }
  return v;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<RunReport>& reports) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : reports) {
    out << csv_field(r.config.policy) << ',' << r.config.capacity << ','
        << fmt::format("{}", r.config.threshold) << ',' << r.config.seed << ','
        << csv_field(join_params(r.config.params)) << ',' << r.requests << ',' << r.hits << ','
        << r.misses << ',' << fmt::format("{}", r.hit_rate) << ','
        << (r.mean_hit_distance ? fmt::format("{}", *r.mean_hit_distance) : std::string()) << ','
        << fmt::format("{}", r.throughput_ops) << ',' << fmt::format("{}", r.wall_seconds) << ','
        << fmt::format("{}", r.setup_seconds) << '\n';
  }
}

std::vector<CsvRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: empty input");
  if (split_csv_line(line) != csv_columns()) throw DataError("csv: unexpected header");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != csv_columns().size()) {
      throw DataError(fmt::format("csv: row {} has {} fields", rows.size() + 1, f.size()));
    }
    CsvRow r;
    r.policy = f[0];
    r.cache_size = parse_number<std::size_t>(f[1], "cache_size");
    r.threshold = parse_number<double>(f[2], "threshold");
    r.seed = parse_number<std::uint64_t>(f[3], "seed");
    r.params = f[4];
    r.requests = parse_number<std::size_t>(f[5], "requests");
    r.hits = parse_number<std::size_t>(f[6], "hits");
    r.misses = parse_number<std::size_t>(f[7], "misses");
    r.hit_rate = parse_number<double>(f[8], "hit_rate");
    if (!f[9].empty()) r.mean_hit_distance = parse_number<double>(f[9], "mean_hit_distance");
    r.throughput_ops = parse_number<double>(f[10], "throughput_ops");
    r.wall_seconds = parse_number<double>(f[11], "wall_seconds");
    r.setup_seconds = parse_number<double>(f[12], "setup_seconds");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::filesystem::path> emit_plotdata(const std::vector<CsvRow>& rows,
                                                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  struct Metric {
    const char* name;
    std::string (*value)(const CsvRow&);
  };
  const Metric metrics[] = {
      {"hit_rate", [](const CsvRow& r) { return fmt::format("{}", r.hit_rate); }},
      {"mean_hit_distance",
       [](const CsvRow& r) {
         return r.mean_hit_distance ? fmt::format("{}", *r.mean_hit_distance) : std::string();
       }},
      {"throughput_ops", [](const CsvRow& r) { return fmt::format("{}", r.throughput_ops); }},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& m : metrics) {
    const auto path = dir / (std::string(m.name) + ".csv");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << "policy,size,threshold,value\n";
    for (const auto& r : rows) {
      out << csv_field(r.policy) << ',' << r.cache_size << ',' << fmt::format("{}", r.threshold)
          << ',' << m.value(r) << '\n';
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace semcache
