#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "generators.hpp"
#include "semcache/bench.hpp"
#include "semcache/errors.hpp"
#include "semcache/trace_io.hpp"
#include "semcache/workload.hpp"

namespace semcache {
namespace {

namespace fs = std::filesystem;

Trace repeated(std::size_t n) {
  Trace t;
  t.dim = 4;
  for (std::size_t i = 0; i < n; ++i) t.entries.push_back({{0.0f, 1.0f, 0.0f, 0.0f}, std::nullopt, i});
  return t;
}

Trace orthogonal(std::size_t n) {
  Trace t;
  t.dim = n;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> v(n, 0.0f);
    v[i] = 1.0f;
    t.entries.push_back({v, std::nullopt, i});
  }
  return t;
}

RunConfig config(std::string policy, std::size_t capacity, double threshold = 0.9) {
  RunConfig c;
  c.policy = std::move(policy);
  c.capacity = capacity;
  c.threshold = threshold;
  return c;
}

ZipfParams medium_zipf() {
  ZipfParams p;
  p.num_clusters = 200;
  p.requests = 10'000;
  p.dim = 32;
  p.seed = 11;
  return p;
}

class BenchDir {
 public:
  BenchDir() {
    path_ = fs::temp_directory_path() /
            (std::string("semcache_bench_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~BenchDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(RunSingle, IdenticalVectorsHitAfterFirst) {
  const auto t = repeated(20);
  for (const char* name : {"lru", "lfu", "sphere-lfu", "opt-exact", "crvb", "vopt-brute"}) {
    const auto r = run_single(config(name, 2), t);
    EXPECT_EQ(r.requests, 20u) << name;
    EXPECT_EQ(r.hits, 19u) << name;
    EXPECT_EQ(r.misses, 1u) << name;
    EXPECT_DOUBLE_EQ(r.hit_rate, 19.0 / 20.0) << name;
    EXPECT_EQ(r.peak_size, 1u) << name;
    // The brute-force optimum only counts hits.
    if (std::string(name) == "vopt-brute") {
      EXPECT_FALSE(r.mean_hit_distance.has_value());
      continue;
    }
    ASSERT_TRUE(r.mean_hit_distance.has_value()) << name;
    EXPECT_NEAR(*r.mean_hit_distance, 0.0, 1e-9) << name;
  }
}

TEST(RunSingle, DistantVectorsNeverHit) {
  const auto t = orthogonal(12);
  for (const char* name : {"lru", "fifo", "arc", "opt-exact", "fgrvb"}) {
    const auto r = run_single(config(name, 4), t);
    EXPECT_EQ(r.hits, 0u) << name;
    EXPECT_EQ(r.hit_rate, 0.0) << name;
    EXPECT_FALSE(r.mean_hit_distance.has_value()) << name;
  }
}

TEST(RunSingle, LimitAndValidation) {
  const auto t = repeated(10);
  auto c = config("lru", 1);
  c.limit = 4;
  EXPECT_EQ(run_single(c, t).requests, 4u);
  c.limit = 11;
  EXPECT_THROW(run_single(c, t), ConfigError);
  EXPECT_THROW(run_single(config("no-such-policy", 1), t), ConfigError);
  EXPECT_THROW(run_single(config("lru", 0), t), ConfigError);
  EXPECT_THROW(run_single(config("surprisal", 2), t), ConfigError);
  auto p = config("lru", 2);
  p.params["unknown"] = "1";
  EXPECT_THROW(run_single(p, t), ConfigError);
}

TEST(RunSingle, FrequencyBeatsRecencyOnZipf) {
  const auto t = generate_zipf_workload(medium_zipf());
  const auto lfu = run_single(config("lfu", 50), t);
  const auto lru = run_single(config("lru", 50), t);
  EXPECT_GT(lfu.hit_rate, lru.hit_rate);
}

TEST(RunSingle, OptExactMonotoneInCapacity) {
  auto p = medium_zipf();
  p.requests = 3000;
  const auto t = generate_zipf_workload(p);
  std::size_t prev = 0;
  for (std::size_t n : {5u, 10u, 20u, 40u, 80u}) {
    const auto r = run_single(config("opt-exact", n), t);
    EXPECT_GE(r.hits, prev) << n;
    EXPECT_LE(r.peak_size, n);
    prev = r.hits;
  }
}

TEST(RunSingle, ReplaysAreDeterministic) {
  const auto t = generate_zipf_workload(medium_zipf());
  for (const char* name : {"random", "rap", "cluster-lfu", "sphere-lfu"}) {
    auto c = config(name, 30);
    c.seed = 5;
    const auto a = run_single(c, t), b = run_single(c, t);
    EXPECT_EQ(a.hits, b.hits) << name;
    EXPECT_EQ(a.mean_hit_distance, b.mean_hit_distance) << name;
  }
}

TEST(RunMatrix, SortedAndDeterministic) {
  BenchDir dir;
  const auto path = dir.path() / "z.bin";
  auto p = medium_zipf();
  p.requests = 2000;
  write_trace(path, generate_zipf_workload(p));
  std::vector<RunConfig> grid;
  for (const char* name : {"lru", "fifo"}) {
    for (std::size_t n : {40u, 10u, 20u}) {
      auto c = config(name, n);
      c.trace_path = path;
      grid.push_back(c);
    }
  }
  const auto a = run_matrix(grid, 1);
  const auto b = run_matrix(grid, 3);
  ASSERT_EQ(a.size(), 6u);
  ASSERT_EQ(b.size(), 6u);
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    EXPECT_TRUE(config_less(a[i].config, a[i + 1].config));
  }
  EXPECT_EQ(a.front().config.policy, "fifo");
  EXPECT_EQ(a.front().config.capacity, 10u);
  EXPECT_EQ(a.back().config.policy, "lru");
  EXPECT_EQ(a.back().config.capacity, 40u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].config.policy, b[i].config.policy);
    EXPECT_EQ(a[i].config.capacity, b[i].config.capacity);
    EXPECT_EQ(a[i].hits, b[i].hits);
  }
}

TEST(LogSpacedSizes, GeometricAndDeduplicated) {
  EXPECT_EQ(log_spaced_sizes(10, 1000, 3), (std::vector<std::size_t>{10, 100, 1000}));
  EXPECT_EQ(log_spaced_sizes(1, 2, 5), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(log_spaced_sizes(7, 7, 1), (std::vector<std::size_t>{7}));
  const auto s = log_spaced_sizes(25, 2000, 7);
  EXPECT_EQ(s.front(), 25u);
  EXPECT_EQ(s.back(), 2000u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_THROW(log_spaced_sizes(0, 10, 3), ConfigError);
  EXPECT_THROW(log_spaced_sizes(10, 5, 3), ConfigError);
}

std::vector<RunReport> sample_reports() {
  RunReport hit;
  hit.config = config("lru", 8, 0.9);
  hit.config.params = {{"k", "2"}, {"note", "a,\"b\""}};
  hit.requests = 10;
  hit.hits = 4;
  hit.misses = 6;
  hit.hit_rate = 0.4;
  hit.mean_hit_distance = 0.125;
  hit.throughput_ops = 1000.5;
  hit.wall_seconds = 0.01;
  RunReport miss = hit;
  miss.config = config("fifo", 16, 0.5);
  miss.hits = 0;
  miss.misses = 10;
  miss.hit_rate = 0.0;
  miss.mean_hit_distance.reset();
  return {hit, miss};
}

TEST(Csv, HeaderAndRoundTrip) {
  std::stringstream ss;
  write_csv(ss, sample_reports());
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  EXPECT_EQ(header,
            "policy,cache_size,threshold,seed,params,requests,hits,misses,hit_rate,"
            "mean_hit_distance,throughput_ops,wall_seconds,setup_seconds");
  const auto rows = read_csv(ss);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].policy, "lru");
  EXPECT_EQ(rows[0].cache_size, 8u);
  EXPECT_EQ(rows[0].params, "k=2;note=a,\"b\"");
  EXPECT_EQ(rows[0].hits, 4u);
  EXPECT_DOUBLE_EQ(rows[0].hit_rate, 0.4);
  EXPECT_EQ(rows[0].mean_hit_distance, 0.125);
  EXPECT_DOUBLE_EQ(rows[0].throughput_ops, 1000.5);
  EXPECT_EQ(rows[1].policy, "fifo");
  EXPECT_DOUBLE_EQ(rows[1].threshold, 0.5);
  EXPECT_FALSE(rows[1].mean_hit_distance.has_value());
}

TEST(Csv, MalformedInputIsDataError) {
  std::stringstream empty;
  EXPECT_THROW(read_csv(empty), DataError);
  std::stringstream header("policy,hits\n");
  EXPECT_THROW(read_csv(header), DataError);
  std::stringstream ss;
  write_csv(ss, sample_reports());
  auto text = ss.str();
  std::stringstream short_row(text + "lru,1\n");
  EXPECT_THROW(read_csv(short_row), DataError);
  const auto pos = text.find("\nfifo,16");
  std::stringstream bad_number(text.substr(0, pos) + "\nfifo,x" + text.substr(pos + 8));
  EXPECT_THROW(read_csv(bad_number), DataError);
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(PlotData, OneFilePerMetricInCsvOrder) {
  BenchDir dir;
  std::stringstream ss;
  write_csv(ss, sample_reports());
  const auto rows = read_csv(ss);
  const auto paths = emit_plotdata(rows, dir.path());
  ASSERT_EQ(paths.size(), 3u);
  for (const char* metric : {"hit_rate", "mean_hit_distance", "throughput_ops"}) {
    const auto file = dir.path() / (std::string(metric) + ".csv");
    ASSERT_TRUE(fs::exists(file)) << metric;
    const auto lines = lines_of(file);
    ASSERT_EQ(lines.size(), 3u) << metric;
    EXPECT_EQ(lines[0], "policy,size,threshold,value");
    EXPECT_EQ(lines[1].rfind("lru,8,0.9,", 0), 0u) << lines[1];
    EXPECT_EQ(lines[2].rfind("fifo,16,0.5,", 0), 0u) << lines[2];
  }
  const auto mhd = lines_of(dir.path() / "mean_hit_distance.csv");
  EXPECT_EQ(mhd[1], "lru,8,0.9,0.125");
  EXPECT_EQ(mhd[2], "fifo,16,0.5,");
  const auto again = emit_plotdata(rows, dir.path());
  EXPECT_EQ(lines_of(again[0]), lines_of(paths[0]));
}

}  // namespace
}  // namespace semcache
