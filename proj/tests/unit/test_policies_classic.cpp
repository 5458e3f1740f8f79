#include <gtest/gtest.h>

#include <map>
#include <memory>
#include <vector>

#include "generators.hpp"
#include "semcache/cache_engine.hpp"
#include "semcache/policies_classic.hpp"
#include "semcache/policy_registry.hpp"
#include "semcache/workload.hpp"

namespace semcache {
namespace {

constexpr std::size_t kDim = 16;

// Orthogonal unit vectors: every pair is sqrt(2) apart, far beyond 0.9.
std::vector<float> item(std::size_t i) {
  std::vector<float> v(kDim, 0.0f);
  v[i] = 1.0f;
  return v;
}

template <typename P, typename... Args>
std::pair<SemanticCache, P*> cache_with(std::size_t capacity, Args&&... args) {
  auto owned = std::make_unique<P>(std::forward<Args>(args)...);
  P* raw = owned.get();
  return {SemanticCache(CacheConfig{kDim, capacity, Threshold(0.9), true}, std::move(owned)), raw};
}

// Replays item indices; returns the evicted entry id of the last request.
std::optional<EntryId> replay(SemanticCache& cache, const std::vector<std::size_t>& items) {
  std::optional<EntryId> last;
  for (auto i : items) last = cache.process(item(i)).evicted;
  return last;
}

TEST(Lru, EvictsLeastRecentlyUsed) {
  auto [cache, lru] = cache_with<LruPolicy>(3);
  EXPECT_EQ(replay(cache, {0, 1, 2, 3}), EntryId{0});
  (void)lru;
}

TEST(Lru, HitRefreshesRecency) {
  auto [cache, lru] = cache_with<LruPolicy>(3);
  replay(cache, {0, 1, 0, 2});
  EXPECT_EQ(lru->last_access(EntryId{0}), 2u);
  EXPECT_EQ(replay(cache, {3}), EntryId{1});
}

TEST(Lfu, EvictsLeastFrequent) {
  auto [cache, lfu] = cache_with<LfuPolicy>(3);
  replay(cache, {0, 1, 2, 0, 0, 0, 1, 2, 2});
  EXPECT_EQ(lfu->frequency(EntryId{0}), 3.0);
  EXPECT_EQ(lfu->frequency(EntryId{1}), 1.0);
  EXPECT_EQ(lfu->frequency(EntryId{2}), 2.0);
  EXPECT_EQ(replay(cache, {3}), EntryId{1});
}

TEST(Lfu, EqualCountsEvictOldestInsertion) {
  auto [cache, lfu] = cache_with<LfuPolicy>(3);
  replay(cache, {2, 0, 1, 2, 0, 1});
  EXPECT_EQ(replay(cache, {3}), EntryId{0});
  (void)lfu;
}

TEST(Lfu, CountersNeverDecreaseDuringResidency) {
  const auto trace = testsupport::random_semantic_trace(60, 800, 3, 9);
  SemanticCache cache(CacheConfig{3, 12, Threshold(0.6), true}, std::make_unique<LfuPolicy>());
  auto& lfu = dynamic_cast<LfuPolicy&>(cache.policy());
  std::map<EntryId, double> seen;
  for (const auto& e : trace.entries) {
    const auto out = cache.process_request(e);
    if (out.evicted) seen.erase(*out.evicted);
    for (auto id : cache.index().ids()) {
      const double f = lfu.frequency(id);
      EXPECT_GE(f, seen[id]);
      seen[id] = f;
    }
  }
}

TEST(Lfuda, WithoutEvictionsBehavesAsLfu) {
  auto [cache, lfuda] = cache_with<LfudaPolicy>(4);
  replay(cache, {0, 1, 2, 3, 0, 0, 2, 1, 1, 1});
  EXPECT_EQ(lfuda->age(), 0.0);
  EXPECT_EQ(lfuda->priority(EntryId{0}), 2.0);
  EXPECT_EQ(lfuda->priority(EntryId{1}), 3.0);
  EXPECT_EQ(lfuda->priority(EntryId{3}), 0.0);
  EXPECT_EQ(replay(cache, {4}), EntryId{3});
}

TEST(Lfuda, InsertInheritsAgeOfVictim) {
  auto [cache, lfuda] = cache_with<LfudaPolicy>(1);
  replay(cache, {0, 0, 0, 0, 0, 0});
  EXPECT_EQ(lfuda->priority(EntryId{0}), 5.0);
  EXPECT_EQ(replay(cache, {1}), EntryId{0});
  EXPECT_EQ(lfuda->age(), 5.0);
  EXPECT_EQ(lfuda->priority(EntryId{1}), 5.0);
}

TEST(Lfuda, MatchesHandRolledReference) {
  const auto keys = testsupport::random_keys(20, 6, 4);
  const auto kt = testsupport::keyed_trace(keys, 6, 8, 4);
  const auto ref = testsupport::simulate_exact("lfuda", kt.requests, 3, 0);
  SemanticCache cache(CacheConfig{8, 3, Threshold(0.5 * kt.min_pairwise), true},
                      std::make_unique<LfudaPolicy>());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    EXPECT_EQ(cache.process_request(kt.trace.entries[i]).hit, ref[i]) << i;
  }
}

TEST(LruK, KOneIsLru) {
  const auto trace = testsupport::random_semantic_trace(80, 1500, 3, 21);
  SemanticCache a(CacheConfig{3, 10, Threshold(0.5), true}, std::make_unique<LruPolicy>());
  SemanticCache b(CacheConfig{3, 10, Threshold(0.5), true}, std::make_unique<LruKPolicy>(1));
  for (const auto& e : trace.entries) {
    const auto x = a.process_request(e);
    const auto y = b.process_request(e);
    ASSERT_EQ(x.hit, y.hit);
    ASSERT_EQ(x.evicted, y.evicted);
  }
}

TEST(LruK, ShortHistoryGoesFirst) {
  auto [cache, lruk] = cache_with<LruKPolicy>(2, 2);
  // Item 0 has two accesses, item 1 only one but more recent.
  replay(cache, {0, 0, 1});
  EXPECT_EQ(replay(cache, {2}), EntryId{1});
  EXPECT_EQ(lruk->k(), 2u);
}

TEST(LruK, MatchesReferenceForKTwo) {
  const auto keys = testsupport::random_keys(600, 25, 17);
  const auto kt = testsupport::keyed_trace(keys, 25, 16, 17);
  const auto ref = testsupport::simulate_exact("lru-k", kt.requests, 8, 0);
  SemanticCache cache(CacheConfig{16, 8, Threshold(0.5 * kt.min_pairwise), true},
                      std::make_unique<LruKPolicy>(2));
  for (std::size_t i = 0; i < keys.size(); ++i) {
    ASSERT_EQ(cache.process_request(kt.trace.entries[i]).hit, ref[i]) << i;
  }
}

TEST(LruK, RejectsZero) { EXPECT_THROW(LruKPolicy(0), std::invalid_argument); }

TEST(Arc, ReaccessPromotesToT2) {
  auto [cache, arc] = cache_with<ArcPolicy>(3, 3, kDim, Threshold(0.9));
  replay(cache, {0});
  EXPECT_TRUE(arc->in_t1(EntryId{0}));
  replay(cache, {0});
  EXPECT_TRUE(arc->in_t2(EntryId{0}));
  EXPECT_EQ(arc->t1_size(), 0u);
}

TEST(Arc, B1GhostMatchRaisesTarget) {
  auto [cache, arc] = cache_with<ArcPolicy>(2, 2, kDim, Threshold(0.9));
  replay(cache, {0, 0, 1, 2});  // 1 is demoted to B1
  EXPECT_EQ(arc->b1_size(), 1u);
  EXPECT_EQ(arc->target(), 0.0);
  replay(cache, {1});
  // |B2| / |B1| = 0, so the step is 1.
  EXPECT_EQ(arc->target(), 1.0);
  EXPECT_EQ(arc->t2_size(), 1u);
  EXPECT_TRUE(arc->in_t2(EntryId{3}));
}

TEST(Arc, MatchesReferenceOnExactRepeats) {
  const auto keys = testsupport::random_keys(500, 40, 3);
  const auto kt = testsupport::keyed_trace(keys, 40, 24, 3);
  const auto ref = testsupport::simulate_exact("arc", kt.requests, 10, 0);
  const Threshold t(0.5 * kt.min_pairwise);
  SemanticCache cache(CacheConfig{24, 10, t, true}, std::make_unique<ArcPolicy>(10, 24, t));
  std::size_t hits = 0, ref_hits = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const bool h = cache.process_request(kt.trace.entries[i]).hit;
    EXPECT_EQ(h, ref[i]) << i;
    hits += h;
    ref_hits += ref[i];
  }
  EXPECT_EQ(hits, ref_hits);
}

TEST(Arc, DirectoryBounds) {
  const auto trace = testsupport::random_semantic_trace(120, 3000, 4, 6);
  const Threshold t(0.4);
  const std::size_t n = 16;
  SemanticCache cache(CacheConfig{4, n, t, true}, std::make_unique<ArcPolicy>(n, 4, t));
  const auto& arc = dynamic_cast<const ArcPolicy&>(std::as_const(cache).policy());
  for (const auto& e : trace.entries) {
    cache.process_request(e);
    EXPECT_LE(arc.t1_size() + arc.t2_size(), n);
    EXPECT_EQ(arc.t1_size() + arc.t2_size(), cache.size());
    EXPECT_LE(arc.t1_size() + arc.b1_size(), n);
    EXPECT_LE(arc.t1_size() + arc.t2_size() + arc.b1_size() + arc.b2_size(), 2 * n);
    EXPECT_GE(arc.target(), 0.0);
    EXPECT_LE(arc.target(), static_cast<double>(n));
  }
}

TEST(Rap, ZeroCounterAlwaysAdmits) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(rap_admit(0.0, rng));
}

double admit_rate(double c, std::size_t trials, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t yes = 0;
  for (std::size_t i = 0; i < trials; ++i) yes += rap_admit(c, rng);
  return static_cast<double>(yes) / static_cast<double>(trials);
}

TEST(Rap, AdmitProbabilityMatchesClosedForm) {
  const double r9 = admit_rate(9.0, 100'000, 7);
  EXPECT_GE(r9, 0.094);
  EXPECT_LE(r9, 0.106);
  EXPECT_NEAR(admit_rate(1.0, 100'000, 8), 0.5, 0.01);
}

TEST(Rap, RefusesWhenVictimIsPopular) {
  auto [cache, rap] = cache_with<RapPolicy>(1, 99);
  replay(cache, {0});
  for (int i = 0; i < 1000; ++i) replay(cache, {0});
  // Counter 1000: admission is very unlikely for a handful of misses.
  std::size_t admitted = 0;
  for (std::size_t i = 1; i <= 5; ++i) admitted += cache.process(item(i)).inserted;
  EXPECT_EQ(admitted, 0u);
  EXPECT_EQ(rap->frequency(EntryId{0}), 1000.0);
}

TEST(Fifo, EvictsFirstInserted) {
  auto [cache, fifo] = cache_with<FifoPolicy>(2);
  EXPECT_EQ(replay(cache, {0, 1, 0, 2}), EntryId{0});
  (void)fifo;
}

std::vector<std::optional<EntryId>> random_victims(std::uint64_t seed) {
  SemanticCache cache(CacheConfig{kDim, 4, Threshold(0.9), true}, std::make_unique<RandomPolicy>(seed));
  std::vector<std::optional<EntryId>> out;
  for (std::size_t i = 0; i < 200; ++i) out.push_back(cache.process(item(i % kDim)).evicted);
  return out;
}

TEST(Random, SeedFixesVictimSequence) {
  EXPECT_EQ(random_victims(5), random_victims(5));
  EXPECT_NE(random_victims(5), random_victims(6));
}

TEST(Random, VictimsAreUniform) {
  RandomPolicy p(123);
  for (std::uint64_t i = 0; i < 4; ++i) p.on_insert(CacheEntry{EntryId{i}, {}, std::nullopt, i});
  std::map<EntryId, double> counts;
  const int trials = 10'000;
  for (int i = 0; i < trials; ++i) counts[p.choose_victim()] += 1.0;
  double chi2 = 0.0;
  for (std::uint64_t i = 0; i < 4; ++i) {
    const double expected = trials / 4.0;
    chi2 += (counts[EntryId{i}] - expected) * (counts[EntryId{i}] - expected) / expected;
  }
  // 99.9th percentile of chi-square with 3 degrees of freedom.
  EXPECT_LT(chi2, 16.27);
}

TEST(ClassicPolicies, DegenerateThresholdMatchesExactLru) {
  const auto keys = testsupport::random_keys(200, 20, 2);
  const auto kt = testsupport::keyed_trace(keys, 20, 16, 2);
  for (const char* name : {"fifo", "random", "lru", "lfu", "lfuda", "lru-k", "arc", "rap"}) {
    const Threshold t(0.5 * kt.min_pairwise);
    SemanticCache cache(CacheConfig{16, 6, t, true}, make_policy(name, {6, 16, t, 11, {}}));
    const auto ref = testsupport::simulate_exact(name, kt.requests, 6, 11);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      ASSERT_EQ(cache.process_request(kt.trace.entries[i]).hit, ref[i]) << name << " " << i;
    }
  }
}

TEST(ClassicPolicies, ReplaysAreBitIdentical) {
  const auto trace = testsupport::random_semantic_trace(200, 2000, 3, 77);
  for (const char* name : {"random", "rap", "arc"}) {
    auto run = [&] {
      SemanticCache cache(CacheConfig{3, 20, Threshold(0.3), true},
                          make_policy(name, {20, 3, Threshold(0.3), 42, {}}));
      std::vector<std::optional<EntryId>> ev;
      for (const auto& e : trace.entries) ev.push_back(cache.process_request(e).evicted);
      return ev;
    };
    EXPECT_EQ(run(), run()) << name;
  }
}

}  // namespace
}  // namespace semcache
