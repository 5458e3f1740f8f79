#include "semcache/vector_core.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace semcache {

namespace {

constexpr std::size_t kLanes = 8;
// Partial sums are checked against the cutoff once per block.
constexpr std::size_t kCheckBlock = 32;

using Lanes = std::array<double, kLanes>;

void check_dims(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
}

// Element i always lands in lane i % kLanes, and lanes are combined in a fixed
// order, so every caller sees the same rounding.
inline void accumulate(const float* a, const float* b, std::size_t begin, std::size_t end,
                       Lanes& acc) noexcept {
  std::size_t i = begin;
  for (; i + kLanes <= end; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const double d = static_cast<double>(a[i + l]) - static_cast<double>(b[i + l]);
      acc[l] += d * d;
    }
  }
  for (; i < end; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc[i % kLanes] += d * d;
  }
}

inline double combine(const Lanes& acc) noexcept {
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

// Smallest s with sqrt(s) >= t. Any sum >= s maps to a distance >= t.
double cutoff_for(double t) {
  double s = t * t;
  while (std::sqrt(s) < t) {
    s = std::nextafter(s, std::numeric_limits<double>::infinity());
  }
  while (s > 0.0) {
    const double lower = std::nextafter(s, 0.0);
    if (std::sqrt(lower) < t) break;
    s = lower;
  }
  return s;
}

}  // namespace

Threshold::Threshold(double value) : value_(value), cutoff_sq_(0.0) {
  if (!(value > 0.0 && value < 2.0)) {
    throw std::invalid_argument("threshold must lie in (0, 2), got " + std::to_string(value));
  }
  cutoff_sq_ = cutoff_for(value);
}

double dot(std::span<const float> a, std::span<const float> b) {
  check_dims(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

double l2_norm(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

double l2_distance(std::span<const float> a, std::span<const float> b) {
  check_dims(a, b);
  Lanes acc{};
  accumulate(a.data(), b.data(), 0, a.size(), acc);
  return std::sqrt(combine(acc));
}

std::optional<double> distance_within(std::span<const float> a, std::span<const float> b,
                                      const Threshold& t) {
  check_dims(a, b);
  const double cutoff = t.squared_cutoff();
  Lanes acc{};
  const std::size_t n = a.size();
  for (std::size_t begin = 0; begin < n; begin += kCheckBlock) {
    const std::size_t end = begin + kCheckBlock < n ? begin + kCheckBlock : n;
    accumulate(a.data(), b.data(), begin, end, acc);
    // Lanes only grow and addition is monotone, so a crossed cutoff stays crossed.
    if (combine(acc) >= cutoff) return std::nullopt;
  }
  const double d = std::sqrt(combine(acc));
  if (!t.admits(d)) return std::nullopt;
  return d;
}

bool within(std::span<const float> a, std::span<const float> b, const Threshold& t) {
  return distance_within(a, b, t).has_value();
}

std::vector<float> normalize(std::span<const float> v) {
  if (!all_finite(v)) throw std::invalid_argument("cannot normalize a non-finite vector");
  const double norm = l2_norm(v);
  if (norm == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
  }
  return out;
}

double l2_to_cosine(double d) {
  if (!(d >= 0.0 && d <= 2.0 + 1e-6)) {
    throw std::out_of_range("distance outside [0, 2]: " + std::to_string(d));
  }
  return 1.0 - d * d / 2.0;
}

bool all_finite(std::span<const float> v) noexcept {
  for (float x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool is_unit(std::span<const float> v, double tolerance) noexcept {
  return std::abs(l2_norm(v) - 1.0) <= tolerance;
}

}  // namespace semcache
