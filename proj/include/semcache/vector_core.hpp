#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace semcache {

/// Norm tolerance applied to stored 32-bit vectors flagged as normalized.
inline constexpr double kStoredNormTolerance = 1e-4;

/// Semantic hit threshold in L2 units. A pair is a hit iff distance < value().
///
/// The threshold also carries the smallest squared-distance cutoff whose
/// square root is already >= value(), which lets scans abandon a pair as soon
/// as its partial sum crosses it without changing the predicate's outcome.
class Threshold {
 public:
  /// Throws std::invalid_argument unless 0 < value < 2.
  explicit Threshold(double value);

  double value() const noexcept { return value_; }
  double squared_cutoff() const noexcept { return cutoff_sq_; }

  /// The single hit predicate used everywhere at runtime.
  bool admits(double distance) const noexcept { return distance < value_; }

 private:
  double value_;
  double cutoff_sq_;
};

double dot(std::span<const float> a, std::span<const float> b);
double l2_norm(std::span<const float> v);

/// Euclidean distance, accumulated in double. Throws std::invalid_argument on
/// dimension mismatch.
double l2_distance(std::span<const float> a, std::span<const float> b);

/// Returns l2_distance(a, b) when it is below t, std::nullopt otherwise.
/// Bit-identical to l2_distance for the pairs it returns.
std::optional<double> distance_within(std::span<const float> a, std::span<const float> b,
                                      const Threshold& t);

/// Same predicate as t.admits(l2_distance(a, b)).
bool within(std::span<const float> a, std::span<const float> b, const Threshold& t);

/// Unit-norm copy of v. Throws std::invalid_argument for zero or non-finite input.
std::vector<float> normalize(std::span<const float> v);

/// Cosine similarity of two unit vectors at L2 distance d: 1 - d^2/2.
/// Accepts d in [0, 2 + 1e-6]; throws std::out_of_range otherwise.
double l2_to_cosine(double d);

bool all_finite(std::span<const float> v) noexcept;
bool is_unit(std::span<const float> v, double tolerance = kStoredNormTolerance) noexcept;

}  // namespace semcache
