#pragma once

// Finite metric spaces, self-maps, probability measures and the small set
// of measure-theoretic primitives used everywhere else.
//
// Semantics: a finite metric space is discrete. Every self-map is
// continuous, every subset is compact and Borel, and upper semicontinuity
// of set-valued maps is automatic. All definitions therefore reduce to
// combinatorics over point indices and exact rational comparisons.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mustab/error.hpp"
#include "mustab/point_set.hpp"
#include "mustab/rational.hpp"

namespace mustab {

/// Diagnostic for a matrix that is not a metric. `indices` holds the
/// witness: (i, j) for pair axioms, (a, b, via) for the triangle
/// inequality d(a, b) > d(a, via) + d(via, b).
class MetricError : public Error {
 public:
  enum class Kind {
    Empty,
    TooManyPoints,
    LabelCountMismatch,
    DuplicateLabel,
    NotSquare,
    NonZeroDiagonal,
    NegativeDistance,
    NonSymmetric,
    ZeroOffDiagonal,
    TriangleViolation,
  };

  MetricError(Kind kind, std::vector<std::size_t> indices);

  Kind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

  static const char* kind_name(Kind kind);

 private:
  Kind kind_;
  std::vector<std::size_t> indices_;
};

class FiniteMetricSpace {
 public:
  /// Validates the metric axioms and returns the space, or throws
  /// MetricError naming the first violated axiom.
  static FiniteMetricSpace validate(std::vector<std::string> labels,
                                    std::vector<std::vector<Rational>> dist);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(Point p) const { return labels_.at(p); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<Point> index_of(std::string_view label) const;

  const Rational& distance(Point a, Point b) const { return dist_[a * size() + b]; }
  std::vector<std::vector<Rational>> matrix() const;

  /// Distinct positive distance values, increasing.
  const std::vector<Rational>& positive_distances() const { return positive_; }

  /// Least positive distance; 1 by convention on a one-point space.
  const Rational& min_positive_distance() const { return d_min_; }
  Rational diameter() const;

  /// Closed ball B[x, r].
  PointSet ball(Point x, const Rational& r) const;
  /// B[x, r] for every x.
  std::vector<PointSet> balls(const Rational& r) const;

  friend bool operator==(const FiniteMetricSpace&, const FiniteMetricSpace&) = default;

 private:
  FiniteMetricSpace() = default;

  std::vector<std::string> labels_;
  std::vector<Rational> dist_;
  std::vector<Rational> positive_;
  Rational d_min_;
};

/// Total function on the point indices {0, ..., n-1}.
class EndoMap {
 public:
  EndoMap() = default;
  /// Throws OutOfRange if some entry is not a valid point index.
  explicit EndoMap(std::vector<Point> table);

  static EndoMap identity(std::size_t n);
  static EndoMap constant(std::size_t n, Point target);

  std::size_t size() const { return table_.size(); }
  Point operator()(Point x) const { return table_[x]; }
  Point iterate(Point x, std::size_t k) const;
  PointSet image(PointSet s) const;
  const std::vector<Point>& table() const { return table_; }

  bool is_bijection() const;
  /// Throws NotBijective.
  EndoMap inverse() const;
  /// (*this) ∘ inner.
  EndoMap after(const EndoMap& inner) const;

  friend bool operator==(const EndoMap&, const EndoMap&) = default;
  friend auto operator<=>(const EndoMap&, const EndoMap&) = default;

 private:
  std::vector<Point> table_;
};

/// Probability measure on a finite space: non-negative exact weights
/// summing to exactly 1.
class Measure {
 public:
  Measure() = default;
  /// Throws InvalidMeasure.
  static Measure from_weights(std::vector<Rational> weights);
  static Measure dirac(std::size_t n, Point p);
  static Measure uniform(std::size_t n);

  std::size_t size() const { return weights_.size(); }
  const Rational& weight(Point p) const { return weights_[p]; }
  const std::vector<Rational>& weights() const { return weights_; }
  PointSet support() const;
  Rational mass(PointSet s) const;

  friend bool operator==(const Measure&, const Measure&) = default;

 private:
  std::vector<Rational> weights_;
};

/// Measure rescaled to integers over a common denominator, for mass
/// bookkeeping inside search loops. Throws OutOfRange when the common
/// denominator does not fit comfortably in 64 bits.
class ScaledMeasure {
 public:
  explicit ScaledMeasure(const Measure& mu);

  std::int64_t denominator() const { return denominator_; }
  std::int64_t weight(Point p) const { return numerators_[p]; }
  std::int64_t mass(PointSet s) const;
  /// Largest integer k with k / denominator <= bound (clamped to [-1, denominator]).
  std::int64_t floor_scaled(const Rational& bound) const;

 private:
  std::int64_t denominator_ = 1;
  std::vector<std::int64_t> numerators_;
};

/// Sorted, strictly increasing list of candidate thresholds.
class ThresholdGrid {
 public:
  ThresholdGrid() = default;
  explicit ThresholdGrid(std::vector<Rational> values);

  const std::vector<Rational>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const Rational& operator[](std::size_t i) const { return values_[i]; }
  const Rational& back() const { return values_.back(); }
  bool contains(const Rational& v) const;
  /// Largest grid value strictly below `bound`.
  std::optional<Rational> largest_below(const Rational& bound) const;

 private:
  std::vector<Rational> values_;
};

/// δ candidates: positive distances ∪ {d_min / 2}.
ThresholdGrid delta_grid(const FiniteMetricSpace& space);
/// ε candidates: positive distances ∪ positive subset masses of each
/// measure ∪ {d_min / 2}.
ThresholdGrid epsilon_grid(const FiniteMetricSpace& space, std::span<const Measure> measures = {});

/// Distinct positive values μ(B) over all subsets B.
std::vector<Rational> subset_masses(const Measure& mu);

/// max_x d(f(x), g(x)). Throws MismatchedSpace.
Rational c0_distance(const FiniteMetricSpace& space, const EndoMap& f, const EndoMap& g);

/// H_*(μ) = μ ∘ H⁻¹. Throws NotBijective.
Measure pushforward(const EndoMap& h, const Measure& mu);

struct AbsContinuity {
  bool holds = false;
  /// When !holds: a point p with μ({p}) > 0 = ν({p}).
  std::optional<Point> witness;
};

/// μ ≺ ν, which on a finite space is support(μ) ⊆ support(ν).
AbsContinuity is_abs_continuous(const Measure& mu, const Measure& nu);

/// A(μ) = {p : μ({p}) > 0}.
PointSet atoms(const Measure& mu);

/// tμ + (1 − t)ν. Throws OutOfRange unless 0 <= t <= 1.
Measure convex_combine(const Rational& t, const Measure& mu, const Measure& nu);

/// min{ν(B) : μ(B) > ε}, or nullopt (+∞) when no subset has μ-mass above ε.
/// Every ε' with 0 <= ε' < result satisfies ν(B) <= ε' ⇒ μ(B) <= ε.
/// Throws NotAbsolutelyContinuous.
std::optional<Rational> ac_threshold(const Measure& mu, const Measure& nu, const Rational& eps);

/// The maps g with d(g(x), f(x)) <= δ for every x: a product of closed balls.
/// Enumeration is lexicographic, point 0 most significant, targets increasing.
class PerturbationBall {
 public:
  PerturbationBall(const FiniteMetricSpace& space, const EndoMap& f, const Rational& delta);

  /// Number of maps in the ball, saturated at UINT64_MAX.
  std::uint64_t count() const { return count_; }
  const std::vector<std::vector<Point>>& choices() const { return choices_; }

  /// Calls visit(g) in enumeration order until it returns false. Returns
  /// false iff visiting was stopped early.
  template <class Visit>
  bool for_each(Visit&& visit) const {
    const std::size_t n = choices_.size();
    std::vector<std::size_t> digit(n, 0);
    std::vector<Point> table(n);
    for (std::size_t i = 0; i < n; ++i) table[i] = choices_[i][0];
    while (true) {
      if (!visit(EndoMap(table))) return false;
      std::size_t i = n;
      while (i > 0) {
        --i;
        if (++digit[i] < choices_[i].size()) {
          table[i] = choices_[i][digit[i]];
          break;
        }
        digit[i] = 0;
        table[i] = choices_[i][0];
        if (i == 0) return true;
      }
      if (n == 0) return true;
    }
  }

  /// Uniform sample from the ball.
  EndoMap sample(std::mt19937_64& rng) const;

 private:
  std::vector<std::vector<Point>> choices_;
  std::uint64_t count_ = 1;
};

/// Checked enumeration entry point: throws BudgetExceeded(count) when the
/// ball holds more than `budget` maps.
PerturbationBall enumerate_perturbations(const FiniteMetricSpace& space, const EndoMap& f,
                                         const Rational& delta, std::uint64_t budget);

/// Uniform integer in [0, bound) from raw engine output by rejection; the
/// result sequence is fixed by the engine, independent of the standard
/// library's distribution implementations.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

void check_same_size(std::size_t expected, std::size_t actual, const char* what);

}  // namespace mustab
