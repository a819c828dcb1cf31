#pragma once

#include <optional>

#include "mustab/metric_core.hpp"

namespace mustab {

/// sep[x][y] = sup_{k >= 0} d(f^k x, f^k y). Exact: the pair orbit enters a
/// cycle within n² steps.
class SeparationMatrix {
 public:
  SeparationMatrix(const FiniteMetricSpace& space, const EndoMap& f);

  std::size_t size() const { return n_; }
  const Rational& operator()(Point x, Point y) const { return sep_[x * n_ + y]; }

  /// Least k with d(f^k x, f^k y) > e, or nullopt if the pair never separates beyond e.
  std::optional<std::size_t> first_exceed(Point x, Point y, const Rational& e) const;

 private:
  FiniteMetricSpace space_;
  EndoMap f_;
  std::size_t n_;
  std::vector<Rational> sep_;
};

inline SeparationMatrix separation_matrix(const FiniteMetricSpace& space, const EndoMap& f) {
  return SeparationMatrix(space, f);
}

class SinglePoint : public Error {
 public:
  SinglePoint() : Error("SinglePoint: expansivity threshold needs at least two points") {}
};

/// s* = min over distinct pairs of sep[x][y]. f is expansive with constant
/// e exactly when e < s*. Always s* >= d_min > 0 on a finite space.
Rational expansivity_threshold(const FiniteMetricSpace& space, const EndoMap& f);

/// Least N such that d(f^n a, f^n b) <= e for 0 <= n <= N forces d(a, b) < Δ,
/// or nullopt when some pair with d >= Δ never separates beyond e.
std::optional<std::size_t> uniform_expansivity_steps(const FiniteMetricSpace& space, const EndoMap& f,
                                                     const Rational& e, const Rational& big_delta);

struct MuExpansivity {
  bool holds = false;
  /// A point whose e-dynamical ball has positive μ-mass.
  std::optional<Point> witness;
};

/// μ{y : sep[x][y] <= e} = 0 for every x. Never holds for a probability
/// measure on a finite space: an atom lies in its own dynamical ball.
MuExpansivity is_mu_expansive(const FiniteMetricSpace& space, const EndoMap& f, const Rational& e,
                              const Measure& mu);

/// Largest value of `grid` strictly below s*; the canonical expansivity
/// constant used when a caller does not pick one.
std::optional<Rational> default_expansivity_constant(const FiniteMetricSpace& space, const EndoMap& f,
                                                     const ThresholdGrid& grid);

}  // namespace mustab
