#include "mustab/expansivity.hpp"

namespace mustab {

SeparationMatrix::SeparationMatrix(const FiniteMetricSpace& space, const EndoMap& f)
    : space_(space), f_(f), n_(space.size()), sep_(n_ * n_, Rational(0)) {
  check_same_size(n_, f.size(), "f");
  std::vector<std::uint32_t> seen(n_ * n_, 0);
  std::uint32_t stamp = 0;
  for (Point x = 0; x < n_; ++x) {
    for (Point y = x + 1; y < n_; ++y) {
      ++stamp;
      Point a = x;
      Point b = y;
      Rational best = 0;
      while (seen[a * n_ + b] != stamp) {
        seen[a * n_ + b] = stamp;
        if (space.distance(a, b) > best) best = space.distance(a, b);
        a = f(a);
        b = f(b);
      }
      sep_[x * n_ + y] = best;
      sep_[y * n_ + x] = best;
    }
  }
}

std::optional<std::size_t> SeparationMatrix::first_exceed(Point x, Point y, const Rational& e) const {
  if ((*this)(x, y) <= e) return std::nullopt;
  std::size_t k = 0;
  while (space_.distance(x, y) <= e) {
    x = f_(x);
    y = f_(y);
    ++k;
  }
  return k;
}

Rational expansivity_threshold(const FiniteMetricSpace& space, const EndoMap& f) {
  if (space.size() < 2) throw SinglePoint();
  const SeparationMatrix sep(space, f);
  std::optional<Rational> best;
  for (Point x = 0; x < space.size(); ++x) {
    for (Point y = x + 1; y < space.size(); ++y) {
      if (!best || sep(x, y) < *best) best = sep(x, y);
    }
  }
  return *best;
}

std::optional<std::size_t> uniform_expansivity_steps(const FiniteMetricSpace& space, const EndoMap& f,
                                                     const Rational& e, const Rational& big_delta) {
  const SeparationMatrix sep(space, f);
  std::size_t steps = 0;
  for (Point a = 0; a < space.size(); ++a) {
    for (Point b = a + 1; b < space.size(); ++b) {
      if (space.distance(a, b) < big_delta) continue;
      const auto k = sep.first_exceed(a, b, e);
      if (!k) return std::nullopt;
      steps = std::max(steps, *k);
    }
  }
  return steps;
}

MuExpansivity is_mu_expansive(const FiniteMetricSpace& space, const EndoMap& f, const Rational& e,
                              const Measure& mu) {
  check_same_size(space.size(), mu.size(), "measure");
  const SeparationMatrix sep(space, f);
  for (Point x = 0; x < space.size(); ++x) {
    PointSet dyn_ball;
    for (Point y = 0; y < space.size(); ++y) {
      if (sep(x, y) <= e) dyn_ball.insert(y);
    }
    if (mu.mass(dyn_ball) > 0) return {false, x};
  }
  return {true, std::nullopt};
}

std::optional<Rational> default_expansivity_constant(const FiniteMetricSpace& space, const EndoMap& f,
                                                     const ThresholdGrid& grid) {
  if (space.size() < 2) return grid.size() ? std::optional<Rational>(grid.back()) : std::nullopt;
  return grid.largest_below(expansivity_threshold(space, f));
}

}  // namespace mustab
