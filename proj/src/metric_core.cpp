#include "mustab/metric_core.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_set>

namespace mustab {

MetricError::MetricError(Kind kind, std::vector<std::size_t> indices)
    : Error([&] {
        std::string msg = kind_name(kind);
        msg += '(';
        for (std::size_t i = 0; i < indices.size(); ++i) {
          if (i) msg += ',';
          msg += std::to_string(indices[i]);
        }
        msg += ')';
        return msg;
      }()),
      kind_(kind),
      indices_(std::move(indices)) {}

const char* MetricError::kind_name(Kind kind) {
  switch (kind) {
    case Kind::Empty: return "Empty";
    case Kind::TooManyPoints: return "TooManyPoints";
    case Kind::LabelCountMismatch: return "LabelCountMismatch";
    case Kind::DuplicateLabel: return "DuplicateLabel";
    case Kind::NotSquare: return "NotSquare";
    case Kind::NonZeroDiagonal: return "NonZeroDiagonal";
    case Kind::NegativeDistance: return "NegativeDistance";
    case Kind::NonSymmetric: return "NonSymmetric";
    case Kind::ZeroOffDiagonal: return "ZeroOffDiagonal";
    case Kind::TriangleViolation: return "TriangleViolation";
  }
  return "Unknown";
}

void check_same_size(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw MismatchedSpace(std::string("MismatchedSpace: ") + what + " has " +
                          std::to_string(actual) + " points, expected " + std::to_string(expected));
  }
}

// ---------------------------------------------------------------------------
// FiniteMetricSpace

FiniteMetricSpace FiniteMetricSpace::validate(std::vector<std::string> labels,
                                              std::vector<std::vector<Rational>> dist) {
  using K = MetricError::Kind;
  const std::size_t n = dist.size();
  if (n == 0) throw MetricError(K::Empty, {});
  if (n > kMaxPoints) throw MetricError(K::TooManyPoints, {n});
  if (labels.size() != n) throw MetricError(K::LabelCountMismatch, {labels.size(), n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (labels[i] == labels[j]) throw MetricError(K::DuplicateLabel, {j, i});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i].size() != n) throw MetricError(K::NotSquare, {i});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i][i] != 0) throw MetricError(K::NonZeroDiagonal, {i, i});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (dist[i][j] < 0) throw MetricError(K::NegativeDistance, {i, j});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dist[i][j] != dist[j][i]) throw MetricError(K::NonSymmetric, {i, j});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dist[i][j] == 0) throw MetricError(K::ZeroOffDiagonal, {i, j});
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (std::size_t via = 0; via < n; ++via) {
        if (dist[a][b] > dist[a][via] + dist[via][b]) {
          throw MetricError(K::TriangleViolation, {a, b, via});
        }
      }
    }
  }

  FiniteMetricSpace space;
  space.labels_ = std::move(labels);
  space.dist_.reserve(n * n);
  std::set<Rational> positive;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      space.dist_.push_back(dist[i][j]);
      if (i != j) positive.insert(dist[i][j]);
    }
  }
  space.positive_.assign(positive.begin(), positive.end());
  space.d_min_ = space.positive_.empty() ? Rational(1) : space.positive_.front();
  return space;
}

std::optional<Point> FiniteMetricSpace::index_of(std::string_view label) const {
  for (Point p = 0; p < labels_.size(); ++p) {
    if (labels_[p] == label) return p;
  }
  return std::nullopt;
}

std::vector<std::vector<Rational>> FiniteMetricSpace::matrix() const {
  const std::size_t n = size();
  std::vector<std::vector<Rational>> out(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i][j] = distance(i, j);
  }
  return out;
}

Rational FiniteMetricSpace::diameter() const {
  return positive_.empty() ? Rational(0) : positive_.back();
}

PointSet FiniteMetricSpace::ball(Point x, const Rational& r) const {
  PointSet out;
  for (Point y = 0; y < size(); ++y) {
    if (distance(x, y) <= r) out.insert(y);
  }
  return out;
}

std::vector<PointSet> FiniteMetricSpace::balls(const Rational& r) const {
  std::vector<PointSet> out(size());
  for (Point x = 0; x < size(); ++x) out[x] = ball(x, r);
  return out;
}

// ---------------------------------------------------------------------------
// EndoMap

EndoMap::EndoMap(std::vector<Point> table) : table_(std::move(table)) {
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (table_[i] >= table_.size()) {
      throw OutOfRange("map entry " + std::to_string(i) + " -> " + std::to_string(table_[i]) +
                       " is not a point index");
    }
  }
}

EndoMap EndoMap::identity(std::size_t n) {
  std::vector<Point> t(n);
  std::iota(t.begin(), t.end(), Point{0});
  return EndoMap(std::move(t));
}

EndoMap EndoMap::constant(std::size_t n, Point target) {
  return EndoMap(std::vector<Point>(n, target));
}

Point EndoMap::iterate(Point x, std::size_t k) const {
  for (std::size_t i = 0; i < k; ++i) x = table_[x];
  return x;
}

PointSet EndoMap::image(PointSet s) const {
  PointSet out;
  s.for_each([&](Point x) { out.insert(table_[x]); });
  return out;
}

bool EndoMap::is_bijection() const {
  std::vector<bool> hit(table_.size(), false);
  for (Point y : table_) {
    if (hit[y]) return false;
    hit[y] = true;
  }
  return true;
}

EndoMap EndoMap::inverse() const {
  if (!is_bijection()) throw NotBijective();
  std::vector<Point> inv(table_.size());
  for (Point x = 0; x < table_.size(); ++x) inv[table_[x]] = x;
  return EndoMap(std::move(inv));
}

EndoMap EndoMap::after(const EndoMap& inner) const {
  check_same_size(size(), inner.size(), "inner map");
  std::vector<Point> t(size());
  for (Point x = 0; x < size(); ++x) t[x] = table_[inner.table_[x]];
  return EndoMap(std::move(t));
}

// ---------------------------------------------------------------------------
// Measure

Measure Measure::from_weights(std::vector<Rational> weights) {
  if (weights.empty()) throw InvalidMeasure("InvalidMeasure: no weights");
  Rational total = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0) {
      throw InvalidMeasure("InvalidMeasure: negative weight at point " + std::to_string(i));
    }
    total += weights[i];
  }
  if (total != 1) {
    throw InvalidMeasure("InvalidMeasure: weights sum to " + format_rational(total) + ", not 1");
  }
  Measure mu;
  mu.weights_ = std::move(weights);
  return mu;
}

Measure Measure::dirac(std::size_t n, Point p) {
  if (p >= n) throw OutOfRange("dirac point out of range");
  std::vector<Rational> w(n, Rational(0));
  w[p] = 1;
  return from_weights(std::move(w));
}

Measure Measure::uniform(std::size_t n) {
  return from_weights(std::vector<Rational>(n, Rational(1, static_cast<long long>(n))));
}

PointSet Measure::support() const {
  PointSet s;
  for (Point p = 0; p < weights_.size(); ++p) {
    if (weights_[p] > 0) s.insert(p);
  }
  return s;
}

Rational Measure::mass(PointSet s) const {
  Rational total = 0;
  s.for_each([&](Point p) { total += weights_[p]; });
  return total;
}

ScaledMeasure::ScaledMeasure(const Measure& mu) {
  BigInt den = 1;
  for (const Rational& w : mu.weights()) {
    den = boost::multiprecision::lcm(den, BigInt(boost::multiprecision::denominator(w)));
  }
  if (den > (BigInt(1) << 62)) throw OutOfRange("measure denominators too large for mass bookkeeping");
  denominator_ = den.convert_to<std::int64_t>();
  numerators_.reserve(mu.size());
  for (const Rational& w : mu.weights()) {
    const BigInt scaled = boost::multiprecision::numerator(w) * (den / boost::multiprecision::denominator(w));
    numerators_.push_back(scaled.convert_to<std::int64_t>());
  }
}

std::int64_t ScaledMeasure::mass(PointSet s) const {
  std::int64_t total = 0;
  s.for_each([&](Point p) { total += numerators_[p]; });
  return total;
}

std::int64_t ScaledMeasure::floor_scaled(const Rational& bound) const {
  if (bound < 0) return -1;
  const Rational scaled = bound * denominator_;
  if (scaled >= denominator_) return denominator_;
  const BigInt fl = boost::multiprecision::numerator(scaled) / boost::multiprecision::denominator(scaled);
  return fl.convert_to<std::int64_t>();
}

// ---------------------------------------------------------------------------
// Grids

ThresholdGrid::ThresholdGrid(std::vector<Rational> values) : values_(std::move(values)) {
  std::sort(values_.begin(), values_.end());
  values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
}

bool ThresholdGrid::contains(const Rational& v) const {
  return std::binary_search(values_.begin(), values_.end(), v);
}

std::optional<Rational> ThresholdGrid::largest_below(const Rational& bound) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), bound);
  if (it == values_.begin()) return std::nullopt;
  return *std::prev(it);
}

ThresholdGrid delta_grid(const FiniteMetricSpace& space) {
  std::vector<Rational> v = space.positive_distances();
  v.push_back(space.min_positive_distance() / 2);
  return ThresholdGrid(std::move(v));
}

ThresholdGrid epsilon_grid(const FiniteMetricSpace& space, std::span<const Measure> measures) {
  std::vector<Rational> v = space.positive_distances();
  v.push_back(space.min_positive_distance() / 2);
  for (const Measure& mu : measures) {
    check_same_size(space.size(), mu.size(), "measure");
    for (Rational& m : subset_masses(mu)) v.push_back(std::move(m));
  }
  return ThresholdGrid(std::move(v));
}

std::vector<Rational> subset_masses(const Measure& mu) {
  std::set<Rational> sums{Rational(0)};
  for (const Rational& w : mu.weights()) {
    if (w == 0) continue;
    std::vector<Rational> shifted;
    shifted.reserve(sums.size());
    for (const Rational& s : sums) shifted.push_back(s + w);
    sums.insert(shifted.begin(), shifted.end());
  }
  sums.erase(Rational(0));
  return {sums.begin(), sums.end()};
}

// ---------------------------------------------------------------------------
// Primitives

Rational c0_distance(const FiniteMetricSpace& space, const EndoMap& f, const EndoMap& g) {
  check_same_size(space.size(), f.size(), "f");
  check_same_size(space.size(), g.size(), "g");
  Rational best = 0;
  for (Point x = 0; x < space.size(); ++x) {
    const Rational& d = space.distance(f(x), g(x));
    if (d > best) best = d;
  }
  return best;
}

Measure pushforward(const EndoMap& h, const Measure& mu) {
  check_same_size(mu.size(), h.size(), "map");
  if (!h.is_bijection()) throw NotBijective();
  std::vector<Rational> w(mu.size());
  for (Point x = 0; x < mu.size(); ++x) w[h(x)] = mu.weight(x);
  return Measure::from_weights(std::move(w));
}

AbsContinuity is_abs_continuous(const Measure& mu, const Measure& nu) {
  check_same_size(mu.size(), nu.size(), "measure");
  const PointSet bad = mu.support() - nu.support();
  if (bad.empty()) return {true, std::nullopt};
  return {false, bad.first()};
}

PointSet atoms(const Measure& mu) { return mu.support(); }

Measure convex_combine(const Rational& t, const Measure& mu, const Measure& nu) {
  if (t < 0 || t > 1) throw OutOfRange("OutOfRange: t = " + format_rational(t) + " not in [0,1]");
  check_same_size(mu.size(), nu.size(), "measure");
  std::vector<Rational> w(mu.size());
  for (Point p = 0; p < mu.size(); ++p) w[p] = t * mu.weight(p) + (1 - t) * nu.weight(p);
  return Measure::from_weights(std::move(w));
}

std::optional<Rational> ac_threshold(const Measure& mu, const Measure& nu, const Rational& eps) {
  const AbsContinuity ac = is_abs_continuous(mu, nu);
  if (!ac.holds) throw NotAbsolutelyContinuous(*ac.witness);

  // Only atoms of μ can help push μ(B) above ε; extra points only add ν-mass.
  std::vector<Point> order = mu.support().to_vector();
  std::sort(order.begin(), order.end(), [&](Point a, Point b) {
    // μ/ν ratio decreasing, so good sets are met early and bound tightly.
    const Rational lhs = mu.weight(a) * nu.weight(b);
    const Rational rhs = mu.weight(b) * nu.weight(a);
    return lhs != rhs ? lhs > rhs : a < b;
  });
  std::vector<Rational> suffix_mu(order.size() + 1, Rational(0));
  for (std::size_t i = order.size(); i > 0; --i) suffix_mu[i - 1] = suffix_mu[i] + mu.weight(order[i - 1]);

  std::optional<Rational> best;
  // Iterative DFS over include/exclude decisions.
  struct Frame {
    std::size_t index;
    Rational mu_mass;
    Rational nu_mass;
  };
  std::vector<Frame> stack{{0, Rational(0), Rational(0)}};
  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    if (best && fr.nu_mass >= *best) continue;
    if (fr.mu_mass > eps) {
      best = fr.nu_mass;
      continue;
    }
    if (fr.index == order.size() || fr.mu_mass + suffix_mu[fr.index] <= eps) continue;
    const Point p = order[fr.index];
    stack.push_back({fr.index + 1, fr.mu_mass, fr.nu_mass});
    stack.push_back({fr.index + 1, fr.mu_mass + mu.weight(p), fr.nu_mass + nu.weight(p)});
  }
  return best;
}

// ---------------------------------------------------------------------------
// Perturbations

PerturbationBall::PerturbationBall(const FiniteMetricSpace& space, const EndoMap& f,
                                   const Rational& delta) {
  check_same_size(space.size(), f.size(), "f");
  if (delta < 0) throw OutOfRange("OutOfRange: negative delta");
  choices_.resize(space.size());
  for (Point x = 0; x < space.size(); ++x) {
    choices_[x] = space.ball(f(x), delta).to_vector();
    const std::uint64_t k = choices_[x].size();
    count_ = (count_ > UINT64_MAX / k) ? UINT64_MAX : count_ * k;
  }
}

EndoMap PerturbationBall::sample(std::mt19937_64& rng) const {
  std::vector<Point> table(choices_.size());
  for (std::size_t i = 0; i < choices_.size(); ++i) {
    table[i] = choices_[i][uniform_below(rng, choices_[i].size())];
  }
  return EndoMap(std::move(table));
}

PerturbationBall enumerate_perturbations(const FiniteMetricSpace& space, const EndoMap& f,
                                         const Rational& delta, std::uint64_t budget) {
  PerturbationBall ball(space, f, delta);
  if (ball.count() > budget) throw BudgetExceeded(ball.count());
  return ball;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw OutOfRange("uniform_below: empty range");
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  while (true) {
    const std::uint64_t r = rng();
    if (r < limit) return r % bound;
  }
}

}  // namespace mustab
