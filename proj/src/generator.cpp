#include "mustab/generator.hpp"

#include <numeric>
#include <set>

namespace mustab {

const char* to_string(GeneratorModel model) {
  return model == GeneratorModel::L1Lattice ? "l1-lattice" : "explicit";
}

std::optional<GeneratorModel> parse_generator_model(std::string_view text) {
  if (text == "l1-lattice") return GeneratorModel::L1Lattice;
  if (text == "explicit") return GeneratorModel::Explicit;
  return std::nullopt;
}

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("x" + std::to_string(i));
  return labels;
}

FiniteMetricSpace l1_space(const std::vector<std::pair<std::int64_t, std::int64_t>>& points,
                           std::int64_t scale) {
  const std::size_t n = points.size();
  std::vector<std::vector<Rational>> dist(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto d = std::abs(points[i].first - points[j].first) + std::abs(points[i].second - points[j].second);
      dist[i][j] = Rational(d, scale);
    }
  }
  return FiniteMetricSpace::validate(default_labels(n), std::move(dist));
}

EndoMap random_map(std::mt19937_64& rng, std::size_t n) {
  std::vector<Point> t(n);
  for (auto& v : t) v = uniform_below(rng, n);
  return EndoMap(std::move(t));
}

EndoMap random_bijection(std::mt19937_64& rng, std::size_t n) {
  std::vector<Point> t(n);
  std::iota(t.begin(), t.end(), Point{0});
  for (std::size_t i = n; i > 1; --i) std::swap(t[i - 1], t[uniform_below(rng, i)]);
  return EndoMap(std::move(t));
}

Measure random_measure(std::mt19937_64& rng, std::size_t n, PointSet support, std::uint64_t max_weight) {
  if (support.empty()) throw InvalidMeasure("InvalidMeasure: empty support");
  std::vector<std::uint64_t> raw(n, 0);
  std::uint64_t total = 0;
  support.for_each([&](Point p) {
    raw[p] = 1 + uniform_below(rng, max_weight);
    total += raw[p];
  });
  std::vector<Rational> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = Rational(static_cast<long long>(raw[i]), static_cast<long long>(total));
  }
  return Measure::from_weights(std::move(w));
}

PointSet random_nonempty_subset(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t full = n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  return PointSet::from_bits(1 + uniform_below(rng, full));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

FiniteMetricSpace lattice_space(std::mt19937_64& rng, const GeneratorSpec& spec) {
  const auto side = static_cast<std::uint64_t>(spec.range) + 1;
  if (spec.range < 0 || side * side < spec.n) {
    throw RangeTooSmall("RangeTooSmall: " + std::to_string(spec.n) + " distinct points need a larger range");
  }
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::vector<std::pair<std::int64_t, std::int64_t>> points;
  while (points.size() < spec.n) {
    const auto x = static_cast<std::int64_t>(uniform_below(rng, side));
    const auto y = static_cast<std::int64_t>(uniform_below(rng, side));
    if (seen.insert({x, y}).second) points.emplace_back(x, y);
  }
  return l1_space(points, spec.scale);
}

// Shortest-path closure of a random complete weighted graph.
FiniteMetricSpace explicit_space(std::mt19937_64& rng, const GeneratorSpec& spec) {
  if (spec.range < 1) throw RangeTooSmall("RangeTooSmall: explicit model needs range >= 1");
  const std::size_t n = spec.n;
  std::vector<std::vector<std::int64_t>> w(n, std::vector<std::int64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      w[i][j] = w[j][i] = 1 + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(spec.range)));
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) w[i][j] = std::min(w[i][j], w[i][k] + w[k][j]);
    }
  }
  std::vector<std::vector<Rational>> dist(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = Rational(w[i][j], spec.scale);
  }
  return FiniteMetricSpace::validate(default_labels(n), std::move(dist));
}

}  // namespace

SystemFile generate_system(const GeneratorSpec& spec) {
  if (spec.n == 0) throw OutOfRange("generator needs n >= 1");
  if (spec.n > kMaxPoints) throw OutOfRange("generator supports at most 64 points");
  if (spec.scale < 1) throw OutOfRange("generator scale must be >= 1");

  std::mt19937_64 rng(spec.seed);
  FiniteMetricSpace space = spec.model == GeneratorModel::L1Lattice ? lattice_space(rng, spec)
                                                                     : explicit_space(rng, spec);
  const std::size_t n = spec.n;
  EndoMap f = random_map(rng, n);
  const Point dirac_at = uniform_below(rng, n);
  Measure full = random_measure(rng, n, PointSet::all(n));

  nlohmann::ordered_json header;
  header["algorithm"] = "mt19937_64";
  header["seed"] = spec.seed;
  header["n"] = n;
  header["model"] = to_string(spec.model);
  header["range"] = spec.range;
  header["scale"] = spec.scale;

  SystemFile sys{std::move(space), {}, {}, std::move(header)};
  sys.maps.emplace("f", std::move(f));
  sys.measures.emplace("dirac", Measure::dirac(n, dirac_at));
  sys.measures.emplace("full", std::move(full));
  return sys;
}

}  // namespace mustab
