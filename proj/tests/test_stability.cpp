#include <doctest.h>

#include <random>

#include "mustab/expansivity.hpp"
#include "mustab/stability.hpp"
#include "oracles.hpp"
#include "spaces.hpp"

using namespace mustab;

namespace {
Rational R(const char* s) { return parse_rational(s); }

std::vector<std::optional<Rational>> deltas(const StabilityProfile& p) {
  std::vector<std::optional<Rational>> out;
  for (const auto& r : p.rows) out.push_back(r.delta);
  return out;
}

std::vector<EndoMap> all_maps(std::size_t n) {
  std::vector<EndoMap> out;
  oracle::for_each_map(n, [&](const std::vector<Point>& t) { out.emplace_back(t); });
  return out;
}
}  // namespace

TEST_CASE("stability delta on the reference systems") {
  const auto iso = spaces::isolated();
  const EndoMap id3 = EndoMap::identity(3);
  CHECK(stability_delta(iso, id3, StabilityTarget::at_point(0), 1).delta == Rational(1));

  const auto two = spaces::two_point();
  const EndoMap id2 = EndoMap::identity(2);
  const auto half = StabilityTarget::of_measure(Measure::uniform(2));
  CHECK(stability_delta(two, id2, half, 1).delta == Rational(1));
  const auto tight = stability_delta(two, id2, half, R("1/2"));
  CHECK(tight.delta == R("1/2"));
  CHECK(tight.failed_delta == Rational(1));
  CHECK(tight.counterexample == EndoMap({1, 0}));
  CHECK(tight.exhaustive);
}

TEST_CASE("stability profiles on the isolated-point space") {
  const auto iso = spaces::isolated();
  const EndoMap id = EndoMap::identity(3);
  const Measure mp = Measure::dirac(3, 0);
  const Measure ms[] = {mp};
  const ThresholdGrid grid = epsilon_grid(iso, ms);
  REQUIRE(grid.values() == std::vector<Rational>{R("1/2"), 1, 10});

  // ε = 1 admits Y = ∅ (m_p(X) = 1 <= ε), so that row is maximal.
  const auto measure = stability_profile(iso, id, StabilityTarget::of_measure(mp, "m_p"), grid);
  CHECK(measure.target == "measure:m_p");
  CHECK(deltas(measure) == std::vector<std::optional<Rational>>{Rational(1), Rational(10), Rational(10)});

  const auto point = stability_profile(iso, id, StabilityTarget::at_point(0, "p"), grid);
  CHECK(point.target == "point:p");
  CHECK(deltas(point)[0] == deltas(measure)[0]);
  CHECK(deltas(point)[1] == Rational(1));

  const auto sv = stability_profile(iso, id, StabilityTarget::set_valued(mp, "m_p"), grid);
  CHECK_FALSE(deltas(sv)[0].has_value());
  CHECK(deltas(sv)[1] == Rational(10));
}

TEST_CASE("one-point space") {
  const auto one = spaces::one_point();
  const EndoMap id = EndoMap::identity(1);
  const Measure m = Measure::dirac(1, 0);
  const Measure ms[] = {m};
  const ThresholdGrid grid = epsilon_grid(one, ms);
  for (const auto& r : stability_profile(one, id, StabilityTarget::at_point(0), grid).rows) {
    CHECK(r.delta == R("1/2"));
  }
  for (const auto& r : stability_profile(one, id, StabilityTarget::of_measure(m), grid).rows) {
    CHECK(r.delta == R("1/2"));
  }
  // The only atom cannot be in Dom(H) with a null image, so ε < 1 fails.
  CHECK_FALSE(stability_delta(one, id, StabilityTarget::set_valued(m), R("1/2")).delta.has_value());
  CHECK(stability_delta(one, id, StabilityTarget::set_valued(m), 1).delta == R("1/2"));
}

TEST_CASE("set-valued maps from partial maps") {
  const auto two = spaces::two_point();
  const EndoMap id = EndoMap::identity(2);
  const PointSet all = PointSet::all(2);

  const SetValuedMap full = setvalued_from_partial(PartialMap::inclusion(2, all));
  CHECK(full.domain() == all);
  const auto c1 = check_setvalued(two, id, id, full, Measure::uniform(2), 1);
  CHECK_FALSE(c1.null_images);
  CHECK(c1.null_images_witness == Point{0});
  CHECK(c1.near_identity);
  CHECK(c1.commutes);

  const SetValuedMap single = setvalued_from_partial(PartialMap::inclusion(2, PointSet::single(0)));
  const auto c2 = check_setvalued(two, id, id, single, Measure::dirac(2, 1), R("1/2"));
  CHECK(c2.null_images);
  CHECK_FALSE(c2.domain_mass);

  const SetValuedMap empty = setvalued_from_partial(PartialMap(2));
  const auto c3 = check_setvalued(two, id, id, empty, Measure::uniform(2), R("1/2"));
  CHECK(c3.null_images);
  CHECK(c3.near_identity);
  CHECK(c3.commutes);
  CHECK_FALSE(c3.domain_mass);
  CHECK(check_setvalued(two, id, id, empty, Measure::uniform(2), 1).all());
}

TEST_CASE("budget handling") {
  const auto path = spaces::path4();
  const EndoMap id = EndoMap::identity(4);
  const auto target = StabilityTarget::of_measure(Measure::uniform(4));
  CHECK_THROWS_AS(stability_delta(path, id, target, R("1/2"), {10, false, 0}), BudgetExceeded);
  const auto a = stability_delta(path, id, target, 2, {10, true, 4});
  const auto b = stability_delta(path, id, target, 2, {10, true, 4});
  CHECK_FALSE(a.exhaustive);
  CHECK(a.delta == b.delta);
  CHECK(a.counterexample == b.counterexample);
}

TEST_CASE("property: point and measure witnesses match brute force (n <= 4)") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 1 + uniform_below(rng, 4);
    const auto sys = oracle::random_system(rng, n);
    const Measure ms[] = {sys.mu};
    const ThresholdGrid grid = epsilon_grid(sys.space, ms);
    const Rational eps = grid[uniform_below(rng, grid.size())];
    const Point p = uniform_below(rng, n);
    const WitnessFinder point(sys.space, sys.f, StabilityTarget::at_point(p), eps);
    const WitnessFinder measure(sys.space, sys.f, StabilityTarget::of_measure(sys.mu), eps);
    std::vector<EndoMap> gs = n <= 3 ? all_maps(n) : std::vector<EndoMap>{};
    for (int i = 0; n == 4 && i < 40; ++i) gs.push_back(random_map(rng, n));
    for (const EndoMap& g : gs) {
      const bool bp = oracle::point_witness(sys.space, sys.f, g, p, eps);
      REQUIRE(point.exists(g) == bp);
      const bool bm = oracle::measure_witness(sys.space, sys.f, g, sys.mu, eps);
      REQUIRE(measure.exists(g) == bm);

      if (const auto h = point.find_semiconjugacy(g)) {
        const PointSet y = h->domain();
        CHECK(y.contains(p));
        for (const auto& c : verify_semiconjugacy(sys.space, sys.f, g, y, *h, eps)) CHECK(c.passed);
      }
      if (const auto h = measure.find_semiconjugacy(g)) {
        const PointSet y = h->domain();
        CHECK(sys.mu.mass(y.complement(n)) <= eps);
        for (const auto& c : verify_semiconjugacy(sys.space, sys.f, g, y, *h, eps)) CHECK(c.passed);
      } else {
        CHECK_FALSE(bm);
      }
    }
  }
}

TEST_CASE("property: set-valued witnesses match brute force over all H (n <= 3)") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + uniform_below(rng, 3);
    const auto sys = oracle::random_system(rng, n);
    const Measure ms[] = {sys.mu};
    const ThresholdGrid grid = epsilon_grid(sys.space, ms);
    const Rational eps = grid[uniform_below(rng, grid.size())];
    const WitnessFinder sv(sys.space, sys.f, StabilityTarget::set_valued(sys.mu), eps);
    for (const EndoMap& g : all_maps(n)) {
      const bool brute = oracle::setvalued_witness(sys.space, sys.f, g, sys.mu, eps);
      REQUIRE(sv.exists(g) == brute);
      if (const auto h = sv.find_setvalued(g)) CHECK(check_setvalued(sys.space, sys.f, g, *h, sys.mu, eps).all());
    }
  }
}

TEST_CASE("property: stability delta matches the independent oracle (n <= 3)") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + uniform_below(rng, 3);
    const auto sys = oracle::random_system(rng, n);
    const Measure ms[] = {sys.mu};
    const ThresholdGrid grid = epsilon_grid(sys.space, ms);
    const auto dgrid = delta_grid(sys.space).values();
    const Point p = uniform_below(rng, n);
    const StabilityTarget targets[] = {StabilityTarget::at_point(p), StabilityTarget::of_measure(sys.mu),
                                       StabilityTarget::set_valued(sys.mu)};
    for (const auto& target : targets) {
      for (const Rational& eps : grid.values()) {
        const auto got = stability_delta(sys.space, sys.f, target, eps);
        REQUIRE(got.delta == oracle::stability_delta(sys.space, sys.f, target, eps, dgrid));
        if (got.counterexample) {
          // Least failing map within the failing δ.
          std::optional<EndoMap> least;
          for (const EndoMap& g : all_maps(n)) {
            if (c0_distance(sys.space, sys.f, g) > *got.failed_delta) continue;
            if (!oracle::witness(sys.space, sys.f, g, target, eps) && (!least || g < *least)) least = g;
          }
          CHECK(got.counterexample == least);
        }
      }
    }
  }
}

TEST_CASE("property: profiles are monotone and point/measure rows stay above d_min/2") {
  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + uniform_below(rng, 4);
    const auto sys = oracle::random_system(rng, n);
    const Measure ms[] = {sys.mu};
    const ThresholdGrid grid = epsilon_grid(sys.space, ms);
    const Rational floor = sys.space.min_positive_distance() / 2;
    const StabilityTarget targets[] = {StabilityTarget::at_point(uniform_below(rng, n)),
                                       StabilityTarget::of_measure(sys.mu), StabilityTarget::set_valued(sys.mu)};
    for (const auto& target : targets) {
      const auto profile = stability_profile(sys.space, sys.f, target, grid);
      std::optional<Rational> prev;
      for (const auto& row : profile.rows) {
        if (target.kind != TargetKind::SetValued) CHECK((row.delta && *row.delta >= floor));
        if (prev) CHECK((row.delta && *row.delta >= *prev));
        if (row.delta) prev = row.delta;
      }
    }
  }
}

TEST_CASE("property: set-valued stability fails when every ball is a singleton") {
  std::mt19937_64 rng(113);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + uniform_below(rng, 5);
    const auto sys = oracle::random_system(rng, n);
    const Measure ms[] = {sys.mu};
    const ThresholdGrid grid = epsilon_grid(sys.space, ms);
    for (const Rational& eps : grid.values()) {
      if (eps >= 1 || eps >= sys.space.min_positive_distance()) continue;
      CHECK_FALSE(stability_delta(sys.space, sys.f, StabilityTarget::set_valued(sys.mu), eps).delta.has_value());
    }
  }
}
