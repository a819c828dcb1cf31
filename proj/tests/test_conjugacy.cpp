#include <doctest.h>

#include <random>

#include "mustab/conjugacy.hpp"
#include "mustab/expansivity.hpp"
#include "mustab/shadowing.hpp"
#include "oracles.hpp"
#include "spaces.hpp"

using namespace mustab;

namespace {
Rational R(const char* s) { return parse_rational(s); }
const EndoMap kShift({1, 2, 0});

bool check_named(const std::vector<CertificateCheck>& checks, const std::string& name, bool passed,
                 std::optional<Point> witness) {
  for (const auto& c : checks) {
    if (c.name == name) return c.passed == passed && c.witness == witness;
  }
  return false;
}
}  // namespace

TEST_CASE("orbit lassos and closures") {
  const Lasso drift = orbit_lasso(EndoMap({1, 2, 3, 3}), 0);
  CHECK(drift.tail == std::vector<Point>{0, 1, 2});
  CHECK(drift.cycle == std::vector<Point>{3});
  CHECK(drift.at(10) == 3);
  const Lasso cyc = orbit_lasso(kShift, 1);
  CHECK(cyc.tail.empty());
  CHECK(cyc.cycle == std::vector<Point>{1, 2, 0});

  CHECK(orbit_closure(kShift, PointSet::single(0)) == PointSet::all(3));
  CHECK(orbit_closure(EndoMap::identity(2), PointSet::single(0)) == PointSet::single(0));
  CHECK(orbit_closure(EndoMap({1, 2, 3, 3}), PointSet::single(0)) == PointSet::all(4));
  CHECK(orbit_closure(kShift, PointSet{}).empty());
}

TEST_CASE("shadow points") {
  const auto path = spaces::path4();
  const EndoMap id = EndoMap::identity(4);
  CHECK(shadow_point(path, id, Lasso{{}, {1}}, R("1/2")) == Point{1});
  CHECK_FALSE(shadow_point(spaces::cycle3(), kShift, Lasso{{}, {0}}, R("1/2")).has_value());
  CHECK(shadow_point(spaces::cycle3(), kShift, orbit_lasso(kShift, 2), 0) == Point{2});
  CHECK_THROWS_AS(shadow_point(path, id, Lasso{{0}, {}}, 1), MalformedLasso);
  CHECK_THROWS_AS(shadow_point(path, id, Lasso{{}, {9}}, 1), MalformedLasso);
}

TEST_CASE("verify semiconjugacy reports the first witness of each failure") {
  const auto two = spaces::two_point();
  const EndoMap id = EndoMap::identity(2);
  const PointSet all = PointSet::all(2);
  const auto ok = verify_semiconjugacy(two, id, id, all, PartialMap::inclusion(2, all), 0);
  for (const auto& c : ok) CHECK(c.passed);

  PartialMap swap(2);
  swap.set(0, 1);
  swap.set(1, 0);
  const auto far = verify_semiconjugacy(two, id, id, all, swap, R("1/2"));
  CHECK(check_named(far, "d(h(y), y) <= eps", false, Point{0}));
  CHECK(check_named(far, "f(h(y)) = h(g(y))", true, std::nullopt));

  const auto bad = verify_semiconjugacy(two, id, EndoMap({1, 0}), all, PartialMap::inclusion(2, all), 5);
  CHECK(check_named(bad, "f(h(y)) = h(g(y))", false, Point{0}));

  const auto leaky = verify_semiconjugacy(two, id, EndoMap({1, 1}), PointSet::single(0),
                                          PartialMap::inclusion(2, PointSet::single(0)), 5);
  CHECK(check_named(leaky, "g(Y) subset of Y", false, Point{0}));
  const auto undefined = verify_semiconjugacy(two, id, id, all, PartialMap(2), 5);
  CHECK(check_named(undefined, "h defined on Y", false, Point{0}));
}

TEST_CASE("builder on the reference systems") {
  const auto path = spaces::path4();
  const EndoMap id = EndoMap::identity(4);
  const Measure m1 = Measure::dirac(4, 1);
  const auto cert = build_semiconjugacy(path, id, id, m1, 1);
  CHECK(cert.passed());
  CHECK(cert.expansivity_constant == R("1/2"));
  CHECK(cert.inner_eps == R("1/16"));
  CHECK(cert.delta == R("1/2"));
  CHECK(cert.domain == PointSet::all(4));
  CHECK(cert.h == PartialMap::inclusion(4, PointSet::all(4)));
  CHECK(cert.excluded_mass == Rational(0));

  CHECK_THROWS_AS(build_semiconjugacy(path, id, id, m1, 1, Rational(1)), PreconditionViolated);
  CHECK_THROWS_AS(build_semiconjugacy(path, id, EndoMap({1, 1, 2, 3}), m1, 1), PreconditionViolated);
  CHECK_THROWS_AS(build_semiconjugacy(path, id, id, m1, 0), PreconditionViolated);
}

TEST_CASE("property: g = f gives the inclusion on a set carrying the measure") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto sys = oracle::random_system(rng, 2 + uniform_below(rng, 5));
    const auto cert = build_semiconjugacy(sys.space, sys.f, sys.f, sys.mu, Rational(1, 2));
    REQUIRE(cert.passed());
    CHECK(cert.h == PartialMap::inclusion(sys.space.size(), cert.domain));
    CHECK(cert.excluded_mass <= cert.inner_eps);
  }
}

TEST_CASE("property: every g in the certified ball gets a verified semiconjugacy") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 5);
    const auto sys = oracle::random_system(rng, n);
    const Measure ms[] = {sys.mu};
    const ThresholdGrid grid = epsilon_grid(sys.space, ms);
    const Rational eps = grid[uniform_below(rng, grid.size())];
    const auto e = default_expansivity_constant(sys.space, sys.f, grid);
    REQUIRE(e.has_value());
    const Rational inner = builder_inner_eps(*e, eps);
    const Rational delta = shadowing_delta(sys.space, sys.f, inner, ShadowingMode::Weak, &sys.mu);
    const PerturbationBall ball(sys.space, sys.f, delta);
    if (ball.count() > 5000) continue;
    ball.for_each([&](const EndoMap& g) {
      const auto cert = build_semiconjugacy(sys.space, sys.f, g, sys.mu, eps, *e);
      REQUIRE(cert.passed());
      CHECK(cert.base->is_subset_of(cert.domain));
      CHECK(sys.mu.mass(cert.domain.complement(n)) <= inner);
      cert.domain.for_each([&](Point y) { CHECK(sys.space.distance(cert.h(y), y) <= inner); });
      return true;
    });
  }
}
