#include "mustab/conjugacy.hpp"

#include <numeric>

#include "mustab/expansivity.hpp"
#include "mustab/shadowing.hpp"

namespace mustab {

void PartialMap::set(Point y, Point value) {
  table_.at(y) = value;
  domain_.insert(y);
}

PartialMap PartialMap::inclusion(std::size_t n, PointSet domain) {
  PartialMap h(n);
  domain.for_each([&](Point y) { h.set(y, y); });
  return h;
}

Lasso orbit_lasso(const EndoMap& g, Point x) {
  std::vector<std::size_t> pos(g.size(), static_cast<std::size_t>(-1));
  std::vector<Point> seq;
  while (pos[x] == static_cast<std::size_t>(-1)) {
    pos[x] = seq.size();
    seq.push_back(x);
    x = g(x);
  }
  Lasso out;
  out.tail.assign(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(pos[x]));
  out.cycle.assign(seq.begin() + static_cast<std::ptrdiff_t>(pos[x]), seq.end());
  return out;
}

PointSet orbit_closure(const EndoMap& g, PointSet b) {
  PointSet closed = b;
  PointSet frontier = b;
  while (!frontier.empty()) {
    const PointSet next = g.image(frontier) - closed;
    closed |= next;
    frontier = next;
  }
  return closed;
}

std::optional<Point> shadow_point(const FiniteMetricSpace& space, const EndoMap& f, const Lasso& pseudo,
                                  const Rational& eps) {
  if (pseudo.cycle.empty()) throw MalformedLasso("MalformedLasso: empty cycle");
  for (Point p : pseudo.tail) {
    if (p >= space.size()) throw MalformedLasso("MalformedLasso: point out of range");
  }
  for (Point p : pseudo.cycle) {
    if (p >= space.size()) throw MalformedLasso("MalformedLasso: point out of range");
  }
  for (Point y = 0; y < space.size(); ++y) {
    const Lasso orbit = orbit_lasso(f, y);
    const std::size_t horizon = std::max(pseudo.preperiod(), orbit.preperiod()) +
                                std::lcm(pseudo.period(), orbit.period());
    bool ok = true;
    for (std::size_t k = 0; k < horizon && ok; ++k) {
      ok = space.distance(orbit.at(k), pseudo.at(k)) <= eps;
    }
    if (ok) return y;
  }
  return std::nullopt;
}

bool SemiconjugacyCertificate::passed() const {
  if (checks.empty()) return false;
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::vector<CertificateCheck> verify_semiconjugacy(const FiniteMetricSpace& space, const EndoMap& f,
                                                   const EndoMap& g, PointSet domain, const PartialMap& h,
                                                   const Rational& eps) {
  check_same_size(space.size(), f.size(), "f");
  check_same_size(space.size(), g.size(), "g");
  check_same_size(space.size(), h.size(), "h");
  std::vector<CertificateCheck> out;

  CertificateCheck defined{"h defined on Y", true, std::nullopt};
  domain.for_each([&](Point y) {
    if (defined.passed && !h.defined(y)) defined = {defined.name, false, y};
  });
  out.push_back(defined);

  CertificateCheck invariant{"g(Y) subset of Y", true, std::nullopt};
  domain.for_each([&](Point y) {
    if (invariant.passed && !domain.contains(g(y))) invariant = {invariant.name, false, y};
  });
  out.push_back(invariant);

  CertificateCheck close{"d(h(y), y) <= eps", true, std::nullopt};
  domain.for_each([&](Point y) {
    if (close.passed && h.defined(y) && space.distance(h(y), y) > eps) close = {close.name, false, y};
  });
  out.push_back(close);

  CertificateCheck commute{"f(h(y)) = h(g(y))", true, std::nullopt};
  domain.for_each([&](Point y) {
    if (!commute.passed) return;
    const Point gy = g(y);
    if (!h.defined(y) || !h.defined(gy) || f(h(y)) != h(gy)) commute = {commute.name, false, y};
  });
  out.push_back(commute);
  return out;
}

bool verify_semiconjugacy(const FiniteMetricSpace& space, SemiconjugacyCertificate& cert) {
  cert.checks = verify_semiconjugacy(space, cert.f, cert.g, cert.domain, cert.h, cert.eps);
  return cert.passed();
}

Rational builder_inner_eps(const Rational& e, const Rational& eps) {
  return (e < eps ? e : eps) / 8;
}

SemiconjugacyCertificate build_semiconjugacy(const FiniteMetricSpace& space, const EndoMap& f,
                                             const EndoMap& g, const Measure& mu, const Rational& eps,
                                             std::optional<Rational> e) {
  const std::size_t n = space.size();
  check_same_size(n, f.size(), "f");
  check_same_size(n, g.size(), "g");
  check_same_size(n, mu.size(), "measure");
  if (eps <= 0) throw PreconditionViolated("PreconditionViolated(eps > 0)");

  const Measure measures[] = {mu};
  if (!e) e = default_expansivity_constant(space, f, epsilon_grid(space, measures));
  if (!e || *e <= 0) throw PreconditionViolated("PreconditionViolated(e > 0)");
  if (n >= 2 && *e >= expansivity_threshold(space, f)) {
    throw PreconditionViolated("PreconditionViolated(e < expansivity threshold)");
  }

  const Rational inner = builder_inner_eps(*e, eps);
  const Rational delta = shadowing_delta(space, f, inner, ShadowingMode::Weak, &mu);
  if (c0_distance(space, f, g) > delta) {
    throw PreconditionViolated("PreconditionViolated(d_C0(f, g) <= delta)");
  }

  const PointSet base = shadowable_start_set(space, f, inner, delta);
  const PointSet domain = orbit_closure(g, base);

  PartialMap h(n);
  base.for_each([&](Point b) {
    const Lasso pseudo = orbit_lasso(g, b);
    const auto y = shadow_point(space, f, pseudo, inner);
    if (!y) throw ShadowMissing(b);
    Point image = *y;
    for (std::size_t k = 0; k < pseudo.preperiod() + pseudo.period(); ++k) {
      const Point x = pseudo.at(k);
      if (h.defined(x) && h(x) != image) {
        throw SoundnessError("conflicting h-values at point " + std::to_string(x));
      }
      h.set(x, image);
      image = f(image);
    }
    // Closing the cycle must reproduce the value at the cycle entry.
    if (image != h(pseudo.cycle.front())) {
      throw SoundnessError("h not consistent around g-cycle through " + std::to_string(pseudo.cycle.front()));
    }
  });

  SemiconjugacyCertificate cert{f, g, domain, h, eps, {}, *e, inner, delta, base,
                                mu.mass(domain.complement(n))};
  verify_semiconjugacy(space, cert);
  return cert;
}

}  // namespace mustab
