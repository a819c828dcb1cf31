#pragma once

// Semiconjugacies h : Y -> X with f ∘ h = h ∘ g, and the construction that
// builds one from shadowing of g-orbits by f-orbits for an expansive f.

#include <optional>
#include <string>
#include <vector>

#include "mustab/metric_core.hpp"

namespace mustab {

/// A map defined on a subset of the points.
class PartialMap {
 public:
  PartialMap() = default;
  explicit PartialMap(std::size_t n) : table_(n, kUndefined) {}

  std::size_t size() const { return table_.size(); }
  PointSet domain() const { return domain_; }
  bool defined(Point y) const { return domain_.contains(y); }
  Point operator()(Point y) const { return table_[y]; }
  void set(Point y, Point value);
  const std::vector<Point>& table() const { return table_; }

  static PartialMap inclusion(std::size_t n, PointSet domain);

  friend bool operator==(const PartialMap&, const PartialMap&) = default;

  static constexpr Point kUndefined = static_cast<Point>(-1);

 private:
  PointSet domain_;
  std::vector<Point> table_;
};

/// Eventually periodic sequence: tail then cycle repeated forever.
struct Lasso {
  std::vector<Point> tail;
  std::vector<Point> cycle;

  std::size_t preperiod() const { return tail.size(); }
  std::size_t period() const { return cycle.size(); }
  Point at(std::size_t k) const {
    return k < tail.size() ? tail[k] : cycle[(k - tail.size()) % cycle.size()];
  }
  friend bool operator==(const Lasso&, const Lasso&) = default;
};

/// Orbit of x under g as a lasso (tail + cycle).
Lasso orbit_lasso(const EndoMap& g, Point x);

class MalformedLasso : public Error {
 public:
  using Error::Error;
};

/// Least g-invariant superset of B.
PointSet orbit_closure(const EndoMap& g, PointSet b);

/// Least-index y with d(f^k y, pseudo_k) <= ε for all k >= 0, checked over
/// the exact joint period. Throws MalformedLasso.
std::optional<Point> shadow_point(const FiniteMetricSpace& space, const EndoMap& f, const Lasso& pseudo,
                                  const Rational& eps);

struct CertificateCheck {
  std::string name;
  bool passed = false;
  std::optional<Point> witness;
};

struct SemiconjugacyCertificate {
  EndoMap f;
  EndoMap g;
  PointSet domain;  // Y
  PartialMap h;
  Rational eps;
  std::vector<CertificateCheck> checks;

  // Construction parameters, when built by build_semiconjugacy.
  std::optional<Rational> expansivity_constant;
  std::optional<Rational> inner_eps;
  std::optional<Rational> delta;
  std::optional<PointSet> base;  // B
  std::optional<Rational> excluded_mass;  // μ(X \ Y)

  bool passed() const;
};

/// Checks g(Y) ⊆ Y, d(h(y), y) <= ε and f(h(y)) = h(g(y)) on Y by direct
/// scan, reporting the first witness of each failed check. Also checks that
/// h is defined on all of Y.
std::vector<CertificateCheck> verify_semiconjugacy(const FiniteMetricSpace& space, const EndoMap& f,
                                                   const EndoMap& g, PointSet domain, const PartialMap& h,
                                                   const Rational& eps);

/// Re-runs verification on a certificate and stores the result.
bool verify_semiconjugacy(const FiniteMetricSpace& space, SemiconjugacyCertificate& cert);

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

/// Soundness failure inside the construction; never expected when the
/// preconditions hold.
class SoundnessError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// No shadow point exists for some b ∈ B.
class ShadowMissing : public SoundnessError {
 public:
  explicit ShadowMissing(Point b) : SoundnessError("ShadowMissing(" + std::to_string(b) + ")") {}
};

/// ε' = min{e, ε} / 8.
Rational builder_inner_eps(const Rational& e, const Rational& eps);

/// Builds h on Y = orbit closure of B = S(ε', δ) under g, with
/// h(g^k b) = f^k(y_b) for the shadow point y_b of b's g-orbit, where
/// δ = weak-μ shadowing δ*(ε') and e < s* is the expansivity constant
/// (defaulting to the largest ε-grid value of μ below s*).
/// Throws PreconditionViolated when e >= s* or d_C0(f, g) > δ.
SemiconjugacyCertificate build_semiconjugacy(const FiniteMetricSpace& space, const EndoMap& f,
                                             const EndoMap& g, const Measure& mu, const Rational& eps,
                                             std::optional<Rational> e = std::nullopt);

}  // namespace mustab
