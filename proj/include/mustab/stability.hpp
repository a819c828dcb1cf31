#pragma once

// Brute-force deciders for topological stability at a point, with respect
// to a measure, and in the set-valued sense. The ∀ε∃δ quantifier becomes a
// profile ε ↦ δ*(ε): the largest δ-grid value such that every g with
// d_C0(f, g) <= δ admits the required witness.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mustab/conjugacy.hpp"
#include "mustab/metric_core.hpp"

namespace mustab {

enum class TargetKind { Point, Measure, SetValued };

struct StabilityTarget {
  TargetKind kind = TargetKind::Point;
  Point point = 0;
  Measure measure;
  std::string name;  // label of the point or name of the measure, for reports

  static StabilityTarget at_point(Point p, std::string name = {});
  static StabilityTarget of_measure(Measure mu, std::string name = {});
  static StabilityTarget set_valued(Measure mu, std::string name = {});

  /// "point:<name>", "measure:<name>" or "setvalued:<name>".
  std::string describe() const;
};

/// H : X -> 2^X given by its images; Dom(H) = {x : H(x) ≠ ∅}.
class SetValuedMap {
 public:
  SetValuedMap() = default;
  explicit SetValuedMap(std::size_t n) : images_(n) {}

  std::size_t size() const { return images_.size(); }
  PointSet operator()(Point x) const { return images_[x]; }
  void set(Point x, PointSet image) { images_[x] = image; }
  PointSet domain() const;
  const std::vector<PointSet>& images() const { return images_; }

  friend bool operator==(const SetValuedMap&, const SetValuedMap&) = default;

 private:
  std::vector<PointSet> images_;
};

/// The four set-valued stability conditions, each with a first witness
/// point when it fails (none for the mass condition).
struct SetValuedChecks {
  bool domain_mass = false;      // μ(Dom(H)) >= 1 − ε
  bool null_images = false;      // μ(H(x)) = 0 for every x
  bool near_identity = false;    // H(x) ⊆ B[x, ε]
  bool commutes = false;         // f(H(x)) = H(g(x))
  std::optional<Point> null_images_witness;
  std::optional<Point> near_identity_witness;
  std::optional<Point> commutes_witness;

  bool all() const { return domain_mass && null_images && near_identity && commutes; }
};

SetValuedChecks check_setvalued(const FiniteMetricSpace& space, const EndoMap& f, const EndoMap& g,
                                const SetValuedMap& big_h, const Measure& mu, const Rational& eps);

/// H(x) = {h(x)} on the domain of h, ∅ elsewhere (so Dom(H) = Y).
SetValuedMap setvalued_from_partial(const PartialMap& h);

/// Per-(f, target, ε) witness search, reusable across many g.
class WitnessFinder {
 public:
  WitnessFinder(const FiniteMetricSpace& space, const EndoMap& f, const StabilityTarget& target,
                const Rational& eps);

  bool exists(const EndoMap& g) const;

  /// Point mode: h on the g-orbit closure of p. Measure mode: h on a
  /// g-invariant Y (= domain) with μ(X \ Y) <= ε.
  std::optional<PartialMap> find_semiconjugacy(const EndoMap& g) const;
  /// Set-valued mode.
  std::optional<SetValuedMap> find_setvalued(const EndoMap& g) const;

 private:
  std::optional<PartialMap> point_search(const EndoMap& g, bool build) const;
  std::optional<PartialMap> measure_search(const EndoMap& g, bool build) const;
  std::optional<SetValuedMap> setvalued_search(const EndoMap& g, bool build) const;

  EndoMap f_;
  StabilityTarget target_;
  std::vector<PointSet> near_;
  std::vector<std::int64_t> weight_;
  std::int64_t required_ = 0;  // scaled lower bound on μ(Y) or μ(Dom(H))
};

struct StabilityOptions {
  std::uint64_t budget = 1'000'000;
  bool allow_sampling = false;
  std::uint64_t seed = 0;
};

struct StabilityResult {
  /// Largest passing grid δ; nullopt when even g = f has no witness.
  std::optional<Rational> delta;
  bool exhaustive = true;
  /// First failing grid δ and the lexicographically least failing g there.
  std::optional<Rational> failed_delta;
  std::optional<EndoMap> counterexample;
};

/// Throws BudgetExceeded when a ball exceeds the budget and sampling is off.
StabilityResult stability_delta(const FiniteMetricSpace& space, const EndoMap& f,
                                const StabilityTarget& target, const Rational& eps,
                                const StabilityOptions& options = {});

struct ProfileRow {
  Rational eps;
  std::optional<Rational> delta;
  bool exhaustive = true;
};

struct StabilityProfile {
  std::string target;
  std::vector<ProfileRow> rows;
};

/// One stability_delta row per grid ε. Throws std::logic_error if δ* is not
/// nondecreasing in ε.
StabilityProfile stability_profile(const FiniteMetricSpace& space, const EndoMap& f,
                                   const StabilityTarget& target, const ThresholdGrid& grid,
                                   const StabilityOptions& options = {});

}  // namespace mustab
