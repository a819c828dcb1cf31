#pragma once

// Exact shadowing decisions on finite spaces.
//
// A δ-pseudo-orbit is a walk in the graph x -> x' with d(f(x), x') <= δ.
// The tube automaton tracks, for a pseudo-orbit prefix w_0..w_k, the set
// T_k = f^k(V_k) where V_k are the points whose orbit stays ε-close to the
// prefix. Transitions: T' = f(T) ∩ B[w', ε]. A start point is shadowable iff
// no state with an empty tube is reachable: the V_k are nested and finite,
// so nonempty at every depth means one point shadows the whole orbit.

#include <cstdint>
#include <optional>

#include "mustab/metric_core.hpp"

namespace mustab {

enum class ShadowingMode { All, Mu, Weak };

const char* to_string(ShadowingMode mode);
std::optional<ShadowingMode> parse_shadowing_mode(std::string_view text);

/// Adjacency of the δ-pseudo-orbit graph; successors(x) = B[f(x), δ].
class PseudoOrbitGraph {
 public:
  PseudoOrbitGraph(const FiniteMetricSpace& space, const EndoMap& f, const Rational& delta);
  PointSet successors(Point x) const { return succ_[x]; }
  std::size_t size() const { return succ_.size(); }

 private:
  std::vector<PointSet> succ_;
};

struct TubeState {
  Point last;
  PointSet tube;
  friend bool operator==(const TubeState&, const TubeState&) = default;
};

/// One tube transition on the pseudo-step `last -> next`.
PointSet tube_step(const EndoMap& f, const std::vector<PointSet>& eps_balls, PointSet tube, Point next);

/// S = {x0 : every δ-pseudo-orbit from x0 is ε-shadowed}.
PointSet shadowable_start_set(const FiniteMetricSpace& space, const EndoMap& f, const Rational& eps,
                              const Rational& delta);

/// Whether the mode's condition holds for the shadowable set S:
/// all: S = X; mu: support(μ) ⊆ S; weak: μ(S) >= 1 − ε.
bool shadowing_condition(ShadowingMode mode, PointSet shadowable, std::size_t n, const Measure* mu,
                         const Rational& eps);

class MissingMeasure : public Error {
 public:
  MissingMeasure() : Error("MissingMeasure: mode mu/weak needs a measure") {}
};

/// Largest δ in the δ-grid at which the mode's condition holds. Passing is
/// antitone in δ and always holds at d_min / 2. Throws MissingMeasure.
Rational shadowing_delta(const FiniteMetricSpace& space, const EndoMap& f, const Rational& eps,
                         ShadowingMode mode, const Measure* mu = nullptr);

enum class LassoVerdict {
  Refuted,            // a pseudo-orbit prefix with no ε-shadow exists
  Shadowed,           // exhaustive: every pseudo-orbit from x0 is shadowed
  NoRefutationFound,  // bound below n·2ⁿ and nothing refuted it
};

const char* to_string(LassoVerdict verdict);

/// Exact bound for the oracle: n · 2ⁿ (saturating).
std::uint64_t lasso_exact_bound(std::size_t n);

/// Independent check of x0 ∈ S by enumerating pseudo-orbit prefixes of
/// length <= bound and testing each shadow-candidate set by direct scan of
/// true orbits. Subtrees are shared on (depth, last point, candidate set).
LassoVerdict lasso_oracle(const FiniteMetricSpace& space, const EndoMap& f, const Rational& eps,
                          const Rational& delta, Point x0, std::uint64_t bound);

}  // namespace mustab
