#pragma once

// Seeded property suites for the stability results that survive in the
// finite model. Each item has a per-system check (usable on hand-built
// systems) and a seeded driver. A missing δ* ("none") ranks below every
// grid value in the inequalities.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mustab/generator.hpp"
#include "mustab/stability.hpp"

namespace mustab {

enum class TheoremItem { DiracPoint, AbsContinuity, Conjugacy, Convexity, WeakShadowing, IsolatedPoint };

/// "1", "2", "4", "5", "7" or "basicas".
const char* to_string(TheoremItem item);
std::optional<TheoremItem> parse_theorem_item(std::string_view text);

struct CheckOutcome {
  bool passed = true;
  /// False when some perturbation ball exceeded the budget and was skipped.
  bool exhaustive = true;
  std::uint64_t comparisons = 0;
  /// First failure (or skip reason); null otherwise.
  nlohmann::ordered_json detail;

  void fail(nlohmann::ordered_json why);
  void absorb(CheckOutcome other);
};

/// Point profile at p equals the m_p profile at every grid ε < 1, every p.
CheckOutcome check_dirac_point(const FiniteMetricSpace& space, const EndoMap& f, const StabilityOptions& opts);

/// Requires supp μ ⊆ supp ν. Also checks the atom chain
/// δ*_{m_p}(ε) >= δ*_μ(ε') for atoms p of μ.
CheckOutcome check_abs_continuity(const FiniteMetricSpace& space, const EndoMap& f, const Measure& mu,
                                  const Measure& nu, const StabilityOptions& opts);

/// Profile equality when H is an isometry, modulus inequality otherwise.
CheckOutcome check_conjugacy(const FiniteMetricSpace& space, const EndoMap& f, const Measure& mu,
                             const EndoMap& big_h, const StabilityOptions& opts);

CheckOutcome check_convexity(const FiniteMetricSpace& space, const EndoMap& f, const Measure& mu,
                             const Measure& nu, const StabilityOptions& opts);

/// Also builds and verifies a semiconjugacy for every g in the certified ball.
CheckOutcome check_weak_shadowing(const FiniteMetricSpace& space, const EndoMap& f, const Measure& mu,
                                  const StabilityOptions& opts);

/// p must be isolated and fixed by f.
CheckOutcome check_isolated_point(const FiniteMetricSpace& space, const EndoMap& f, Point p,
                                  const StabilityOptions& opts);

bool is_isometry(const FiniteMetricSpace& space, const EndoMap& big_h);
/// Exact modulus ω_H(t) = max{d(Ha, Hb) : d(a, b) <= t}.
Rational modulus_of_continuity(const FiniteMetricSpace& space, const EndoMap& big_h, const Rational& t);
/// All isometric bijections, in lexicographic order.
std::vector<EndoMap> isometries(const FiniteMetricSpace& space);

struct TheoremCheckOptions {
  std::uint64_t trials = 50;
  std::uint64_t seed = 0;
  std::size_t max_points = 4;
  std::uint64_t budget = 1'000'000;
  std::int64_t range = 4;
  /// Per-trial distance scale is drawn from [1, max_scale].
  std::int64_t max_scale = 3;
};

struct TrialResult {
  std::uint64_t trial = 0;
  std::uint64_t trial_seed = 0;
  std::size_t n = 0;
  CheckOutcome outcome;
  /// The system the trial ran on, with every map and measure it used.
  nlohmann::ordered_json system;
};

/// Deterministic in (item, options, trial); replays a reported counterexample.
TrialResult theorem_trial(TheoremItem item, const TheoremCheckOptions& options, std::uint64_t trial);

struct TheoremReport {
  TheoremItem item = TheoremItem::DiracPoint;
  TheoremCheckOptions options;
  std::uint64_t systems_tested = 0;
  std::uint64_t comparisons = 0;
  std::uint64_t skipped = 0;
  bool passed = true;
  bool exhaustive = true;
  std::optional<TrialResult> counterexample;
};

/// Stops at the first failing trial.
TheoremReport theorem_check(TheoremItem item, const TheoremCheckOptions& options);

nlohmann::ordered_json to_json(const TheoremReport& report);

}  // namespace mustab
