#include "mustab/theorem_check.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "mustab/conjugacy.hpp"
#include "mustab/expansivity.hpp"
#include "mustab/shadowing.hpp"

namespace mustab {

namespace {

using Delta = std::optional<Rational>;

bool delta_ge(const Delta& a, const Delta& b) {
  if (!b) return true;
  return a && *a >= *b;
}

Delta delta_min(const Delta& a, const Delta& b) {
  if (!a || !b) return std::nullopt;
  return std::min(*a, *b);
}

std::string show(const Delta& d) { return d ? format_rational(*d) : "none"; }
std::string show(const Rational& r) { return format_rational(r); }

class ProfileCache {
 public:
  ProfileCache(const FiniteMetricSpace& space, const EndoMap& f, StabilityTarget target,
               const StabilityOptions& opts)
      : space_(space), f_(f), target_(std::move(target)), opts_(opts) {}

  const Delta& operator()(const Rational& eps) {
    auto it = cache_.find(eps);
    if (it == cache_.end()) {
      it = cache_.emplace(eps, stability_delta(space_, f_, target_, eps, opts_).delta).first;
    }
    return it->second;
  }

 private:
  const FiniteMetricSpace& space_;
  EndoMap f_;
  StabilityTarget target_;
  StabilityOptions opts_;
  std::map<Rational, Delta> cache_;
};

template <class Body>
CheckOutcome guarded(Body&& body) {
  CheckOutcome out;
  try {
    body(out);
  } catch (const BudgetExceeded& e) {
    out.exhaustive = false;
    if (out.passed) out.detail = {{"skipped", e.what()}};
  }
  return out;
}

}  // namespace

const char* to_string(TheoremItem item) {
  switch (item) {
    case TheoremItem::DiracPoint: return "1";
    case TheoremItem::AbsContinuity: return "2";
    case TheoremItem::Conjugacy: return "4";
    case TheoremItem::Convexity: return "5";
    case TheoremItem::WeakShadowing: return "7";
    case TheoremItem::IsolatedPoint: return "basicas";
  }
  return "?";
}

std::optional<TheoremItem> parse_theorem_item(std::string_view text) {
  for (auto item : {TheoremItem::DiracPoint, TheoremItem::AbsContinuity, TheoremItem::Conjugacy,
                    TheoremItem::Convexity, TheoremItem::WeakShadowing, TheoremItem::IsolatedPoint}) {
    if (text == to_string(item)) return item;
  }
  return std::nullopt;
}

void CheckOutcome::fail(nlohmann::ordered_json why) {
  if (!passed) return;
  passed = false;
  detail = std::move(why);
}

void CheckOutcome::absorb(CheckOutcome other) {
  comparisons += other.comparisons;
  exhaustive = exhaustive && other.exhaustive;
  if (!other.passed) {
    fail(std::move(other.detail));
  } else if (detail.is_null() && !other.detail.is_null()) {
    detail = std::move(other.detail);
  }
}

CheckOutcome check_dirac_point(const FiniteMetricSpace& space, const EndoMap& f, const StabilityOptions& opts) {
  return guarded([&](CheckOutcome& out) {
    for (Point p = 0; p < space.size() && out.passed; ++p) {
      const Measure mp = Measure::dirac(space.size(), p);
      ProfileCache point(space, f, StabilityTarget::at_point(p), opts);
      ProfileCache measure(space, f, StabilityTarget::of_measure(mp), opts);
      const Measure grid_measures[] = {mp};
      const ThresholdGrid grid = epsilon_grid(space, grid_measures);
      for (const Rational& eps : grid.values()) {
        if (eps >= 1) break;
        ++out.comparisons;
        if (point(eps) != measure(eps)) {
          out.fail({{"point", p}, {"eps", show(eps)}, {"point_delta", show(point(eps))},
                    {"measure_delta", show(measure(eps))}});
          return;
        }
      }
    }
  });
}

CheckOutcome check_abs_continuity(const FiniteMetricSpace& space, const EndoMap& f, const Measure& mu,
                                  const Measure& nu, const StabilityOptions& opts) {
  return guarded([&](CheckOutcome& out) {
    ProfileCache dmu(space, f, StabilityTarget::of_measure(mu), opts);
    ProfileCache dnu(space, f, StabilityTarget::of_measure(nu), opts);
    const Measure mu_only[] = {mu};
    const Measure nu_only[] = {nu};
    const ThresholdGrid grid_mu = epsilon_grid(space, mu_only);
    const ThresholdGrid grid_nu = epsilon_grid(space, nu_only);

    for (const Rational& eps : grid_mu.values()) {
      const auto ac = ac_threshold(mu, nu, eps);
      const Rational bound = ac ? std::min(*ac, eps) : eps;
      for (const Rational& eps2 : grid_nu.values()) {
        if (eps2 >= bound) break;
        ++out.comparisons;
        if (!delta_ge(dmu(eps), dnu(eps2))) {
          out.fail({{"eps", show(eps)}, {"eps_prime", show(eps2)}, {"mu_delta", show(dmu(eps))},
                    {"nu_delta", show(dnu(eps2))}});
          return;
        }
      }
    }

    // Atom chain: m_p ≺ μ for every atom p.
    atoms(mu).for_each([&](Point p) {
      if (!out.passed) return;
      const Measure mp = Measure::dirac(space.size(), p);
      ProfileCache point(space, f, StabilityTarget::at_point(p), opts);
      const Measure mp_only[] = {mp};
      const ThresholdGrid grid_p = epsilon_grid(space, mp_only);
      for (const Rational& eps : grid_p.values()) {
        if (eps >= 1) break;
        const auto ac = ac_threshold(mp, mu, eps);
        const Rational bound = ac ? std::min(*ac, eps) : eps;
        for (const Rational& eps2 : grid_mu.values()) {
          if (eps2 >= bound) break;
          ++out.comparisons;
          if (!delta_ge(point(eps), dmu(eps2))) {
            out.fail({{"atom", p}, {"eps", show(eps)}, {"eps_prime", show(eps2)},
                      {"point_delta", show(point(eps))}, {"mu_delta", show(dmu(eps2))}});
            return;
          }
        }
      }
    });
  });
}

bool is_isometry(const FiniteMetricSpace& space, const EndoMap& big_h) {
  if (!big_h.is_bijection()) return false;
  for (Point a = 0; a < space.size(); ++a) {
    for (Point b = a + 1; b < space.size(); ++b) {
      if (space.distance(big_h(a), big_h(b)) != space.distance(a, b)) return false;
    }
  }
  return true;
}

Rational modulus_of_continuity(const FiniteMetricSpace& space, const EndoMap& big_h, const Rational& t) {
  Rational best = 0;
  for (Point a = 0; a < space.size(); ++a) {
    for (Point b = a + 1; b < space.size(); ++b) {
      if (space.distance(a, b) <= t) best = std::max(best, space.distance(big_h(a), big_h(b)));
    }
  }
  return best;
}

std::vector<EndoMap> isometries(const FiniteMetricSpace& space) {
  std::vector<Point> perm(space.size());
  std::iota(perm.begin(), perm.end(), Point{0});
  std::vector<EndoMap> out;
  do {
    EndoMap h(perm);
    if (is_isometry(space, h)) out.push_back(std::move(h));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

CheckOutcome check_conjugacy(const FiniteMetricSpace& space, const EndoMap& f, const Measure& mu,
                             const EndoMap& big_h, const StabilityOptions& opts) {
  if (!big_h.is_bijection()) throw NotBijective();
  return guarded([&](CheckOutcome& out) {
    const EndoMap conj_f = big_h.after(f.after(big_h.inverse()));
    const Measure conj_mu = pushforward(big_h, mu);
    ProfileCache original(space, f, StabilityTarget::of_measure(mu), opts);
    ProfileCache conjugate(space, conj_f, StabilityTarget::of_measure(conj_mu), opts);
    const Measure mu_only[] = {mu};
    const ThresholdGrid grid = epsilon_grid(space, mu_only);
    const ThresholdGrid dgrid = delta_grid(space);
    const EndoMap h_inv = big_h.inverse();

    if (is_isometry(space, big_h)) {
      for (const Rational& eps : grid.values()) {
        ++out.comparisons;
        if (original(eps) != conjugate(eps)) {
          out.fail({{"isometry", true}, {"eps", show(eps)}, {"delta", show(original(eps))},
                    {"conjugate_delta", show(conjugate(eps))}});
          return;
        }
      }
      return;
    }
    for (const Rational& eps : grid.values()) {
      std::optional<Rational> m1;
      for (const Rational& t : grid.values()) {
        if (t > eps) break;
        if (modulus_of_continuity(space, big_h, t) <= eps) m1 = t;
      }
      ++out.comparisons;
      if (!m1) continue;  // unreachable: ω_H vanishes below d_min
      const Delta inner = original(*m1);
      if (!inner) continue;
      std::optional<Rational> m2;
      for (const Rational& t : dgrid.values()) {
        if (modulus_of_continuity(space, h_inv, t) <= *inner) m2 = t;
      }
      if (!delta_ge(conjugate(eps), m2)) {
        out.fail({{"isometry", false}, {"eps", show(eps)}, {"m1", show(*m1)}, {"delta_at_m1", show(inner)},
                  {"m2", show(m2)}, {"conjugate_delta", show(conjugate(eps))}});
        return;
      }
    }
  });
}

CheckOutcome check_convexity(const FiniteMetricSpace& space, const EndoMap& f, const Measure& mu,
                             const Measure& nu, const StabilityOptions& opts) {
  return guarded([&](CheckOutcome& out) {
    const Measure both[] = {mu, nu};
    const ThresholdGrid grid = epsilon_grid(space, both);
    const auto e = default_expansivity_constant(space, f, grid);
    if (!e) return;
    ProfileCache dmu(space, f, StabilityTarget::of_measure(mu), opts);
    ProfileCache dnu(space, f, StabilityTarget::of_measure(nu), opts);
    const Rational ts[] = {Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1)};
    std::vector<ProfileCache> mixes;
    for (const Rational& t : ts) {
      mixes.emplace_back(space, f, StabilityTarget::of_measure(convex_combine(t, mu, nu)), opts);
    }
    for (const Rational& eps : grid.values()) {
      const Rational eps2 = std::min(Rational(*e / 2), eps);
      const Delta lower = delta_min(dmu(eps2), dnu(eps2));
      for (std::size_t i = 0; i < mixes.size(); ++i) {
        ++out.comparisons;
        if (!delta_ge(mixes[i](eps), lower)) {
          out.fail({{"t", show(ts[i])}, {"e", show(*e)}, {"eps", show(eps)}, {"eps_prime", show(eps2)},
                    {"mix_delta", show(mixes[i](eps))}, {"mu_delta", show(dmu(eps2))},
                    {"nu_delta", show(dnu(eps2))}});
          return;
        }
      }
    }
  });
}

CheckOutcome check_weak_shadowing(const FiniteMetricSpace& space, const EndoMap& f, const Measure& mu,
                                  const StabilityOptions& opts) {
  return guarded([&](CheckOutcome& out) {
    const Measure mu_only[] = {mu};
    const ThresholdGrid grid = epsilon_grid(space, mu_only);
    const auto e = default_expansivity_constant(space, f, grid);
    if (!e) return;
    ProfileCache dmu(space, f, StabilityTarget::of_measure(mu), opts);
    for (const Rational& eps : grid.values()) {
      const Rational inner = builder_inner_eps(*e, eps);
      const Rational dsh = shadowing_delta(space, f, inner, ShadowingMode::Weak, &mu);
      ++out.comparisons;
      if (!delta_ge(dmu(eps), dsh)) {
        out.fail({{"e", show(*e)}, {"eps", show(eps)}, {"inner_eps", show(inner)},
                  {"shadowing_delta", show(dsh)}, {"measure_delta", show(dmu(eps))}});
        return;
      }
      const PerturbationBall ball(space, f, dsh);
      if (ball.count() > opts.budget) {
        out.exhaustive = false;
        continue;
      }
      ball.for_each([&](const EndoMap& g) {
        ++out.comparisons;
        std::string problem;
        try {
          const auto cert = build_semiconjugacy(space, f, g, mu, eps, *e);
          if (!cert.passed()) {
            problem = "certificate rejected";
          } else if (cert.excluded_mass > inner) {
            problem = "excluded mass above inner eps";
          }
        } catch (const std::logic_error& err) {
          problem = err.what();
        }
        if (problem.empty()) return true;
        out.fail({{"e", show(*e)}, {"eps", show(eps)}, {"shadowing_delta", show(dsh)}, {"g", g.table()},
                  {"problem", problem}});
        return false;
      });
      if (!out.passed) return;
    }
  });
}

CheckOutcome check_isolated_point(const FiniteMetricSpace& space, const EndoMap& f, Point p,
                                  const StabilityOptions& opts) {
  return guarded([&](CheckOutcome& out) {
    const Measure mp = Measure::dirac(space.size(), p);
    const Measure mp_only[] = {mp};
    const ThresholdGrid grid = epsilon_grid(space, mp_only);
    const Rational floor = space.min_positive_distance() / 2;
    ProfileCache measure(space, f, StabilityTarget::of_measure(mp), opts);
    ProfileCache setvalued(space, f, StabilityTarget::set_valued(mp), opts);
    auto measure_rows = nlohmann::ordered_json::array();
    auto setvalued_rows = nlohmann::ordered_json::array();
    for (const Rational& eps : grid.values()) {
      ++out.comparisons;
      measure_rows.push_back({show(eps), show(measure(eps))});
      if (!measure(eps) || *measure(eps) <= floor) {
        out.fail({{"eps", show(eps)}, {"measure_delta", show(measure(eps))}, {"floor", show(floor)}});
        return;
      }
      if (eps < 1) {
        ++out.comparisons;
        setvalued_rows.push_back({show(eps), show(setvalued(eps))});
        if (setvalued(eps)) {
          out.fail({{"eps", show(eps)}, {"setvalued_delta", show(setvalued(eps))}});
          return;
        }
      }
    }
    out.detail = {{"measure_profile", measure_rows}, {"setvalued_profile", setvalued_rows}};
  });
}

namespace {

struct TrialSystem {
  FiniteMetricSpace space;
  EndoMap f;
  nlohmann::ordered_json json;
};

// Mirrored taxicab configuration: pairs (x, y), (-x, y) plus at most one
// point on the axis, so reflection is a nontrivial isometry.
FiniteMetricSpace mirrored_space(std::mt19937_64& rng, std::size_t n, std::int64_t range, std::int64_t scale) {
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::vector<std::pair<std::int64_t, std::int64_t>> pts;
  const auto side = static_cast<std::uint64_t>(range) + 1;
  while (pts.size() + 1 < n) {
    const auto x = 1 + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(range)));
    const auto y = static_cast<std::int64_t>(uniform_below(rng, side));
    if (seen.insert({x, y}).second) {
      pts.emplace_back(x, y);
      pts.emplace_back(-x, y);
    }
  }
  if (pts.size() < n) pts.emplace_back(0, static_cast<std::int64_t>(uniform_below(rng, side)));
  return l1_space(pts, scale);
}

SystemFile as_file(const FiniteMetricSpace& space) { return SystemFile{space, {}, {}, std::nullopt}; }

}  // namespace

TrialResult theorem_trial(TheoremItem item, const TheoremCheckOptions& options, std::uint64_t trial) {
  TrialResult result;
  result.trial = trial;
  result.trial_seed = derive_seed(options.seed, trial);
  std::mt19937_64 rng(result.trial_seed);

  const std::size_t lo = item == TheoremItem::Conjugacy || item == TheoremItem::IsolatedPoint ? 3 : 2;
  const std::size_t hi = std::max(options.max_points, lo);
  const std::size_t n = lo + uniform_below(rng, hi - lo + 1);
  const std::int64_t range = std::max<std::int64_t>(options.range, 2);
  const auto scale = 1 + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(
                             std::max<std::int64_t>(options.max_scale, 1))));
  result.n = n;
  const StabilityOptions sopts{options.budget, false, 0};

  SystemFile file = as_file(FiniteMetricSpace::validate({"x0"}, {{Rational(0)}}));
  if (item == TheoremItem::Conjugacy) {
    file = as_file(mirrored_space(rng, n, range, scale));
  } else if (item == TheoremItem::IsolatedPoint) {
    // Generated part on n - 1 points plus p at distance diam + 1 from all.
    const SystemFile base = generate_system({n - 1, result.trial_seed, GeneratorModel::L1Lattice, range, scale});
    const auto& bs = base.space;
    const Rational far = bs.diameter() + 1;
    std::vector<std::vector<Rational>> dist(n, std::vector<Rational>(n, far));
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = 0; j + 1 < n; ++j) dist[i][j] = bs.distance(i, j);
    }
    dist[n - 1][n - 1] = 0;
    auto labels = bs.labels();
    labels.push_back("p");
    file = as_file(FiniteMetricSpace::validate(std::move(labels), std::move(dist)));
  } else {
    file = generate_system({n, result.trial_seed, GeneratorModel::L1Lattice, range, scale});
    file.measures.clear();
  }
  const FiniteMetricSpace& space = file.space;
  EndoMap f = random_map(rng, n);
  if (item == TheoremItem::IsolatedPoint) {
    auto t = f.table();
    for (auto& v : t) v = v == n - 1 ? 0 : v;
    t[n - 1] = n - 1;
    f = EndoMap(std::move(t));
  }
  file.maps.emplace("f", f);

  const auto measure = [&](PointSet support) { return random_measure(rng, n, support); };
  switch (item) {
    case TheoremItem::DiracPoint:
      result.outcome = check_dirac_point(space, f, sopts);
      break;
    case TheoremItem::AbsContinuity: {
      const Measure nu = measure(random_nonempty_subset(rng, n));
      PointSet sub = random_nonempty_subset(rng, n) & nu.support();
      if (sub.empty()) sub = PointSet::single(nu.support().first());
      const Measure mu = measure(sub);
      file.measures.emplace("mu", mu);
      file.measures.emplace("nu", nu);
      result.outcome = check_abs_continuity(space, f, mu, nu, sopts);
      break;
    }
    case TheoremItem::Conjugacy: {
      const Measure mu = measure(random_nonempty_subset(rng, n));
      file.measures.emplace("mu", mu);
      const auto isos = isometries(space);
      // isos[0] is the identity; the mirror guarantees a second one.
      const EndoMap iso = isos.size() > 1 ? isos[1 + uniform_below(rng, isos.size() - 1)] : isos[0];
      file.maps.emplace("H_isometric", iso);
      CheckOutcome out = check_conjugacy(space, f, mu, iso, sopts);
      std::optional<EndoMap> other;
      for (int attempt = 0; attempt < 32 && !other; ++attempt) {
        EndoMap h = random_bijection(rng, n);
        if (!is_isometry(space, h)) other = std::move(h);
      }
      if (other) {
        file.maps.emplace("H_general", *other);
        out.absorb(check_conjugacy(space, f, mu, *other, sopts));
      }
      result.outcome = std::move(out);
      break;
    }
    case TheoremItem::Convexity: {
      const Measure mu = measure(random_nonempty_subset(rng, n));
      const Measure nu = measure(random_nonempty_subset(rng, n));
      file.measures.emplace("mu", mu);
      file.measures.emplace("nu", nu);
      result.outcome = check_convexity(space, f, mu, nu, sopts);
      break;
    }
    case TheoremItem::WeakShadowing: {
      const Measure mu = measure(random_nonempty_subset(rng, n));
      file.measures.emplace("mu", mu);
      result.outcome = check_weak_shadowing(space, f, mu, sopts);
      break;
    }
    case TheoremItem::IsolatedPoint:
      result.outcome = check_isolated_point(space, f, n - 1, sopts);
      break;
  }
  result.system = render_system(file);
  return result;
}

TheoremReport theorem_check(TheoremItem item, const TheoremCheckOptions& options) {
  TheoremReport report;
  report.item = item;
  report.options = options;
  for (std::uint64_t t = 0; t < options.trials; ++t) {
    TrialResult r = theorem_trial(item, options, t);
    ++report.systems_tested;
    report.comparisons += r.outcome.comparisons;
    if (!r.outcome.exhaustive) {
      report.exhaustive = false;
      ++report.skipped;
    }
    if (!r.outcome.passed) {
      report.passed = false;
      report.counterexample = std::move(r);
      break;
    }
  }
  return report;
}

nlohmann::ordered_json to_json(const TheoremReport& report) {
  nlohmann::ordered_json j;
  j["item"] = to_string(report.item);
  j["seed"] = report.options.seed;
  j["trials"] = report.options.trials;
  j["max_points"] = report.options.max_points;
  j["budget"] = report.options.budget;
  j["systems_tested"] = report.systems_tested;
  j["comparisons"] = report.comparisons;
  j["skipped"] = report.skipped;
  j["exhaustive"] = report.exhaustive;
  j["passed"] = report.passed;
  if (report.counterexample) {
    const auto& c = *report.counterexample;
    j["counterexample"] = {{"trial", c.trial}, {"trial_seed", c.trial_seed}, {"n", c.n},
                           {"detail", c.outcome.detail}, {"system", c.system}};
  } else {
    j["counterexample"] = nullptr;
  }
  return j;
}

}  // namespace mustab
