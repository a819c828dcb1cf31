#include "mustab/stability.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mustab {

namespace {

// Functional graph of g: each component is one cycle with in-trees.
struct GraphShape {
  std::vector<std::vector<Point>> cycles;     // cycles[c][i+1] = g(cycles[c][i])
  std::vector<std::size_t> component;         // component index of each point
  std::vector<bool> on_cycle;
  std::vector<std::vector<Point>> tree_kids;  // tree predecessors of each point
  std::vector<Point> tree_order;              // tree nodes, deepest first

  explicit GraphShape(const EndoMap& g) {
    const std::size_t n = g.size();
    component.assign(n, static_cast<std::size_t>(-1));
    on_cycle.assign(n, false);
    tree_kids.assign(n, {});
    std::vector<int> color(n, 0);  // 0 new, 1 on current walk, 2 done
    for (Point s = 0; s < n; ++s) {
      if (color[s]) continue;
      std::vector<Point> walk;
      Point x = s;
      while (color[x] == 0) {
        color[x] = 1;
        walk.push_back(x);
        x = g(x);
      }
      if (color[x] == 1) {
        std::vector<Point> cyc;
        Point y = x;
        do {
          cyc.push_back(y);
          on_cycle[y] = true;
          component[y] = cycles.size();
          y = g(y);
        } while (y != x);
        cycles.push_back(std::move(cyc));
      }
      for (Point w : walk) color[w] = 2;
    }
    std::vector<std::size_t> depth(n, 0);
    std::vector<std::size_t> tree_nodes;
    for (Point x = 0; x < n; ++x) {
      if (on_cycle[x]) continue;
      tree_kids[g(x)].push_back(x);
      tree_nodes.push_back(x);
    }
    // Depth and component by walking to the cycle (memoized via component).
    for (Point x : tree_nodes) {
      std::vector<Point> path;
      Point y = x;
      while (component[y] == static_cast<std::size_t>(-1)) {
        path.push_back(y);
        y = g(y);
      }
      std::size_t d = on_cycle[y] ? 0 : depth[y];
      for (auto it = path.rbegin(); it != path.rend(); ++it) {
        depth[*it] = ++d;
        component[*it] = component[y];
      }
    }
    tree_order.assign(tree_nodes.begin(), tree_nodes.end());
    std::stable_sort(tree_order.begin(), tree_order.end(),
                     [&](Point a, Point b) { return depth[a] > depth[b]; });
  }
};

std::vector<std::size_t> period_under(const EndoMap& f) {
  // Period of each f-periodic point, 0 for non-periodic points.
  const std::size_t n = f.size();
  std::vector<std::size_t> period(n, 0);
  for (Point x = 0; x < n; ++x) {
    Point y = f(x);
    for (std::size_t k = 1; k <= n; ++k, y = f(y)) {
      if (y == x) {
        period[x] = k;
        break;
      }
    }
  }
  return period;
}

}  // namespace

// ---------------------------------------------------------------------------

StabilityTarget StabilityTarget::at_point(Point p, std::string name) {
  StabilityTarget t;
  t.kind = TargetKind::Point;
  t.point = p;
  t.name = name.empty() ? std::to_string(p) : std::move(name);
  return t;
}

StabilityTarget StabilityTarget::of_measure(Measure mu, std::string name) {
  StabilityTarget t;
  t.kind = TargetKind::Measure;
  t.measure = std::move(mu);
  t.name = name.empty() ? "mu" : std::move(name);
  return t;
}

StabilityTarget StabilityTarget::set_valued(Measure mu, std::string name) {
  StabilityTarget t = of_measure(std::move(mu), std::move(name));
  t.kind = TargetKind::SetValued;
  return t;
}

std::string StabilityTarget::describe() const {
  switch (kind) {
    case TargetKind::Point: return "point:" + name;
    case TargetKind::Measure: return "measure:" + name;
    case TargetKind::SetValued: return "setvalued:" + name;
  }
  return name;
}

PointSet SetValuedMap::domain() const {
  PointSet d;
  for (Point x = 0; x < images_.size(); ++x) {
    if (!images_[x].empty()) d.insert(x);
  }
  return d;
}

SetValuedChecks check_setvalued(const FiniteMetricSpace& space, const EndoMap& f, const EndoMap& g,
                                const SetValuedMap& big_h, const Measure& mu, const Rational& eps) {
  const std::size_t n = space.size();
  check_same_size(n, f.size(), "f");
  check_same_size(n, g.size(), "g");
  check_same_size(n, big_h.size(), "H");
  check_same_size(n, mu.size(), "measure");
  SetValuedChecks c;
  c.domain_mass = mu.mass(big_h.domain()) >= 1 - eps;
  c.null_images = c.near_identity = c.commutes = true;
  for (Point x = 0; x < n; ++x) {
    if (c.null_images && mu.mass(big_h(x)) != 0) {
      c.null_images = false;
      c.null_images_witness = x;
    }
    if (c.near_identity && !big_h(x).is_subset_of(space.ball(x, eps))) {
      c.near_identity = false;
      c.near_identity_witness = x;
    }
    if (c.commutes && f.image(big_h(x)) != big_h(g(x))) {
      c.commutes = false;
      c.commutes_witness = x;
    }
  }
  return c;
}

SetValuedMap setvalued_from_partial(const PartialMap& h) {
  SetValuedMap big_h(h.size());
  h.domain().for_each([&](Point y) { big_h.set(y, PointSet::single(h(y))); });
  return big_h;
}

// ---------------------------------------------------------------------------
// WitnessFinder

WitnessFinder::WitnessFinder(const FiniteMetricSpace& space, const EndoMap& f, const StabilityTarget& target,
                             const Rational& eps)
    : f_(f), target_(target), near_(space.balls(eps)) {
  check_same_size(space.size(), f.size(), "f");
  if (target.kind == TargetKind::Point) {
    if (target.point >= space.size()) throw OutOfRange("target point out of range");
    return;
  }
  check_same_size(space.size(), target.measure.size(), "measure");
  const ScaledMeasure scaled(target.measure);
  weight_.resize(space.size());
  for (Point x = 0; x < space.size(); ++x) weight_[x] = scaled.weight(x);
  // μ(X \ Y) <= ε  ⇔  scaled μ(Y) >= D − floor(ε D).
  required_ = scaled.denominator() - scaled.floor_scaled(eps);
  if (target.kind == TargetKind::SetValued) {
    const PointSet support = target.measure.support();
    for (PointSet& b : near_) b = b - support;
  }
}

bool WitnessFinder::exists(const EndoMap& g) const {
  switch (target_.kind) {
    case TargetKind::Point: return point_search(g, false).has_value();
    case TargetKind::Measure: return measure_search(g, false).has_value();
    case TargetKind::SetValued: return setvalued_search(g, false).has_value();
  }
  return false;
}

std::optional<PartialMap> WitnessFinder::find_semiconjugacy(const EndoMap& g) const {
  if (target_.kind == TargetKind::Point) return point_search(g, true);
  if (target_.kind == TargetKind::Measure) return measure_search(g, true);
  throw std::invalid_argument("find_semiconjugacy: set-valued target");
}

std::optional<SetValuedMap> WitnessFinder::find_setvalued(const EndoMap& g) const {
  if (target_.kind != TargetKind::SetValued) throw std::invalid_argument("find_setvalued: not set-valued");
  return setvalued_search(g, true);
}

std::optional<PartialMap> WitnessFinder::point_search(const EndoMap& g, bool build) const {
  const std::size_t n = f_.size();
  // g-orbit of p: tail then cycle; h(g^k p) = f^k(h(p)).
  std::vector<Point> orbit;
  std::vector<std::size_t> pos(n, static_cast<std::size_t>(-1));
  for (Point x = target_.point; pos[x] == static_cast<std::size_t>(-1); x = g(x)) {
    pos[x] = orbit.size();
    orbit.push_back(x);
  }
  const std::size_t entry = pos[g(orbit.back())];

  std::optional<Point> chosen;
  near_[target_.point].for_each([&](Point z) {
    if (chosen) return;
    Point value = z;
    Point at_entry = z;
    for (std::size_t k = 0; k < orbit.size(); ++k) {
      if (!near_[orbit[k]].contains(value)) return;
      if (k == entry) at_entry = value;
      value = f_(value);
    }
    if (value == at_entry) chosen = z;
  });
  if (!chosen) return std::nullopt;
  PartialMap h(build ? n : 0);
  if (build) {
    Point value = *chosen;
    for (Point x : orbit) {
      h.set(x, value);
      value = f_(value);
    }
  }
  return h;
}

std::optional<PartialMap> WitnessFinder::measure_search(const EndoMap& g, bool build) const {
  const std::size_t n = f_.size();
  const GraphShape shape(g);
  constexpr std::int64_t kNone = -1;

  // best[u][w]: largest μ-mass of a forward-closed part of u's in-tree that
  // contains u, given h(u) = w ∈ B[u, ε].
  std::vector<std::vector<std::int64_t>> best(n, std::vector<std::int64_t>(n, kNone));
  auto child_best = [&](Point v, Point parent_value) {
    std::int64_t top = kNone;
    near_[v].for_each([&](Point w) {
      if (f_(w) == parent_value) top = std::max(top, best[v][w]);
    });
    return top;
  };
  for (Point u : shape.tree_order) {
    near_[u].for_each([&](Point w) {
      std::int64_t value = weight_[u];
      for (Point v : shape.tree_kids[u]) value += std::max<std::int64_t>(0, child_best(v, w));
      best[u][w] = value;
    });
  }

  std::int64_t included = 0;
  std::vector<std::optional<Point>> cycle_choice(shape.cycles.size());
  for (std::size_t c = 0; c < shape.cycles.size(); ++c) {
    const auto& cyc = shape.cycles[c];
    std::int64_t comp_best = kNone;
    near_[cyc[0]].for_each([&](Point z) {
      Point value = z;
      std::int64_t total = 0;
      for (Point node : cyc) {
        if (!near_[node].contains(value)) return;
        total += weight_[node];
        for (Point v : shape.tree_kids[node]) total += std::max<std::int64_t>(0, child_best(v, value));
        value = f_(value);
      }
      if (value != z) return;
      if (total > comp_best) {
        comp_best = total;
        cycle_choice[c] = z;
      }
    });
    included += std::max<std::int64_t>(0, comp_best);
  }
  if (included < required_) return std::nullopt;

  PartialMap h(build ? n : 0);
  if (!build) return h;
  // Top-down reconstruction: include every feasible part, preferring the
  // least-index value attaining the optimum.
  std::vector<Point> stack;
  auto descend = [&](Point parent, Point parent_value) {
    for (Point v : shape.tree_kids[parent]) {
      std::int64_t top = child_best(v, parent_value);
      if (top == kNone) continue;
      std::optional<Point> pick;
      near_[v].for_each([&](Point w) {
        if (!pick && f_(w) == parent_value && best[v][w] == top) pick = w;
      });
      h.set(v, *pick);
      stack.push_back(v);
    }
  };
  for (std::size_t c = 0; c < shape.cycles.size(); ++c) {
    if (!cycle_choice[c]) continue;
    Point value = *cycle_choice[c];
    for (Point node : shape.cycles[c]) {
      h.set(node, value);
      descend(node, value);
      value = f_(value);
    }
  }
  while (!stack.empty()) {
    const Point u = stack.back();
    stack.pop_back();
    descend(u, h(u));
  }
  return h;
}

std::optional<SetValuedMap> WitnessFinder::setvalued_search(const EndoMap& g, bool build) const {
  const std::size_t n = f_.size();
  const GraphShape shape(g);
  const std::vector<std::size_t> f_period = period_under(f_);

  // good[u]: values that may appear in H(u) for a tree node u, so that all
  // of u's in-tree can still be filled (near_ already excludes the support).
  std::vector<PointSet> good(n);
  for (Point u : shape.tree_order) {
    PointSet allowed = near_[u];
    for (Point v : shape.tree_kids[u]) allowed &= f_.image(good[v]);
    good[u] = allowed;
  }

  std::int64_t dom_mass = 0;
  std::vector<std::optional<Point>> seed(shape.cycles.size());
  for (std::size_t c = 0; c < shape.cycles.size(); ++c) {
    const auto& cyc = shape.cycles[c];
    const std::size_t len = cyc.size();
    std::vector<PointSet> allowed(len);
    for (std::size_t i = 0; i < len; ++i) {
      allowed[i] = near_[cyc[i]];
      for (Point v : shape.tree_kids[cyc[i]]) allowed[i] &= f_.image(good[v]);
    }
    // H on the cycle is f^i(S) for an f^L-invariant S; one f-periodic seed z
    // whose orbit respects every position suffices.
    allowed[0].for_each([&](Point z) {
      if (seed[c] || f_period[z] == 0) return;
      const std::size_t horizon = std::lcm(f_period[z], len);
      Point value = z;
      for (std::size_t m = 0; m < horizon; ++m) {
        if (!allowed[m % len].contains(value)) return;
        value = f_(value);
      }
      seed[c] = z;
    });
    if (seed[c]) {
      for (Point x = 0; x < n; ++x) {
        if (shape.component[x] == c) dom_mass += weight_[x];
      }
    }
  }
  if (dom_mass < required_) return std::nullopt;

  SetValuedMap big_h(build ? n : 0);
  if (!build) return big_h;
  std::vector<Point> stack;
  for (std::size_t c = 0; c < shape.cycles.size(); ++c) {
    if (!seed[c]) continue;
    const auto& cyc = shape.cycles[c];
    PointSet s;
    Point value = *seed[c];
    do {
      s.insert(value);
      value = f_.iterate(value, cyc.size());
    } while (value != *seed[c]);
    for (Point node : cyc) {
      big_h.set(node, s);
      s = f_.image(s);
    }
    for (Point node : cyc) {
      for (Point v : shape.tree_kids[node]) stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    const Point u = stack.back();
    stack.pop_back();
    PointSet image;
    big_h(g(u)).for_each([&](Point q) {
      PointSet pre;
      good[u].for_each([&](Point r) {
        if (f_(r) == q) pre.insert(r);
      });
      if (pre.empty()) throw std::logic_error("set-valued reconstruction lost a preimage");
      image.insert(pre.first());
    });
    big_h.set(u, image);
    for (Point v : shape.tree_kids[u]) stack.push_back(v);
  }
  return big_h;
}

// ---------------------------------------------------------------------------

StabilityResult stability_delta(const FiniteMetricSpace& space, const EndoMap& f,
                                const StabilityTarget& target, const Rational& eps,
                                const StabilityOptions& options) {
  const WitnessFinder finder(space, f, target, eps);
  const ThresholdGrid grid = delta_grid(space);
  StabilityResult result;
  std::optional<Rational> checked;  // every g within this distance already passed

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Rational& delta = grid[i];
    const PerturbationBall ball(space, f, delta);
    std::optional<EndoMap> failure;
    if (ball.count() <= options.budget) {
      ball.for_each([&](const EndoMap& g) {
        if (checked && c0_distance(space, f, g) <= *checked) return true;
        if (finder.exists(g)) return true;
        failure = g;
        return false;
      });
    } else {
      if (!options.allow_sampling) throw BudgetExceeded(ball.count());
      result.exhaustive = false;
      std::mt19937_64 rng(options.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
      for (std::uint64_t s = 0; s < options.budget && !failure; ++s) {
        EndoMap g = ball.sample(rng);
        if (!finder.exists(g)) failure = std::move(g);
      }
    }
    if (failure) {
      result.failed_delta = delta;
      result.counterexample = std::move(failure);
      break;
    }
    result.delta = delta;
    checked = delta;
  }
  return result;
}

StabilityProfile stability_profile(const FiniteMetricSpace& space, const EndoMap& f,
                                   const StabilityTarget& target, const ThresholdGrid& grid,
                                   const StabilityOptions& options) {
  StabilityProfile profile{target.describe(), {}};
  for (const Rational& eps : grid.values()) {
    const StabilityResult r = stability_delta(space, f, target, eps, options);
    if (!profile.rows.empty()) {
      const ProfileRow& prev_row = profile.rows.back();
      const auto& prev = prev_row.delta;
      if (prev_row.exhaustive && r.exhaustive && prev && (!r.delta || *r.delta < *prev)) {
        throw std::logic_error("stability profile not monotone at eps = " + format_rational(eps));
      }
    }
    profile.rows.push_back({eps, r.delta, r.exhaustive});
  }
  return profile;
}

}  // namespace mustab
