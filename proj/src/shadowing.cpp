#include "mustab/shadowing.hpp"

#include <deque>
#include <unordered_set>

namespace mustab {

namespace {

std::uint64_t state_key(Point last, PointSet tube) {
  // n <= 58 for exact tube analysis in practice; mix instead of packing.
  std::uint64_t h = tube.bits() * 0x9E3779B97F4A7C15ULL;
  return h ^ (static_cast<std::uint64_t>(last) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2));
}

struct TubeStateHash {
  std::size_t operator()(const TubeState& s) const { return state_key(s.last, s.tube); }
};

// Orbit of every point presented as tail + cycle, giving f^k(x) in O(1).
class OrbitTable {
 public:
  explicit OrbitTable(const EndoMap& f) : seq_(f.size()), tail_(f.size()), cycle_(f.size()) {
    const std::size_t n = f.size();
    std::vector<std::size_t> pos(n);
    std::vector<bool> on(n);
    for (Point x = 0; x < n; ++x) {
      std::fill(on.begin(), on.end(), false);
      Point y = x;
      while (!on[y]) {
        on[y] = true;
        pos[y] = seq_[x].size();
        seq_[x].push_back(y);
        y = f(y);
      }
      tail_[x] = pos[y];
      cycle_[x] = seq_[x].size() - pos[y];
    }
  }

  Point at(Point x, std::uint64_t k) const {
    if (k < tail_[x]) return seq_[x][k];
    return seq_[x][tail_[x] + (k - tail_[x]) % cycle_[x]];
  }

 private:
  std::vector<std::vector<Point>> seq_;
  std::vector<std::size_t> tail_;
  std::vector<std::size_t> cycle_;
};

}  // namespace

const char* to_string(ShadowingMode mode) {
  switch (mode) {
    case ShadowingMode::All: return "all";
    case ShadowingMode::Mu: return "mu";
    case ShadowingMode::Weak: return "weak";
  }
  return "?";
}

std::optional<ShadowingMode> parse_shadowing_mode(std::string_view text) {
  if (text == "all") return ShadowingMode::All;
  if (text == "mu") return ShadowingMode::Mu;
  if (text == "weak") return ShadowingMode::Weak;
  return std::nullopt;
}

const char* to_string(LassoVerdict verdict) {
  switch (verdict) {
    case LassoVerdict::Refuted: return "refuted";
    case LassoVerdict::Shadowed: return "shadowed";
    case LassoVerdict::NoRefutationFound: return "no refutation found";
  }
  return "?";
}

PseudoOrbitGraph::PseudoOrbitGraph(const FiniteMetricSpace& space, const EndoMap& f, const Rational& delta) {
  check_same_size(space.size(), f.size(), "f");
  succ_.resize(space.size());
  for (Point x = 0; x < space.size(); ++x) succ_[x] = space.ball(f(x), delta);
}

PointSet tube_step(const EndoMap& f, const std::vector<PointSet>& eps_balls, PointSet tube, Point next) {
  return f.image(tube) & eps_balls[next];
}

PointSet shadowable_start_set(const FiniteMetricSpace& space, const EndoMap& f, const Rational& eps,
                              const Rational& delta) {
  const std::size_t n = space.size();
  const PseudoOrbitGraph graph(space, f, delta);
  const std::vector<PointSet> eps_balls = space.balls(eps);

  // States from which no empty tube is reachable, learned from completed searches.
  std::unordered_set<TubeState, TubeStateHash> known_good;
  PointSet result;
  for (Point x0 = 0; x0 < n; ++x0) {
    const TubeState start{x0, eps_balls[x0]};
    std::unordered_set<TubeState, TubeStateHash> visited{start};
    std::deque<TubeState> queue{start};
    bool failed = false;
    while (!queue.empty() && !failed) {
      const TubeState s = queue.front();
      queue.pop_front();
      if (known_good.contains(s)) continue;
      const PointSet image = f.image(s.tube);
      graph.successors(s.last).for_each([&](Point w) {
        if (failed) return;
        const TubeState next{w, image & eps_balls[w]};
        if (next.tube.empty()) {
          failed = true;
          return;
        }
        if (visited.insert(next).second) queue.push_back(next);
      });
    }
    if (!failed) {
      result.insert(x0);
      known_good.insert(visited.begin(), visited.end());
    }
  }
  return result;
}

bool shadowing_condition(ShadowingMode mode, PointSet shadowable, std::size_t n, const Measure* mu,
                         const Rational& eps) {
  switch (mode) {
    case ShadowingMode::All:
      return shadowable == PointSet::all(n);
    case ShadowingMode::Mu:
      if (!mu) throw MissingMeasure();
      return mu->support().is_subset_of(shadowable);
    case ShadowingMode::Weak:
      if (!mu) throw MissingMeasure();
      return mu->mass(shadowable) >= 1 - eps;
  }
  return false;
}

Rational shadowing_delta(const FiniteMetricSpace& space, const EndoMap& f, const Rational& eps,
                         ShadowingMode mode, const Measure* mu) {
  if (mode != ShadowingMode::All) {
    if (!mu) throw MissingMeasure();
    check_same_size(space.size(), mu->size(), "measure");
  }
  const ThresholdGrid grid = delta_grid(space);
  // Antitone in δ: scan upward and stop at the first failure.
  Rational best = grid[0];
  for (const Rational& delta : grid.values()) {
    const PointSet s = shadowable_start_set(space, f, eps, delta);
    if (!shadowing_condition(mode, s, space.size(), mu, eps)) break;
    best = delta;
  }
  return best;
}

std::uint64_t lasso_exact_bound(std::size_t n) {
  if (n >= 58) return UINT64_MAX;
  return static_cast<std::uint64_t>(n) << n;
}

LassoVerdict lasso_oracle(const FiniteMetricSpace& space, const EndoMap& f, const Rational& eps,
                          const Rational& delta, Point x0, std::uint64_t bound) {
  const std::size_t n = space.size();
  check_same_size(n, f.size(), "f");
  const OrbitTable orbit(f);
  const PseudoOrbitGraph graph(space, f, delta);

  // Shadow candidates for a prefix w_0..w_k: initial points x with
  // d(f^j x, w_j) <= ε for all j <= k, maintained by direct scan.
  auto close = [&](Point x, std::uint64_t depth, Point w) {
    return space.distance(orbit.at(x, depth), w) <= eps;
  };

  struct Node {
    std::uint64_t depth;  // index of the last prefix element
    Point last;
    PointSet candidates;
  };
  struct NodeHash {
    std::size_t operator()(const Node& s) const {
      return state_key(s.last, s.candidates) ^ (s.depth * 0xBF58476D1CE4E5B9ULL);
    }
  };
  struct NodeEq {
    bool operator()(const Node& a, const Node& b) const {
      return a.depth == b.depth && a.last == b.last && a.candidates == b.candidates;
    }
  };

  PointSet initial;
  for (Point x = 0; x < n; ++x) {
    if (close(x, 0, x0)) initial.insert(x);
  }
  if (initial.empty()) return LassoVerdict::Refuted;
  if (bound == 0) return LassoVerdict::NoRefutationFound;

  std::unordered_set<Node, NodeHash, NodeEq> seen;
  std::vector<Node> stack{{0, x0, initial}};
  seen.insert(stack.back());
  while (!stack.empty()) {
    const Node node = stack.back();
    stack.pop_back();
    if (node.depth + 1 >= bound) continue;  // prefix already has `bound` points
    const std::uint64_t depth = node.depth + 1;
    bool refuted = false;
    graph.successors(node.last).for_each([&](Point w) {
      if (refuted) return;
      PointSet next;
      node.candidates.for_each([&](Point x) {
        if (close(x, depth, w)) next.insert(x);
      });
      if (next.empty()) {
        refuted = true;
        return;
      }
      Node child{depth, w, next};
      if (seen.insert(child).second) stack.push_back(child);
    });
    if (refuted) return LassoVerdict::Refuted;
  }
  return bound >= lasso_exact_bound(n) ? LassoVerdict::Shadowed : LassoVerdict::NoRefutationFound;
}

}  // namespace mustab
