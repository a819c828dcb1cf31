#include "mustab/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mustab/conjugacy.hpp"
#include "mustab/expansivity.hpp"
#include "mustab/generator.hpp"
#include "mustab/shadowing.hpp"
#include "mustab/stability.hpp"
#include "mustab/system_file.hpp"
#include "mustab/theorem_check.hpp"

namespace mustab {

namespace {

using Json = nlohmann::ordered_json;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string show(const std::optional<Rational>& d) { return d ? format_rational(*d) : "none"; }

Rational rational_arg(const std::string& text, const char* flag) {
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument&) {
    throw UsageError(std::string(flag) + ": not a rational: " + text);
  }
}

Point point_arg(const FiniteMetricSpace& space, const std::string& text) {
  if (auto p = space.index_of(text)) return *p;
  throw UsageError("unknown point \"" + text + "\"");
}

std::string set_labels(const FiniteMetricSpace& space, PointSet s) {
  std::string out = "{";
  bool first = true;
  s.for_each([&](Point p) {
    if (!first) out += ", ";
    out += space.label(p);
    first = false;
  });
  return out + "}";
}

Json set_json(const FiniteMetricSpace& space, PointSet s) {
  auto j = Json::array();
  s.for_each([&](Point p) { j.push_back(space.label(p)); });
  return j;
}

struct Context {
  std::ostream& out;
  bool json = false;

  void emit(const Json& j, const std::string& text) const {
    if (json) {
      out << j.dump(2) << "\n";
    } else {
      out << text;
    }
  }
};

int cmd_validate(const Context& ctx, const std::string& path) {
  try {
    const SystemFile sys = load_system(path);
    Json j;
    j["valid"] = true;
    j["points"] = sys.space.size();
    auto maps = Json::array();
    for (const auto& [name, _] : sys.maps) maps.push_back(name);
    auto measures = Json::array();
    for (const auto& [name, _] : sys.measures) measures.push_back(name);
    j["maps"] = maps;
    j["measures"] = measures;
    std::ostringstream text;
    text << "valid: " << sys.space.size() << " points, " << sys.maps.size() << " maps, " << sys.measures.size()
         << " measures\n";
    ctx.emit(j, text.str());
    return kExitPass;
  } catch (const MetricError& e) {
    ctx.emit(Json{{"valid", false}, {"error", e.what()}}, std::string("invalid: ") + e.what() + "\n");
    return kExitInputError;
  }
}

int cmd_analyze(const Context& ctx, const SystemFile& sys, const std::string& map_name,
                const std::string& measure_name, const std::string& e_text, const std::string& big_delta_text) {
  const auto& space = sys.space;
  const EndoMap& f = sys.map(map_name);
  check_same_size(space.size(), f.size(), "map");
  std::vector<Measure> ms;
  if (!measure_name.empty()) ms.push_back(sys.measure(measure_name));
  const ThresholdGrid grid = epsilon_grid(space, ms);

  Json j;
  std::ostringstream text;
  const SeparationMatrix sep(space, f);
  std::optional<Rational> threshold;
  if (space.size() >= 2) threshold = expansivity_threshold(space, f);
  j["expansivity_threshold"] = threshold ? Json(format_rational(*threshold)) : Json(nullptr);
  text << "expansivity threshold s* = " << (threshold ? format_rational(*threshold) : "n/a (one point)") << "\n";

  auto rows = Json::array();
  text << "separation matrix:\n";
  for (Point x = 0; x < space.size(); ++x) {
    auto row = Json::array();
    text << "  " << space.label(x) << ":";
    for (Point y = 0; y < space.size(); ++y) {
      row.push_back(format_rational(sep(x, y)));
      text << " " << format_rational(sep(x, y));
    }
    rows.push_back(row);
    text << "\n";
  }
  j["separation"] = rows;

  std::optional<Rational> e = e_text.empty() ? default_expansivity_constant(space, f, grid)
                                             : std::optional<Rational>(rational_arg(e_text, "--e"));
  j["e"] = e ? Json(format_rational(*e)) : Json(nullptr);
  text << "expansivity constant e = " << show(e) << "\n";
  if (e && space.size() >= 2) {
    const Rational big_delta = big_delta_text.empty() ? space.min_positive_distance()
                                                       : rational_arg(big_delta_text, "--big-delta");
    const auto steps = uniform_expansivity_steps(space, f, *e, big_delta);
    j["uniform_steps"] = {{"big_delta", format_rational(big_delta)},
                          {"steps", steps ? Json(*steps) : Json(nullptr)}};
    text << "uniform steps N(e, " << format_rational(big_delta) << ") = "
         << (steps ? std::to_string(*steps) : "none") << "\n";
  }
  if (e && !ms.empty()) {
    const auto mx = is_mu_expansive(space, f, *e, ms.front());
    j["mu_expansive"] = {{"holds", mx.holds},
                         {"witness", mx.witness ? Json(space.label(*mx.witness)) : Json(nullptr)}};
    text << measure_name << "-expansive: " << (mx.holds ? "yes" : "no");
    if (mx.witness) text << " (dynamical ball of " << space.label(*mx.witness) << " has positive mass)";
    text << "\n";
  }
  ctx.emit(j, text.str());
  return kExitPass;
}

int cmd_shadowing(const Context& ctx, const SystemFile& sys, const std::string& map_name,
                  const std::string& mode_text, const std::string& measure_name, const std::string& eps_text) {
  const auto& space = sys.space;
  const EndoMap& f = sys.map(map_name);
  check_same_size(space.size(), f.size(), "map");
  const auto mode = parse_shadowing_mode(mode_text);
  if (!mode) throw UsageError("--mode must be all, mu or weak");
  std::optional<Measure> mu;
  if (!measure_name.empty()) mu = sys.measure(measure_name);
  if (*mode != ShadowingMode::All && !mu) throw MissingMeasure();

  std::vector<Rational> eps_values;
  if (!eps_text.empty()) {
    eps_values.push_back(rational_arg(eps_text, "--eps"));
  } else {
    std::vector<Measure> ms;
    if (mu) ms.push_back(*mu);
    eps_values = epsilon_grid(space, ms).values();
  }

  Json j;
  j["mode"] = to_string(*mode);
  j["measure"] = measure_name.empty() ? Json(nullptr) : Json(measure_name);
  auto rows = Json::array();
  std::ostringstream text;
  text << "shadowing profile (mode " << to_string(*mode) << ")\n";
  for (const Rational& eps : eps_values) {
    const Rational delta = shadowing_delta(space, f, eps, *mode, mu ? &*mu : nullptr);
    const PointSet s = shadowable_start_set(space, f, eps, delta);
    rows.push_back({{"eps", format_rational(eps)}, {"delta", format_rational(delta)},
                    {"shadowable", set_json(space, s)}});
    text << "  eps " << format_rational(eps) << "  delta* " << format_rational(delta) << "  S "
         << set_labels(space, s) << "\n";
  }
  j["rows"] = rows;
  ctx.emit(j, text.str());
  return kExitPass;
}

StabilityTarget target_arg(const SystemFile& sys, const std::string& mode) {
  const auto colon = mode.find(':');
  if (colon == std::string::npos) throw UsageError("--mode must be point:p, measure:mu or setvalued:mu");
  const std::string kind = mode.substr(0, colon);
  const std::string name = mode.substr(colon + 1);
  if (kind == "point") return StabilityTarget::at_point(point_arg(sys.space, name), name);
  if (kind == "measure") return StabilityTarget::of_measure(sys.measure(name), name);
  if (kind == "setvalued") return StabilityTarget::set_valued(sys.measure(name), name);
  throw UsageError("--mode must be point:p, measure:mu or setvalued:mu");
}

int cmd_stability(const Context& ctx, const SystemFile& sys, const std::string& map_name,
                  const std::string& mode, const std::string& eps_text, const StabilityOptions& opts) {
  const auto& space = sys.space;
  const EndoMap& f = sys.map(map_name);
  check_same_size(space.size(), f.size(), "map");
  const StabilityTarget target = target_arg(sys, mode);
  const Measure grid_measure =
      target.kind == TargetKind::Point ? Measure::dirac(space.size(), target.point) : target.measure;
  const Measure ms[] = {grid_measure};
  const ThresholdGrid grid = eps_text.empty() ? epsilon_grid(space, ms)
                                              : ThresholdGrid({rational_arg(eps_text, "--eps")});
  const StabilityProfile profile = stability_profile(space, f, target, grid, opts);

  Json j;
  j["target"] = profile.target;
  j["map"] = map_name;
  bool exhaustive = true;
  auto rows = Json::array();
  std::ostringstream text;
  text << "stability profile for " << profile.target << " (none = no witness even for g = f)\n";
  for (const auto& r : profile.rows) {
    exhaustive = exhaustive && r.exhaustive;
    rows.push_back({{"eps", format_rational(r.eps)}, {"delta", r.delta ? Json(format_rational(*r.delta)) : Json(nullptr)},
                    {"exhaustive", r.exhaustive}});
    text << "  eps " << format_rational(r.eps) << "  delta* " << show(r.delta) << (r.exhaustive ? "" : "  (sampled)")
         << "\n";
  }
  j["rows"] = rows;
  j["exhaustive"] = exhaustive;
  ctx.emit(j, text.str());
  return kExitPass;
}

int cmd_semiconjugacy(const Context& ctx, const SystemFile& sys, const std::string& map_name,
                      const std::string& pert_name, const std::string& measure_name, const std::string& eps_text,
                      const std::string& e_text) {
  const auto& space = sys.space;
  const EndoMap& f = sys.map(map_name);
  const EndoMap& g = sys.map(pert_name);
  const Measure& mu = sys.measure(measure_name);
  std::optional<Rational> e;
  if (!e_text.empty()) e = rational_arg(e_text, "--e");
  const auto cert = build_semiconjugacy(space, f, g, mu, rational_arg(eps_text, "--eps"), e);

  Json j;
  j["passed"] = cert.passed();
  j["e"] = show(cert.expansivity_constant);
  j["inner_eps"] = show(cert.inner_eps);
  j["delta"] = show(cert.delta);
  j["base"] = cert.base ? set_json(space, *cert.base) : Json(nullptr);
  j["domain"] = set_json(space, cert.domain);
  j["excluded_mass"] = show(cert.excluded_mass);
  Json h = Json::object();
  cert.domain.for_each([&](Point y) { h[space.label(y)] = space.label(cert.h(y)); });
  j["h"] = h;
  auto checks = Json::array();
  std::ostringstream text;
  text << "semiconjugacy " << (cert.passed() ? "verified" : "REJECTED") << "\n"
       << "  e " << show(cert.expansivity_constant) << ", inner eps " << show(cert.inner_eps) << ", delta "
       << show(cert.delta) << "\n"
       << "  B " << (cert.base ? set_labels(space, *cert.base) : "-") << ", Y " << set_labels(space, cert.domain)
       << ", mass outside Y " << show(cert.excluded_mass) << "\n";
  cert.domain.for_each([&](Point y) { text << "  h(" << space.label(y) << ") = " << space.label(cert.h(y)) << "\n"; });
  for (const auto& c : cert.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed},
                      {"witness", c.witness ? Json(space.label(*c.witness)) : Json(nullptr)}});
    text << "  [" << (c.passed ? "ok" : "FAIL") << "] " << c.name;
    if (c.witness) text << " (at " << space.label(*c.witness) << ")";
    text << "\n";
  }
  j["checks"] = checks;
  ctx.emit(j, text.str());
  return cert.passed() ? kExitPass : kExitCounterexample;
}

int cmd_check_theorem(const Context& ctx, const std::string& item_text, const TheoremCheckOptions& opts) {
  const auto item = parse_theorem_item(item_text);
  if (!item) throw UsageError("--item must be one of 1, 2, 4, 5, 7, basicas");
  const TheoremReport report = theorem_check(*item, opts);
  const Json j = to_json(report);
  std::ostringstream text;
  text << "item " << to_string(*item) << ": " << (report.passed ? "pass" : "COUNTEREXAMPLE") << " on "
       << report.systems_tested << " systems, " << report.comparisons << " comparisons";
  if (report.skipped) text << ", " << report.skipped << " systems hit the budget";
  text << "\n";
  if (report.counterexample) {
    text << "  trial " << report.counterexample->trial << " (seed " << report.counterexample->trial_seed
         << "): " << report.counterexample->outcome.detail.dump() << "\n";
  }
  ctx.emit(j, text.str());
  if (!report.passed) return kExitCounterexample;
  return report.exhaustive ? kExitPass : kExitBudget;
}

int cmd_gen(const Context& ctx, const GeneratorSpec& spec, const std::string& out_path) {
  const std::string text = render_system_text(generate_system(spec));
  if (out_path.empty()) {
    ctx.out << text;
  } else {
    std::ofstream file(out_path);
    if (!file) throw UsageError("cannot write " + out_path);
    file << text;
  }
  return kExitPass;
}

}  // namespace

std::uint64_t default_budget() {
  const char* env = std::getenv("MUSTAB_BUDGET");
  if (!env || !*env) return 1'000'000;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(env, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || env[used] != '\0' || env[0] == '-') {
    throw std::invalid_argument(std::string("MUSTAB_BUDGET is not an integer: ") + env);
  }
  return v;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Topological stability of finite dynamical systems", "mustab"};
  app.require_subcommand(1, 1);
  Context ctx{out};
  app.add_flag("--json", ctx.json, "Emit JSON reports");

  std::string file, map_name = "f", measure_name, mode, eps_text, e_text, big_delta_text, pert_name, out_path;
  std::string item_text;
  std::uint64_t budget = 0;
  bool sample = false;
  std::uint64_t seed = 0;
  TheoremCheckOptions topts;
  GeneratorSpec gspec;
  std::string model_text = "l1-lattice";

  auto add_json = [&](CLI::App* sub) { sub->add_flag("--json", ctx.json, "Emit JSON reports"); };

  auto* validate = app.add_subcommand("validate", "Check a system file");
  validate->add_option("file", file, "System JSON file")->required();
  add_json(validate);

  auto* analyze = app.add_subcommand("analyze", "Expansivity threshold and separation matrix");
  analyze->add_option("file", file, "System JSON file")->required();
  analyze->add_option("--map", map_name, "Map name");
  analyze->add_option("--measure", measure_name, "Measure for the grid and mu-expansivity");
  analyze->add_option("--e", e_text, "Expansivity constant (default: top grid value below s*)");
  analyze->add_option("--big-delta", big_delta_text, "Distance bound for uniform expansivity (default d_min)");
  add_json(analyze);

  auto* shadow = app.add_subcommand("shadowing-profile", "Largest shadowing delta per grid eps");
  shadow->add_option("file", file, "System JSON file")->required();
  shadow->add_option("--map", map_name, "Map name");
  shadow->add_option("--mode", mode, "all, mu or weak")->default_str("all");
  shadow->add_option("--measure", measure_name, "Measure for modes mu and weak");
  shadow->add_option("--eps", eps_text, "Single eps instead of the grid");
  add_json(shadow);

  auto* stab = app.add_subcommand("stability-profile", "Largest stable delta per grid eps");
  stab->add_option("file", file, "System JSON file")->required();
  stab->add_option("--map", map_name, "Map name");
  stab->add_option("--mode", mode, "point:p, measure:mu or setvalued:mu")->required();
  stab->add_option("--eps", eps_text, "Single eps instead of the grid");
  auto* stab_budget = stab->add_option("--budget", budget, "Maximum perturbations per ball");
  stab->add_flag("--sample", sample, "Sample oversized balls instead of failing");
  stab->add_option("--seed", seed, "Sampling seed");
  add_json(stab);

  auto* semi = app.add_subcommand("semiconjugacy", "Build and verify h with f h = h g");
  semi->add_option("file", file, "System JSON file")->required();
  semi->add_option("--map", map_name, "Map name");
  semi->add_option("--perturbation", pert_name, "Name of the perturbed map g")->required();
  semi->add_option("--measure", measure_name, "Measure")->required();
  semi->add_option("--eps", eps_text, "Target eps")->required();
  semi->add_option("--e", e_text, "Expansivity constant");
  add_json(semi);

  auto* theorem = app.add_subcommand("check-theorem", "Seeded property suite for one result");
  theorem->add_option("--item", item_text, "1, 2, 4, 5, 7 or basicas")->required();
  theorem->add_option("--trials", topts.trials, "Number of systems");
  theorem->add_option("--seed", topts.seed, "Suite seed");
  theorem->add_option("--max-points", topts.max_points, "Largest system size")->check(CLI::Range(1, 8));
  auto* theorem_budget = theorem->add_option("--budget", budget, "Maximum perturbations per ball");
  add_json(theorem);

  auto* gen = app.add_subcommand("gen", "Generate a seeded random system");
  gen->add_option("--n", gspec.n, "Number of points")->required()->check(CLI::Range(1, 64));
  gen->add_option("--seed", gspec.seed, "Generator seed");
  gen->add_option("--model", model_text, "l1-lattice or explicit");
  gen->add_option("--range", gspec.range, "Coordinate or weight range");
  gen->add_option("--scale", gspec.scale, "Distance divisor")->check(CLI::PositiveNumber);
  gen->add_option("--out", out_path, "Output path (default stdout)");
  add_json(gen);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitInputError;
  }

  try {
    if (stab_budget->count() == 0 && theorem_budget->count() == 0) budget = default_budget();
    if (validate->parsed()) return cmd_validate(ctx, file);
    if (gen->parsed()) {
      const auto model = parse_generator_model(model_text);
      if (!model) throw UsageError("--model must be l1-lattice or explicit");
      gspec.model = *model;
      return cmd_gen(ctx, gspec, out_path);
    }
    if (theorem->parsed()) {
      topts.budget = budget;
      return cmd_check_theorem(ctx, item_text, topts);
    }
    const SystemFile sys = load_system(file);
    if (analyze->parsed()) return cmd_analyze(ctx, sys, map_name, measure_name, e_text, big_delta_text);
    if (shadow->parsed()) return cmd_shadowing(ctx, sys, map_name, mode.empty() ? "all" : mode, measure_name, eps_text);
    if (stab->parsed()) return cmd_stability(ctx, sys, map_name, mode, eps_text, {budget, sample, seed});
    if (semi->parsed()) return cmd_semiconjugacy(ctx, sys, map_name, pert_name, measure_name, eps_text, e_text);
  } catch (const BudgetExceeded& e) {
    err << e.what() << "\n";
    return kExitBudget;
  } catch (const UsageError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitInputError;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << e.what() << "\n";
    return kExitInputError;
  } catch (const std::logic_error& e) {
    err << "internal check failed: " << e.what() << "\n";
    return kExitCounterexample;
  }
  err << app.help();
  return kExitInputError;
}

}  // namespace mustab
