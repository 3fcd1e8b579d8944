#include "fuzzcalc/io.hpp"

#include <cmath>
#include <set>

namespace fuzzcalc::io {

namespace {

void only_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw InputError(std::string(what) + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!keys.count(k)) throw InputError(std::string("unknown key '") + k + "' in " + what);
  }
}

double number(const json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw InputError(std::string(what) + " is missing '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw InputError(std::string("'") + key + "' in " + what + " must be a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const char* what) {
  return j.contains(key) ? number(j, key, what) : fallback;
}

std::string text(const json& j, const char* key, const char* what) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw InputError(std::string(what) + " needs a string '" + key + "'");
  return j.at(key).get<std::string>();
}

int integer(const json& v, const char* what) {
  if (!v.is_number_integer() && !(v.is_number_float() && std::trunc(v.get<double>()) == v.get<double>()))
    throw InputError(std::string(what) + " must be an integer");
  return v.get<int>();
}

Eigen::ArrayXd array_of(const json& v, const char* what) {
  if (!v.is_array()) throw InputError(std::string(what) + " must be an array of numbers");
  Eigen::ArrayXd a(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw InputError(std::string(what) + " must be an array of numbers");
    a(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return a;
}

json array_json(const Eigen::ArrayXd& a) {
  json out = json::array();
  for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(a(i));
  return out;
}

json tag_json(const FuzzyNumber::Tag& tag) {
  return std::visit(
      [](const auto& t) -> json {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Triangular<double>>)
          return {{"kind", "triangular"}, {"left", t.left}, {"peak", t.peak}, {"right", t.right}};
        else if constexpr (std::is_same_v<T, Trapezoidal<double>>)
          return {{"kind", "trapezoidal"}, {"a", t.a}, {"b", t.b}, {"c", t.c}, {"d", t.d}};
        else if constexpr (std::is_same_v<T, Gaussian<double>>)
          return {{"kind", "gaussian"}, {"mu", t.mu}, {"sigma", t.sigma}, {"alpha_min", t.alpha_min}};
        else if constexpr (std::is_same_v<T, LeftRight<double>>)
          return {{"kind", "lr"},
                  {"lower_core", t.lower_core},
                  {"upper_core", t.upper_core},
                  {"left_spread", t.left_spread},
                  {"right_spread", t.right_spread}};
        else
          return {{"kind", "generic"}};
      },
      tag);
}

FuzzyNumber::Tag tag_from_json(const json& j) {
  const std::string kind = text(j, "kind", "tag");
  if (kind == "triangular") {
    only_keys(j, {"kind", "left", "peak", "right"}, "triangular tag");
    return Triangular<double>{number(j, "left", "tag"), number(j, "peak", "tag"), number(j, "right", "tag")};
  }
  if (kind == "trapezoidal") {
    only_keys(j, {"kind", "a", "b", "c", "d"}, "trapezoidal tag");
    return Trapezoidal<double>{number(j, "a", "tag"), number(j, "b", "tag"), number(j, "c", "tag"),
                               number(j, "d", "tag")};
  }
  if (kind == "gaussian") {
    only_keys(j, {"kind", "mu", "sigma", "alpha_min"}, "gaussian tag");
    return Gaussian<double>{number(j, "mu", "tag"), number(j, "sigma", "tag"),
                            number_or(j, "alpha_min", kDefaultGaussianAlphaMin, "tag")};
  }
  if (kind == "lr") {
    only_keys(j, {"kind", "lower_core", "upper_core", "left_spread", "right_spread"}, "lr tag");
    return LeftRight<double>{number(j, "lower_core", "tag"), number(j, "upper_core", "tag"),
                             number(j, "left_spread", "tag"), number(j, "right_spread", "tag")};
  }
  if (kind == "generic") {
    only_keys(j, {"kind"}, "generic tag");
    return Generic{};
  }
  throw InputError("unknown tag kind '" + kind + "'");
}

}  // namespace

json to_json(const AlphaGrid& g) { return array_json(g.levels()); }

AlphaGrid grid_from_json(const json& j) {
  try {
    if (j.is_number()) return AlphaGrid::uniform(integer(j, "grid"));
    return AlphaGrid(array_of(j, "grid"));
  } catch (const InvalidParameter& e) {
    throw InputError(std::string("invalid grid: ") + e.what());
  }
}

json to_json(const FuzzyNumber& f) {
  json cuts = json::array();
  for (Eigen::Index k = 0; k < f.size(); ++k) cuts.push_back(json::array({f.lower()(k), f.upper()(k)}));
  return {{"grid", to_json(f.grid())}, {"cuts", cuts}, {"tag", tag_json(f.tag())}};
}

FuzzyNumber fuzzy_from_json(const json& j) {
  only_keys(j, {"grid", "cuts", "tag"}, "fuzzy number");
  const AlphaGrid grid = j.contains("grid") ? grid_from_json(j.at("grid")) : AlphaGrid::uniform();
  const FuzzyNumber::Tag tag = j.contains("tag") ? tag_from_json(j.at("tag")) : FuzzyNumber::Tag{Generic{}};
  try {
    if (j.contains("cuts")) {
      const json& cuts = j.at("cuts");
      if (!cuts.is_array() || cuts.size() != static_cast<std::size_t>(grid.size()))
        throw InputError("'cuts' must hold one [lo, hi] pair per grid level");
      Eigen::ArrayXd lo(grid.size()), hi(grid.size());
      for (std::size_t k = 0; k < cuts.size(); ++k) {
        const Eigen::ArrayXd pair = array_of(cuts[k], "cut");
        if (pair.size() != 2) throw InputError("each cut must be [lo, hi]");
        lo(static_cast<Eigen::Index>(k)) = pair(0);
        hi(static_cast<Eigen::Index>(k)) = pair(1);
      }
      return FuzzyNumber(grid, std::move(lo), std::move(hi), tag);
    }
    if (auto t = std::get_if<Triangular<double>>(&tag)) return make_triangular(t->left, t->peak, t->right, grid);
    if (auto t = std::get_if<Trapezoidal<double>>(&tag)) return make_trapezoidal(t->a, t->b, t->c, t->d, grid);
    if (auto t = std::get_if<Gaussian<double>>(&tag)) return make_gaussian(t->mu, t->sigma, t->alpha_min, grid);
  } catch (const InvalidParameter& e) {
    throw InputError(std::string("invalid fuzzy number: ") + e.what());
  }
  throw InputError("fuzzy number without cuts needs a triangular, trapezoidal or gaussian tag");
}

json to_json(const ShapeFn& s) {
  if (s.name() == "identity") return {{"kind", "identity"}};
  if (s.name() == "power" && s.exponent()) return {{"kind", "power"}, {"p", *s.exponent()}};
  throw InvalidParameter("shape function '" + s.name() + "' has no serial form");
}

ShapeFn shape_from_json(const json& j) {
  const std::string kind = text(j, "kind", "shape function");
  try {
    if (kind == "identity") {
      only_keys(j, {"kind"}, "identity shape");
      return ShapeFn::identity();
    }
    if (kind == "power") {
      only_keys(j, {"kind", "p"}, "power shape");
      return ShapeFn::power(number(j, "p", "power shape"));
    }
  } catch (const InvalidParameter& e) {
    throw InputError(e.what());
  }
  throw InputError("unknown shape function kind '" + kind + "'");
}

json to_json(const Family& f) {
  return std::visit(
      [](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, TriangularOffset>)
          return {{"kind", "triangular_offset"}, {"l", k.l}, {"r", k.r}};
        else if constexpr (std::is_same_v<T, TrapezoidalOffset>)
          return {{"kind", "trapezoidal_offset"}, {"l", k.l}, {"inner_l", k.inner_l}, {"inner_r", k.inner_r},
                  {"r", k.r}};
        else if constexpr (std::is_same_v<T, GaussianSpread>)
          return {{"kind", "gaussian"}, {"sigma", k.sigma}, {"alpha_min", k.alpha_min}};
        else if constexpr (std::is_same_v<T, LeftRightOffset>)
          return {{"kind", "lr"}, {"l", k.l}, {"r", k.r}, {"L", to_json(k.left)}, {"R", to_json(k.right)}};
        else
          throw InvalidParameter("custom family '" + k.name + "' has no serial form");
      },
      f.kind());
}

Family family_from_json(const json& j) {
  const std::string kind = text(j, "kind", "family");
  try {
    if (kind == "triangular_offset") {
      only_keys(j, {"kind", "l", "r"}, "triangular_offset family");
      return Family::triangular_offset(number_or(j, "l", 1.0, "family"), number_or(j, "r", 1.0, "family"));
    }
    if (kind == "trapezoidal_offset") {
      only_keys(j, {"kind", "l", "inner_l", "inner_r", "r"}, "trapezoidal_offset family");
      return Family::trapezoidal_offset(number(j, "l", "family"), number(j, "inner_l", "family"),
                                        number(j, "inner_r", "family"), number(j, "r", "family"));
    }
    if (kind == "gaussian") {
      only_keys(j, {"kind", "sigma", "alpha_min"}, "gaussian family");
      return Family::gaussian(number(j, "sigma", "family"),
                              number_or(j, "alpha_min", kDefaultGaussianAlphaMin, "family"));
    }
    if (kind == "lr") {
      only_keys(j, {"kind", "l", "r", "L", "R"}, "lr family");
      const ShapeFn left = j.contains("L") ? shape_from_json(j.at("L")) : ShapeFn::identity();
      const ShapeFn right = j.contains("R") ? shape_from_json(j.at("R")) : ShapeFn::identity();
      return Family::lr(number(j, "l", "family"), number(j, "r", "family"), left, right);
    }
  } catch (const InvalidParameter& e) {
    throw InputError(std::string("invalid family: ") + e.what());
  }
  throw InputError("unknown family kind '" + kind + "'");
}

namespace {

json span_json(SourceSpan s) { return json::array({s.start, s.end}); }

json witness_json(const Witness& w) {
  json j = {{"span", span_json(w.span)}, {"x", w.x}, {"alpha", w.alpha}, {"description", w.description}};
  j["node"] = w.node ? json(*w.node) : json(nullptr);
  return j;
}

}  // namespace

json to_json(const DerivativeResult& r) {
  json levels = json::array();
  for (Eigen::Index k = 0; k < r.grid.size(); ++k) {
    json level = {{"alpha", r.grid[k]}, {"d_lower", r.raw_lower(k)}, {"d_upper", r.raw_upper(k)}};
    if (static_cast<std::size_t>(k) < r.diagnostics.size()) {
      level["fd_residual"] = std::isfinite(r.diagnostics[static_cast<std::size_t>(k)].residual)
                                 ? json(r.diagnostics[static_cast<std::size_t>(k)].residual)
                                 : json(nullptr);
    }
    levels.push_back(level);
  }
  json w = json::array(), t = json::array();
  for (const auto& x : r.witnesses) w.push_back(witness_json(x));
  for (const auto& x : r.ties) t.push_back(witness_json(x));
  return {{"order", r.order},
          {"x", r.x},
          {"verdict", to_string(r.verdict)},
          {"reason", to_string(r.reason)},
          {"reason_text", r.reason_text},
          {"levels", levels},
          {"fuzzy", r.fuzzy ? to_json(*r.fuzzy) : json(nullptr)},
          {"witnesses", w},
          {"ties", t},
          {"max_fd_residual", r.max_fd_residual}};
}

json to_json(const SolveReport& r) {
  json points = json::array();
  for (const StationaryPoint& s : r.stationary) {
    json branches = json::array();
    for (const Branch& b : s.branches)
      branches.push_back({{"endpoint", b.endpoint},
                          {"alpha_first", b.alpha_first},
                          {"x_first", b.x_first},
                          {"alpha_last", b.alpha_last},
                          {"x_last", b.x_last},
                          {"levels", b.levels}});
    points.push_back(
        {{"x_star", s.x_star},
         {"witness", {{"endpoint", s.witness.endpoint}, {"alpha", s.witness.alpha}, {"residual", s.witness.residual}}},
         {"fuzzy_point", to_json(s.fuzzy_point)},
         {"branches", branches}});
  }
  json suff = json::array();
  for (const SufficiencyEvidence& e : r.sufficiency)
    suff.push_back({{"verdict", to_string(e.verdict)},
                    {"min_f1pp", e.min_f1pp},
                    {"min_at_x", e.min_at_x},
                    {"min_at_alpha", e.min_at_alpha},
                    {"core_f1pp", e.core_f1pp},
                    {"points_checked", e.points_checked},
                    {"reason", e.reason}});
  json brute = json::array();
  for (const BruteCheck& b : r.brute_check)
    brute.push_back({{"passed", b.passed},
                     {"counterexample", b.counterexample ? json(*b.counterexample) : json(nullptr)},
                     {"points", b.points}});
  return {{"stationary", points}, {"sufficiency", suff}, {"brute_check", brute}, {"warnings", r.warnings}};
}

namespace {

SufficiencyVerdict verdict_from(const std::string& s) {
  for (auto v : {SufficiencyVerdict::GlobalNonDominated, SufficiencyVerdict::LocalNonDominated,
                 SufficiencyVerdict::Inconclusive})
    if (s == to_string(v)) return v;
  throw InputError("unknown sufficiency verdict '" + s + "'");
}

const json& member(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("report is missing '") + key + "'");
  return j.at(key);
}

}  // namespace

SolveReport report_from_json(const json& j) {
  only_keys(j, {"stationary", "sufficiency", "brute_check", "warnings"}, "solve report");
  SolveReport r;
  try {
    for (const json& p : member(j, "stationary")) {
      StationaryPoint s;
      s.x_star = member(p, "x_star").get<double>();
      const json& w = member(p, "witness");
      s.witness = {member(w, "endpoint").get<int>(), member(w, "alpha").get<double>(),
                   member(w, "residual").get<double>()};
      s.fuzzy_point = fuzzy_from_json(member(p, "fuzzy_point"));
      for (const json& b : member(p, "branches"))
        s.branches.push_back({member(b, "endpoint").get<int>(), member(b, "alpha_first").get<double>(),
                              member(b, "x_first").get<double>(), member(b, "alpha_last").get<double>(),
                              member(b, "x_last").get<double>(), member(b, "levels").get<int>()});
      r.stationary.push_back(std::move(s));
    }
    for (const json& e : member(j, "sufficiency")) {
      SufficiencyEvidence s;
      s.verdict = verdict_from(member(e, "verdict").get<std::string>());
      s.min_f1pp = member(e, "min_f1pp").get<double>();
      s.min_at_x = member(e, "min_at_x").get<double>();
      s.min_at_alpha = member(e, "min_at_alpha").get<double>();
      s.core_f1pp = member(e, "core_f1pp").get<double>();
      s.points_checked = member(e, "points_checked").get<int>();
      s.reason = member(e, "reason").get<std::string>();
      r.sufficiency.push_back(std::move(s));
    }
    for (const json& b : member(j, "brute_check")) {
      BruteCheck c;
      c.passed = member(b, "passed").get<bool>();
      const json& ce = member(b, "counterexample");
      if (!ce.is_null()) c.counterexample = ce.get<double>();
      c.points = member(b, "points").get<int>();
      r.brute_check.push_back(c);
    }
    for (const json& w : member(j, "warnings")) r.warnings.push_back(w.get<std::string>());
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed solve report: ") + e.what());
  }
  return r;
}

ProblemDocument problem_from_json(const json& j, Eigen::Index levels) {
  only_keys(j, {"objective", "family", "domain", "grid", "config"}, "problem file");
  ProblemDocument d;
  d.objective_text = text(j, "objective", "problem file");
  d.problem.objective = parse(d.objective_text);
  d.problem.family = j.contains("family") ? family_from_json(j.at("family")) : Family::triangular_offset(1.0, 1.0);
  if (j.contains("domain")) {
    const Eigen::ArrayXd dom = array_of(j.at("domain"), "domain");
    if (dom.size() != 2) throw InputError("domain must be [lo, hi]");
    d.problem.domain = {dom(0), dom(1)};
    d.has_domain = true;
  }
  if (j.contains("grid")) {
    d.problem.grid = grid_from_json(j.at("grid"));
    d.has_grid = true;
  } else {
    try {
      d.problem.grid = AlphaGrid::uniform(levels);
    } catch (const InvalidParameter& e) {
      throw InputError(std::string("invalid grid: ") + e.what());
    }
  }
  if (j.contains("config")) {
    const json& c = j.at("config");
    only_keys(c, {"x_scan_points", "root_tol", "dominance_tol", "max_bisect_iter", "brute_points"}, "config");
    SolverConfig& cfg = d.problem.config;
    if (c.contains("x_scan_points")) cfg.x_scan_points = integer(c.at("x_scan_points"), "x_scan_points");
    cfg.root_tol = number_or(c, "root_tol", cfg.root_tol, "config");
    cfg.dominance_tol = number_or(c, "dominance_tol", cfg.dominance_tol, "config");
    if (c.contains("max_bisect_iter")) cfg.max_bisect_iter = integer(c.at("max_bisect_iter"), "max_bisect_iter");
    if (c.contains("brute_points")) cfg.brute_points = integer(c.at("brute_points"), "brute_points");
  }
  if (d.has_domain) {
    try {
      d.problem.validate();
    } catch (const InvalidParameter& e) {
      throw InputError(std::string("invalid problem: ") + e.what());
    }
  }
  return d;
}

ProblemDocument problem_from_text(const std::string& text, Eigen::Index levels) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return problem_from_json(j, levels);
}

json to_json(const ProblemDocument& d) {
  json j = {{"objective", d.objective_text.empty() ? format(d.problem.objective) : d.objective_text},
            {"family", to_json(d.problem.family)},
            {"grid", d.problem.grid == AlphaGrid::uniform(d.problem.grid.size()) ? json(d.problem.grid.size())
                                                                                 : to_json(d.problem.grid)}};
  if (d.has_domain) j["domain"] = json::array({d.problem.domain.lo, d.problem.domain.hi});
  const SolverConfig& c = d.problem.config;
  j["config"] = {{"x_scan_points", c.x_scan_points},
                 {"root_tol", c.root_tol},
                 {"dominance_tol", c.dominance_tol},
                 {"max_bisect_iter", c.max_bisect_iter},
                 {"brute_points", c.brute_points}};
  return j;
}

}  // namespace fuzzcalc::io
