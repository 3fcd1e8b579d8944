#include "fuzzcalc/cli.hpp"

#include "fuzzcalc/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fuzzcalc {

namespace {

using io::json;

struct Common {
  std::string problem_path;
  std::string expr;
  std::string family;
  std::vector<double> domain;
  int levels = 0;
  bool json = false;
  std::string source;  // objective text being parsed, for error excerpts
};

struct Document {
  io::ProblemDocument doc;
  std::string source;  // objective text, for span excerpts
};

Eigen::Index default_levels() {
  const char* env = std::getenv("FUZZCALC_LEVELS");
  if (!env || !*env) return kDefaultLevels;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 2) throw InputError(std::string("FUZZCALC_LEVELS must be an integer >= 2, got '") + env + "'");
  return static_cast<Eigen::Index>(v);
}

Document load(Common& c, const CLI::App& sub) {
  const bool levels_given = sub.count("--levels") > 0;
  if (levels_given && c.levels < 2) throw InputError("--levels must be at least 2");
  const Eigen::Index fallback = levels_given ? c.levels : default_levels();

  Document d;
  if (!c.problem_path.empty()) {
    std::ifstream in(c.problem_path);
    if (!in) throw InputError("cannot read problem file '" + c.problem_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      const json j = json::parse(buf.str());
      if (j.is_object() && j.contains("objective") && j.at("objective").is_string())
        c.source = j.at("objective").get<std::string>();
    } catch (const json::exception&) {
    }
    d.doc = io::problem_from_text(buf.str(), fallback);
  } else if (c.expr.empty()) {
    throw InputError("give a problem file or --expr");
  } else {
    d.doc.problem.grid = AlphaGrid::uniform(fallback);
  }
  if (!c.expr.empty()) {
    d.doc.objective_text = c.expr;
    c.source = c.expr;
    d.doc.problem.objective = parse(c.expr);
  }
  if (!c.family.empty()) {
    json j;
    try {
      j = json::parse(c.family);
    } catch (const json::parse_error& e) {
      throw InputError("malformed --family JSON at byte " + std::to_string(e.byte));
    }
    d.doc.problem.family = io::family_from_json(j);
  }
  if (!c.domain.empty()) {
    if (c.domain.size() != 2) throw InputError("--domain takes lo,hi");
    d.doc.problem.domain = {c.domain[0], c.domain[1]};
    d.doc.has_domain = true;
  }
  if (levels_given) d.doc.problem.grid = AlphaGrid::uniform(c.levels);
  if (d.doc.has_domain) {
    try {
      d.doc.problem.validate();
    } catch (const InvalidParameter& e) {
      throw InputError(std::string("invalid problem: ") + e.what());
    }
  }
  d.source = d.doc.objective_text;
  return d;
}

std::string num(double v) { return format_number(v); }

void excerpt(std::ostream& err, const std::string& source, SourceSpan span) {
  if (source.empty() || span.start > source.size()) return;
  err << "  " << source << "\n  " << std::string(span.start, ' ')
      << std::string(std::max<std::size_t>(1, std::min(span.end, source.size() + 1) - span.start), '^') << "\n";
}

DerivativeOptions options_for(const Document& d) {
  DerivativeOptions o;
  if (d.doc.has_domain) o.domain = d.doc.problem.domain;
  return o;
}

std::string witness_line(const Witness& w) {
  std::ostringstream os;
  os << "alpha=" << num(w.alpha);
  if (w.node) os << " node " << *w.node;
  os << " span [" << w.span.start << "," << w.span.end << "): " << w.description;
  return os.str();
}

int cmd_eval(Common& c, const CLI::App& sub, double x, const std::vector<double>& alphas, std::ostream& out) {
  const Document d = load(c, sub);
  const Problem& p = d.doc.problem;
  const LevelEvaluator ev(p.objective, p.family);
  std::vector<double> levels;
  if (alphas.empty()) {
    for (Eigen::Index k = 0; k < p.grid.size(); ++k) levels.push_back(p.grid[k]);
    eval_fuzzy(p.objective, p.family, x, p.grid);  // nesting check
  } else {
    for (double a : alphas)
      if (!(a >= 0.0 && a <= 1.0)) throw InputError("--alpha values must lie in [0,1]");
    levels = alphas;
  }
  if (c.json) {
    json rows = json::array();
    for (double a : levels) {
      const auto [lo, hi] = ev.levels(x, a);
      rows.push_back({{"alpha", a}, {"lower", lo}, {"upper", hi}});
    }
    out << json{{"x", x}, {"objective", format(p.objective)}, {"levels", rows}}.dump(2) << "\n";
    return kExitOk;
  }
  out << "f(x~) for " << format(p.objective) << " at x = " << num(x) << "\n";
  out << "alpha,lower,upper\n";
  for (double a : levels) {
    const auto [lo, hi] = ev.levels(x, a);
    out << num(a) << "," << num(lo) << "," << num(hi) << "\n";
  }
  return kExitOk;
}

int cmd_derive(Common& c, const CLI::App& sub, double x, int order, bool strict, std::ostream& out) {
  if (order != 1 && order != 2) throw InputError("--order must be 1 or 2");
  const Document d = load(c, sub);
  const Problem& p = d.doc.problem;
  const DerivativeOptions opts = options_for(d);
  const LevelEvaluator ev(p.objective, p.family, opts.tie_eps, opts.kink_tol);
  DerivativeResult r;
  try {
    r = order == 1 ? derivative(ev, x, p.grid, opts) : second_derivative(ev, x, p.grid, opts);
  } catch (const NotDifferentiable& e) {
    if (c.json) {
      out << json{{"order", order}, {"x", x}, {"verdict", "no"}, {"reason", "precondition"}, {"reason_text", e.what()}}
                 .dump(2)
          << "\n";
    } else {
      out << "order " << order << " derivative at x = " << num(x) << ": no\n  " << e.what() << "\n";
    }
    return strict ? kExitNotDifferentiable : kExitOk;
  }
  if (c.json) {
    out << io::to_json(r).dump(2) << "\n";
  } else {
    out << "order " << order << " derivative of " << format(p.objective) << " at x = " << num(x) << ": "
        << to_string(r.verdict) << "\n";
    if (!r.differentiable()) out << "  " << r.reason_text << "\n";
    out << "alpha,d_lower,d_upper,cut_lo,cut_hi\n";
    for (Eigen::Index k = 0; k < r.grid.size(); ++k) {
      const double a = r.raw_lower(k), b = r.raw_upper(k);
      out << num(r.grid[k]) << "," << num(a) << "," << num(b) << "," << num(std::min(a, b)) << ","
          << num(std::max(a, b)) << "\n";
    }
    if (!r.witnesses.empty()) {
      out << "witnesses:\n";
      for (const Witness& w : r.witnesses) out << "  " << witness_line(w) << "\n";
    }
    if (!r.ties.empty()) out << "harmless ties: " << r.ties.size() << "\n";
    out << "max AD/FD residual: " << num(r.max_fd_residual) << "\n";
  }
  return strict && !r.differentiable() ? kExitNotDifferentiable : kExitOk;
}

std::string cut_text(const FuzzyNumber& f, Eigen::Index k) {
  return "[" + num(f.lower()(k)) + ", " + num(f.upper()(k)) + "]";
}

int cmd_solve(Common& c, const CLI::App& sub, bool require, std::ostream& out, std::ostream& err) {
  const Document d = load(c, sub);
  if (!d.doc.has_domain) throw InputError("solve needs a domain");
  const SolveReport r = solve(d.doc.problem);
  for (const std::string& w : r.warnings) err << "warning: " << w << "\n";
  if (c.json) {
    out << io::to_json(r).dump(2) << "\n";
  } else {
    const Problem& p = d.doc.problem;
    out << "minimize " << format(p.objective) << " over x in [" << num(p.domain.lo) << ", " << num(p.domain.hi)
        << "], family " << p.family.name() << "\n";
    out << "stationary points: " << r.stationary.size() << "\n";
    for (std::size_t i = 0; i < r.stationary.size(); ++i) {
      const StationaryPoint& s = r.stationary[i];
      const SufficiencyEvidence& e = r.sufficiency[i];
      const BruteCheck& b = r.brute_check[i];
      out << "[" << i + 1 << "] x* = " << num(s.x_star) << "  (f" << s.witness.endpoint << "' = 0 at alpha = "
          << num(s.witness.alpha) << ", residual " << num(s.witness.residual) << ")\n";
      out << "    x~*: support " << cut_text(s.fuzzy_point, 0) << ", core "
          << cut_text(s.fuzzy_point, s.fuzzy_point.size() - 1) << "\n";
      for (const Branch& br : s.branches)
        out << "    branch f" << br.endpoint << "': alpha " << num(br.alpha_first) << " -> " << num(br.alpha_last)
            << ", x " << num(br.x_first) << " -> " << num(br.x_last) << " (" << br.levels << " levels)\n";
      out << "    sufficiency: " << to_string(e.verdict) << " (" << e.reason << ")\n";
      out << "    brute check: " << (b.passed ? "passed" : "failed") << " on " << b.points << " points";
      if (b.counterexample) out << ", dominated by x = " << num(*b.counterexample);
      out << "\n";
    }
  }
  if (require && r.stationary.empty()) {
    err << "no stationary point in the domain\n";
    return kExitNoSolution;
  }
  return kExitOk;
}

int cmd_plot(Common& c, const CLI::App& sub, std::optional<double> x, const std::string& what,
             const std::string& out_path, std::ostream& out, std::ostream& err) {
  const Document d = load(c, sub);
  const Problem& p = d.doc.problem;
  std::ostringstream csv;
  if (what == "f") {
    if (!x) throw InputError("--what f needs --x");
    const FuzzyNumber f = eval_fuzzy(p.objective, p.family, *x, p.grid);
    std::vector<std::pair<double, double>> pts;
    for (Eigen::Index k = 0; k < f.size(); ++k) pts.emplace_back(f.lower()(k), p.grid[k]);
    for (Eigen::Index k = f.size() - 1; k >= 0; --k) pts.emplace_back(f.upper()(k), p.grid[k]);
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    csv << "value,membership\n";
    for (const auto& [v, m] : pts) csv << num(v) << "," << num(m) << "\n";
  } else if (what == "f1" || what == "f2" || what == "f1p" || what == "f2p") {
    if (!d.doc.has_domain) throw InputError("level-function surfaces need a domain");
    const LevelEvaluator ev(p.objective, p.family);
    const bool upper = what[1] == '2';
    const bool deriv = what.size() == 3;
    csv << "x,alpha,value\n";
    for (Eigen::Index k = 0; k < p.grid.size(); ++k) {
      for (double xv : p.scan_points(p.config.x_scan_points)) {
        const IntervalJet j = ev.jets(xv, p.grid[k], Side::Right);
        const Jet2<double>& e = upper ? j.hi : j.lo;
        csv << num(xv) << "," << num(p.grid[k]) << "," << num(deriv ? e.d1 : e.value) << "\n";
      }
    }
  } else {
    throw InputError("--what must be one of f, f1, f2, f1p, f2p");
  }
  if (out_path.empty()) {
    out << csv.str();
    return kExitOk;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (file) file << csv.str();
  if (!file) {
    err << "error: cannot write '" << out_path << "'\n";
    return kExitOutput;
  }
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("problem", c.problem_path, "Problem file (JSON)");
  sub->add_option("--expr", c.expr, "Objective expression, overrides the problem file");
  sub->add_option("--family", c.family, "Family descriptor as JSON");
  sub->add_option("--domain", c.domain, "Crisp domain lo,hi")->delimiter(',')->expected(2);
  sub->add_option("--levels", c.levels, "Number of alpha levels (>= 2)");
  sub->add_flag("--json", c.json, "Machine-readable output");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Derivatives and optimization of fuzzy functions of a fuzzy variable", "fuzzcalc"};
  app.require_subcommand(1);

  Common c;
  double x = 0.0;
  std::vector<double> alphas;
  int order = 1;
  bool strict = false;
  bool require = false;
  std::string what = "f";
  std::string out_path;

  CLI::App* eval = app.add_subcommand("eval", "Print the cuts of f(x~)");
  add_common(eval, c);
  eval->add_option("--x", x, "Crisp parameter")->required();
  eval->add_option("--alpha", alphas, "Levels to print (default: the whole grid)")->delimiter(',');

  CLI::App* derive = app.add_subcommand("derive", "Fuzzy derivative at x");
  add_common(derive, c);
  derive->add_option("--x", x, "Crisp parameter")->required();
  derive->add_option("--order", order, "1 or 2");
  derive->add_flag("--strict", strict, "Exit with status 3 when not differentiable");

  CLI::App* solve_cmd = app.add_subcommand("solve", "Stationary points and their classification");
  add_common(solve_cmd, c);
  solve_cmd->add_flag("--require-solution", require, "Exit with status 4 when no stationary point exists");

  CLI::App* plot = app.add_subcommand("plot", "CSV data for membership functions and level curves");
  add_common(plot, c);
  CLI::Option* plot_x = plot->add_option("--x", x, "Crisp parameter (for --what f)");
  plot->add_option("--what", what, "f, f1, f2, f1p or f2p");
  plot->add_option("--out", out_path, "Output file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub == eval) return cmd_eval(c, *sub, x, alphas, out);
    if (sub == derive) return cmd_derive(c, *sub, x, order, strict, out);
    if (sub == solve_cmd) return cmd_solve(c, *sub, require, out, err);
    return cmd_plot(c, *sub, plot_x->count() ? std::optional<double>(x) : std::nullopt, what, out_path, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    excerpt(err, c.source, e.span());
    if (c.expr.empty() && !c.problem_path.empty()) err << "  (objective of " << c.problem_path << ")\n";
    return kExitInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const EvaluationError& e) {
    err << "evaluation error: " << e.what() << " (span [" << e.span().start << "," << e.span().end << "))\n";
    return kExitEvaluation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitEvaluation;
  }
}

}  // namespace fuzzcalc
