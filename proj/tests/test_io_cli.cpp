#include <doctest.h>

#include <fuzzcalc/cli.hpp>
#include <fuzzcalc/io.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fuzzcalc;
using io::json;

namespace {

const std::string kProblems = FUZZCALC_PROBLEMS_DIR;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string problem(const std::string& name) { return kProblems + "/" + name; }

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / ("fuzzcalc_test_" + name);
  std::ofstream(p) << content;
  return p;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("fuzzy number JSON round trip is bit exact") {
  const FuzzyNumber g = make_gaussian(0.1, 0.7);
  const json j = io::to_json(g);
  CHECK(j.contains("cuts"));
  CHECK(io::fuzzy_from_json(json::parse(j.dump())) == g);

  const FuzzyNumber t = make_triangular(1.0 / 3.0, 0.5, 2.0, AlphaGrid::uniform(7));
  CHECK(io::fuzzy_from_json(json::parse(io::to_json(t).dump())) == t);

  // A parametric tag alone rebuilds the cuts on the given grid.
  const json tag_only = {{"grid", 11}, {"tag", {{"kind", "triangular"}, {"left", 0}, {"peak", 1}, {"right", 2}}}};
  CHECK(io::fuzzy_from_json(tag_only) == make_triangular(0, 1, 2, AlphaGrid::uniform(11)));

  CHECK_THROWS_AS(io::fuzzy_from_json(json{{"grid", 3}, {"cuts", json::array({json::array({0, 1})})}}), InputError);
  CHECK_THROWS_AS(io::fuzzy_from_json(json{{"bogus", 1}}), InputError);
}

TEST_CASE("family JSON") {
  const Family f = io::family_from_json(json::parse(R"({"kind":"triangular_offset","l":1,"r":2})"));
  CHECK(f.endpoints(0, 0).hi == 2.0);
  const Family lr = io::family_from_json(json::parse(R"({"kind":"lr","l":1,"r":1,"L":{"kind":"power","p":2}})"));
  CHECK(io::to_json(io::family_from_json(io::to_json(lr))) == io::to_json(lr));
  CHECK_THROWS_AS(io::family_from_json(json::parse(R"({"kind":"triangular_offset","width":1})")), InputError);
  CHECK_THROWS_AS(io::family_from_json(json::parse(R"({"kind":"nope"})")), InputError);
}

TEST_CASE("problem documents") {
  const io::ProblemDocument d = io::problem_from_text(
      R"({"objective":"X*X - 4*X","family":{"kind":"triangular_offset","l":1,"r":1},"domain":[1,5],"grid":101,"config":{"root_tol":1e-10}})");
  CHECK(d.objective_text == "X*X - 4*X");
  CHECK(d.problem.domain.hi == 5.0);
  CHECK(d.has_grid);
  CHECK(io::problem_from_json(io::to_json(d)).objective_text == d.objective_text);

  CHECK_THROWS_AS(io::problem_from_text(R"({"objective":"X","domain":[0,1],"extra":1})"), InputError);
  CHECK_THROWS_AS(io::problem_from_text(R"({"objective":"X","domain":[0,1],"config":{"tol":1}})"), InputError);
  CHECK_THROWS_AS(io::problem_from_text(R"({"objective":"X","domain":[1,0]})"), InputError);
  CHECK_THROWS_AS(io::problem_from_text(R"({"objective":"X", )"), InputError);
  CHECK_THROWS_AS(io::problem_from_text(R"({"objective":"X +","domain":[0,1]})"), ParseError);
}

TEST_CASE("solve report JSON round trip reproduces values bit for bit") {
  Problem p;
  p.objective = parse("X*X - 4*X");
  p.family = Family::triangular_offset(1, 1);
  p.domain = {1, 5};
  const SolveReport r = solve(p);
  const std::string text = io::to_json(r).dump();
  const SolveReport back = io::report_from_json(json::parse(text));
  CHECK(io::to_json(back).dump() == text);
  REQUIRE(back.stationary.size() == 1);
  CHECK(back.stationary[0].x_star == r.stationary[0].x_star);
  CHECK(back.stationary[0].fuzzy_point == r.stationary[0].fuzzy_point);
  CHECK(back.sufficiency[0].verdict == r.sufficiency[0].verdict);
  CHECK(back.sufficiency[0].min_f1pp == r.sufficiency[0].min_f1pp);
}

TEST_CASE("cli eval") {
  Run r = run({"eval", problem("quadratic.json"), "--x", "2"});
  CHECK(r.code == kExitOk);
  const auto rows = csv_rows(r.out.substr(r.out.find("alpha,lower,upper")));
  REQUIRE(rows.size() == 102);
  CHECK(rows[1] == std::vector<std::string>{"0", "-11", "5"});
  CHECK(r.err.empty());

  r = run({"eval", "--expr", "X", "--x", "1", "--alpha", "0,0.5,1"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("0.5,0.5,1.5") != std::string::npos);
  CHECK(r.out.find("1,1,1") != std::string::npos);

  r = run({"eval", problem("missing.json"), "--x", "1"});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("missing.json") != std::string::npos);
  CHECK(r.out.empty());

  r = run({"eval", "--expr", "X * (X + 1", "--x", "1"});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("^") != std::string::npos);

  r = run({"eval", "--expr", "exp(exp(X))", "--x", "10"});
  CHECK(r.code == kExitEvaluation);
  CHECK(r.err.find("span") != std::string::npos);

  r = run({"eval", problem("quadratic.json"), "--x", "2", "--json"});
  CHECK(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j.at("levels").size() == 101);
}

TEST_CASE("cli derive") {
  Run r = run({"derive", "--expr", "X*X", "--x", "2", "--bogus"});
  CHECK(r.code == kExitInput);

  r = run({"derive", "--expr", "X*X", "--x", "2"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find(": yes") != std::string::npos);
  // alpha = 0.5: x~ cut [1.5, 2.5], derivative 2 x~.
  CHECK(r.out.find("0.5,3,5,3,5") != std::string::npos);

  r = run({"derive", problem("corner_square.json"), "--x", "0.5"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find(": no") != std::string::npos);
  CHECK(r.out.find("witnesses:") != std::string::npos);
  r = run({"derive", problem("corner_square.json"), "--x", "0.5", "--strict"});
  CHECK(r.code == kExitNotDifferentiable);

  r = run({"derive", "--expr", "exp(-X)", "--x", "0", "--order", "2", "--json"});
  CHECK(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j.at("order") == 2);
  const json& lv0 = j.at("levels").at(0);
  CHECK(std::abs(lv0.at("d_lower").get<double>() - std::exp(-1.0)) <= 1e-9);

  r = run({"derive", problem("corner_square.json"), "--x", "0.5", "--order", "2", "--strict"});
  CHECK(r.code == kExitNotDifferentiable);
  r = run({"derive", "--expr", "X", "--x", "0", "--order", "3"});
  CHECK(r.code == kExitInput);
}

TEST_CASE("cli solve") {
  Run r = run({"solve", problem("quadratic.json")});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("x* = 2 ") != std::string::npos);
  CHECK(r.out.find("support [1, 3], core [2, 2]") != std::string::npos);
  CHECK(r.out.find("global_non_dominated") != std::string::npos);
  CHECK(r.out.find("brute check: passed") != std::string::npos);

  r = run({"solve", problem("identity.json")});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("stationary points: 0") != std::string::npos);
  r = run({"solve", problem("identity.json"), "--require-solution"});
  CHECK(r.code == kExitNoSolution);

  const auto bad = temp_file("bad.json", R"({"objective":"X","domain":[0,1],"config":{"root_tol":})");
  r = run({"solve", bad.string()});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("byte") != std::string::npos);

  r = run({"solve", problem("quadratic.json"), "--json"});
  const json j = json::parse(r.out);
  CHECK(j.at("stationary").size() == 1);
  CHECK(io::to_json(io::report_from_json(j)) == j);
}

TEST_CASE("cli plot") {
  Run r = run({"plot", problem("quadratic.json"), "--x", "2", "--what", "f"});
  CHECK(r.code == kExitOk);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() > 3);
  CHECK(rows[0] == std::vector<std::string>{"value", "membership"});
  double prev = -1e300;
  bool peak = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double v = std::stod(rows[i][0]), m = std::stod(rows[i][1]);
    CHECK(v >= prev);
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
    // The level-1 cut of f(2~) is the single value -4.
    if (m == 1.0) peak = v == -4.0;
    prev = v;
  }
  CHECK(peak);

  r = run({"plot", problem("corner_square.json"), "--what", "f1p", "--levels", "5"});
  CHECK(r.code == kExitOk);
  const auto surf = csv_rows(r.out);
  CHECK(surf[0] == std::vector<std::string>{"x", "alpha", "value"});
  CHECK(surf.size() == 1 + 100 * 5);

  r = run({"plot", problem("quadratic.json"), "--x", "2", "--out", "/nonexistent-dir/out.csv"});
  CHECK(r.code == kExitOutput);
  r = run({"plot", problem("quadratic.json"), "--x", "2", "--levels", "1"});
  CHECK(r.code == kExitInput);
  r = run({"plot", problem("quadratic.json"), "--x", "2", "--levels", "0"});
  CHECK(r.code == kExitInput);

  const auto out = std::filesystem::temp_directory_path() / "fuzzcalc_test_plot.csv";
  r = run({"plot", problem("quadratic.json"), "--x", "2", "--out", out.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.empty());
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "value,membership");
}

TEST_CASE("levels precedence") {
  const auto p = temp_file("grid5.json", R"({"objective":"X","domain":[0,1],"grid":5})");
  CHECK(csv_rows(run({"eval", p.string(), "--x", "0"}).out).size() == 2 + 5);
  CHECK(csv_rows(run({"eval", p.string(), "--x", "0", "--levels", "3"}).out).size() == 2 + 3);
  setenv("FUZZCALC_LEVELS", "4", 1);
  CHECK(csv_rows(run({"eval", "--expr", "X", "--x", "0"}).out).size() == 2 + 4);
  CHECK(csv_rows(run({"eval", p.string(), "--x", "0"}).out).size() == 2 + 5);
  setenv("FUZZCALC_LEVELS", "junk", 1);
  CHECK(run({"eval", "--expr", "X", "--x", "0"}).code == kExitInput);
  unsetenv("FUZZCALC_LEVELS");
}
