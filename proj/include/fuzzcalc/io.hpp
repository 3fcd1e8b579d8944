#ifndef FUZZCALC_IO_HPP
#define FUZZCALC_IO_HPP

#include "fuzzcalc/optimize.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace fuzzcalc {

// Malformed or schema-violating input documents.
class InputError : public Error {
 public:
  using Error::Error;
};

namespace io {

using nlohmann::json;

json to_json(const AlphaGrid& g);
AlphaGrid grid_from_json(const json& j);

// {"grid", "cuts", "tag"}; a parametric tag without cuts is rebuilt on the grid.
json to_json(const FuzzyNumber& f);
FuzzyNumber fuzzy_from_json(const json& j);

json to_json(const ShapeFn& s);
ShapeFn shape_from_json(const json& j);

// Custom families have no serial form and throw InvalidParameter.
json to_json(const Family& f);
Family family_from_json(const json& j);

json to_json(const DerivativeResult& r);
json to_json(const SolveReport& r);
SolveReport report_from_json(const json& j);

struct ProblemDocument {
  std::string objective_text;
  Problem problem;
  bool has_domain = false;
  bool has_grid = false;
};

// Reads {"objective", "family", "domain", "grid", "config"}. `levels` supplies the grid
// when the document has none. Objective syntax errors surface as ParseError.
ProblemDocument problem_from_json(const json& j, Eigen::Index levels = kDefaultLevels);
ProblemDocument problem_from_text(const std::string& text, Eigen::Index levels = kDefaultLevels);
json to_json(const ProblemDocument& d);

}  // namespace io
}  // namespace fuzzcalc

#endif  // FUZZCALC_IO_HPP
