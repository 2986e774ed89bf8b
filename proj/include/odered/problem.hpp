/**
 * @file problem.hpp
 * @brief Problem files (JSON) and the bundled worked examples.
 *
 * Field names: class, m, a, F, G, F2, initial_condition {x0, y0, yp0},
 * interval_end, tolerances {integrator, residual, trajectory}, example,
 * particular, k_closed, implicit {left, right}. When `example` names a bundled
 * problem it supplies every field not given explicitly.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "odered/classes.hpp"
#include "odered/reduction.hpp"
#include "odered/verify.hpp"

namespace odered {

struct Problem {
  std::string name;  // example key or file stem; not serialized
  ClassTag tag = ClassTag::I;
  int m = 0;
  std::string a = "0", F = "0", G = "0", F2 = "0";
  InitialCondition ic;
  double interval_end = 1.0;
  Tolerances tol;
  std::optional<std::string> example;
  std::optional<std::string> particular;  // in K's variable
  std::optional<std::string> k_closed;    // in K's variable
  std::optional<std::pair<std::string, std::string>> implicit;  // left(y), right(x)

  /// Parses the expressions; ValidationError names the field.
  [[nodiscard]] ClassDescriptor descriptor() const;
  [[nodiscard]] ReduceOptions options() const;

  bool operator==(const Problem& o) const;
};

/// ValidationError names the missing or malformed field.
Problem problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Problem& p);
Problem load_problem(const std::filesystem::path& path);

const std::vector<std::string>& example_names();
/// Throws ValidationError("example", ...) for an unknown key.
Problem named_example(const std::string& key);

}  // namespace odered
