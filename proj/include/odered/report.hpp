/**
 * @file report.hpp
 * @brief Command implementations behind the CLI and the JSON run report.
 *
 * Exit codes: 0 success or verified, 1 verification failed, 2 invalid
 * problem, 3 reduction failed, 4 neither a closed form nor a numeric
 * trajectory could be produced.
 */
#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "odered/problem.hpp"
#include "odered/verify.hpp"

namespace odered {

enum ExitCode : int { kExitOk = 0, kExitFail = 1, kExitInvalid = 2, kExitReduction = 3,
                      kExitUnsolved = 4 };

struct ReductionSummary {
  std::string shape;  // e.g. "K(y)/x"
  std::string rhs;
  std::string K;
  std::string k_equation;  // empty for classes I and II
  std::string form;        // FirstOrderForm tag of the K-equation, empty for I and II
  std::string method;
  std::string E;
  double A = 0.0;
  double K0 = 0.0;
  int branch = 1;
  bool operator==(const ReductionSummary&) const = default;
};

struct SolutionText {
  std::string method;
  std::string text;  // closed form or "numeric"
  bool closed = false;
  std::optional<double> B;
  std::string failure;
  bool operator==(const SolutionText&) const = default;
};

struct RunReport {
  std::string command;
  std::string name;
  Problem problem;
  std::optional<ReductionSummary> reduction;
  std::optional<SolutionText> solution;
  std::optional<VerificationReport> verification;
  std::vector<std::string> errors;
  int exit_code = kExitOk;
  std::map<std::string, double> timings_ms;
  bool operator==(const RunReport&) const = default;
};

nlohmann::json to_json(const RunReport& r, bool with_timings = true);
RunReport report_from_json(const nlohmann::json& j);

/// Plot-ready samples: x, y, y', residual of the class equation.
struct Table {
  std::vector<double> x, y, yp, residual;
};
void write_csv(std::ostream& os, const Table& t);

struct RunResult {
  RunReport report;
  std::optional<Table> table;
};

struct RunOptions {
  std::optional<double> tol;       // integrator tolerance override
  std::optional<double> interval;  // interval end override
};

RunResult run_classify(const Problem& p, const RunOptions& o = {});
RunResult run_reduce(const Problem& p, const RunOptions& o = {});
RunResult run_solve(const Problem& p, const RunOptions& o = {});
RunResult run_verify(const Problem& p, const RunOptions& o = {});

struct BatchEntry {
  std::string file;
  RunReport report;
};
/// Verifies every *.json under `dir` in name order; invalid files become
/// entries with exit code 2.
std::vector<BatchEntry> run_verify_batch(const std::string& dir, const RunOptions& o = {});
nlohmann::json batch_summary(const std::vector<BatchEntry>& entries, bool with_timings = true);

}  // namespace odered
