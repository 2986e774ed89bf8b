#include "odered/report.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <limits>

#include "odered/solution.hpp"

namespace odered {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

json tolerances_json(const Tolerances& t) {
  return {{"integrator", t.integrator}, {"residual", t.residual}, {"trajectory", t.trajectory}};
}

Tolerances tolerances_from(const json& j) {
  return {j.at("integrator").get<double>(), j.at("residual").get<double>(),
          j.at("trajectory").get<double>()};
}

Problem effective(const Problem& p, const RunOptions& o) {
  Problem q = p;
  if (o.tol) q.tol.integrator = *o.tol;
  if (o.interval) q.interval_end = *o.interval;
  return q;
}

ReductionSummary summarize(const ReducedODE& r) {
  ReductionSummary s;
  s.shape = r.shape;
  s.rhs = r.rhs.str();
  s.K = r.K.str();
  s.E = r.E.str();
  s.A = r.A;
  s.K0 = r.K0;
  s.branch = r.branch;
  if (r.tag == ClassTag::III || r.tag == ClassTag::IV) {
    s.k_equation = r.k_equation.str();
    s.form = to_string(r.k_form.tag);
    s.method = r.k_method;
  } else {
    s.method = "quadrature";
  }
  return s;
}

/// Validation and reduction shared by every command; returns false with the
/// report filled when either fails.
bool prepare(const Problem& p, RunReport& rep, ClassDescriptor& d, ReduceOptions& opt,
             std::optional<ReducedODE>* reduced) {
  rep.problem = p;
  rep.name = p.name;
  try {
    d = p.descriptor();
    opt = p.options();
  } catch (const std::exception& e) {
    rep.errors.push_back(e.what());
    rep.exit_code = kExitInvalid;
    return false;
  }
  if (!reduced) return true;
  const auto t0 = Clock::now();
  try {
    *reduced = reduce(d, p.ic, opt);
    rep.reduction = summarize(**reduced);
  } catch (const std::exception& e) {
    rep.errors.push_back(std::string("reduction: ") + e.what());
    rep.exit_code = kExitReduction;
  }
  rep.timings_ms["reduce"] = ms_since(t0);
  return reduced->has_value();
}

Table table_from(const ClassDescriptor& d, const ReducedODE& r, const Trajectory& t) {
  Table out;
  out.x = t.x;
  out.y = t.y;
  out.yp = t.yp;
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    double v;
    try {
      v = residual_at(d, r, t.x[i], t.y[i]);
    } catch (const std::exception&) {
      v = std::numeric_limits<double>::quiet_NaN();
    }
    out.residual.push_back(v);
  }
  return out;
}

}  // namespace

json to_json(const RunReport& r, bool with_timings) {
  json j;
  j["command"] = r.command;
  j["name"] = r.name;
  j["problem"] = to_json(r.problem);
  if (r.reduction) {
    const auto& s = *r.reduction;
    j["reduction"] = {{"shape", s.shape}, {"rhs", s.rhs},       {"K", s.K},
                      {"k_equation", s.k_equation}, {"form", s.form}, {"method", s.method},
                      {"E", s.E},         {"A", s.A},           {"K0", s.K0},
                      {"branch", s.branch}};
  }
  if (r.solution) {
    const auto& s = *r.solution;
    j["solution"] = {{"method", s.method}, {"text", s.text}, {"closed", s.closed},
                     {"failure", s.failure}};
    if (s.B) j["solution"]["B"] = *s.B;
  }
  if (r.verification) {
    const auto& v = *r.verification;
    j["verification"] = {{"interval", {v.x0, v.x1}},
                         {"residual_sup", v.residual_sup},
                         {"trajectory_dev", v.trajectory_dev},
                         {"verdict", v.pass ? "pass" : "fail"},
                         {"diagnostics", v.diagnostics},
                         {"tolerances", tolerances_json(v.tolerances)}};
  }
  j["errors"] = r.errors;
  j["exit_code"] = r.exit_code;
  if (with_timings) j["timings_ms"] = r.timings_ms;
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.command = j.at("command").get<std::string>();
  r.name = j.at("name").get<std::string>();
  r.problem = problem_from_json(j.at("problem"));
  r.problem.name = r.name;
  if (j.contains("reduction")) {
    const json& s = j.at("reduction");
    ReductionSummary o;
    o.shape = s.at("shape").get<std::string>();
    o.rhs = s.at("rhs").get<std::string>();
    o.K = s.at("K").get<std::string>();
    o.k_equation = s.at("k_equation").get<std::string>();
    o.form = s.at("form").get<std::string>();
    o.method = s.at("method").get<std::string>();
    o.E = s.at("E").get<std::string>();
    o.A = s.at("A").get<double>();
    o.K0 = s.at("K0").get<double>();
    o.branch = s.at("branch").get<int>();
    r.reduction = o;
  }
  if (j.contains("solution")) {
    const json& s = j.at("solution");
    SolutionText o;
    o.method = s.at("method").get<std::string>();
    o.text = s.at("text").get<std::string>();
    o.closed = s.at("closed").get<bool>();
    o.failure = s.at("failure").get<std::string>();
    if (s.contains("B")) o.B = s.at("B").get<double>();
    r.solution = o;
  }
  if (j.contains("verification")) {
    const json& s = j.at("verification");
    VerificationReport v;
    v.x0 = s.at("interval").at(0).get<double>();
    v.x1 = s.at("interval").at(1).get<double>();
    v.residual_sup = s.at("residual_sup").get<double>();
    v.trajectory_dev = s.at("trajectory_dev").get<double>();
    v.pass = s.at("verdict").get<std::string>() == "pass";
    v.diagnostics = s.at("diagnostics").get<std::vector<std::string>>();
    v.tolerances = tolerances_from(s.at("tolerances"));
    r.verification = v;
  }
  r.errors = j.at("errors").get<std::vector<std::string>>();
  r.exit_code = j.at("exit_code").get<int>();
  if (j.contains("timings_ms")) r.timings_ms = j.at("timings_ms").get<std::map<std::string, double>>();
  return r;
}

void write_csv(std::ostream& os, const Table& t) {
  const auto old = os.precision(17);
  os << "x,y,yp,residual\n";
  for (std::size_t i = 0; i < t.x.size(); ++i)
    os << t.x[i] << ',' << t.y[i] << ',' << t.yp[i] << ',' << t.residual[i] << '\n';
  os.precision(old);
}

RunResult run_classify(const Problem& p, const RunOptions& o) {
  RunResult out;
  out.report.command = "classify";
  ClassDescriptor d;
  ReduceOptions opt;
  std::optional<ReducedODE> r;
  (void)prepare(effective(p, o), out.report, d, opt, &r);
  return out;
}

RunResult run_reduce(const Problem& p, const RunOptions& o) {
  RunResult out = run_classify(p, o);
  out.report.command = "reduce";
  return out;
}

RunResult run_solve(const Problem& p_in, const RunOptions& o) {
  const Problem p = effective(p_in, o);
  RunResult out;
  auto& rep = out.report;
  rep.command = "solve";
  ClassDescriptor d;
  ReduceOptions opt;
  std::optional<ReducedODE> r;
  if (!prepare(p, rep, d, opt, &r)) return out;
  auto t0 = Clock::now();
  const auto sol = solve_reduced(*r, opt);
  rep.timings_ms["solve"] = ms_since(t0);
  SolutionText st{sol.method, sol.text(), sol.closed, std::nullopt, sol.failure};
  if (sol.implicit) st.B = sol.implicit->B;
  rep.solution = st;
  t0 = Clock::now();
  try {
    const auto traj = integrate_first_order(*r, p.interval_end, p.tol.integrator);
    out.table = table_from(d, *r, traj);
  } catch (const std::exception& e) {
    rep.errors.push_back(std::string("numeric route: ") + e.what());
    if (!sol.closed) rep.exit_code = kExitUnsolved;
  }
  rep.timings_ms["integrate"] = ms_since(t0);
  return out;
}

RunResult run_verify(const Problem& p_in, const RunOptions& o) {
  const Problem p = effective(p_in, o);
  RunResult out;
  auto& rep = out.report;
  rep.command = "verify";
  ClassDescriptor d;
  ReduceOptions opt;
  if (!prepare(p, rep, d, opt, nullptr)) return out;
  const auto t0 = Clock::now();
  const auto c = compare(d, p.ic, p.interval_end, p.tol, opt);
  rep.timings_ms["compare"] = ms_since(t0);
  if (c.reduced) rep.reduction = summarize(*c.reduced);
  rep.verification = c.report;
  rep.exit_code = c.report.pass ? kExitOk : kExitFail;
  if (c.reduced && c.reduced_route) out.table = table_from(d, *c.reduced, *c.reduced_route);
  return out;
}

std::vector<BatchEntry> run_verify_batch(const std::string& dir, const RunOptions& o) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<BatchEntry> out;
  for (const auto& f : files) {
    BatchEntry b;
    b.file = f.filename().string();
    try {
      b.report = run_verify(load_problem(f), o).report;
    } catch (const std::exception& e) {
      b.report.command = "verify";
      b.report.name = f.stem().string();
      b.report.errors.push_back(e.what());
      b.report.exit_code = kExitInvalid;
    }
    out.push_back(std::move(b));
  }
  return out;
}

json batch_summary(const std::vector<BatchEntry>& entries, bool with_timings) {
  json files = json::array();
  int passed = 0;
  for (const auto& e : entries) {
    json f = {{"file", e.file}, {"exit_code", e.report.exit_code}, {"errors", e.report.errors}};
    if (e.report.verification) {
      f["verdict"] = e.report.verification->pass ? "pass" : "fail";
      f["residual_sup"] = e.report.verification->residual_sup;
      f["trajectory_dev"] = e.report.verification->trajectory_dev;
      f["diagnostics"] = e.report.verification->diagnostics;
    } else {
      f["verdict"] = "fail";
    }
    if (with_timings) f["timings_ms"] = e.report.timings_ms;
    if (e.report.exit_code == kExitOk) ++passed;
    files.push_back(f);
  }
  return {{"files", files},
          {"passed", passed},
          {"failed", static_cast<int>(entries.size()) - passed}};
}

}  // namespace odered
