// Command-line front-end: classify, reduce, solve and verify problem files.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "odered/generator.hpp"
#include "odered/report.hpp"

using namespace odered;

namespace {

struct Flags {
  std::string target;
  std::optional<double> tol;
  std::optional<double> interval;
  std::string out;
  std::string format = "report";
  std::uint64_t seed = 1;
  bool no_timings = false;
};

void emit(const Flags& f, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(f.out);
  if (!os) throw std::runtime_error("cannot write " + f.out);
  os << text;
}

std::string render(const Flags& f, const RunResult& r) {
  std::ostringstream os;
  if (f.format == "table") {
    if (r.table) write_csv(os, *r.table);
    else os << "x,y,yp,residual\n";
  } else {
    os << to_json(r.report, !f.no_timings).dump(2) << '\n';
  }
  return os.str();
}

Problem demo_problem(const std::string& name, std::uint64_t seed) {
  const std::string prefix = "random-";
  if (name.rfind(prefix, 0) != 0) return named_example(name);
  const ClassTag tag = class_tag_from_string(name.substr(prefix.size()));
  ProblemGenerator g(seed);
  const auto gp = g.descriptor(tag);
  Problem p;
  p.name = name;
  p.tag = tag;
  p.m = gp.d.m;
  p.a = gp.d.a.str();
  p.F = gp.d.F.str();
  p.G = gp.d.G.str();
  p.F2 = gp.d.F2.str();
  p.ic = gp.ic;
  p.interval_end = gp.x1;
  return p;
}

int run_file(const Flags& f, RunResult (*cmd)(const Problem&, const RunOptions&)) {
  Problem p;
  try {
    p = load_problem(f.target);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  const auto r = cmd(p, {f.tol, f.interval});
  for (const auto& e : r.report.errors) std::cerr << "error: " << e << '\n';
  emit(f, render(f, r));
  return r.report.exit_code;
}

int run_verify_target(const Flags& f) {
  if (!std::filesystem::is_directory(f.target)) return run_file(f, run_verify);
  const auto entries = run_verify_batch(f.target, {f.tol, f.interval});
  const auto summary = batch_summary(entries, !f.no_timings);
  emit(f, summary.dump(2) + "\n");
  for (const auto& e : entries)
    std::cerr << e.file << ": " << (e.report.exit_code == kExitOk ? "pass" : "fail") << '\n';
  return summary.at("failed").get<int>() == 0 ? kExitOk : kExitFail;
}

int run_demo(const Flags& f) {
  Problem p;
  try {
    p = demo_problem(f.target, f.seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  const RunOptions o{f.tol, f.interval};
  const auto solved = run_solve(p, o);
  const auto verified = run_verify(p, o);
  if (f.format == "table" || !f.out.empty()) {
    emit(f, render(f, verified));
  } else {
    const auto& s = solved.report;
    std::cout << p.name << ": class " << to_string(p.tag) << ", ic (" << p.ic.x0 << ", "
              << p.ic.y0 << ", " << p.ic.yp0 << "), x1 = " << p.interval_end << '\n';
    if (s.reduction) {
      std::cout << "  y' = " << s.reduction->shape << "\n  K = " << s.reduction->K << '\n';
      if (!s.reduction->form.empty()) std::cout << "  K-equation form: " << s.reduction->form << '\n';
    }
    if (s.solution) std::cout << "  solution: " << s.solution->text << '\n';
    for (const auto& e : s.errors) std::cout << "  error: " << e << '\n';
    if (verified.report.verification) {
      const auto& v = *verified.report.verification;
      std::cout << "  residual_sup = " << v.residual_sup << ", trajectory_dev = " << v.trajectory_dev
                << " -> " << (v.pass ? "pass" : "fail") << '\n';
      for (const auto& d : v.diagnostics) std::cout << "  " << d << '\n';
    }
  }
  return verified.report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"odered: order reduction of second-order ODE classes"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&f](CLI::App* c, const char* what) {
    c->add_option("target", f.target, what)->required();
    c->add_option("--tol", f.tol, "integrator tolerance");
    c->add_option("--interval", f.interval, "end of the x interval");
    c->add_option("--out", f.out, "write output to this path");
    c->add_option("--format", f.format, "report (JSON) or table (CSV)")
        ->check(CLI::IsMember({"report", "table"}));
    c->add_flag("--no-timings", f.no_timings, "omit timings from the report");
  };
  auto* classify = app.add_subcommand("classify", "validate and detect the K-equation form");
  auto* reduce = app.add_subcommand("reduce", "print the reduced first-order equation");
  auto* solve = app.add_subcommand("solve", "closed form when available, else a numeric table");
  auto* verify = app.add_subcommand("verify", "two-route check of a file or a directory");
  auto* demo = app.add_subcommand("demo", "run a bundled example or random-<class>");
  common(classify, "problem file");
  common(reduce, "problem file");
  common(solve, "problem file");
  common(verify, "problem file or directory");
  common(demo, "example name");
  demo->add_option("--seed", f.seed, "generator seed for random-<class>");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }
  try {
    if (*classify) return run_file(f, run_classify);
    if (*reduce) return run_file(f, run_reduce);
    if (*solve) return run_file(f, run_solve);
    if (*verify) return run_verify_target(f);
    return run_demo(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}
