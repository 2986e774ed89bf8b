#include "odered/problem.hpp"

#include <fstream>

namespace odered {

namespace {

using nlohmann::json;

const char* k_variable(ClassTag t) { return t == ClassTag::IV ? "x" : "y"; }

Expr parse_field(const std::string& field, const std::string& text,
                 const std::vector<std::string>& vars) {
  try {
    return parse(text, vars);
  } catch (const ParseError& e) {
    throw ValidationError(field, e.what());
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& field) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(field, "missing or of the wrong type");
  }
}

template <class T>
void maybe(const json& j, const std::string& key, T& out, const std::string& field) {
  if (j.contains(key)) out = get<T>(j, key, field);
}

Problem base_problem(const std::string& key, ClassTag tag, const char* a, const char* F2,
                     InitialCondition ic, double x1) {
  Problem p;
  p.name = key;
  p.example = key;
  p.tag = tag;
  p.a = a;
  p.F2 = F2;
  p.ic = ic;
  p.interval_end = x1;
  return p;
}

}  // namespace

ClassDescriptor Problem::descriptor() const {
  ClassDescriptor d;
  d.tag = tag;
  d.m = m;
  d.a = parse_field("a", a, {d.a_variable()});
  d.F = parse_field("F", F, {"x"});
  d.G = parse_field("G", G, {"y"});
  d.F2 = parse_field("F2", F2, {"u", "v"});
  validate(d, ic);
  return d;
}

ReduceOptions Problem::options() const {
  ReduceOptions o;
  o.interval_end = interval_end;
  if (particular) o.particular = parse_field("particular", *particular, {k_variable(tag)});
  if (k_closed) o.k_closed = parse_field("k_closed", *k_closed, {k_variable(tag)});
  if (implicit)
    o.implicit = std::make_pair(parse_field("implicit.left", implicit->first, {"y"}),
                                parse_field("implicit.right", implicit->second, {"x"}));
  return o;
}

bool Problem::operator==(const Problem& o) const {
  return tag == o.tag && m == o.m && a == o.a && F == o.F && G == o.G && F2 == o.F2 &&
         ic.x0 == o.ic.x0 && ic.y0 == o.ic.y0 && ic.yp0 == o.ic.yp0 &&
         interval_end == o.interval_end && tol.integrator == o.tol.integrator &&
         tol.residual == o.tol.residual && tol.trajectory == o.tol.trajectory &&
         example == o.example && particular == o.particular && k_closed == o.k_closed &&
         implicit == o.implicit;
}

Problem problem_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("problem", "expected a JSON object");
  Problem p;
  if (j.contains("example")) p = named_example(get<std::string>(j, "example", "example"));
  else if (!j.contains("class")) throw ValidationError("class", "missing");
  if (j.contains("class")) {
    try {
      p.tag = class_tag_from_string(get<std::string>(j, "class", "class"));
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      throw ValidationError("class", e.what());
    }
  }
  maybe(j, "m", p.m, "m");
  maybe(j, "a", p.a, "a");
  maybe(j, "F", p.F, "F");
  maybe(j, "G", p.G, "G");
  maybe(j, "F2", p.F2, "F2");
  if (j.contains("initial_condition")) {
    const json& ic = j.at("initial_condition");
    if (!ic.is_object()) throw ValidationError("initial_condition", "expected an object");
    p.ic.x0 = get<double>(ic, "x0", "initial_condition.x0");
    p.ic.y0 = get<double>(ic, "y0", "initial_condition.y0");
    p.ic.yp0 = get<double>(ic, "yp0", "initial_condition.yp0");
  } else if (!p.example) {
    throw ValidationError("initial_condition", "missing");
  }
  maybe(j, "interval_end", p.interval_end, "interval_end");
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    maybe(t, "integrator", p.tol.integrator, "tolerances.integrator");
    maybe(t, "residual", p.tol.residual, "tolerances.residual");
    maybe(t, "trajectory", p.tol.trajectory, "tolerances.trajectory");
  }
  for (const char* f : {"particular", "k_closed"}) {
    if (!j.contains(f)) continue;
    auto& slot = std::string(f) == "particular" ? p.particular : p.k_closed;
    slot = get<std::string>(j, f, f);
  }
  if (j.contains("implicit")) {
    const json& im = j.at("implicit");
    p.implicit = std::make_pair(get<std::string>(im, "left", "implicit.left"),
                                get<std::string>(im, "right", "implicit.right"));
  }
  if (!(p.interval_end != p.ic.x0)) throw ValidationError("interval_end", "must differ from x0");
  (void)p.descriptor();
  (void)p.options();
  return p;
}

json to_json(const Problem& p) {
  json j;
  j["class"] = to_string(p.tag);
  j["m"] = p.m;
  j["a"] = p.a;
  j["F"] = p.F;
  j["G"] = p.G;
  j["F2"] = p.F2;
  j["initial_condition"] = {{"x0", p.ic.x0}, {"y0", p.ic.y0}, {"yp0", p.ic.yp0}};
  j["interval_end"] = p.interval_end;
  j["tolerances"] = {{"integrator", p.tol.integrator},
                     {"residual", p.tol.residual},
                     {"trajectory", p.tol.trajectory}};
  if (p.example) j["example"] = *p.example;
  if (p.particular) j["particular"] = *p.particular;
  if (p.k_closed) j["k_closed"] = *p.k_closed;
  if (p.implicit) j["implicit"] = {{"left", p.implicit->first}, {"right", p.implicit->second}};
  return j;
}

Problem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("file", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("file", std::string("invalid JSON: ") + e.what());
  }
  Problem p = problem_from_json(j);
  p.name = path.stem().string();
  return p;
}

const std::vector<std::string>& example_names() {
  static const std::vector<std::string> names{"eqx10", "eqxx10", "eqxxx10", "eqx1", "eqxx1"};
  return names;
}

Problem named_example(const std::string& key) {
  if (key == "eqx10") {
    // y'' + y'/x = (y'/y)^2 + 2y'^2/(xy); K = y^2/(3 - y).
    Problem p = base_problem(key, ClassTag::III, "1/x", "v*((v/u)^2 + 2*(v/u))", {1, 1, 0.5}, 1.8);
    p.implicit = std::make_pair("-3/y - ln(y)", "ln(x)");
    return p;
  }
  if (key == "eqxx10") {
    Problem p = base_problem(key, ClassTag::III, "2/x", "v*(v + v^3)", {1, 0, 1}, 1.2);
    p.implicit =
        std::make_pair("atan(sqrt(2*exp(-2*y) - 1)) - sqrt(2*exp(-2*y) - 1)", "-1/x");
    return p;
  }
  if (key == "eqxxx10") {
    // K K' = K + 2y with K(0) = 1: (K - 2y)^2 (K + y) = 1, Cardano root for y^3 <= 1/4.
    Problem p = base_problem(key, ClassTag::III, "-1/x", "v + 2*u", {1, 0, 1}, 1.3);
    p.k_closed =
        "y + (0.5 - y^3 + sqrt(0.25 - y^3))^(1/3) + y^2/(0.5 - y^3 + sqrt(0.25 - y^3))^(1/3)";
    return p;
  }
  if (key == "eqx1")
    return base_problem(key, ClassTag::IV, "-1/y", "sqrt((1 - v^2)*(1 - 0.25*v^2))", {0, 1, 0},
                        1.0);
  if (key == "eqxx1") {
    Problem p = base_problem(key, ClassTag::IV, "-1/y", "-2/u^2 + v^2", {1, 1, 0.25}, 2.0);
    p.particular = "1/x";
    return p;
  }
  throw ValidationError("example", "unknown example '" + key + "'");
}

}  // namespace odered
