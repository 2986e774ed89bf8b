#include "odered/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

namespace odered {

namespace {

std::shared_ptr<const Node> make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

Expr zero_expr() { return Expr::constant(0.0); }

}  // namespace

// ---------------------------------------------------------------- construction

Expr::Expr() = default;

Expr::Expr(double c) : node_(make_node(Node{Op::Const, c, {}, {}, {}, {}})) {}

Expr Expr::constant(double c) { return Expr(c == 0.0 ? 0.0 : c); }

Expr Expr::var(std::string name) {
  Node n;
  n.op = Op::Var;
  n.name = std::move(name);
  return Expr(make_node(std::move(n)));
}

Expr Expr::unary(Op op, Expr arg) {
  Node n;
  n.op = op;
  n.a = std::move(arg);
  return Expr(make_node(std::move(n)));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  Node n;
  n.op = op;
  n.a = std::move(lhs);
  n.b = std::move(rhs);
  return Expr(make_node(std::move(n)));
}

Expr Expr::call(std::shared_ptr<const Function> fn, Expr arg) {
  Node n;
  n.op = Op::Call;
  n.fn = std::move(fn);
  n.a = std::move(arg);
  return Expr(make_node(std::move(n)));
}

Op Expr::op() const { return node_ ? node_->op : Op::Const; }
double Expr::value() const { return node_ ? node_->value : 0.0; }
const std::string& Expr::name() const { return node_->name; }
const Expr& Expr::arg() const { return node_->a; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }
const std::shared_ptr<const Function>& Expr::function() const { return node_->fn; }

bool operator==(const Expr& x, const Expr& y) {
  if (x.node_ == y.node_) return true;
  if (x.op() != y.op()) return false;
  switch (x.op()) {
    case Op::Const:
      return x.value() == y.value();
    case Op::Var:
      return x.name() == y.name();
    case Op::Call:
      return x.function() == y.function() && x.arg() == y.arg();
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return x.lhs() == y.lhs() && x.rhs() == y.rhs();
    default:
      return x.arg() == y.arg();
  }
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(Op::Neg, a); }
Expr pow(const Expr& base, const Expr& exponent) { return Expr::binary(Op::Pow, base, exponent); }
Expr exp(const Expr& e) { return Expr::unary(Op::Exp, e); }
Expr ln(const Expr& e) { return Expr::unary(Op::Ln, e); }
Expr sin(const Expr& e) { return Expr::unary(Op::Sin, e); }
Expr cos(const Expr& e) { return Expr::unary(Op::Cos, e); }
Expr tan(const Expr& e) { return Expr::unary(Op::Tan, e); }
Expr atan(const Expr& e) { return Expr::unary(Op::Atan, e); }
Expr sqrt(const Expr& e) { return Expr::unary(Op::Sqrt, e); }

// ---------------------------------------------------------------- printing

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

const char* unary_name(Op op) {
  switch (op) {
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Tan: return "tan";
    case Op::Atan: return "atan";
    case Op::Sqrt: return "sqrt";
    default: return "?";
  }
}

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return e.value() < 0 ? 3 : 5;
    default: return 5;
  }
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::Const:
      out += format_number(e.value());
      return;
    case Op::Var:
      out += e.name();
      return;
    case Op::Neg:
      out += '-';
      print_wrapped(e.arg(), precedence(e.arg()) < 3, out);
      return;
    case Op::Call:
      out += e.function()->name();
      out += '(';
      print(e.arg(), out);
      out += ')';
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(e);
      print_wrapped(e.lhs(), precedence(e.lhs()) < p, out);
      switch (e.op()) {
        case Op::Add: out += " + "; break;
        case Op::Sub: out += " - "; break;
        case Op::Mul: out += '*'; break;
        default: out += '/'; break;
      }
      print_wrapped(e.rhs(), precedence(e.rhs()) <= p, out);
      return;
    }
    case Op::Pow:
      print_wrapped(e.lhs(), precedence(e.lhs()) <= 4, out);
      out += '^';
      print_wrapped(e.rhs(), precedence(e.rhs()) < 3, out);
      return;
    default:
      out += unary_name(e.op());
      out += '(';
      print(e.arg(), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string Expr::str() const {
  std::string out;
  print(*this, out);
  return out;
}

// ---------------------------------------------------------------- parsing

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  Expr run() {
    Expr e = expression();
    skip_ws();
    if (pos_ != s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + term();
      } else if (accept('-')) {
        lhs = lhs - term();
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * unary();
      } else if (accept('/')) {
        lhs = lhs / unary();
      } else {
        return lhs;
      }
    }
  }

  // unary minus binds looser than '^': -x^2 == -(x^2). A minus applied
  // directly to a literal folds into a negative constant.
  Expr unary() {
    if (accept('-')) {
      Expr operand = unary();
      if (operand.is_const()) return Expr::constant(-operand.value());
      return -operand;
    }
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return pow(base, unary());
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < s_.size() && (s_[look] == '+' || s_[look] == '-')) ++look;
      if (look < s_.size() && std::isdigit(static_cast<unsigned char>(s_[look]))) {
        pos_ = look;
        digits();
      }
    }
    double v = 0.0;
    auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc{} || res.ptr != s_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string id(s_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      const Op op = function_op(id, start);
      ++pos_;
      std::vector<Expr> args;
      skip_ws();
      if (!accept(')')) {
        args.push_back(expression());
        while (accept(',')) args.push_back(expression());
        if (!accept(')')) fail("expected ')'");
      }
      if (args.size() != 1) {
        pos_ = start;
        fail("function '" + id + "' takes 1 argument, got " + std::to_string(args.size()));
      }
      return Expr::unary(op, args.front());
    }
    if (std::find(vars_.begin(), vars_.end(), id) != vars_.end()) return Expr::var(id);
    if (id == "pi") return Expr::constant(std::numbers::pi);
    if (id == "e") return Expr::constant(std::numbers::e);
    pos_ = start;
    fail("unknown identifier '" + id + "'");
  }

  Op function_op(const std::string& id, std::size_t start) {
    if (id == "exp") return Op::Exp;
    if (id == "ln" || id == "log") return Op::Ln;
    if (id == "sin") return Op::Sin;
    if (id == "cos") return Op::Cos;
    if (id == "tan") return Op::Tan;
    if (id == "atan" || id == "arctan") return Op::Atan;
    if (id == "sqrt") return Op::Sqrt;
    pos_ = start;
    fail("unknown function '" + id + "'");
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const std::vector<std::string>& allowed_vars) {
  return Parser(text, allowed_vars).run();
}

// ---------------------------------------------------------------- evaluation

Env::Env(std::initializer_list<Binding> init) {
  for (const auto& b : init) set(b.name, b.value);
}

void Env::set(std::string_view name, double v) {
  for (std::size_t i = 0; i < size_; ++i) {
    if (items_[i].name == name) {
      items_[i].value = v;
      return;
    }
  }
  if (size_ == kCapacity) throw std::length_error("Env: too many bindings");
  items_[size_++] = Binding{name, v};
}

namespace {

double checked(double v, const Expr& e) {
  if (!std::isfinite(v)) throw DomainError("non-finite value in " + e.str());
  return v;
}

double eval_impl(const Expr& e, const Env& env) {
  switch (e.op()) {
    case Op::Const:
      return e.value();
    case Op::Var: {
      const double* v = env.find(e.name());
      if (v == nullptr) throw DomainError("unbound variable '" + e.name() + "'");
      return *v;
    }
    case Op::Neg:
      return -eval_impl(e.arg(), env);
    case Op::Exp:
      return checked(std::exp(eval_impl(e.arg(), env)), e);
    case Op::Ln: {
      const double a = eval_impl(e.arg(), env);
      if (!(a > 0.0)) throw DomainError("ln of nonpositive value in " + e.str());
      return std::log(a);
    }
    case Op::Sin:
      return std::sin(eval_impl(e.arg(), env));
    case Op::Cos:
      return std::cos(eval_impl(e.arg(), env));
    case Op::Tan:
      return checked(std::tan(eval_impl(e.arg(), env)), e);
    case Op::Atan:
      return std::atan(eval_impl(e.arg(), env));
    case Op::Sqrt: {
      const double a = eval_impl(e.arg(), env);
      if (a < 0.0) throw DomainError("sqrt of negative value in " + e.str());
      return std::sqrt(a);
    }
    case Op::Add:
      return eval_impl(e.lhs(), env) + eval_impl(e.rhs(), env);
    case Op::Sub:
      return eval_impl(e.lhs(), env) - eval_impl(e.rhs(), env);
    case Op::Mul:
      return checked(eval_impl(e.lhs(), env) * eval_impl(e.rhs(), env), e);
    case Op::Div: {
      const double num = eval_impl(e.lhs(), env);
      const double den = eval_impl(e.rhs(), env);
      if (den == 0.0) throw DomainError("division by zero in " + e.str());
      return checked(num / den, e);
    }
    case Op::Pow: {
      const double base = eval_impl(e.lhs(), env);
      const double ex = eval_impl(e.rhs(), env);
      if (base < 0.0 && ex != std::trunc(ex))
        throw DomainError("negative base with non-integer exponent in " + e.str());
      if (base == 0.0 && ex < 0.0) throw DomainError("zero to a negative power in " + e.str());
      return checked(std::pow(base, ex), e);
    }
    case Op::Call:
      return e.function()->value(eval_impl(e.arg(), env));
  }
  return 0.0;
}

}  // namespace

double eval(const Expr& e, const Env& env) { return eval_impl(e, env); }

double eval(const Expr& e, std::string_view var, double at) {
  return eval_impl(e, Env{{var, at}});
}

// ---------------------------------------------------------------- queries

bool depends_on(const Expr& e, std::string_view var) {
  switch (e.op()) {
    case Op::Const:
      return false;
    case Op::Var:
      return e.name() == var;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return depends_on(e.lhs(), var) || depends_on(e.rhs(), var);
    default:
      return depends_on(e.arg(), var);
  }
}

namespace {

void collect_vars(const Expr& e, std::set<std::string>& out) {
  switch (e.op()) {
    case Op::Const:
      return;
    case Op::Var:
      out.insert(e.name());
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      collect_vars(e.lhs(), out);
      collect_vars(e.rhs(), out);
      return;
    default:
      collect_vars(e.arg(), out);
      return;
  }
}

}  // namespace

std::vector<std::string> free_variables(const Expr& e) {
  std::set<std::string> vars;
  collect_vars(e, vars);
  return {vars.begin(), vars.end()};
}

bool has_numeric_calls(const Expr& e) {
  switch (e.op()) {
    case Op::Const:
    case Op::Var:
      return false;
    case Op::Call:
      return e.function()->numeric() || has_numeric_calls(e.arg());
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return has_numeric_calls(e.lhs()) || has_numeric_calls(e.rhs());
    default:
      return has_numeric_calls(e.arg());
  }
}

Expr substitute(const Expr& e, std::string_view var, const Expr& replacement) {
  switch (e.op()) {
    case Op::Const:
      return e;
    case Op::Var:
      return e.name() == var ? replacement : e;
    case Op::Call:
      return Expr::call(e.function(), substitute(e.arg(), var, replacement));
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return Expr::binary(e.op(), substitute(e.lhs(), var, replacement),
                          substitute(e.rhs(), var, replacement));
    default:
      return Expr::unary(e.op(), substitute(e.arg(), var, replacement));
  }
}

// ---------------------------------------------------------------- differentiation

Expr differentiate(const Expr& e, std::string_view var) {
  if (!depends_on(e, var)) return zero_expr();
  const auto d = [var](const Expr& s) { return differentiate(s, var); };
  Expr out;
  switch (e.op()) {
    case Op::Const:
      return zero_expr();
    case Op::Var:
      return Expr::constant(1.0);
    case Op::Neg:
      out = -d(e.arg());
      break;
    case Op::Exp:
      out = e * d(e.arg());
      break;
    case Op::Ln:
      out = d(e.arg()) / e.arg();
      break;
    case Op::Sin:
      out = cos(e.arg()) * d(e.arg());
      break;
    case Op::Cos:
      out = -(sin(e.arg()) * d(e.arg()));
      break;
    case Op::Tan:
      out = d(e.arg()) / pow(cos(e.arg()), 2.0);
      break;
    case Op::Atan:
      out = d(e.arg()) / (Expr(1.0) + pow(e.arg(), 2.0));
      break;
    case Op::Sqrt:
      out = d(e.arg()) / (Expr(2.0) * e);
      break;
    case Op::Add:
      out = d(e.lhs()) + d(e.rhs());
      break;
    case Op::Sub:
      out = d(e.lhs()) - d(e.rhs());
      break;
    case Op::Mul:
      out = d(e.lhs()) * e.rhs() + e.lhs() * d(e.rhs());
      break;
    case Op::Div:
      out = d(e.lhs()) / e.rhs() - e.lhs() * d(e.rhs()) / pow(e.rhs(), 2.0);
      break;
    case Op::Pow: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      if (!depends_on(v, var)) {
        out = v * pow(u, v - Expr(1.0)) * d(u);
      } else {
        out = e * (d(v) * ln(u) + v * d(u) / u);
      }
      break;
    }
    case Op::Call:
      out = e.function()->derivative(e.arg()) * d(e.arg());
      break;
  }
  return simplify(out);
}

// ---------------------------------------------------------------- simplification

namespace {

bool is_neg_const(const Expr& e) { return e.is_const() && e.value() < 0.0; }

std::optional<double> try_fold(const Expr& e) {
  try {
    const double v = eval(e, Env{});
    if (std::isfinite(v)) return v;
  } catch (const DomainError&) {
  }
  return std::nullopt;
}

Expr rewrite(const Expr& e);

Expr rewrite_children(const Expr& e) {
  switch (e.op()) {
    case Op::Const:
    case Op::Var:
      return e;
    case Op::Call:
      return Expr::call(e.function(), rewrite(e.arg()));
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return Expr::binary(e.op(), rewrite(e.lhs()), rewrite(e.rhs()));
    default:
      return Expr::unary(e.op(), rewrite(e.arg()));
  }
}

Expr rewrite(const Expr& in) {
  const Expr e = rewrite_children(in);
  const Op op = e.op();
  if (op == Op::Const || op == Op::Var) return e;

  if (op != Op::Call) {
    const bool all_const = (op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div ||
                            op == Op::Pow)
                               ? (e.lhs().is_const() && e.rhs().is_const())
                               : e.arg().is_const();
    if (all_const) {
      if (auto v = try_fold(e)) return Expr::constant(*v);
      return e;
    }
  }

  switch (op) {
    case Op::Neg: {
      const Expr& a = e.arg();
      if (a.op() == Op::Neg) return a.arg();
      if (a.op() == Op::Sub) return a.rhs() - a.lhs();
      if (a.op() == Op::Mul && a.lhs().is_const()) return Expr::constant(-a.lhs().value()) * a.rhs();
      return e;
    }
    case Op::Add: {
      const Expr &a = e.lhs(), &b = e.rhs();
      if (a.is_const(0.0)) return b;
      if (b.is_const(0.0)) return a;
      if (b.op() == Op::Neg) return a - b.arg();
      if (is_neg_const(b)) return a - Expr::constant(-b.value());
      if (a.op() == Op::Neg) return b - a.arg();
      return e;
    }
    case Op::Sub: {
      const Expr &a = e.lhs(), &b = e.rhs();
      if (b.is_const(0.0)) return a;
      if (a.is_const(0.0)) return -b;
      if (a == b) return Expr::constant(0.0);
      if (b.op() == Op::Neg) return a + b.arg();
      if (is_neg_const(b)) return a + Expr::constant(-b.value());
      return e;
    }
    case Op::Mul: {
      const Expr &a = e.lhs(), &b = e.rhs();
      if (a.is_const(0.0) || b.is_const(0.0)) return Expr::constant(0.0);
      if (a.is_const(1.0)) return b;
      if (b.is_const(1.0)) return a;
      if (a.is_const(-1.0)) return -b;
      if (b.is_const(-1.0)) return -a;
      if (b.is_const()) return b * a;
      if (a.is_const() && b.op() == Op::Mul && b.lhs().is_const())
        return Expr::constant(a.value() * b.lhs().value()) * b.rhs();
      if (a.op() == Op::Neg) return -(a.arg() * b);
      if (b.op() == Op::Neg) return -(a * b.arg());
      if (b.op() == Op::Div && b.lhs().is_const(1.0)) return a / b.rhs();
      if (a.op() == Op::Div && a.lhs().is_const(1.0)) return b / a.rhs();
      if (b.op() == Op::Pow && b.rhs().is_const(-1.0)) return a / b.lhs();
      if (a.op() == Op::Pow && a.rhs().is_const(-1.0)) return b / a.lhs();
      return e;
    }
    case Op::Div: {
      const Expr &a = e.lhs(), &b = e.rhs();
      if (b.is_const(1.0)) return a;
      if (b.is_const(-1.0)) return -a;
      if (a.is_const(0.0)) return Expr::constant(0.0);
      if (a == b) return Expr::constant(1.0);
      if (a.op() == Op::Neg) return -(a.arg() / b);
      return e;
    }
    case Op::Pow: {
      const Expr &a = e.lhs(), &b = e.rhs();
      if (b.is_const(0.0)) return Expr::constant(1.0);
      if (b.is_const(1.0)) return a;
      if (a.is_const(1.0)) return Expr::constant(1.0);
      return e;
    }
    case Op::Exp: {
      const Expr& a = e.arg();
      if (a.op() == Op::Ln) return a.arg();
      if (a.op() == Op::Mul && a.lhs().is_const() && a.rhs().op() == Op::Ln)
        return pow(a.rhs().arg(), a.lhs());
      if (a.op() == Op::Neg && a.arg().op() == Op::Ln) return Expr(1.0) / a.arg().arg();
      if (a.op() == Op::Sub && a.rhs().is_const())
        return Expr::constant(std::exp(-a.rhs().value())) * exp(a.lhs());
      if (a.op() == Op::Add && a.rhs().is_const())
        return Expr::constant(std::exp(a.rhs().value())) * exp(a.lhs());
      return e;
    }
    case Op::Ln: {
      const Expr& a = e.arg();
      if (a.op() == Op::Exp) return a.arg();
      return e;
    }
    default:
      return e;
  }
}

}  // namespace

Expr simplify(const Expr& e) {
  Expr cur = e;
  for (int i = 0; i < 64; ++i) {
    Expr next = rewrite(cur);
    if (next == cur) return next;
    cur = std::move(next);
  }
  return cur;
}

}  // namespace odered
