/**
 * @file expr.hpp
 * @brief Immutable expression trees: parsing, printing, evaluation,
 *        differentiation and conservative simplification.
 */
#pragma once

#include <array>
#include <initializer_list>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace odered {

class Expr;
struct Node;

/// Raised by parse() with the 0-based offset of the offending character.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at position " + std::to_string(pos)), pos_(pos) {}
  [[nodiscard]] std::size_t position() const noexcept { return pos_; }

 private:
  std::size_t pos_;
};

/// Raised by eval() on ln of a nonpositive value, division by zero, etc.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Op {
  Const,
  Var,
  Neg,
  Exp,
  Ln,
  Sin,
  Cos,
  Tan,
  Atan,
  Sqrt,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Call,
};

/**
 * A real function of one real argument that can appear inside an expression
 * tree as an opaque call node. Antiderivatives, numerically integrated
 * solutions and the Jacobi elliptic functions are wired in this way so that
 * evaluation and symbolic differentiation stay total on the tree.
 */
class Function {
 public:
  virtual ~Function() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual double value(double t) const = 0;
  /// f'(arg) as an expression (the chain-rule factor is applied by the caller).
  [[nodiscard]] virtual Expr derivative(const Expr& arg) const = 0;
  /// True when value() is backed by quadrature or ODE integration.
  [[nodiscard]] virtual bool numeric() const { return false; }
};

class Expr {
 public:
  Expr();  // constant 0 (null node)
  Expr(double c);  // NOLINT(google-explicit-constructor)

  static Expr constant(double c);
  static Expr var(std::string name);
  static Expr unary(Op op, Expr arg);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr call(std::shared_ptr<const Function> fn, Expr arg);

  [[nodiscard]] Op op() const;
  [[nodiscard]] double value() const;             // Const only
  [[nodiscard]] const std::string& name() const;  // Var only
  [[nodiscard]] const Expr& arg() const;          // unary / Call
  [[nodiscard]] const Expr& lhs() const;
  [[nodiscard]] const Expr& rhs() const;
  [[nodiscard]] const std::shared_ptr<const Function>& function() const;

  [[nodiscard]] bool is_const() const { return op() == Op::Const; }
  [[nodiscard]] bool is_const(double c) const { return is_const() && value() == c; }

  [[nodiscard]] std::string str() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Node {
  Op op = Op::Const;
  double value = 0.0;
  std::string name;
  Expr a;
  Expr b;
  std::shared_ptr<const Function> fn;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr exp(const Expr& e);
Expr ln(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr tan(const Expr& e);
Expr atan(const Expr& e);
Expr sqrt(const Expr& e);

/// Variable bindings for eval(). Fixed inline capacity, linear lookup; names
/// are views, so the referenced strings must outlive the Env.
class Env {
 public:
  struct Binding {
    std::string_view name;
    double value;
  };
  static constexpr std::size_t kCapacity = 8;

  Env() = default;
  Env(std::initializer_list<Binding> init);
  void set(std::string_view name, double v);
  [[nodiscard]] const double* find(std::string_view name) const {
    for (std::size_t i = 0; i < size_; ++i)
      if (items_[i].name == name) return &items_[i].value;
    return nullptr;
  }

 private:
  std::array<Binding, kCapacity> items_{};
  std::size_t size_ = 0;
};

Expr parse(std::string_view text, const std::vector<std::string>& allowed_vars);

double eval(const Expr& e, const Env& env);
/// Convenience for single-variable expressions.
double eval(const Expr& e, std::string_view var, double at);

Expr differentiate(const Expr& e, std::string_view var);
Expr simplify(const Expr& e);
Expr substitute(const Expr& e, std::string_view var, const Expr& replacement);

[[nodiscard]] bool depends_on(const Expr& e, std::string_view var);
[[nodiscard]] std::vector<std::string> free_variables(const Expr& e);
/// True if any call node in the tree is backed by numerics.
[[nodiscard]] bool has_numeric_calls(const Expr& e);

/// Shortest round-trip decimal for a double.
std::string format_number(double v);

}  // namespace odered
