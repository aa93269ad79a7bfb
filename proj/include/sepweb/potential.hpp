#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sepweb/space.hpp"

namespace sepweb {

struct ParseError : std::runtime_error {
  int position;
  ParseError(const std::string& msg, int pos) : std::runtime_error(msg), position(pos) {}
};

// Expression AST for potentials: constants, variables q1..qn, + - * / ^,
// unary minus, and a fixed function set.  Exponents are integers or
// half-integers; general powers go through exp/log explicitly.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprOp {
  Num, Var, Add, Sub, Mul, Div, Pow, Neg,
  Sin, Cos, Sinh, Cosh, Exp, Log, Sqrt, Abs
};

struct Expr {
  ExprOp op = ExprOp::Num;
  double value = 0.0;      // Num
  int var = -1;            // Var
  int pow_num = 0;         // Pow exponent numerator
  int pow_den = 1;         // Pow exponent denominator (1 or 2)
  ExprPtr a, b;

  static ExprPtr num(double v);
  static ExprPtr variable(int i);
  static ExprPtr make(ExprOp op, ExprPtr a, ExprPtr b = nullptr);
  static ExprPtr pow(ExprPtr base, int num, int den = 1);
};

ExprPtr parse_expression(const std::string& src, const std::vector<std::string>& var_names);
ExprPtr differentiate(const ExprPtr& e, int var);
ExprPtr simplify(const ExprPtr& e);
double eval_expr(const ExprPtr& e, const Vec& q);
std::string print_expr(const ExprPtr& e);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Scalar field on a space with first and second derivative contracts.
class PotentialField {
 public:
  virtual ~PotentialField() = default;
  virtual const PseudoSpace& space() const = 0;
  virtual double eval(const Vec& q) const = 0;
  virtual Vec gradient(const Vec& q) const = 0;
  virtual Mat hessian(const Vec& q) const = 0;
  virtual bool analytic() const { return true; }
};

using PotentialPtr = std::shared_ptr<const PotentialField>;

// Parse a potential over a space.  Variable names: q1..qn always; aliases
// t,x,y (Lorentzian) or x,y,z (Euclidean) by position; lightlike aliases
// mu = (x+t)/sqrt2, nu = (x-t)/sqrt2 when nu(space) = 1 (substituted at parse
// time so differentiation stays exact).
PotentialPtr parse_potential(const std::string& src, const PseudoSpace& space);

// Built-ins: "calogero-moser" (E3), "morosi-tondo" (E3_1), "zero".
PotentialPtr builtin_potential(const std::string& name, const PseudoSpace& space);

// V composed with an affine embedding q = p0 + B z  (z: factor coordinates).
PotentialPtr restrict_affine(const PotentialPtr& V, const PseudoSpace& factor_space,
                             const Vec& p0, const Mat& B);

// numerical cross-check of the derivative contract (4th-order differences)
double derivative_check(const PotentialField& V, const Vec& q, double h = 1e-4);

}  // namespace sepweb
