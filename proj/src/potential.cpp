#include "sepweb/potential.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace sepweb {

ExprPtr Expr::num(double v) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Num;
  e->value = v;
  return e;
}

ExprPtr Expr::variable(int i) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Var;
  e->var = i;
  return e;
}

ExprPtr Expr::make(ExprOp op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr Expr::pow(ExprPtr base, int num, int den) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Pow;
  e->a = std::move(base);
  e->pow_num = num;
  e->pow_den = den;
  return e;
}

namespace {

struct Token {
  enum Kind { Num, Ident, Op, End } kind;
  double value = 0.0;
  std::string text;
  int pos = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }
  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    tok_.pos = static_cast<int>(i_);
    if (i_ >= s_.size()) {
      tok_.kind = Token::End;
      return;
    }
    char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t end = i_;
      while (end < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[end])) ||
                                 s_[end] == '.' || s_[end] == 'e' || s_[end] == 'E' ||
                                 ((s_[end] == '+' || s_[end] == '-') && end > i_ &&
                                  (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
        ++end;
      tok_.kind = Token::Num;
      tok_.text = s_.substr(i_, end - i_);
      try {
        tok_.value = std::stod(tok_.text);
      } catch (...) {
        throw ParseError("malformed number '" + tok_.text + "'", tok_.pos);
      }
      i_ = end;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t end = i_;
      while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_'))
        ++end;
      tok_.kind = Token::Ident;
      tok_.text = s_.substr(i_, end - i_);
      i_ = end;
      return;
    }
    tok_.kind = Token::Op;
    tok_.text = std::string(1, c);
    ++i_;
  }

  std::string s_;
  size_t i_ = 0;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& src, const std::vector<std::string>& names)
      : lex_(src), names_(names) {}

  ExprPtr parse() {
    ExprPtr e = sum();
    if (lex_.peek().kind != Token::End)
      throw ParseError("unexpected trailing input '" + lex_.peek().text + "'", lex_.peek().pos);
    return e;
  }

 private:
  bool accept(const std::string& op) {
    if (lex_.peek().kind == Token::Op && lex_.peek().text == op) {
      lex_.next();
      return true;
    }
    return false;
  }

  ExprPtr sum() {
    ExprPtr e = term();
    for (;;) {
      if (accept("+")) e = Expr::make(ExprOp::Add, e, term());
      else if (accept("-")) e = Expr::make(ExprOp::Sub, e, term());
      else return e;
    }
  }

  ExprPtr term() {
    ExprPtr e = unary();
    for (;;) {
      if (accept("*")) e = Expr::make(ExprOp::Mul, e, unary());
      else if (accept("/")) e = Expr::make(ExprOp::Div, e, unary());
      else return e;
    }
  }

  ExprPtr unary() {
    if (accept("-")) return Expr::make(ExprOp::Neg, unary());
    if (accept("+")) return unary();
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    if (!accept("^")) return base;
    // right-associative; exponent is an (optionally signed) integer or
    // half-integer literal, possibly parenthesized
    bool neg = false;
    bool paren = accept("(");
    if (accept("-")) neg = true;
    Token t = lex_.next();
    if (t.kind != Token::Num)
      throw ParseError("exponent must be an integer or half-integer literal", t.pos);
    double v = t.value;
    int num, den;
    double twice = 2.0 * v;
    if (std::abs(v - std::round(v)) < 1e-12) {
      num = static_cast<int>(std::round(v));
      den = 1;
    } else if (std::abs(twice - std::round(twice)) < 1e-12) {
      num = static_cast<int>(std::round(twice));
      den = 2;
    } else {
      throw ParseError("only integer and half-integer exponents are supported", t.pos);
    }
    if (paren) {
      if (accept("/")) {
        Token d = lex_.next();
        if (d.kind != Token::Num || std::abs(d.value - 2.0) > 1e-12)
          throw ParseError("rational exponents are restricted to halves", d.pos);
        if (den == 2) throw ParseError("malformed exponent", d.pos);
        den = 2;
      }
      if (!accept(")")) throw ParseError("expected ')' after exponent", lex_.peek().pos);
    }
    if (neg) num = -num;
    return Expr::pow(base, num, den);
  }

  ExprPtr atom() {
    Token t = lex_.next();
    if (t.kind == Token::Num) return Expr::num(t.value);
    if (t.kind == Token::Op && t.text == "(") {
      ExprPtr e = sum();
      if (!accept(")")) throw ParseError("expected ')'", lex_.peek().pos);
      return e;
    }
    if (t.kind == Token::Ident) {
      static const std::map<std::string, ExprOp> funcs = {
          {"sin", ExprOp::Sin},   {"cos", ExprOp::Cos}, {"sinh", ExprOp::Sinh},
          {"cosh", ExprOp::Cosh}, {"exp", ExprOp::Exp}, {"log", ExprOp::Log},
          {"sqrt", ExprOp::Sqrt}, {"abs", ExprOp::Abs}};
      auto f = funcs.find(t.text);
      if (f != funcs.end()) {
        if (!accept("(")) throw ParseError("expected '(' after " + t.text, lex_.peek().pos);
        ExprPtr arg = sum();
        if (!accept(")")) throw ParseError("expected ')'", lex_.peek().pos);
        return Expr::make(f->second, arg);
      }
      if (t.text == "pi") return Expr::num(M_PI);
      for (size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == t.text) return Expr::variable(static_cast<int>(i));
      throw ParseError("unknown identifier '" + t.text + "'", t.pos);
    }
    throw ParseError("unexpected token '" + t.text + "'", t.pos);
  }

  Lexer lex_;
  std::vector<std::string> names_;
};

bool is_num(const ExprPtr& e, double v) { return e->op == ExprOp::Num && e->value == v; }

}  // namespace

ExprPtr parse_expression(const std::string& src, const std::vector<std::string>& var_names) {
  // names_ carries duplicates (aliases); the parser resolves to the first hit,
  // real variable indices are (index mod n) mapped by the caller
  Parser p(src, var_names);
  return simplify(p.parse());
}

ExprPtr simplify(const ExprPtr& e) {
  if (!e) return e;
  if (e->op == ExprOp::Num || e->op == ExprOp::Var) return e;
  ExprPtr a = simplify(e->a);
  ExprPtr b = e->b ? simplify(e->b) : nullptr;
  auto both_num = [&] { return a->op == ExprOp::Num && b && b->op == ExprOp::Num; };
  switch (e->op) {
    case ExprOp::Add:
      if (both_num()) return Expr::num(a->value + b->value);
      if (is_num(a, 0)) return b;
      if (is_num(b, 0)) return a;
      break;
    case ExprOp::Sub:
      if (both_num()) return Expr::num(a->value - b->value);
      if (is_num(b, 0)) return a;
      if (is_num(a, 0)) return simplify(Expr::make(ExprOp::Neg, b));
      break;
    case ExprOp::Mul:
      if (both_num()) return Expr::num(a->value * b->value);
      if (is_num(a, 0) || is_num(b, 0)) return Expr::num(0);
      if (is_num(a, 1)) return b;
      if (is_num(b, 1)) return a;
      break;
    case ExprOp::Div:
      if (both_num() && b->value != 0) return Expr::num(a->value / b->value);
      if (is_num(a, 0)) return Expr::num(0);
      if (is_num(b, 1)) return a;
      break;
    case ExprOp::Neg:
      if (a->op == ExprOp::Num) return Expr::num(-a->value);
      if (a->op == ExprOp::Neg) return a->a;
      break;
    case ExprOp::Pow:
      if (e->pow_num == 0) return Expr::num(1);
      if (e->pow_num == 1 && e->pow_den == 1) return a;
      if (a->op == ExprOp::Num && (e->pow_den == 1 ? a->value != 0.0 || e->pow_num > 0
                                                   : a->value >= 0.0))
        return Expr::num(std::pow(a->value, double(e->pow_num) / e->pow_den));
      return Expr::pow(a, e->pow_num, e->pow_den);
    default:
      break;
  }
  if (e->op == ExprOp::Pow) return Expr::pow(a, e->pow_num, e->pow_den);
  ExprPtr r = Expr::make(e->op, a, b);
  return r;
}

ExprPtr differentiate(const ExprPtr& e, int var) {
  switch (e->op) {
    case ExprOp::Num: return Expr::num(0);
    case ExprOp::Var: return Expr::num(e->var == var ? 1 : 0);
    case ExprOp::Add: return simplify(Expr::make(ExprOp::Add, differentiate(e->a, var), differentiate(e->b, var)));
    case ExprOp::Sub: return simplify(Expr::make(ExprOp::Sub, differentiate(e->a, var), differentiate(e->b, var)));
    case ExprOp::Mul:
      return simplify(Expr::make(
          ExprOp::Add, Expr::make(ExprOp::Mul, differentiate(e->a, var), e->b),
          Expr::make(ExprOp::Mul, e->a, differentiate(e->b, var))));
    case ExprOp::Div:
      // (a/b)' = a'/b - a b'/b^2
      return simplify(Expr::make(
          ExprOp::Sub, Expr::make(ExprOp::Div, differentiate(e->a, var), e->b),
          Expr::make(ExprOp::Div, Expr::make(ExprOp::Mul, e->a, differentiate(e->b, var)),
                     Expr::pow(e->b, 2))));
    case ExprOp::Pow: {
      // d(a^p) = p a^{p-1} a'
      double p = double(e->pow_num) / e->pow_den;
      ExprPtr down = Expr::pow(e->a, e->pow_num - e->pow_den, e->pow_den);
      return simplify(Expr::make(
          ExprOp::Mul, Expr::num(p),
          Expr::make(ExprOp::Mul, down, differentiate(e->a, var))));
    }
    case ExprOp::Neg: return simplify(Expr::make(ExprOp::Neg, differentiate(e->a, var)));
    case ExprOp::Sin:
      return simplify(Expr::make(ExprOp::Mul, Expr::make(ExprOp::Cos, e->a), differentiate(e->a, var)));
    case ExprOp::Cos:
      return simplify(Expr::make(ExprOp::Neg,
          Expr::make(ExprOp::Mul, Expr::make(ExprOp::Sin, e->a), differentiate(e->a, var))));
    case ExprOp::Sinh:
      return simplify(Expr::make(ExprOp::Mul, Expr::make(ExprOp::Cosh, e->a), differentiate(e->a, var)));
    case ExprOp::Cosh:
      return simplify(Expr::make(ExprOp::Mul, Expr::make(ExprOp::Sinh, e->a), differentiate(e->a, var)));
    case ExprOp::Exp:
      return simplify(Expr::make(ExprOp::Mul, Expr::make(ExprOp::Exp, e->a), differentiate(e->a, var)));
    case ExprOp::Log:
      return simplify(Expr::make(ExprOp::Div, differentiate(e->a, var), e->a));
    case ExprOp::Sqrt:
      // handled as a^{1/2}
      return differentiate(Expr::pow(e->a, 1, 2), var);
    case ExprOp::Abs:
      throw std::runtime_error("differentiate: abs is not differentiable");
  }
  throw std::runtime_error("differentiate: unhandled node");
}

double eval_expr(const ExprPtr& e, const Vec& q) {
  switch (e->op) {
    case ExprOp::Num: return e->value;
    case ExprOp::Var: return q[e->var];
    case ExprOp::Add: return eval_expr(e->a, q) + eval_expr(e->b, q);
    case ExprOp::Sub: return eval_expr(e->a, q) - eval_expr(e->b, q);
    case ExprOp::Mul: return eval_expr(e->a, q) * eval_expr(e->b, q);
    case ExprOp::Div: {
      double den = eval_expr(e->b, q);
      if (den == 0.0) throw std::domain_error("potential evaluation: division by zero");
      return eval_expr(e->a, q) / den;
    }
    case ExprOp::Pow: {
      double base = eval_expr(e->a, q);
      if (e->pow_den == 1) {
        if (e->pow_num >= 0) return std::pow(base, e->pow_num);
        if (base == 0.0) throw std::domain_error("potential evaluation: pole");
        return std::pow(base, e->pow_num);
      }
      if (base < 0.0) throw std::domain_error("potential evaluation: sqrt of negative");
      return std::pow(base, double(e->pow_num) / e->pow_den);
    }
    case ExprOp::Neg: return -eval_expr(e->a, q);
    case ExprOp::Sin: return std::sin(eval_expr(e->a, q));
    case ExprOp::Cos: return std::cos(eval_expr(e->a, q));
    case ExprOp::Sinh: return std::sinh(eval_expr(e->a, q));
    case ExprOp::Cosh: return std::cosh(eval_expr(e->a, q));
    case ExprOp::Exp: return std::exp(eval_expr(e->a, q));
    case ExprOp::Log: {
      double v = eval_expr(e->a, q);
      if (v <= 0.0) throw std::domain_error("potential evaluation: log domain");
      return std::log(v);
    }
    case ExprOp::Sqrt: {
      double v = eval_expr(e->a, q);
      if (v < 0.0) throw std::domain_error("potential evaluation: sqrt domain");
      return std::sqrt(v);
    }
    case ExprOp::Abs: return std::fabs(eval_expr(e->a, q));
  }
  throw std::runtime_error("eval: unhandled node");
}

std::string print_expr(const ExprPtr& e) {
  std::ostringstream os;
  switch (e->op) {
    case ExprOp::Num: os << e->value; break;
    case ExprOp::Var: os << "q" << (e->var + 1); break;
    case ExprOp::Add: os << "(" << print_expr(e->a) << " + " << print_expr(e->b) << ")"; break;
    case ExprOp::Sub: os << "(" << print_expr(e->a) << " - " << print_expr(e->b) << ")"; break;
    case ExprOp::Mul: os << "(" << print_expr(e->a) << " * " << print_expr(e->b) << ")"; break;
    case ExprOp::Div: os << "(" << print_expr(e->a) << " / " << print_expr(e->b) << ")"; break;
    case ExprOp::Pow:
      os << print_expr(e->a) << "^";
      if (e->pow_den == 1) os << "(" << e->pow_num << ")";
      else os << "(" << e->pow_num << "/" << e->pow_den << ")";
      break;
    case ExprOp::Neg: os << "(-" << print_expr(e->a) << ")"; break;
    case ExprOp::Sin: os << "sin(" << print_expr(e->a) << ")"; break;
    case ExprOp::Cos: os << "cos(" << print_expr(e->a) << ")"; break;
    case ExprOp::Sinh: os << "sinh(" << print_expr(e->a) << ")"; break;
    case ExprOp::Cosh: os << "cosh(" << print_expr(e->a) << ")"; break;
    case ExprOp::Exp: os << "exp(" << print_expr(e->a) << ")"; break;
    case ExprOp::Log: os << "log(" << print_expr(e->a) << ")"; break;
    case ExprOp::Sqrt: os << "sqrt(" << print_expr(e->a) << ")"; break;
    case ExprOp::Abs: os << "abs(" << print_expr(e->a) << ")"; break;
  }
  return os.str();
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a->op != b->op) return false;
  switch (a->op) {
    case ExprOp::Num: return a->value == b->value;
    case ExprOp::Var: return a->var == b->var;
    case ExprOp::Pow:
      return a->pow_num == b->pow_num && a->pow_den == b->pow_den && expr_equal(a->a, b->a);
    default:
      if (a->a && !expr_equal(a->a, b->a)) return false;
      if ((a->b == nullptr) != (b->b == nullptr)) return false;
      if (a->b && !expr_equal(a->b, b->b)) return false;
      return true;
  }
}

namespace {

// substitute variables by expressions (used for the lightlike aliases)
ExprPtr substitute(const ExprPtr& e, const std::vector<ExprPtr>& repl) {
  switch (e->op) {
    case ExprOp::Num: return e;
    case ExprOp::Var: return repl[e->var];
    case ExprOp::Pow: return Expr::pow(substitute(e->a, repl), e->pow_num, e->pow_den);
    default: {
      ExprPtr a = e->a ? substitute(e->a, repl) : nullptr;
      ExprPtr b = e->b ? substitute(e->b, repl) : nullptr;
      return Expr::make(e->op, a, b);
    }
  }
}

class DslPotential : public PotentialField {
 public:
  DslPotential(PseudoSpace s, ExprPtr ast) : space_(s), ast_(simplify(ast)) {
    const int n = s.n;
    grad_.resize(n);
    hess_.resize(n);
    for (int i = 0; i < n; ++i) {
      grad_[i] = differentiate(ast_, i);
      hess_[i].resize(n);
      for (int j = 0; j < n; ++j) hess_[i][j] = differentiate(grad_[i], j);
    }
  }

  const PseudoSpace& space() const override { return space_; }
  double eval(const Vec& q) const override { return eval_expr(ast_, q); }
  Vec gradient(const Vec& q) const override {
    Vec g(space_.n);
    for (int i = 0; i < space_.n; ++i) g[i] = eval_expr(grad_[i], q);
    return g;
  }
  Mat hessian(const Vec& q) const override {
    Mat h(space_.n, space_.n);
    for (int i = 0; i < space_.n; ++i)
      for (int j = 0; j < space_.n; ++j) h(i, j) = eval_expr(hess_[i][j], q);
    return 0.5 * (h + h.transpose());
  }
  const ExprPtr& ast() const { return ast_; }

 private:
  PseudoSpace space_;
  ExprPtr ast_;
  std::vector<ExprPtr> grad_;
  std::vector<std::vector<ExprPtr>> hess_;
};

class AffineRestriction : public PotentialField {
 public:
  AffineRestriction(PotentialPtr V, PseudoSpace factor, Vec p0, Mat B)
      : V_(std::move(V)), space_(factor), p0_(std::move(p0)), B_(std::move(B)) {}
  const PseudoSpace& space() const override { return space_; }
  double eval(const Vec& z) const override { return V_->eval(p0_ + B_ * z); }
  Vec gradient(const Vec& z) const override { return B_.transpose() * V_->gradient(p0_ + B_ * z); }
  Mat hessian(const Vec& z) const override {
    return B_.transpose() * V_->hessian(p0_ + B_ * z) * B_;
  }
  bool analytic() const override { return V_->analytic(); }

 private:
  PotentialPtr V_;
  PseudoSpace space_;
  Vec p0_;
  Mat B_;
};

std::vector<std::string> variable_names(const PseudoSpace& space, bool& has_lightlike) {
  const int n = space.n;
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("q" + std::to_string(i + 1));
  if (space.nu == 1 && n >= 2 && n <= 3) {
    names.push_back("t");
    names.push_back("x");
    if (n == 3) names.push_back("y");
    names.push_back("mu");
    names.push_back("nu");
    has_lightlike = true;
  } else if (space.nu == 0 && n <= 3) {
    const char* xyz[3] = {"x", "y", "z"};
    for (int i = 0; i < n; ++i) names.push_back(xyz[i]);
    has_lightlike = false;
  } else {
    has_lightlike = false;
  }
  return names;
}

}  // namespace

PotentialPtr parse_potential(const std::string& src, const PseudoSpace& space) {
  bool lightlike = false;
  std::vector<std::string> names = variable_names(space, lightlike);
  ExprPtr ast = parse_expression(src, names);
  // remap alias variable indices onto q1..qn, expanding mu/nu
  const int n = space.n;
  std::vector<ExprPtr> repl;
  for (size_t i = 0; i < names.size(); ++i) {
    if (static_cast<int>(i) < n) {
      repl.push_back(Expr::variable(static_cast<int>(i)));
    } else if (names[i] == "mu" || names[i] == "nu") {
      // mu = (x + t)/sqrt2, nu = (x - t)/sqrt2 with <d_mu, d_nu> = 1
      double inv_sq2 = 1.0 / std::sqrt(2.0);
      ExprPtr t = Expr::variable(0), x = Expr::variable(1);
      ExprPtr comb = names[i] == "mu" ? Expr::make(ExprOp::Add, x, t)
                                      : Expr::make(ExprOp::Sub, x, t);
      repl.push_back(Expr::make(ExprOp::Mul, Expr::num(inv_sq2), comb));
    } else {
      // positional alias
      repl.push_back(Expr::variable(static_cast<int>(i) - n));
    }
  }
  ExprPtr final_ast = simplify(substitute(ast, repl));
  return std::make_shared<DslPotential>(space, final_ast);
}

PotentialPtr builtin_potential(const std::string& name, const PseudoSpace& space) {
  if (name == "calogero-moser") {
    if (space.n != 3 || space.nu != 0 || space.is_sphere())
      throw SpaceError("calogero-moser lives on E3");
    return parse_potential("(q1-q2)^-2 + (q2-q3)^-2 + (q1-q3)^-2", space);
  }
  if (name == "morosi-tondo") {
    if (space.n != 3 || space.nu != 1 || space.is_sphere())
      throw SpaceError("morosi-tondo lives on E3_1");
    return parse_potential("-5/8*mu^4 + 5/2*mu^2*nu + 1/2*mu*y^2 - 1/2*nu^2", space);
  }
  if (name == "zero") return parse_potential("0", space);
  throw std::invalid_argument("unknown builtin potential '" + name + "'");
}

PotentialPtr restrict_affine(const PotentialPtr& V, const PseudoSpace& factor_space,
                             const Vec& p0, const Mat& B) {
  return std::make_shared<AffineRestriction>(V, factor_space, p0, B);
}

double derivative_check(const PotentialField& V, const Vec& q, double h) {
  const int n = V.space().n;
  Vec g = V.gradient(q);
  Mat H = V.hessian(q);
  double worst = 0.0;
  auto evaln = [&](const Vec& p) { return V.eval(p); };
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    double d = (-evaln(q + 2 * h * e) + 8 * evaln(q + h * e) - 8 * evaln(q - h * e) +
                evaln(q - 2 * h * e)) /
               (12 * h);
    worst = std::max(worst, std::fabs(d - g[i]) / (1.0 + std::fabs(g[i])));
    for (int j = 0; j < n; ++j) {
      Vec f = Vec::Zero(n);
      f[j] = 1.0;
      auto gi = [&](const Vec& p) {
        return (-evaln(p + 2 * h * e) + 8 * evaln(p + h * e) - 8 * evaln(p - h * e) +
                evaln(p - 2 * h * e)) /
               (12 * h);
      };
      double dij = (-gi(q + 2 * h * f) + 8 * gi(q + h * f) - 8 * gi(q - h * f) + gi(q - 2 * h * f)) /
                   (12 * h);
      worst = std::max(worst, std::fabs(dij - H(i, j)) / (1.0 + std::fabs(H(i, j))));
    }
  }
  return worst;
}

}  // namespace sepweb
