#include <doctest.h>

#include <random>

#include "sepweb/potential.hpp"

using namespace sepweb;

TEST_CASE("parser handles precedence and errors") {
  PseudoSpace e2 = PseudoSpace::flat(2, 0);
  auto V = parse_potential("x^2 + 2*y", e2);
  Vec q(2);
  q << 3, 4;
  CHECK(V->eval(q) == doctest::Approx(17));
  auto W = parse_potential("-x^2", e2);
  CHECK(W->eval(q) == doctest::Approx(-9));  // unary minus binds below ^
  CHECK_THROWS_AS(parse_potential("x +* y", e2), ParseError);
  CHECK_THROWS_AS(parse_potential("foo(3)", e2), ParseError);
  CHECK_THROWS_AS(parse_potential("x^y", e2), ParseError);  // non-literal exponent
  try {
    parse_potential("x + bar", e2);
  } catch (const ParseError& e) {
    CHECK(e.position == 4);
  }
}

TEST_CASE("zero potential") {
  PseudoSpace e2 = PseudoSpace::flat(2, 0);
  auto V = parse_potential("0", e2);
  Vec q(2);
  q << 1, 2;
  CHECK(V->eval(q) == 0.0);
  CHECK(V->gradient(q).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("differentiation: power rule") {
  std::vector<std::string> names = {"q1", "q2"};
  ExprPtr e = parse_expression("(q1-q2)^-2", names);
  ExprPtr d = differentiate(e, 0);
  Vec q(2);
  q << 3, 1;  // d/dq1 (q1-q2)^-2 = -2 (q1-q2)^-3 = -2/8
  CHECK(eval_expr(d, q) == doctest::Approx(-0.25));
  ExprPtr c = parse_expression("5", names);
  CHECK(eval_expr(differentiate(c, 0), q) == 0.0);
}

TEST_CASE("builtin potentials match their formulas") {
  PseudoSpace e3 = PseudoSpace::flat(3, 0);
  auto cal = builtin_potential("calogero-moser", e3);
  Vec q(3);
  q << 0, 1, 2;
  CHECK(cal->eval(q) == doctest::Approx(1 + 1 + 0.25));
  PseudoSpace m3 = PseudoSpace::flat(3, 1);
  auto mor = builtin_potential("morosi-tondo", m3);
  // at t=x=0: mu=nu=0, V = 0
  Vec z(3);
  z << 0, 0, 2;
  CHECK(mor->eval(z) == doctest::Approx(0.0));
  // mu = (x+t)/sq2, nu = (x-t)/sq2
  Vec w(3);
  w << 0.25, 0.75, 0.5;
  double sq2 = std::sqrt(2.0);
  double mu = (0.75 + 0.25) / sq2, nu = (0.75 - 0.25) / sq2, y = 0.5;
  double want = -5.0 / 8 * std::pow(mu, 4) + 2.5 * mu * mu * nu + 0.5 * mu * y * y - 0.5 * nu * nu;
  CHECK(mor->eval(w) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("analytic gradients match finite differences") {
  PseudoSpace e3 = PseudoSpace::flat(3, 0);
  auto cal = builtin_potential("calogero-moser", e3);
  PseudoSpace m3 = PseudoSpace::flat(3, 1);
  auto mor = builtin_potential("morosi-tondo", m3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> un(-0.4, 0.4);
  for (int k = 0; k < 50; ++k) {
    Vec q(3);
    q << un(rng), 1.3 + un(rng), 2.6 + un(rng);
    CHECK(derivative_check(*cal, q) < 1e-6);
    Vec z(3);
    z << un(rng), un(rng), 0.7 + un(rng);
    CHECK(derivative_check(*mor, z) < 1e-6);
  }
}

TEST_CASE("parse print parse fixpoint") {
  std::vector<std::string> names = {"q1", "q2", "q3"};
  for (const char* src : {"(q1-q2)^-2 + sin(q3)*cosh(q1)", "sqrt(q1^2 + 1) / (3 - q2)",
                          "exp(q1)*log(q2+5) - q3^(3/2)"}) {
    ExprPtr e = parse_expression(src, names);
    ExprPtr e2 = parse_expression(print_expr(e), names);
    CHECK(expr_equal(e, e2));
  }
}

TEST_CASE("product rule against finite differences on random trees") {
  std::vector<std::string> names = {"q1", "q2"};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> un(0.3, 1.7);
  const char* exprs[] = {"q1*q2^2 + cos(q1*q2)", "sinh(q1)*q2 + q1^3/(q2+2)",
                         "exp(q1*q2)/(1+q1^2)"};
  for (const char* s : exprs) {
    ExprPtr e = parse_expression(s, names);
    for (int v = 0; v < 2; ++v) {
      ExprPtr d = differentiate(e, v);
      for (int k = 0; k < 10; ++k) {
        Vec q(2);
        q << un(rng), un(rng);
        double h = 1e-5;
        Vec qp = q, qm = q;
        qp[v] += h;
        qm[v] -= h;
        double fd = (eval_expr(e, qp) - eval_expr(e, qm)) / (2 * h);
        CHECK(eval_expr(d, q) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("abs is rejected by differentiation") {
  std::vector<std::string> names = {"q1"};
  ExprPtr e = parse_expression("abs(q1)", names);
  CHECK_THROWS(differentiate(e, 0));
}
