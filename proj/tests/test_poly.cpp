#include <doctest.h>

#include <random>

#include "sepweb/poly.hpp"

using namespace sepweb;

TEST_CASE("polynomial arithmetic and derivatives") {
  Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
  Poly p = x * x * y + x * 3.0 + Poly::constant(2, 2.0);
  Vec q(2);
  q << 2, 5;
  CHECK(p.eval(q) == doctest::Approx(4 * 5 + 6 + 2));
  Poly dx = p.derivative(0);
  CHECK(dx.eval(q) == doctest::Approx(2 * 2 * 5 + 3));
  Poly dy = p.derivative(1);
  CHECK(dy.eval(q) == doctest::Approx(4));
  CHECK(p.degree() == 3);
}

TEST_CASE("degree cap throws") {
  Poly x = Poly::variable(1, 0);
  Poly p = x;
  for (int i = 0; i < 11; ++i) p = p * x;  // degree 12 reached
  CHECK_THROWS(p * x);
}

TEST_CASE("metric field of a sphere annihilates the radius") {
  PseudoSpace ds2 = PseudoSpace::sphere(3, 1, 1.0);
  PolySym2Field Pi = PolySym2Field::metric(ds2);
  Vec p(3);
  p << std::sinh(0.4), std::cosh(0.4) * std::cos(1.0), std::cosh(0.4) * std::sin(1.0);
  Mat v = Pi.eval(p).m;
  Vec pf = flat_vec(p, ds2);
  CHECK((v * pf).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("fit recovers a quadratic field exactly") {
  PseudoSpace e3 = PseudoSpace::flat(3, 0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> un(-1, 1);
  auto f = [](const Vec& q) {
    Mat m(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = (i + 1) * (j + 1) + q[i] * q[j] + q[(i + j) % 3];
    return Mat(0.5 * (m + m.transpose()));
  };
  std::vector<Vec> pts;
  std::vector<Mat> vals;
  for (int k = 0; k < 60; ++k) {
    Vec q(3);
    for (int i = 0; i < 3; ++i) q[i] = un(rng);
    pts.push_back(q);
    vals.push_back(f(q));
  }
  PolySym2Field fit = PolySym2Field::fit(e3, 2, pts, vals, 1e-9);
  Vec q(3);
  q << 0.3, -0.7, 1.4;  // outside the fit cloud
  CHECK((fit.eval(q).m - f(q)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("killing residual flags a non-Killing field") {
  PseudoSpace e2 = PseudoSpace::flat(2, 0);
  // K = f(x) G with nonconstant f is not Killing
  PolySym2Field K(e2);
  Poly x = Poly::variable(2, 0);
  K.at(0, 0) = x;
  K.at(1, 1) = x;
  std::vector<Vec> pts;
  Vec q(2);
  q << 0.7, 0.2;
  pts.push_back(q);
  CHECK(killing_residual(K, pts) > 0.5);
  // the metric itself is Killing
  CHECK(killing_residual(PolySym2Field::metric(e2), pts) < 1e-15);
}
