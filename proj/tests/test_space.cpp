#include <doctest.h>

#include <random>

#include "sepweb/space.hpp"

using namespace sepweb;

TEST_CASE("scalar product carries the signature") {
  PseudoSpace m2 = PseudoSpace::flat(2, 1);
  Vec dt(2), dx(2);
  dt << 1, 0;
  dx << 0, 1;
  CHECK(scalar_product(dt, dt, m2) == doctest::Approx(-1.0));
  CHECK(scalar_product(dx, dx, m2) == doctest::Approx(1.0));
  CHECK(scalar_product(Vec::Zero(2), dx, m2) == doctest::Approx(0.0));

  PseudoSpace m3 = PseudoSpace::flat(3, 1);
  Vec k(3);
  k << 1, 1, 0;
  CHECK(scalar_product(k, k, m3) == doctest::Approx(0.0));  // null vector
}

TEST_CASE("scalar product rejects dimension mismatch") {
  PseudoSpace e2 = PseudoSpace::flat(2, 0);
  Vec a(3);
  a << 1, 2, 3;
  CHECK_THROWS_AS(scalar_product(a, a, e2), SpaceError);
}

TEST_CASE("sym product") {
  Vec e1(2), x(2);
  e1 << 1, 0;
  SymTensor2 t = sym_product(e1, e1);
  CHECK(t.m(0, 0) == doctest::Approx(1.0));
  CHECK(t.m(0, 1) == doctest::Approx(0.0));
  // dt sym dx has 1/2 off-diagonals
  Vec dt(2), dx(2);
  dt << 1, 0;
  dx << 0, 1;
  SymTensor2 s = sym_product(dt, dx);
  CHECK(s.m(0, 1) == doctest::Approx(0.5));
  CHECK(s.m(1, 0) == doctest::Approx(0.5));
  // r sym r at (x,y)
  Vec r(2);
  r << 1, 2;
  SymTensor2 rr = sym_product(r, r);
  CHECK(rr.m(0, 0) == doctest::Approx(1));
  CHECK(rr.m(0, 1) == doctest::Approx(2));
  CHECK(rr.m(1, 1) == doctest::Approx(4));
}

TEST_CASE("lightlike coordinates") {
  PseudoSpace m2 = PseudoSpace::flat(2, 1);
  Vec p(2);
  p << 1, 1;
  auto [zeta, eta] = lightlike_coords(p, m2);
  CHECK(zeta == doctest::Approx(0.0));
  CHECK(eta == doctest::Approx(std::sqrt(2.0)));
  p << 1, -1;
  std::tie(zeta, eta) = lightlike_coords(p, m2);
  CHECK(zeta == doctest::Approx(std::sqrt(2.0)));
  CHECK(eta == doctest::Approx(0.0));
  p << 0, 0;
  std::tie(zeta, eta) = lightlike_coords(p, m2);
  CHECK(zeta == 0.0);
  CHECK(eta == 0.0);
}

TEST_CASE("raise and lower") {
  PseudoSpace m2 = PseudoSpace::flat(2, 1);
  // identity endomorphism lowers to the metric
  SymTensor2 id = SymTensor2::identity(2, Variance::Endomorphism);
  SymTensor2 low = raise_lower(id, Variance::Covariant, m2);
  CHECK(low.m(0, 0) == doctest::Approx(-1));
  CHECK(low.m(1, 1) == doctest::Approx(1));
  // covariant diag(a,b) as endomorphism flips the timelike slot
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 5;
  SymTensor2 cov(d, Variance::Covariant);
  SymTensor2 endo = raise_lower(cov, Variance::Endomorphism, m2);
  CHECK(endo.m(0, 0) == doctest::Approx(-3));
  CHECK(endo.m(1, 1) == doctest::Approx(5));
  // Euclidean: all identifications are the identity on components
  PseudoSpace e2 = PseudoSpace::flat(2, 0);
  SymTensor2 up = raise_lower(cov, Variance::Contravariant, e2);
  CHECK((up.m - d).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("raise_lower roundtrip on random tensors") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> un(-2, 2);
  for (int n = 2; n <= 5; ++n)
    for (int nu = 0; nu <= n; ++nu) {
      PseudoSpace s = PseudoSpace::flat(n, nu);
      Mat a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = un(rng);
      a = (a + a.transpose()).eval();
      SymTensor2 t(a, Variance::Contravariant);
      SymTensor2 back =
          raise_lower(raise_lower(t, Variance::Covariant, s), Variance::Contravariant, s);
      CHECK((back.m - a).cwiseAbs().maxCoeff() < 1e-14);
      SymTensor2 back2 =
          raise_lower(raise_lower(t, Variance::Endomorphism, s), Variance::Contravariant, s);
      CHECK((back2.m - a).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("bilinearity and symmetry of the scalar product") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> un(-3, 3);
  PseudoSpace s = PseudoSpace::flat(4, 2);
  for (int k = 0; k < 50; ++k) {
    Vec x(4), y(4), z(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = un(rng);
      y[i] = un(rng);
      z[i] = un(rng);
    }
    double a = un(rng);
    CHECK(scalar_product(x, y, s) == doctest::Approx(scalar_product(y, x, s)));
    CHECK(scalar_product(x + a * z, y, s) ==
          doctest::Approx(scalar_product(x, y, s) + a * scalar_product(z, y, s)));
  }
}

TEST_CASE("sphere residual") {
  PseudoSpace ds2 = PseudoSpace::sphere(3, 1, 1.0);
  Vec p(3);
  p << std::sinh(0.3), std::cosh(0.3) * std::cos(0.5), std::cosh(0.3) * std::sin(0.5);
  CHECK(sphere_residual(p, ds2) < 1e-14);
  p[0] += 0.1;
  CHECK(sphere_residual(p, ds2) > 1e-3);
}
