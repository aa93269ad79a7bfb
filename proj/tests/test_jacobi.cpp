#include <doctest.h>

#include <cmath>

#include "sepweb/jacobi.hpp"

using namespace sepweb;

TEST_CASE("values at zero and degenerate modulus") {
  JacobiTriple j = jacobi_elliptic(0.0, 0.5);
  CHECK(j.sn == doctest::Approx(0.0));
  CHECK(j.cn == doctest::Approx(1.0));
  CHECK(j.dn == doctest::Approx(1.0));
  // K(a) -> pi/2 as a -> 0, sn(u;~0) ~ sin u
  CHECK(complete_elliptic_k(0.0) == doctest::Approx(M_PI / 2));
  CHECK(complete_elliptic_k(1e-8) == doctest::Approx(M_PI / 2).epsilon(1e-12));
  JacobiTriple t = jacobi_elliptic(0.7, 1e-8);
  CHECK(t.sn == doctest::Approx(std::sin(0.7)).epsilon(1e-10));
  CHECK(t.cn == doctest::Approx(std::cos(0.7)).epsilon(1e-10));
}

TEST_CASE("identities over a grid of moduli") {
  for (double a : {0.3, 0.7, 0.95}) {
    double K = complete_elliptic_k(a);
    for (int i = 0; i <= 1000; ++i) {
      double u = 4.0 * K * i / 1000.0;
      JacobiTriple j = jacobi_elliptic(u, a);
      CHECK(std::fabs(j.sn * j.sn + j.cn * j.cn - 1.0) < 1e-12);
      CHECK(std::fabs(j.dn * j.dn + a * a * j.sn * j.sn - 1.0) < 1e-12);
    }
    CHECK(std::fabs(jacobi_elliptic(K, a).sn - 1.0) < 1e-10);
  }
}

TEST_CASE("quotients and poles") {
  double a = 0.6;
  double K = complete_elliptic_k(a);
  JacobiTriple j = jacobi_elliptic(0.4 * K, a);
  CHECK(j.sc() == doctest::Approx(j.sn / j.cn));
  CHECK(j.nd() == doctest::Approx(1.0 / j.dn));
  // cn vanishes at u = K: sc must signal the pole
  JacobiTriple pole = jacobi_elliptic(K, a);
  CHECK_THROWS_AS((void)pole.sc(), JacobiPoleError);
}

TEST_CASE("reference values against the defining integral") {
  // trapezoid quadrature of F(phi) = int dt / sqrt(1 - a^2 sin^2 t) inverted
  double a = 0.6;
  double K = complete_elliptic_k(a);
  // K(0.6) from an independent quadrature
  int N = 200000;
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    double t0 = M_PI / 2 * i / N, t1 = M_PI / 2 * (i + 1) / N;
    auto f = [&](double t) { return 1.0 / std::sqrt(1 - a * a * std::sin(t) * std::sin(t)); };
    acc += 0.5 * (f(t0) + f(t1)) * (t1 - t0);
  }
  CHECK(K == doctest::Approx(acc).epsilon(1e-9));
}
