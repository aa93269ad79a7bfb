#include "sepweb/jacobi.hpp"

#include <cmath>

namespace sepweb {

namespace {
constexpr double kPoleTol = 1e-13;

double quot(double num, double den, const char* name) {
  if (std::fabs(den) < kPoleTol)
    throw JacobiPoleError(std::string("jacobi quotient pole in ") + name);
  return num / den;
}
}  // namespace

double JacobiTriple::sc() const { return quot(sn, cn, "sc"); }
double JacobiTriple::nc() const { return quot(1.0, cn, "nc"); }
double JacobiTriple::dc() const { return quot(dn, cn, "dc"); }
double JacobiTriple::sd() const { return quot(sn, dn, "sd"); }
double JacobiTriple::cd() const { return quot(cn, dn, "cd"); }
double JacobiTriple::nd() const { return quot(1.0, dn, "nd"); }

double complete_elliptic_k(double modulus) {
  if (!(modulus >= 0.0 && modulus < 1.0))
    throw std::invalid_argument("complete_elliptic_k: modulus outside [0,1)");
  // arithmetic-geometric mean of (1, sqrt(1-a^2))
  double a = 1.0, b = std::sqrt(1.0 - modulus * modulus);
  for (int i = 0; i < 40 && std::fabs(a - b) > 1e-16 * a; ++i) {
    double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return M_PI / (2.0 * a);
}

JacobiTriple jacobi_elliptic(double u, double modulus) {
  if (!(modulus > 0.0 && modulus < 1.0))
    throw std::invalid_argument("jacobi_elliptic: modulus outside (0,1)");
  // descending Landen sequence a_{i+1} = (a_i+b_i)/2; amplitude recursion
  // phi_{i-1} = (phi_i + asin(c_i/a_i sin phi_i)) / 2
  constexpr int kMax = 24;
  double a[kMax], c[kMax];
  double an = 1.0, bn = std::sqrt(1.0 - modulus * modulus), cn_ = modulus;
  int nlev = 0;
  a[0] = an;
  c[0] = cn_;
  while (std::fabs(cn_) > 1e-16 * an && nlev + 1 < kMax) {
    double at = 0.5 * (an + bn);
    cn_ = 0.5 * (an - bn);
    bn = std::sqrt(an * bn);
    an = at;
    ++nlev;
    a[nlev] = an;
    c[nlev] = cn_;
  }
  double phi = std::ldexp(1.0, nlev) * a[nlev] * u;
  for (int i = nlev; i > 0; --i) {
    double s = c[i] / a[i] * std::sin(phi);
    s = std::fmin(1.0, std::fmax(-1.0, s));
    phi = 0.5 * (phi + std::asin(s));
  }
  JacobiTriple r;
  r.sn = std::sin(phi);
  r.cn = std::cos(phi);
  r.dn = std::sqrt(std::fmax(0.0, 1.0 - modulus * modulus * r.sn * r.sn));
  return r;
}

}  // namespace sepweb
