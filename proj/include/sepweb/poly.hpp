#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "sepweb/space.hpp"

namespace sepweb {

constexpr int kMaxVars = 6;
constexpr int kMaxPolyDegree = 12;

// Multivariate polynomial in up to kMaxVars variables, dense-free monomial map.
// Keys are exponent tuples; map ordering keeps all iteration deterministic.
class Poly {
 public:
  using Expo = std::array<std::uint8_t, kMaxVars>;

  Poly() = default;
  explicit Poly(int nvars) : nvars_(nvars) {}
  static Poly constant(int nvars, double c);
  static Poly variable(int nvars, int i);

  int nvars() const { return nvars_; }
  bool empty() const { return terms_.empty(); }
  int degree() const;

  Poly& add_term(const Expo& e, double c);
  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(double s) const;
  Poly& operator+=(const Poly& o);

  Poly derivative(int var) const;
  double eval(const Vec& x) const;
  double max_abs_coeff() const;
  void prune(double tol = 0.0);

  const std::map<Expo, double>& terms() const { return terms_; }

 private:
  int nvars_ = 0;
  std::map<Expo, double> terms_;
};

// Symmetric 2-tensor field with polynomial contravariant components.
struct PolySym2Field {
  PseudoSpace space;
  std::vector<Poly> comp;  // upper triangle, row-major: (0,0),(0,1),...,(n-1,n-1)

  PolySym2Field() = default;
  explicit PolySym2Field(const PseudoSpace& s);

  int index(int i, int j) const;
  const Poly& at(int i, int j) const { return comp[index(i, j)]; }
  Poly& at(int i, int j) { return comp[index(i, j)]; }

  SymTensor2 eval(const Vec& x) const;                   // contravariant value
  Mat eval_derivative(const Vec& x, int k) const;        // d/dx_k of components

  static PolySym2Field constant(const PseudoSpace& s, const Mat& contravariant);
  static PolySym2Field metric(const PseudoSpace& s);     // flat G or sphere projector

  PolySym2Field scaled(double s) const;
  PolySym2Field plus(const PolySym2Field& o) const;

  // fit a polynomial field of given total degree to sample values of f
  // (exact interpolation + verification on extra samples)
  static PolySym2Field fit(const PseudoSpace& s, int degree,
                           const std::vector<Vec>& pts,
                           const std::vector<Mat>& values, double verify_tol);
};

// Killing-equation residual max over given points: symmetrized covariant
// derivative of the covariant components; sphere fields are projected
// tangentially (requires tangential K on the sphere).
double killing_residual(const PolySym2Field& K, const std::vector<Vec>& pts);

}  // namespace sepweb
