#pragma once

#include <vector>

#include "sepweb/poly.hpp"
#include "sepweb/space.hpp"

namespace sepweb {

struct NotOrthogonalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Concircular tensor L(x) = A + 2 w sym r + m r sym r (flat) with constant
// contravariant A; on spheres only A is free and L = R A R^* in ambient
// coordinates.
struct ConcircularTensor {
  PseudoSpace space;
  Mat A;        // contravariant, symmetric
  Vec w;        // zero on spheres
  double m = 0.0;

  ConcircularTensor() = default;
  ConcircularTensor(const PseudoSpace& s, Mat A_, Vec w_, double m_);
  static ConcircularTensor metric(const PseudoSpace& s);      // L = G
  static ConcircularTensor on_sphere(const PseudoSpace& s, Mat A_);
  static ConcircularTensor dilatational(const PseudoSpace& s);  // r sym r

  bool is_trivial(double tol = 1e-12) const;  // multiple of G
};

// contravariant value at a point; sphere points are checked against the quadric
SymTensor2 eval_ct(const ConcircularTensor& L, const Vec& point, double tol = 1e-8);

// monic characteristic polynomial coefficients c[0..d], p(z) = sum c_k z^k,
// c[d] = 1; on spheres the trivial radial eigenvalue is factored out
std::vector<double> char_poly(const ConcircularTensor& L, const Vec& point);

struct Eigenfunctions {
  std::vector<double> values;          // ascending
  std::vector<int> multiplicity;
  std::vector<Mat> eigenspaces;        // ambient columns per eigenvalue
  bool simple() const {
    for (int m : multiplicity)
      if (m != 1) return false;
    return true;
  }
};

// point-wise eigenstructure; throws NotOrthogonalError on complex or defective
// spectra (multiplicity merge radius 1e-7 * (1+|root|))
Eigenfunctions eigenfunctions(const ConcircularTensor& L, const Vec& point, double tol = 1e-8);

// polynomial ambient realization of L (degree <= 2 flat, <= 4 sphere)
PolySym2Field ct_poly_field(const ConcircularTensor& L);

// K1 = tr(L) G - L as a polynomial Killing tensor field
PolySym2Field kbdt(const ConcircularTensor& L);

// K_0 = G, K_1 = tr(L)G - L, K_a = (1/a) tr(K_{a-1} L) G - K_{a-1} L;
// n(intrinsic) members
std::vector<PolySym2Field> benenti_sequence(const ConcircularTensor& L);

// defining-equation residual via 4th-order differences with step h:
// least-squares alpha fit of D_k L_ij = alpha_(i g_j)k, projected
// tangentially on spheres
double verify_concircular(const ConcircularTensor& L, const std::vector<Vec>& pts,
                          double h = 1e-4);

// Killing residual for a perturbed/closed-form field, finite differences
// (analytic polynomial fields should use killing_residual from poly.hpp)
double verify_killing_fd(const PseudoSpace& space,
                         const std::function<Mat(const Vec&)>& contravariant,
                         const std::vector<Vec>& pts, double h = 1e-4);

}  // namespace sepweb
