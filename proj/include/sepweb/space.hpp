#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace sepweb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct SpaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Curvature { Flat, Sphere };

// Flat pseudo-Euclidean space E^n_nu, or the unit sphere E^n_nu(kappa) kept in
// ambient coordinates (points p with <p,p> = 1/kappa).  The first nu axes
// carry metric sign -1, the rest +1.
struct PseudoSpace {
  int n = 0;                                // ambient component count
  int nu = 0;                               // timelike axes, listed first
  Curvature curvature = Curvature::Flat;
  double kappa = 0.0;                       // nonzero iff Sphere

  static PseudoSpace flat(int n, int nu = 0);
  static PseudoSpace sphere(int ambient_n, int nu, double kappa);

  bool is_sphere() const { return curvature == Curvature::Sphere; }
  int intrinsic_dim() const { return is_sphere() ? n - 1 : n; }
  double metric_sign(int i) const { return i < nu ? -1.0 : 1.0; }
  Mat metric() const;
  Mat inverse_metric() const { return metric(); }
  bool same(const PseudoSpace& o) const;
  std::string name() const;
};

enum class Variance { Covariant, Contravariant, Endomorphism };

// Symmetric 2-tensor as a dense matrix plus a variance tag.  Endomorphism
// matrices are g-self-adjoint (g T symmetric) rather than plain-symmetric.
struct SymTensor2 {
  Mat m;
  Variance var = Variance::Contravariant;

  SymTensor2() = default;
  SymTensor2(Mat mat, Variance v) : m(std::move(mat)), var(v) {}
  int dim() const { return static_cast<int>(m.rows()); }

  static SymTensor2 zero(int n, Variance v = Variance::Contravariant);
  static SymTensor2 identity(int n, Variance v);
};

double scalar_product(const Vec& x, const Vec& y, const PseudoSpace& space);

// (x sym y)^{ij} = (x^i y^j + x^j y^i) / 2, contravariant.
SymTensor2 sym_product(const Vec& x, const Vec& y);

// zeta = (t - x)/sqrt(2), eta = (t + x)/sqrt(2) on the leading (t,x) block.
std::pair<double, double> lightlike_coords(const Vec& p, const PseudoSpace& space);

SymTensor2 raise_lower(const SymTensor2& T, Variance target, const PseudoSpace& space);

// Covariant vector (index lowered / raised with the diagonal metric).
Vec flat_vec(const Vec& x, const PseudoSpace& space);   // x^i -> x_i
Vec sharp_vec(const Vec& x, const PseudoSpace& space);  // x_i -> x^i

// Trace of a tensor against the metric (= plain trace of the endomorphism).
double metric_trace(const SymTensor2& T, const PseudoSpace& space);

// |<p,p> * kappa - 1| for sphere spaces; 0 for flat.
double sphere_residual(const Vec& p, const PseudoSpace& space);

// self-adjointness defect  max|gT - (gT)^T|  of an endomorphism matrix
double self_adjoint_residual(const Mat& endo, const PseudoSpace& space);

void check_dim(const Vec& x, const PseudoSpace& space, const char* what);

}  // namespace sepweb
