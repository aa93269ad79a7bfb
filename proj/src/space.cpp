#include "sepweb/space.hpp"

#include <cmath>
#include <sstream>

namespace sepweb {

PseudoSpace PseudoSpace::flat(int n, int nu) {
  if (n < 1 || nu < 0 || nu > n) throw SpaceError("bad flat space parameters");
  PseudoSpace s;
  s.n = n;
  s.nu = nu;
  return s;
}

PseudoSpace PseudoSpace::sphere(int ambient_n, int nu, double kappa) {
  if (ambient_n < 2 || nu < 0 || nu > ambient_n) throw SpaceError("bad sphere parameters");
  if (kappa == 0.0) throw SpaceError("sphere curvature must be nonzero");
  PseudoSpace s;
  s.n = ambient_n;
  s.nu = nu;
  s.curvature = Curvature::Sphere;
  s.kappa = kappa;
  return s;
}

Mat PseudoSpace::metric() const {
  Mat g = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) g(i, i) = metric_sign(i);
  return g;
}

bool PseudoSpace::same(const PseudoSpace& o) const {
  return n == o.n && nu == o.nu && curvature == o.curvature && kappa == o.kappa;
}

std::string PseudoSpace::name() const {
  std::ostringstream os;
  if (!is_sphere()) {
    os << "E" << n;
    if (nu > 0) os << "_" << nu;
    return os.str();
  }
  if (n == 3 && nu == 1 && kappa == 1.0) return "dS2";
  os << "E" << n;
  if (nu > 0) os << "_" << nu;
  os << "(" << kappa << ")";
  return os.str();
}

SymTensor2 SymTensor2::zero(int n, Variance v) { return SymTensor2(Mat::Zero(n, n), v); }

SymTensor2 SymTensor2::identity(int n, Variance v) { return SymTensor2(Mat::Identity(n, n), v); }

void check_dim(const Vec& x, const PseudoSpace& space, const char* what) {
  if (x.size() != space.n) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << x.size() << " vs space " << space.n << ")";
    throw SpaceError(os.str());
  }
}

double scalar_product(const Vec& x, const Vec& y, const PseudoSpace& space) {
  check_dim(x, space, "scalar_product");
  check_dim(y, space, "scalar_product");
  double s = 0.0;
  for (int i = 0; i < space.n; ++i) s += space.metric_sign(i) * x[i] * y[i];
  return s;
}

SymTensor2 sym_product(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw SpaceError("sym_product: dimension mismatch");
  Mat m = 0.5 * (x * y.transpose() + y * x.transpose());
  return SymTensor2(std::move(m), Variance::Contravariant);
}

std::pair<double, double> lightlike_coords(const Vec& p, const PseudoSpace& space) {
  check_dim(p, space, "lightlike_coords");
  if (space.nu != 1 || space.n < 2)
    throw SpaceError("lightlike_coords: needs a Lorentzian (t,x) block");
  const double inv_sq2 = 1.0 / std::sqrt(2.0);
  return {(p[0] - p[1]) * inv_sq2, (p[0] + p[1]) * inv_sq2};
}

SymTensor2 raise_lower(const SymTensor2& T, Variance target, const PseudoSpace& space) {
  if (T.dim() != space.n) throw SpaceError("raise_lower: dimension mismatch");
  if (T.var == target) return T;
  const int n = space.n;
  Mat r = T.m;
  auto scale_rows = [&](Mat& m) { for (int i = 0; i < n; ++i) m.row(i) *= space.metric_sign(i); };
  auto scale_cols = [&](Mat& m) { for (int j = 0; j < n; ++j) m.col(j) *= space.metric_sign(j); };
  // the metric is diagonal with entries +-1, so g = g^{-1} and every
  // contraction is a row or column sign scaling
  switch (T.var) {
    case Variance::Contravariant:
      if (target == Variance::Covariant) { scale_rows(r); scale_cols(r); }  // T_ij = g_ik g_jl T^{kl}
      else scale_cols(r);                                                   // T^i_j = T^{ik} g_kj
      break;
    case Variance::Covariant:
      if (target == Variance::Contravariant) { scale_rows(r); scale_cols(r); }
      else scale_rows(r);                                                   // T^i_j = g^{ik} T_kj
      break;
    case Variance::Endomorphism:
      if (target == Variance::Contravariant) scale_cols(r);                 // T^{ij} = T^i_k g^{kj}
      else scale_rows(r);                                                   // T_ij = g_ik T^k_j
      break;
  }
  return SymTensor2(std::move(r), target);
}

Vec flat_vec(const Vec& x, const PseudoSpace& space) {
  check_dim(x, space, "flat_vec");
  Vec r = x;
  for (int i = 0; i < space.n; ++i) r[i] *= space.metric_sign(i);
  return r;
}

Vec sharp_vec(const Vec& x, const PseudoSpace& space) { return flat_vec(x, space); }

double metric_trace(const SymTensor2& T, const PseudoSpace& space) {
  if (T.var == Variance::Endomorphism) return T.m.trace();
  SymTensor2 e = raise_lower(T, Variance::Endomorphism, space);
  return e.m.trace();
}

double sphere_residual(const Vec& p, const PseudoSpace& space) {
  if (!space.is_sphere()) return 0.0;
  return std::abs(scalar_product(p, p, space) * space.kappa - 1.0);
}

double self_adjoint_residual(const Mat& endo, const PseudoSpace& space) {
  Mat gt = space.metric() * endo;
  return (gt - gt.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace sepweb
