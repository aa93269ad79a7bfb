#include "sepweb/concircular.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unsupported/Eigen/Polynomials>

namespace sepweb {

ConcircularTensor::ConcircularTensor(const PseudoSpace& s, Mat A_, Vec w_, double m_)
    : space(s), A(std::move(A_)), w(std::move(w_)), m(m_) {
  if (A.rows() != s.n || A.cols() != s.n) throw SpaceError("ConcircularTensor: bad A");
  if (w.size() != s.n) throw SpaceError("ConcircularTensor: bad w");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + A.cwiseAbs().maxCoeff()))
    throw SpaceError("ConcircularTensor: A must be symmetric");
  if (s.is_sphere() && (w.cwiseAbs().maxCoeff() > 0.0 || m != 0.0))
    throw SpaceError("ConcircularTensor: sphere tensors carry only A");
}

ConcircularTensor ConcircularTensor::metric(const PseudoSpace& s) {
  return ConcircularTensor(s, s.inverse_metric(), Vec::Zero(s.n), 0.0);
}

ConcircularTensor ConcircularTensor::on_sphere(const PseudoSpace& s, Mat A_) {
  if (!s.is_sphere()) throw SpaceError("on_sphere: space is flat");
  return ConcircularTensor(s, std::move(A_), Vec::Zero(s.n), 0.0);
}

ConcircularTensor ConcircularTensor::dilatational(const PseudoSpace& s) {
  return ConcircularTensor(s, Mat::Zero(s.n, s.n), Vec::Zero(s.n), 1.0);
}

bool ConcircularTensor::is_trivial(double tol) const {
  if (space.is_sphere()) {
    Mat D = A - A(0, 0) * space.metric_sign(0) * space.inverse_metric();
    // on the sphere A and A + c g^{-1} restrict to geometrically equivalent CTs
    double sc = 1.0 + A.cwiseAbs().maxCoeff();
    return D.cwiseAbs().maxCoeff() <= tol * sc && m == 0.0;
  }
  double sc = 1.0 + A.cwiseAbs().maxCoeff() + w.cwiseAbs().maxCoeff() + std::fabs(m);
  if (w.cwiseAbs().maxCoeff() > tol * sc || std::fabs(m) > tol * sc) return false;
  Mat D = A - A(0, 0) * space.metric_sign(0) * space.inverse_metric();
  return D.cwiseAbs().maxCoeff() <= tol * sc;
}

SymTensor2 eval_ct(const ConcircularTensor& L, const Vec& point, double tol) {
  check_dim(point, L.space, "eval_ct");
  const PseudoSpace& s = L.space;
  if (!s.is_sphere()) {
    Mat v = L.A + L.w * point.transpose() + point * L.w.transpose() +
            L.m * point * point.transpose();
    return SymTensor2(std::move(v), Variance::Contravariant);
  }
  if (sphere_residual(point, s) > tol)
    throw SpaceError("eval_ct: point is off the sphere quadric");
  double r2 = scalar_product(point, point, s);
  Vec pf = flat_vec(point, s);
  Mat R = Mat::Identity(s.n, s.n) - point * pf.transpose() / r2;
  Mat v = R * L.A * R.transpose();
  return SymTensor2(std::move(v), Variance::Contravariant);
}

std::vector<double> char_poly(const ConcircularTensor& L, const Vec& point) {
  const PseudoSpace& s = L.space;
  SymTensor2 val = eval_ct(L, point);
  Mat endo = raise_lower(val, Variance::Endomorphism, s).m;
  Mat E = endo;
  if (s.is_sphere()) {
    // restrict to the tangent space: drop the trivial radial eigenvalue 0
    Vec pf = flat_vec(point, s);
    Mat row = pf.transpose();
    Eigen::FullPivLU<Mat> lu(row);
    Eigen::HouseholderQR<Mat> qr(lu.kernel());
    Mat B = qr.householderQ() * Mat::Identity(s.n, s.n - 1);
    Mat g = s.metric();
    E = (B.transpose() * g * B).inverse() * (B.transpose() * g * endo * B);
  }
  // Faddeev-LeVerrier: p(z) = z^d + c_{d-1} z^{d-1} + ... + c_0
  const int d = static_cast<int>(E.rows());
  std::vector<double> out(d + 1, 0.0);
  out[d] = 1.0;
  Mat M = Mat::Zero(d, d);
  double c = 1.0;
  for (int k = 1; k <= d; ++k) {
    M = E * M + c * Mat::Identity(d, d);
    c = -(E * M).trace() / k;
    out[d - k] = c;
  }
  return out;
}

Eigenfunctions eigenfunctions(const ConcircularTensor& L, const Vec& point, double tol) {
  const PseudoSpace& s = L.space;
  std::vector<double> coeff = char_poly(L, point);
  const int d = static_cast<int>(coeff.size()) - 1;

  // companion-matrix roots, then one Newton polish each
  Eigen::VectorXd pc(d + 1);
  for (int i = 0; i <= d; ++i) pc[i] = coeff[i];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
  solver.compute(pc);
  std::vector<std::complex<double>> roots;
  for (int i = 0; i < d; ++i) roots.push_back(solver.roots()[i]);

  auto peval = [&](std::complex<double> z) {
    std::complex<double> p = 0.0, dp = 0.0;
    for (int k = d; k >= 0; --k) {
      dp = dp * z + p;
      p = p * z + coeff[k];
    }
    return std::make_pair(p, dp);
  };
  for (auto& z : roots) {
    auto [p, dp] = peval(z);
    if (std::abs(dp) > 1e-14) z -= p / dp;
  }

  double scale = 0.0;
  for (auto& c : coeff) scale = std::max(scale, std::fabs(c));
  scale = std::max(1.0, scale);
  for (auto& z : roots)
    if (std::fabs(z.imag()) > 1e-6 * (1.0 + std::abs(z)))
      throw NotOrthogonalError("eigenfunctions: complex spectrum at this point");

  std::vector<double> rv(d);
  for (int i = 0; i < d; ++i) rv[i] = roots[i].real();
  std::sort(rv.begin(), rv.end());

  Eigenfunctions out;
  for (int i = 0; i < d;) {
    int j = i + 1;
    while (j < d && std::fabs(rv[j] - rv[i]) < 1e-7 * (1.0 + std::fabs(rv[i]))) ++j;
    double mean = 0.0;
    for (int k = i; k < j; ++k) mean += rv[k];
    out.values.push_back(mean / (j - i));
    out.multiplicity.push_back(j - i);
    i = j;
  }

  // eigenspaces from the ambient endomorphism (sphere: tangent-restricted)
  SymTensor2 val = eval_ct(L, point);
  Mat endo = raise_lower(val, Variance::Endomorphism, s).m;
  Mat Bt;  // tangent embedding for spheres
  Mat Ework = endo;
  if (s.is_sphere()) {
    Vec pf = flat_vec(point, s);
    Mat row = pf.transpose();
    Eigen::FullPivLU<Mat> lu(row);
    Eigen::HouseholderQR<Mat> qr(lu.kernel());
    Bt = qr.householderQ() * Mat::Identity(s.n, s.n - 1);
    Mat g = s.metric();
    Ework = (Bt.transpose() * g * Bt).inverse() * (Bt.transpose() * g * endo * Bt);
  }
  const int nd = static_cast<int>(Ework.rows());
  for (size_t q = 0; q < out.values.size(); ++q) {
    Mat N = Ework - out.values[q] * Mat::Identity(nd, nd);
    Eigen::JacobiSVD<Mat> svd(N, Eigen::ComputeFullV);
    int rank = 0;
    double top = svd.singularValues()[0];
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > std::max(tol, 1e-9 * (1.0 + top))) ++rank;
    int gdim = nd - rank;
    if (gdim < out.multiplicity[q])
      throw NotOrthogonalError("eigenfunctions: defective spectrum at this point");
    Mat Vcols = svd.matrixV().rightCols(gdim);
    out.eigenspaces.push_back(s.is_sphere() ? Mat(Bt * Vcols) : Vcols);
  }
  return out;
}

PolySym2Field ct_poly_field(const ConcircularTensor& L) {
  const PseudoSpace& s = L.space;
  const int n = s.n;
  PolySym2Field f(s);
  if (!s.is_sphere()) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Poly p = Poly::constant(n, L.A(i, j));
        p += Poly::variable(n, j) * L.w[i] + Poly::variable(n, i) * L.w[j];
        p += Poly::variable(n, i) * Poly::variable(n, j) * L.m;
        f.at(i, j) = p;
      }
    return f;
  }
  // sphere: on the quadric <r,r> = 1/kappa the projector form expands to the
  // polynomial  A + kappa^2 <r,Ar> r x r - kappa (Ar x r + r x Ar)
  const double k = s.kappa;
  std::vector<Poly> xi(n);
  for (int i = 0; i < n; ++i) xi[i] = Poly::variable(n, i);
  // <r,Ar> = r_i A^{ij} r_j with indices lowered by the diagonal metric
  Poly rAr(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      rAr += xi[i] * xi[j] * (L.A(i, j) * s.metric_sign(i) * s.metric_sign(j));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Poly p = Poly::constant(n, L.A(i, j));
      p += rAr * xi[i] * xi[j] * (k * k);
      Poly Ari(n), Arj(n);
      for (int l = 0; l < n; ++l) {
        Ari += xi[l] * (L.A(i, l) * s.metric_sign(l));
        Arj += xi[l] * (L.A(j, l) * s.metric_sign(l));
      }
      p += (Ari * xi[j] + Arj * xi[i]) * (-k);
      f.at(i, j) = p;
    }
  return f;
}

namespace {

// endomorphism product of two contravariant poly fields: (K g L)^{ij}
PolySym2Field endo_product(const PolySym2Field& K, const PolySym2Field& L) {
  const PseudoSpace& s = K.space;
  const int n = s.n;
  PolySym2Field f(s);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Poly p(n);
      for (int k = 0; k < n; ++k) p += K.at(i, k) * L.at(k, j) * s.metric_sign(k);
      f.at(i, j) = p;
    }
  return f;
}

Poly metric_trace_poly(const PolySym2Field& T) {
  const PseudoSpace& s = T.space;
  Poly tr(s.n);
  for (int i = 0; i < s.n; ++i) tr += T.at(i, i) * s.metric_sign(i);
  if (s.is_sphere()) {
    // ambient trace of tangential fields equals the intrinsic trace
  }
  return tr;
}

PolySym2Field scale_metric_by(const Poly& f, const PseudoSpace& s) {
  PolySym2Field G = PolySym2Field::metric(s);
  PolySym2Field out(s);
  for (int i = 0; i < s.n; ++i)
    for (int j = i; j < s.n; ++j) out.at(i, j) = f * G.at(i, j);
  return out;
}

}  // namespace

PolySym2Field kbdt(const ConcircularTensor& L) {
  PolySym2Field Lf = ct_poly_field(L);
  Poly tr = metric_trace_poly(Lf);
  PolySym2Field out = scale_metric_by(tr, L.space);
  for (size_t k = 0; k < out.comp.size(); ++k) out.comp[k] = out.comp[k] - Lf.comp[k];
  return out;
}

std::vector<PolySym2Field> benenti_sequence(const ConcircularTensor& L) {
  const PseudoSpace& s = L.space;
  const int n = s.intrinsic_dim();
  std::vector<PolySym2Field> seq;
  seq.push_back(PolySym2Field::metric(s));
  if (n < 2) return seq;
  PolySym2Field Lf = ct_poly_field(L);
  seq.push_back(kbdt(L));
  for (int a = 2; a < n; ++a) {
    PolySym2Field KL = endo_product(seq.back(), Lf);
    Poly tr = metric_trace_poly(KL);
    PolySym2Field next = scale_metric_by(tr * (1.0 / a), s);
    for (size_t k = 0; k < next.comp.size(); ++k) next.comp[k] = next.comp[k] - KL.comp[k];
    seq.push_back(next);
  }
  return seq;
}

double verify_concircular(const ConcircularTensor& L, const std::vector<Vec>& pts, double h) {
  const PseudoSpace& s = L.space;
  const int n = s.n;
  auto cov_at = [&](const Vec& x) {
    SymTensor2 v = eval_ct(L, x, 1e-6);
    return raise_lower(v, Variance::Covariant, s).m;
  };
  double worst = 0.0;
  for (const Vec& x0 : pts) {
    // 4th-order central differences of the covariant components
    std::vector<Mat> dL(n);
    for (int k = 0; k < n; ++k) {
      Vec e = Vec::Zero(n);
      e[k] = 1.0;
      auto shift = [&](double step) {
        Vec p = x0 + step * e;
        if (s.is_sphere()) {
          // project the stencil back onto the quadric before evaluating
          double r2 = scalar_product(p, p, s) * s.kappa;
          p /= std::sqrt(std::fabs(r2));
        }
        return cov_at(p);
      };
      dL[k] = (-shift(2 * h) + 8 * shift(h) - 8 * shift(-h) + shift(-2 * h)) / (12 * h);
    }
    Mat g = s.metric();
    Mat B = Mat::Identity(n, n);
    int mdim = n;
    if (s.is_sphere()) {
      Vec pf = flat_vec(x0, s);
      Mat row = pf.transpose();
      Eigen::FullPivLU<Mat> lu(row);
      Eigen::HouseholderQR<Mat> qr(lu.kernel());
      B = qr.householderQ() * Mat::Identity(n, n - 1);
      mdim = n - 1;
    }
    // project, then least-squares fit alpha from D_k L_ij = alpha_(i g_j)k
    Mat gproj = B.transpose() * g * B;
    std::vector<Mat> dLp(mdim);
    for (int k = 0; k < mdim; ++k) dLp[k] = Mat::Zero(mdim, mdim);
    for (int k = 0; k < mdim; ++k)
      for (int i = 0; i < mdim; ++i)
        for (int j = 0; j < mdim; ++j) {
          double v = 0.0;
          for (int kk = 0; kk < n; ++kk)
            for (int ii = 0; ii < n; ++ii)
              for (int jj = 0; jj < n; ++jj)
                v += B(kk, k) * B(ii, i) * B(jj, j) * dL[kk](ii, jj);
          dLp[k](i, j) = v;
        }
    // sphere: the projected flat derivative misses the Gauss correction for
    // covariant slots; with a tangential extension the correction vanishes as
    // the pairing involves tangential vectors only.
    Eigen::MatrixXd Amat(mdim * mdim * mdim, mdim);
    Eigen::VectorXd rhs(mdim * mdim * mdim);
    int row_i = 0;
    for (int k = 0; k < mdim; ++k)
      for (int i = 0; i < mdim; ++i)
        for (int j = 0; j < mdim; ++j) {
          for (int a = 0; a < mdim; ++a) {
            double coef = 0.0;
            if (a == i) coef += 0.5 * gproj(j, k);
            if (a == j) coef += 0.5 * gproj(i, k);
            Amat(row_i, a) = coef;
          }
          rhs[row_i] = dLp[k](i, j);
          ++row_i;
        }
    Eigen::VectorXd alpha = Amat.colPivHouseholderQr().solve(rhs);
    double res = (Amat * alpha - rhs).cwiseAbs().maxCoeff();
    worst = std::max(worst, res);
  }
  return worst;
}

double verify_killing_fd(const PseudoSpace& space,
                         const std::function<Mat(const Vec&)>& contravariant,
                         const std::vector<Vec>& pts, double h) {
  const int n = space.n;
  Mat g = space.metric();
  double worst = 0.0;
  for (const Vec& x0 : pts) {
    std::vector<Mat> dK(n);
    for (int k = 0; k < n; ++k) {
      Vec e = Vec::Zero(n);
      e[k] = 1.0;
      auto cov = [&](const Vec& p) { return Mat(g * contravariant(p) * g); };
      dK[k] = (-cov(x0 + 2 * h * e) + 8 * cov(x0 + h * e) - 8 * cov(x0 - h * e) +
               cov(x0 - 2 * h * e)) /
              (12 * h);
    }
    for (int k = 0; k < n; ++k)
      for (int i = k; i < n; ++i)
        for (int j = i; j < n; ++j)
          worst = std::max(worst, std::fabs(dK[k](i, j) + dK[i](j, k) + dK[j](k, i)));
  }
  return worst;
}

}  // namespace sepweb
