#include "sepweb/kbd.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace sepweb {

Box Box::centered(const Vec& center, double half_width) {
  Box b;
  b.lo = center.array() - half_width;
  b.hi = center.array() + half_width;
  return b;
}

int kbd_param_count(const PseudoSpace& space) {
  return space.n * (space.n + 1) / 2 + space.n + 1;
}

Vec kbd_pack(const ConcircularTensor& L) {
  const int n = L.space.n;
  Vec p(kbd_param_count(L.space));
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) p[k++] = L.A(i, j);
  for (int i = 0; i < n; ++i) p[k++] = L.w[i];
  p[k] = L.m;
  return p;
}

ConcircularTensor kbd_unpack(const PseudoSpace& space, const Vec& p) {
  const int n = space.n;
  Mat A(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      A(i, j) = A(j, i) = p[k];
      ++k;
    }
  Vec w = p.segment(k, n);
  return ConcircularTensor(space, A, w, p[k + n]);
}

namespace {

// rows of the linear system at one sample: for each pair i<j the component
// (d(K dV))_{ij} as a linear functional of the packed parameters
void assemble_rows(const PseudoSpace& s, const Vec& q, const Vec& dV, const Mat& HV,
                   std::vector<Vec>& rows) {
  const int n = s.n;
  const int np = kbd_param_count(s);
  auto g = [&](int i) { return s.metric_sign(i); };
  // one basis direction at a time; everything is linear in the parameters
  std::vector<Mat> Kl(np), dKl_all(np * n);
  for (int a = 0; a < np; ++a) {
    Vec e = Vec::Zero(np);
    e[a] = 1.0;
    ConcircularTensor L = kbd_unpack(s, e);
    // K = tr(L) G - L, lowered on the first slot: (g K)_{j}{}^{k}
    Mat Lm = L.A + L.w * q.transpose() + q * L.w.transpose() + L.m * q * q.transpose();
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += Lm(i, i) * g(i);
    Mat K = tr * s.inverse_metric() - Lm;
    Mat KL = K;
    for (int i = 0; i < n; ++i) KL.row(i) *= g(i);  // (g K): row-lowered
    Kl[a] = KL;
    for (int d = 0; d < n; ++d) {
      // x-derivative of K's components
      Vec ed = Vec::Zero(n);
      ed[d] = 1.0;
      Mat dL = L.w * ed.transpose() + ed * L.w.transpose() +
               L.m * (ed * q.transpose() + q * ed.transpose());
      double dtr = 0.0;
      for (int i = 0; i < n; ++i) dtr += dL(i, i) * g(i);
      Mat dK = dtr * s.inverse_metric() - dL;
      for (int i = 0; i < n; ++i) dK.row(i) *= g(i);
      dKl_all[a * n + d] = dK;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vec row(np);
      for (int a = 0; a < np; ++a) {
        // d_i (K_j^k dV_k) - d_j (K_i^k dV_k)
        double v = dKl_all[a * n + i].row(j).dot(dV) + Kl[a].row(j).dot(HV.col(i)) -
                   dKl_all[a * n + j].row(i).dot(dV) - Kl[a].row(i).dot(HV.col(j));
        row[a] = v;
      }
      rows.push_back(row);
    }
}

std::vector<Vec> sample_points(const PotentialPtr& V, const Box& box, int count,
                               std::mt19937_64& rng) {
  const int n = static_cast<int>(box.lo.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> pts;
  int attempts = 0;
  while (static_cast<int>(pts.size()) < count) {
    if (++attempts > 10 * count + 100)
      throw KbdError("kbd: could not sample enough nonsingular points in the box");
    Vec q(n);
    for (int i = 0; i < n; ++i) q[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * u(rng);
    try {
      double v = V->eval(q);
      Vec dv = V->gradient(q);
      Mat hv = V->hessian(q);
      if (!std::isfinite(v) || !dv.allFinite() || !hv.allFinite()) continue;
      // reject near-singular samples by derivative magnitude blowup
      if (dv.cwiseAbs().maxCoeff() > 1e8 || hv.cwiseAbs().maxCoeff() > 1e10) continue;
      pts.push_back(q);
    } catch (const std::domain_error&) {
      continue;
    }
  }
  return pts;
}

struct NullspaceResult {
  Mat basis;  // np x dim
  std::vector<double> singular_values;
};

NullspaceResult nullspace_of(const std::vector<Vec>& rows, int np, double svd_tol,
                             double gap_factor) {
  Mat M(static_cast<int>(rows.size()), np);
  for (size_t r = 0; r < rows.size(); ++r) M.row(static_cast<int>(r)) = rows[r];
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  Eigen::VectorXd sv = svd.singularValues();
  double top = sv.size() ? sv[0] : 0.0;
  int rank = 0;
  while (rank < sv.size() && sv[rank] > svd_tol * top) ++rank;
  int dim = np - rank;
  if (dim > 0 && rank > 0) {
    double kept = sv[rank - 1];
    double dropped = rank < sv.size() ? sv[rank] : 0.0;
    if (dropped > 0.0 && kept / dropped < gap_factor) {
      std::ostringstream os;
      os << "kbd: singular-value gap too small (" << kept << " / " << dropped << ")";
      throw KbdError(os.str());
    }
  }
  NullspaceResult out;
  out.basis = svd.matrixV().rightCols(dim);
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  return out;
}

}  // namespace

KbdSolution kbd_solve(const PotentialPtr& V, const Box& box, const KbdOptions& opts) {
  const PseudoSpace& s = V->space();
  if (s.is_sphere()) throw KbdError("kbd_solve: flat-space solver (spheres are handled by restriction)");
  const int np = kbd_param_count(s);
  int count = opts.n_samples > 0 ? opts.n_samples : 5 * np;
  if (count < 5 * np) throw KbdError("kbd_solve: insufficient samples requested");

  std::mt19937_64 rng(opts.seed);
  auto build = [&](int howmany) {
    std::vector<Vec> pts = sample_points(V, box, howmany, rng);
    std::vector<Vec> rows;
    rows.reserve(pts.size() * s.n * (s.n - 1) / 2);
    for (const Vec& q : pts) {
      Vec dV = V->gradient(q);
      Mat HV = V->hessian(q);
      double rs = 1.0 / (1.0 + dV.norm() + HV.norm());
      size_t before = rows.size();
      assemble_rows(s, q, dV, HV, rows);
      for (size_t r = before; r < rows.size(); ++r) rows[r] *= rs;
      (void)before;
    }
    return std::make_pair(pts, rows);
  };

  auto [pts, rows] = build(count);
  NullspaceResult ns = nullspace_of(rows, np, opts.svd_tol, opts.gap_factor);

  if (opts.stability_check) {
    auto [pts2, rows2] = build(2 * count);
    NullspaceResult ns2 = nullspace_of(rows2, np, opts.svd_tol, opts.gap_factor);
    if (ns2.basis.cols() != ns.basis.cols()) {
      std::ostringstream os;
      os << "kbd: nullspace dimension unstable under resampling (" << ns.basis.cols()
         << " vs " << ns2.basis.cols() << ")";
      throw KbdError(os.str());
    }
  }

  // held-out residual verification
  std::vector<Vec> held = sample_points(V, box, 16, rng);
  KbdSolution sol;
  sol.sample_box = box;
  sol.param_count = np;
  sol.singular_values = ns.singular_values;
  for (int c = 0; c < ns.basis.cols(); ++c) {
    ConcircularTensor L = kbd_unpack(s, ns.basis.col(c));
    double r = dkdv_residual(L, V, held);
    if (r > 1e-6)
      throw KbdError("kbd: nullspace member fails the held-out residual check");
    sol.basis.push_back(L);
  }
  // the metric direction (A = G) always solves d(dV) = 0
  Vec pg = kbd_pack(ConcircularTensor::metric(s));
  pg /= pg.norm();
  Vec proj = ns.basis * (ns.basis.transpose() * pg);
  sol.includes_trivial = (pg - proj).norm() < 1e-7;
  return sol;
}

double dkdv_residual(const ConcircularTensor& L, const PotentialPtr& V,
                     const std::vector<Vec>& pts) {
  return dkdv_residual_field(kbdt(L), V, pts);
}

double dkdv_residual_field(const PolySym2Field& K, const PotentialPtr& V,
                           const std::vector<Vec>& pts) {
  const PseudoSpace& s = K.space;
  const int n = s.n;
  double worst = 0.0;
  for (const Vec& q : pts) {
    Vec dV = V->gradient(q);
    Mat HV = V->hessian(q);
    Mat Kv = K.eval(q).m;
    Mat Kl = Kv;
    for (int i = 0; i < n; ++i) Kl.row(i) *= s.metric_sign(i);
    std::vector<Mat> dK(n);
    for (int d = 0; d < n; ++d) {
      dK[d] = K.eval_derivative(q, d);
      for (int i = 0; i < n; ++i) dK[d].row(i) *= s.metric_sign(i);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double v = dK[i].row(j).dot(dV) + Kl.row(j).dot(HV.col(i)) -
                   dK[j].row(i).dot(dV) - Kl.row(i).dot(HV.col(j));
        worst = std::max(worst, std::fabs(v));
      }
  }
  return worst;
}

double integrate_potential_U(const PolySym2Field& K, const PotentialPtr& V,
                             const Vec& base, const Vec& target, double closedness_tol) {
  const PseudoSpace& s = K.space;
  const int n = s.n;
  // closedness spot-check along the segment
  {
    std::vector<Vec> pts;
    for (int i = 1; i <= 5; ++i) pts.push_back(base + (target - base) * (i / 6.0));
    double r = dkdv_residual_field(K, V, pts);
    if (r > closedness_tol)
      throw KbdError("integrate_potential_U: K dV is not closed along the segment");
  }
  // Gauss-Legendre 20-point on [0,1], two panels
  static const double gx[10] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
                                0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
                                0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
                                0.9931285991850949};
  static const double gw[10] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
                                0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
                                0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
                                0.0176140071391521};
  Vec dir = target - base;
  auto integrand = [&](double t) {
    Vec q = base + t * dir;
    Vec dV = V->gradient(q);
    Mat Kv = K.eval(q).m;
    Mat Kl = Kv;
    for (int i = 0; i < n; ++i) Kl.row(i) *= s.metric_sign(i);
    // (K dV)_j dq^j along the segment: omega_j = K_j^k dV_k, contracted with dir
    double v = 0.0;
    for (int j = 0; j < n; ++j) v += Kl.row(j).dot(dV) * dir[j];
    return v;
  };
  double total = 0.0;
  for (int panel = 0; panel < 2; ++panel) {
    double a = panel * 0.5, b = a + 0.5;
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < 10; ++i)
      total += h * gw[i] * (integrand(c + h * gx[i]) + integrand(c - h * gx[i]));
  }
  return total;
}

}  // namespace sepweb
