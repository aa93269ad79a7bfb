#include "sepweb/bekm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace sepweb {

bool SeparationTree::resolved() const {
  if (kind == Kind::Fail) return false;
  if (kind == Kind::Benenti) return true;
  return fiber && fiber->resolved();
}

int SeparationTree::leaf_total() const {
  if (kind == Kind::Fail) return 0;
  int n = static_cast<int>(leaves.size());
  if (fiber) n += fiber->leaf_total();
  return n;
}

std::string SeparationTree::describe() const {
  std::ostringstream os;
  if (kind == Kind::Fail) return "Fail(" + fail_reason + ")";
  if (kind == Kind::Benenti) {
    os << "Benenti[" << (chart.empty() ? class_key : chart) << "]";
    return os.str();
  }
  os << "Warped[" << (central_split ? "central" : "axis") << ", "
     << (chart.empty() ? class_key : chart) << " | "
     << (fiber ? fiber->describe() : std::string("?")) << "]";
  return os.str();
}

namespace {

Mat endo_of(const Mat& contravariant, const PseudoSpace& s) {
  Mat e = contravariant;
  for (int j = 0; j < s.n; ++j) e.col(j) *= s.metric_sign(j);
  return e;
}

// g-orthonormal completion of the given leading columns (Gram-Schmidt over
// the coordinate axes, deterministic)
Mat complete_frame(const PseudoSpace& s, const Mat& lead) {
  const int n = s.n;
  std::vector<Vec> basis;
  for (int c = 0; c < lead.cols(); ++c) basis.push_back(lead.col(c));
  for (int i = 0; i < n && static_cast<int>(basis.size()) < n; ++i) {
    Vec cand = Vec::Zero(n);
    cand[i] = 1.0;
    for (const Vec& b : basis) {
      double nb = scalar_product(b, b, s);
      if (std::fabs(nb) < 1e-12) continue;
      cand -= b * (scalar_product(cand, b, s) / nb);
    }
    double nc = scalar_product(cand, cand, s);
    if (std::fabs(nc) < 1e-8) continue;
    basis.push_back(cand / std::sqrt(std::fabs(nc)));
  }
  Mat out(n, basis.size());
  for (size_t c = 0; c < basis.size(); ++c) out.col(c) = basis[c];
  return out;
}

// points on the quadric <p,p> = 1/kappa with rejection against V
std::vector<Vec> sphere_samples(const PotentialPtr& V, const PseudoSpace& sph, int count,
                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  std::vector<Vec> out;
  int guard = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++guard > 200 * count) throw BekmError("sphere sampling failed");
    Vec x(sph.n);
    for (int i = 0; i < sph.n; ++i) x[i] = un(rng);
    double q = scalar_product(x, x, sph) * sph.kappa;
    if (q < 0.05) continue;
    x /= std::sqrt(q);
    try {
      double v = V ? V->eval(x) : 0.0;
      if (!std::isfinite(v)) continue;
      if (V) {
        Vec g = V->gradient(x);
        if (!g.allFinite() || g.cwiseAbs().maxCoeff() > 1e8) continue;
      }
      out.push_back(x);
    } catch (const std::domain_error&) {
      continue;
    }
  }
  return out;
}

// local chart around a sphere point: phi(y) = normalize(p + y1 B1 + y2 B2)
struct LocalSphereChart {
  Vec p;
  Mat B;  // n x (n-1) tangent basis
  PseudoSpace sph;
  Vec map(const Vec& y) const {
    Vec q = p + B * y;
    double s = scalar_product(q, q, sph) * sph.kappa;
    return q / std::sqrt(s);
  }
};

LocalSphereChart local_chart(const PseudoSpace& sph, const Vec& p) {
  Vec pf = flat_vec(p, sph);
  Mat row = pf.transpose();
  Eigen::FullPivLU<Mat> lu(row);
  Eigen::HouseholderQR<Mat> qr(lu.kernel());
  Mat B = qr.householderQ() * Mat::Identity(sph.n, sph.n - 1);
  return {p, B, sph};
}

}  // namespace

SphereKbd sphere_kbd_solve(const PotentialPtr& V, const PseudoSpace& sph,
                           std::uint64_t seed, int n_samples) {
  if (!sph.is_sphere()) throw BekmError("sphere_kbd_solve: not a sphere");
  const int n = sph.n;
  const int np = n * (n + 1) / 2;
  std::mt19937_64 rng(seed);
  std::vector<Vec> pts = sphere_samples(V, sph, n_samples, rng);
  const int m = sph.intrinsic_dim();
  if (m != 2) throw BekmError("sphere_kbd_solve: only 2-dimensional fibers are supported");

  std::vector<std::pair<int, int>> idx;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) idx.push_back({i, j});

  std::vector<Vec> rows;
  const double h = 1e-4;
  for (const Vec& p : pts) {
    LocalSphereChart ch = local_chart(sph, p);
    // one-form omega(y) = K dV in chart coordinates, per parameter direction
    auto omega = [&](const Mat& A, const Vec& y) {
      Vec q = ch.map(y);
      // chart jacobian at y (4th-order FD)
      Mat J(n, m);
      for (int a = 0; a < m; ++a) {
        Vec e = Vec::Zero(m);
        e[a] = 1.0;
        J.col(a) = (-ch.map(y + 2 * h * e) + 8 * ch.map(y + h * e) - 8 * ch.map(y - h * e) +
                    ch.map(y - 2 * h * e)) /
                   (12 * h);
      }
      Mat g = sph.metric();
      Mat gc = J.transpose() * g * J;
      // L = R A R* ambient, chart components, K = tr gc^{-1} ... - L
      double r2 = scalar_product(q, q, sph);
      Vec qf = flat_vec(q, sph);
      Mat R = Mat::Identity(n, n) - q * qf.transpose() / r2;
      Mat Lamb = R * A * R.transpose();
      Mat gci = gc.inverse();
      Mat Jp = gci * J.transpose() * g;  // ambient tangent -> chart components
      Mat Lc = Jp * Lamb * Jp.transpose();
      double tr = (Lc * gc).trace();
      Mat Kc = tr * gci - Lc;
      Mat Klow = gc * Kc;  // K_a^b with first slot lowered
      // chart gradient of V
      Vec dV(m);
      for (int a = 0; a < m; ++a) {
        Vec e = Vec::Zero(m);
        e[a] = 1.0;
        dV[a] = (-V->eval(ch.map(y + 2 * h * e)) + 8 * V->eval(ch.map(y + h * e)) -
                 8 * V->eval(ch.map(y - h * e)) + V->eval(ch.map(y - 2 * h * e))) /
                (12 * h);
      }
      return Vec(Klow * dV);
    };
    Vec row(np);
    for (int a = 0; a < np; ++a) {
      Mat A = Mat::Zero(n, n);
      A(idx[a].first, idx[a].second) += 1.0;
      A(idx[a].second, idx[a].first) += (idx[a].first == idx[a].second) ? 0.0 : 1.0;
      // the single 2-form component of d(K dV) (fibers here are 2-dimensional)
      Vec ei = Vec::Zero(m), ej = Vec::Zero(m);
      ei[0] = 1.0;
      ej[1] = 1.0;
      double dio = (-omega(A, 2 * h * ei)[1] + 8 * omega(A, h * ei)[1] -
                    8 * omega(A, -h * ei)[1] + omega(A, -2 * h * ei)[1]) /
                   (12 * h);
      double djo = (-omega(A, 2 * h * ej)[0] + 8 * omega(A, h * ej)[0] -
                    8 * omega(A, -h * ej)[0] + omega(A, -2 * h * ej)[0]) /
                   (12 * h);
      row[a] = dio - djo;
    }
    double scale = row.cwiseAbs().maxCoeff();
    if (scale > 1e-30) row /= scale;
    rows.push_back(row);
  }
  Mat M(static_cast<int>(rows.size()), np);
  for (size_t r = 0; r < rows.size(); ++r) M.row(static_cast<int>(r)) = rows[r];
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  Eigen::VectorXd sv = svd.singularValues();
  double top = sv[0];
  int rank = 0;
  while (rank < sv.size() && sv[rank] > 3e-6 * top) ++rank;
  SphereKbd out;
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  for (int c = rank; c < np; ++c) {
    Vec p = svd.matrixV().col(c);
    Mat A = Mat::Zero(n, n);
    for (int a = 0; a < np; ++a) {
      A(idx[a].first, idx[a].second) += p[a];
      if (idx[a].first != idx[a].second) A(idx[a].second, idx[a].first) += p[a];
    }
    out.basis.push_back(A);
  }
  // trivial direction = inverse metric
  Vec pg(np);
  Mat Gc = sph.inverse_metric();
  for (int a = 0; a < np; ++a) pg[a] = Gc(idx[a].first, idx[a].second);
  pg /= pg.norm();
  Mat N = svd.matrixV().rightCols(np - rank);
  out.includes_trivial = (pg - N * (N.transpose() * pg)).norm() < 1e-5;
  return out;
}

namespace {

// deterministic unit-sphere grid in d dimensions (small, for stratum probing)
std::vector<Vec> direction_grid(int d) {
  std::vector<Vec> out;
  if (d == 1) {
    Vec v(1);
    v << 1.0;
    out.push_back(v);
    return out;
  }
  if (d == 2) {
    for (int k = 0; k < 24; ++k) {
      double th = M_PI * k / 24.0;
      Vec v(2);
      v << std::cos(th), std::sin(th);
      out.push_back(v);
    }
    return out;
  }
  // Fibonacci-style grid on S^{d-1} via normalized low-discrepancy points
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < 32 * d; ++k) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = gauss(rng);
    v.normalize();
    out.push_back(v);
  }
  return out;
}

struct Candidate {
  ConcircularTensor ct;
  CanonicalClass cls;
};

struct CatalogKeyTable {
  std::vector<std::pair<std::string, std::string>> entries;  // (case_id, key)
};

const CatalogKeyTable& catalog_keys(const std::string& space_name) {
  static std::map<std::string, CatalogKeyTable> cache;
  auto it = cache.find(space_name);
  if (it != cache.end()) return it->second;
  CatalogKeyTable t;
  for (const std::string& id : catalog_cases(space_name)) {
    WebChart c = make_chart(id);
    std::string key;
    if (c.space.is_sphere()) key = std::string("S:") + sphere_class_key(c.ct.A, c.space);
    else key = classify_ct(c.ct).key;
    t.entries.push_back({id, key});
  }
  return cache.emplace(space_name, std::move(t)).first->second;
}

std::string match_catalog(const PseudoSpace& s, const std::string& key) {
  std::string sn = s.name();
  if (sn != "E2" && sn != "E2_1" && sn != "dS2") return "";
  for (auto& [id, k] : catalog_keys(sn).entries)
    if (k == key) return id;
  return "";
}

// eigen-multiplicity pattern at probe points; requires 6-of-8 agreement
struct ProbePattern {
  std::vector<int> mult;     // sorted multiplicities
  Eigenfunctions sample_ef;  // from the first agreeing probe
  Vec probe;
  bool ok = false;
};

ProbePattern probe_eigenstructure(const ConcircularTensor& L, const std::vector<Vec>& probes) {
  std::map<std::vector<int>, int> votes;
  std::map<std::vector<int>, std::pair<Eigenfunctions, Vec>> keep;
  int evaluated = 0;
  for (const Vec& p : probes) {
    try {
      Eigenfunctions ef = eigenfunctions(L, p);
      std::vector<int> m = ef.multiplicity;
      std::sort(m.begin(), m.end());
      votes[m]++;
      keep.emplace(m, std::make_pair(ef, p));
      ++evaluated;
    } catch (const NotOrthogonalError&) {
      continue;
    }
  }
  ProbePattern out;
  for (auto& [m, v] : votes)
    if (v >= 6 || (evaluated < 8 && v >= (3 * evaluated) / 4 && v >= 3)) {
      out.mult = m;
      out.sample_ef = keep.at(m).first;
      out.probe = keep.at(m).second;
      out.ok = true;
    }
  return out;
}

double spread_of_normalized(const CanonicalClass& cls) {
  // spread of the normalized A's real eigenvalues (chart parameter a^2)
  double lo = 0, hi = 0;
  bool first = true;
  for (auto& b : cls.blocks)
    if (b.lambda.imag() == 0.0) {
      double v = b.lambda.real();
      if (first) {
        lo = hi = v;
        first = false;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return hi - lo;
}

}  // namespace

WarpedSplit warped_split(const CanonicalClass& cls, const Eigenfunctions& ef, const Vec& probe) {
  const PseudoSpace& s = cls.normalized_ct.space;
  WarpedSplit out;
  out.probe = probe;
  int multi_count = 0, multi_idx = -1;
  for (size_t i = 0; i < ef.multiplicity.size(); ++i)
    if (ef.multiplicity[i] > 1) {
      ++multi_count;
      multi_idx = static_cast<int>(i);
    }
  if (multi_count != 1)
    throw BekmError("warped_split: expected exactly one multidimensional eigenspace");

  if (cls.tag == CtClass::Cartesian) {
    // axis split E^m x E^{n-m}: D is the repeated eigenspace of the constant A
    Mat Ae = endo_of(cls.normalized_ct.A, s);
    // eigenspace of the repeated eigenvalue from the probe eigenstructure
    Mat D = ef.eigenspaces[multi_idx];
    // g-orthonormalize D and the complement
    Mat Dn(s.n, D.cols());
    {
      std::vector<Vec> cols;
      for (int c = 0; c < D.cols(); ++c) {
        Vec v = D.col(c);
        for (const Vec& b : cols) {
          double nb = scalar_product(b, b, s);
          v -= b * (scalar_product(v, b, s) / nb);
        }
        double nv = scalar_product(v, v, s);
        if (std::fabs(nv) < 1e-10) throw BekmError("warped_split: degenerate eigenspace metric");
        cols.push_back(v / std::sqrt(std::fabs(nv)));
      }
      for (size_t c = 0; c < cols.size(); ++c) Dn.col(static_cast<int>(c)) = cols[c];
    }
    Mat geod(s.n, s.n - D.cols());
    int gc = 0;
    for (size_t i = 0; i < ef.eigenspaces.size(); ++i)
      if (static_cast<int>(i) != multi_idx)
        for (int c = 0; c < ef.eigenspaces[i].cols(); ++c) geod.col(gc++) = ef.eigenspaces[i].col(c);
    out.central = false;
    out.geodesic_frame = geod;
    out.fiber_frame = Dn;
    int nu_f = 0;
    for (int c = 0; c < Dn.cols(); ++c)
      if (scalar_product(Dn.col(c), Dn.col(c), s) < 0) ++nu_f;
    out.fiber_space = PseudoSpace::flat(static_cast<int>(Dn.cols()), nu_f);
    out.warp_c = ef.values[multi_idx];
    (void)Ae;
    return out;
  }
  if (cls.tag == CtClass::Central) {
    // central split: normalized L must be r sym r up to tolerance
    const ConcircularTensor& Ln = cls.normalized_ct;
    if (Ln.A.cwiseAbs().maxCoeff() > 1e-7 * (1.0 + std::fabs(Ln.m)))
      throw BekmError("warped_split: unsupported central eigenspace shape (class " + cls.key + ")");
    double q2 = scalar_product(probe, probe, s);
    if (std::fabs(q2) < 1e-8) throw BekmError("warped_split: probe on the null cone");
    double eps = q2 > 0 ? +1.0 : -1.0;
    out.central = true;
    out.fiber_space = PseudoSpace::sphere(s.n, s.nu, eps);
    out.warp_c = 0.0;  // the r-perp eigenvalue of r sym r
    Vec a = probe / std::sqrt(std::fabs(q2));
    out.geodesic_frame = a;
    return out;
  }
  throw BekmError("warped_split: unsupported eigenspace geometry (class " + cls.key + ")");
}

PotentialPtr restrict_potential(const PotentialPtr& V, const WarpedSplit& split) {
  if (!split.central) {
    Vec origin = Vec::Zero(V->space().n);
    return restrict_affine(V, split.fiber_space, origin, split.fiber_frame);
  }
  // central: the rho = 1 slice is the unit sphere itself; V evaluated ambient
  struct SphereRestriction : PotentialField {
    PotentialPtr V;
    PseudoSpace sph;
    SphereRestriction(PotentialPtr v, PseudoSpace s) : V(std::move(v)), sph(s) {}
    const PseudoSpace& space() const override { return sph; }
    double eval(const Vec& q) const override { return V->eval(q); }
    Vec gradient(const Vec& q) const override { return V->gradient(q); }
    Mat hessian(const Vec& q) const override { return V->hessian(q); }
    bool analytic() const override { return V->analytic(); }
  };
  return std::make_shared<SphereRestriction>(V, split.fiber_space);
}

namespace {

SeparationTree analyze_sphere_fiber(const PotentialPtr& V_F, const PseudoSpace& sph,
                                    std::uint64_t seed) {
  SeparationTree node;
  node.space = sph;
  if (sph.intrinsic_dim() == 1) {
    // one-dimensional fibers separate unconditionally
    node.kind = SeparationTree::Kind::Benenti;
    node.ct = ConcircularTensor::on_sphere(sph, sph.inverse_metric());
    node.class_key = "S1";
    node.leaves.push_back("fiber arc coordinate");
    return node;
  }
  SphereKbd sol = sphere_kbd_solve(V_F, sph, seed);
  // nontrivial directions: project out the inverse metric
  Mat Gc = sph.inverse_metric();
  std::vector<Mat> nontrivial;
  for (const Mat& A : sol.basis) {
    double c = (A.cwiseProduct(Gc)).sum() / Gc.cwiseProduct(Gc).sum();
    Mat W = A - c * Gc;
    if (W.cwiseAbs().maxCoeff() > 1e-5) nontrivial.push_back(W);
  }
  if (nontrivial.empty()) {
    node.kind = SeparationTree::Kind::Fail;
    node.fail_reason = "no nontrivial CT on the spherical factor";
    return node;
  }
  Mat A = nontrivial.front();
  A /= A.cwiseAbs().maxCoeff();
  ConcircularTensor L = ConcircularTensor::on_sphere(sph, A);
  std::mt19937_64 rng(seed + 17);
  std::vector<Vec> probes = sphere_samples(V_F, sph, 8, rng);
  ProbePattern pat = probe_eigenstructure(L, probes);
  if (!pat.ok || !pat.sample_ef.simple()) {
    node.kind = SeparationTree::Kind::Fail;
    node.fail_reason = "spherical-factor CT is not a Benenti tensor at probes";
    return node;
  }
  node.kind = SeparationTree::Kind::Benenti;
  node.ct = L;
  node.class_key = std::string("S:") + sphere_class_key(A, sph);
  node.chart = match_catalog(sph, node.class_key);
  for (double v : pat.sample_ef.values) {
    std::ostringstream os;
    os << "sphere eigenvalue " << v;
    node.leaves.push_back(os.str());
  }
  return node;
}

SeparationTree make_tree_for(const PotentialPtr& V, const Candidate& cand, const Box& box,
                             const BekmOptions& opts, int depth);

SeparationTree analyze_flat_fiber(const PotentialPtr& V_F, const Box& fiber_box,
                                  const BekmOptions& opts, int depth) {
  BekmOptions sub = opts;
  sub.exhaustive = false;
  sub.seed = opts.seed + 1000 * (depth + 1);
  BekmResult r = bekm_separate(V_F, fiber_box, sub);
  if (r.trees.empty()) {
    SeparationTree node;
    node.space = V_F->space();
    node.kind = SeparationTree::Kind::Fail;
    node.fail_reason = "no separable structure on the flat factor";
    return node;
  }
  return r.trees.front();
}

SeparationTree make_tree_for(const PotentialPtr& V, const Candidate& cand, const Box& box,
                             const BekmOptions& opts, int depth) {
  const PseudoSpace& s = V->space();
  SeparationTree node;
  node.space = s;
  node.ct = cand.cls.normalized_ct;
  node.class_key = cand.cls.key;

  std::mt19937_64 rng(opts.seed + 7 + depth);
  std::uniform_real_distribution<double> un(0.0, 1.0);
  std::vector<Vec> probes;
  int guard = 0;
  while (static_cast<int>(probes.size()) < 8 && ++guard < 500) {
    Vec q(s.n);
    for (int i = 0; i < s.n; ++i)
      q[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * un(rng);
    try {
      if (V && std::isfinite(V->eval(q))) probes.push_back(q);
    } catch (const std::domain_error&) {
    }
  }
  ProbePattern pat = probe_eigenstructure(cand.cls.normalized_ct, probes);
  if (!pat.ok) {
    node.kind = SeparationTree::Kind::Fail;
    node.fail_reason = "eigenstructure unstable across probes (class " + cand.cls.key + ")";
    return node;
  }

  if (pat.sample_ef.simple()) {
    node.kind = SeparationTree::Kind::Benenti;
    for (double v : pat.sample_ef.values) {
      std::ostringstream os;
      os << "eigenfunction branch at " << v;
      node.leaves.push_back(os.str());
    }
    node.chart = match_catalog(s, node.class_key);
    if (node.chart.empty() && s.n == 3 && !s.is_sphere()) {
      // named 3d charts
      if (cand.cls.tag == CtClass::Central && s.nu == 0) {
        // prolate / oblate by the multiplicity position
        std::vector<std::pair<double, int>> vals;  // (eigenvalue, count)
        for (auto& b : cand.cls.blocks) {
          bool merged = false;
          for (auto& v : vals)
            if (std::fabs(v.first - b.lambda.real()) < 1e-7) {
              v.second++;
              merged = true;
            }
          if (!merged) vals.push_back({b.lambda.real(), 1});
        }
        std::sort(vals.begin(), vals.end());
        if (vals.size() == 2) {
          bool top_simple = vals[1].second == 1;
          node.chart = top_simple ? "prolate" : "oblate";
          node.chart_a = std::sqrt(vals[1].first - vals[0].first);
          // frame: simple eigenvector first
          Mat Ae = endo_of(cand.cls.normalized_ct.A, s);
          double lam = top_simple ? vals[1].first : vals[0].first;
          Eigen::JacobiSVD<Mat> svd(Mat(Ae - lam * Mat::Identity(3, 3)), Eigen::ComputeFullV);
          Vec d = svd.matrixV().col(2);
          node.chart_frame = complete_frame(s, d);
        }
      } else if (cand.cls.tag == CtClass::NonNullAxial && s.nu == 0) {
        node.chart = "parabolic";
        Vec d = cand.cls.normalized_ct.w;
        node.chart_frame = complete_frame(s, d / d.norm());
      } else if (cand.cls.tag == CtClass::NullAxial && s.nu == 1) {
        node.chart = "null-axial";
        node.chart_frame = Mat::Identity(3, 3);
      }
    }
    return node;
  }

  // Case 3: one multidimensional eigenspace
  try {
    WarpedSplit split = warped_split(cand.cls, pat.sample_ef, pat.probe);
    node.kind = SeparationTree::Kind::Warped;
    node.central_split = split.central;
    node.fiber_frame = split.fiber_frame;
    node.fiber_origin = Vec::Zero(s.n);
    node.warp_c = split.warp_c;
    for (size_t i = 0; i < pat.sample_ef.multiplicity.size(); ++i)
      if (pat.sample_ef.multiplicity[i] == 1) {
        std::ostringstream os;
        os << "geodesic eigenfunction at " << pat.sample_ef.values[i];
        node.leaves.push_back(os.str());
      }
    PotentialPtr V_F = restrict_potential(V, split);
    node.fiber_potential = V_F;
    if (split.central) {
      node.fiber = std::make_shared<SeparationTree>(
          analyze_sphere_fiber(V_F, split.fiber_space, opts.seed + 31 * (depth + 1)));
      if (node.fiber->resolved()) {
        if (s.n == 3 && s.nu == 0) {
          node.chart = "spherical";
          // frame from the fiber CT's distinguished axis
          Mat Af = node.fiber->ct.A;
          Eigen::SelfAdjointEigenSolver<Mat> es(Af);
          Vec d = es.eigenvectors().col(2);  // top eigenvector
          node.chart_frame = complete_frame(s, d);
        }
      }
    } else {
      // flat fiber: recurse in fiber coordinates around the projected probe
      Mat coF(s.n, split.fiber_frame.cols());
      Mat gFf = Mat(s.metric() * split.fiber_frame);
      for (int c = 0; c < split.fiber_frame.cols(); ++c)
        coF.col(c) = gFf.col(c) /
                     scalar_product(split.fiber_frame.col(c), split.fiber_frame.col(c), s);
      Vec z0 = coF.transpose() * pat.probe;
      Box fb = Box::centered(z0, 0.5);
      node.fiber = std::make_shared<SeparationTree>(
          analyze_flat_fiber(V_F, fb, opts, depth + 1));
      if (node.fiber->resolved() && s.n == 3 && s.nu == 0) {
        if (node.fiber->chart == "E2.polar") {
          node.chart = "cylindrical";
          node.chart_frame = complete_frame(s, split.geodesic_frame.col(0).normalized());
        } else {
          node.chart = "axis-split+" + node.fiber->chart;
          node.chart_frame = complete_frame(s, split.geodesic_frame.col(0).normalized());
        }
      }
    }
  } catch (const BekmError& e) {
    node.kind = SeparationTree::Kind::Fail;
    node.fail_reason = e.what();
  }
  return node;
}

}  // namespace

BekmResult bekm_separate(const PotentialPtr& V, const Box& box, const BekmOptions& opts) {
  const PseudoSpace& s = V->space();
  BekmResult out;
  KbdOptions ko = opts.kbd;
  ko.seed = opts.seed;
  out.kbd = kbd_solve(V, box, ko);

  const int np = kbd_param_count(s);
  // reduced (trivial-direction-free) solution space
  Vec pg = kbd_pack(ConcircularTensor::metric(s));
  pg /= pg.norm();
  std::vector<Vec> reduced;
  for (const ConcircularTensor& L : out.kbd.basis) {
    Vec p = kbd_pack(L);
    p -= (p.dot(pg)) * pg;
    for (const Vec& r : reduced) p -= (p.dot(r)) * r;
    if (p.norm() > 1e-7) reduced.push_back(p.normalized());
  }
  if (reduced.empty()) {
    SeparationTree t;
    t.space = s;
    t.kind = SeparationTree::Kind::Fail;
    t.fail_reason = "no nontrivial CT solves the compatibility equation";
    out.trees.push_back(t);
    return out;
  }

  std::vector<ConcircularTensor> cand_cts;
  if (static_cast<int>(out.kbd.basis.size()) == np && s.n == 2 && !s.is_sphere()) {
    // geodesic case: every CT is compatible; enumerate the catalog classes
    for (const std::string& id : catalog_cases(s.name()))
      cand_cts.push_back(make_chart(id).ct);
  } else {
    for (const Vec& r : reduced) cand_cts.push_back(kbd_unpack(s, r));
    const int d = static_cast<int>(reduced.size());
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        cand_cts.push_back(kbd_unpack(s, Vec(reduced[i] + reduced[j])));
        cand_cts.push_back(kbd_unpack(s, Vec(reduced[i] - reduced[j])));
      }
    if (d >= 2)
      for (const Vec& dir : direction_grid(d)) {
        Vec p = Vec::Zero(np);
        for (int i = 0; i < d; ++i) p += dir[i] * reduced[i];
        cand_cts.push_back(kbd_unpack(s, p));
      }
  }

  // classify and bucket by canonical class
  std::vector<Candidate> reps;
  std::set<std::string> seen;
  for (const ConcircularTensor& L : cand_cts) {
    if (L.is_trivial(1e-9)) continue;
    try {
      CanonicalClass cls = classify_ct(L, 1e-9);
      if (cls.tag == CtClass::DegenerateNullAxial) {
        out.diagnostics.push_back("set aside degenerate null axial candidate");
        continue;
      }
      if (seen.count(cls.key)) continue;
      seen.insert(cls.key);
      reps.push_back({L, cls});
      if (static_cast<int>(reps.size()) >= opts.max_branches) break;
    } catch (const std::exception& e) {
      out.diagnostics.push_back(std::string("candidate skipped: ") + e.what());
    }
  }
  std::sort(reps.begin(), reps.end(),
            [](const Candidate& a, const Candidate& b) { return a.cls.key < b.cls.key; });

  for (const Candidate& c : reps) {
    SeparationTree t = make_tree_for(V, c, box, opts, 0);
    if (t.resolved()) {
      out.trees.push_back(std::move(t));
      if (!opts.exhaustive) break;
    } else {
      out.diagnostics.push_back(c.cls.key + ": " + t.fail_reason);
    }
  }
  if (out.trees.empty()) {
    SeparationTree t;
    t.space = s;
    t.kind = SeparationTree::Kind::Fail;
    t.fail_reason = out.diagnostics.empty() ? "no branch resolved" : out.diagnostics.front();
    out.trees.push_back(t);
  }
  return out;
}

namespace {

// fit a degree-2 polynomial field from a numeric evaluator
PolySym2Field fit_field(const PseudoSpace& s, const std::function<Mat(const Vec&)>& f,
                        const Box& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> un(0.0, 1.0);
  const int need = 3 * (s.n * s.n + 4);
  std::vector<Vec> pts;
  std::vector<Mat> vals;
  int guard = 0;
  while (static_cast<int>(pts.size()) < need && ++guard < 40 * need) {
    Vec q(s.n);
    for (int i = 0; i < s.n; ++i) q[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * un(rng);
    if (s.is_sphere()) {
      double r2 = scalar_product(q, q, s) * s.kappa;
      if (r2 < 0.05) continue;
    }
    Mat v = f(q);
    if (!v.allFinite()) continue;
    pts.push_back(q);
    vals.push_back(v);
  }
  return PolySym2Field::fit(s, 2, pts, vals, 1e-7);
}

}  // namespace

std::vector<PolySym2Field> ks_space(const SeparationTree& tree, const Box& box,
                                    std::uint64_t seed) {
  if (!tree.resolved()) throw BekmError("ks_space: unresolved tree");
  const PseudoSpace& s = tree.space;
  if (tree.kind == SeparationTree::Kind::Benenti) return benenti_sequence(tree.ct);

  // warped node: lift the geodesic-factor sequence and the fiber space
  std::vector<PolySym2Field> out;
  const SeparationTree& F = *tree.fiber;
  std::vector<PolySym2Field> fiber_ks =
      F.space.is_sphere()
          ? benenti_sequence(F.ct)
          : ks_space(F, Box::centered(Vec::Zero(F.space.n), 1.0), seed + 5);

  if (tree.central_split) {
    // B is one-dimensional: lifted basis reduces to the metric
    out.push_back(PolySym2Field::metric(s));
    for (const PolySym2Field& kf : fiber_ks) {
      auto lift = [&](const Vec& x) {
        double r2 = scalar_product(x, x, s);
        Vec p = x / std::sqrt(std::fabs(r2));
        return Mat(std::fabs(r2) * kf.eval(p).m);
      };
      out.push_back(fit_field(s, lift, box, seed + out.size()));
    }
    return out;
  }

  // axis split: geodesic factor E^m spanned by geodesic 1-d eigenvectors
  const Mat& Ff = tree.fiber_frame;
  const int mdim = s.n - static_cast<int>(Ff.cols());
  // G_F part of the ambient metric: projector onto the fiber plane
  Mat GF = Mat::Zero(s.n, s.n);
  for (int c = 0; c < Ff.cols(); ++c) {
    Vec fc = Ff.col(c);
    double nf = scalar_product(fc, fc, s);
    GF += fc * fc.transpose() / nf;
  }
  // restriction of L to the geodesic factor: m-dim flat space
  // (with rho == 1 and sigma-series built from the restricted benenti members)
  // B-frame: coordinate axes projected off the fiber plane, g-orthonormalized
  Mat Bf;
  {
    std::vector<Vec> cols;
    for (int i = 0; i < s.n && static_cast<int>(cols.size()) < mdim; ++i) {
      Vec v = Vec::Zero(s.n);
      v[i] = 1.0;
      for (int c = 0; c < Ff.cols(); ++c) {
        Vec fc = Ff.col(c);
        v -= fc * (scalar_product(v, fc, s) / scalar_product(fc, fc, s));
      }
      for (const Vec& b : cols)
        v -= b * (scalar_product(v, b, s) / scalar_product(b, b, s));
      double nv = scalar_product(v, v, s);
      if (std::fabs(nv) < 1e-9) continue;
      cols.push_back(v / std::sqrt(std::fabs(nv)));
    }
    Bf = Mat(s.n, mdim);
    for (int c = 0; c < mdim; ++c) Bf.col(c) = cols[c];
  }
  int nu_b = 0;
  for (int c = 0; c < mdim; ++c)
    if (scalar_product(Bf.col(c), Bf.col(c), s) < 0) ++nu_b;
  PseudoSpace Bspace = PseudoSpace::flat(mdim, nu_b);
  // contravariant restriction of L to B via the co-frame dz^c = sign_c g b_c
  Mat gB = Bspace.metric();
  Mat g = s.metric();
  Mat coB = g * Bf * gB;  // coB^T x = B-coordinates of x
  Mat LA_b = coB.transpose() * tree.ct.A * coB;
  Vec w_b = coB.transpose() * tree.ct.w;
  ConcircularTensor Lb(Bspace, LA_b, w_b, tree.ct.m);
  std::vector<PolySym2Field> bks = benenti_sequence(Lb);
  const double c0 = tree.warp_c;
  // sigma_i = (1/i) tr(K_{i-1} L') as functions on B
  for (int a = 0; a < static_cast<int>(bks.size()); ++a) {
    auto lift = [&, a](const Vec& x) {
      Vec z = coB.transpose() * x;  // B coordinates of the geodesic part
      Mat Ka = bks[a].eval(z).m;
      Mat amb = Bf * Ka * Bf.transpose();
      // sigma series
      double coef = 0.0;
      {
        // sigma_j values at z
        std::vector<double> sigma(a + 1, 0.0);
        sigma[0] = 1.0;
        Mat Lb_val = Lb.A + Lb.w * z.transpose() + z * Lb.w.transpose() +
                     Lb.m * z * z.transpose();
        Mat Lb_endo = Lb_val;
        for (int j = 0; j < mdim; ++j) Lb_endo.col(j) *= Bspace.metric_sign(j);
        for (int i = 1; i <= a; ++i) {
          Mat Ki1 = bks[i - 1].eval(z).m;
          Mat Ki1e = Ki1;
          for (int j = 0; j < mdim; ++j) Ki1e.col(j) *= Bspace.metric_sign(j);
          sigma[i] = (Ki1e * Lb_endo).trace() / i;
        }
        double pc = 1.0;
        for (int i = 0; i <= a; ++i) {
          coef += pc * sigma[a - i];
          pc *= -c0;
        }
      }
      return Mat(amb + coef * GF);
    };
    out.push_back(fit_field(s, lift, box, seed + 40 + a));
  }
  Mat gFf = Mat(s.metric() * Ff);
  Mat coF(s.n, Ff.cols());
  for (int c = 0; c < Ff.cols(); ++c)
    coF.col(c) = gFf.col(c) / scalar_product(Ff.col(c), Ff.col(c), s);
  for (const PolySym2Field& kf : fiber_ks) {
    auto lift = [&](const Vec& x) {
      Vec z = coF.transpose() * x;
      Mat Kf = kf.eval(z).m;
      return Mat(Ff * Kf * Ff.transpose());
    };
    out.push_back(fit_field(s, lift, box, seed + 80));
  }
  return out;
}

PolySym2Field witness_tensor(const SeparationTree& tree, const Box& box, std::uint64_t seed) {
  if (!tree.resolved()) throw BekmError("witness_tensor: unresolved tree");
  const PseudoSpace& s = tree.space;
  if (tree.kind == SeparationTree::Kind::Benenti) return kbdt(tree.ct);
  PolySym2Field Kp = kbdt(tree.ct);
  // fiber witness lifted, with a metric-multiple shift to split eigenvalues
  PolySym2Field Kf_fiber = tree.fiber->space.is_sphere()
                               ? kbdt(tree.fiber->ct)
                               : witness_tensor(*tree.fiber, Box::centered(Vec::Zero(tree.fiber->space.n), 1.0), seed);
  PolySym2Field GF_fiber = PolySym2Field::metric(tree.fiber->space);
  for (double shift : {1.0, 2.0, 0.5, 3.0}) {
    PolySym2Field Kf_total = Kf_fiber.plus(GF_fiber.scaled(shift));
    PolySym2Field lifted = [&] {
      if (tree.central_split) {
        auto lift = [&](const Vec& x) {
          double r2 = scalar_product(x, x, s);
          Vec p = x / std::sqrt(std::fabs(r2));
          return Mat(std::fabs(r2) * Kf_total.eval(p).m);
        };
        return fit_field(s, lift, box, seed + 3);
      }
      const Mat& Ff = tree.fiber_frame;
      Mat coF(s.n, Ff.cols());
      Mat gFf = Mat(s.metric() * Ff);
      for (int c = 0; c < Ff.cols(); ++c)
        coF.col(c) = gFf.col(c) / scalar_product(Ff.col(c), Ff.col(c), s);
      auto lift = [&](const Vec& x) {
        Vec z = coF.transpose() * x;
        return Mat(Ff * Kf_total.eval(z).m * Ff.transpose());
      };
      return fit_field(s, lift, box, seed + 3);
    }();
    PolySym2Field K = Kp.plus(lifted);
    // check eigenvalue simplicity at a few box points
    std::mt19937_64 rng(seed + 11);
    std::uniform_real_distribution<double> un(0.0, 1.0);
    bool simple = true;
    for (int t = 0; t < 5; ++t) {
      Vec q(s.n);
      for (int i = 0; i < s.n; ++i) q[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * un(rng);
      Mat E = K.eval(q).m;
      for (int j = 0; j < s.n; ++j) E.col(j) *= s.metric_sign(j);
      Eigen::EigenSolver<Mat> es(E);
      auto ev = es.eigenvalues();
      for (int i = 0; i < ev.size() && simple; ++i)
        for (int j = i + 1; j < ev.size(); ++j)
          if (std::abs(ev[i] - ev[j]) < 1e-4 * (1.0 + std::abs(ev[i]))) simple = false;
    }
    if (simple) return K;
  }
  throw BekmError("witness_tensor: could not split eigenvalues with a metric shift");
}

Chart3 tree_chart3(const SeparationTree& tree) {
  if (tree.chart.empty()) throw BekmError("tree_chart3: tree carries no named chart");
  double a = tree.chart_a > 0 ? tree.chart_a : 1.0;
  Mat frame = tree.chart_frame.size() ? tree.chart_frame : Mat::Identity(tree.space.n, tree.space.n);
  return make_chart3(tree.chart, frame, a);
}

namespace {
void dot_node(const SeparationTree& t, std::ostream& os, int& id) {
  int me = id++;
  if (t.kind == SeparationTree::Kind::Fail) {
    os << "  n" << me << " [label=\"fail: " << t.fail_reason << "\", shape=box];\n";
    return;
  }
  std::string label = t.kind == SeparationTree::Kind::Benenti ? "benenti" : "warped";
  if (!t.chart.empty()) label += "\\n" + t.chart;
  os << "  n" << me << " [label=\"" << label << "\"];\n";
  for (size_t i = 0; i < t.leaves.size(); ++i) {
    os << "  n" << id << " [label=\"E" << (i + 1) << "\", shape=circle];\n";
    os << "  n" << me << " -> n" << id << ";\n";
    ++id;
  }
  if (t.fiber) {
    int child = id;
    dot_node(*t.fiber, os, id);
    os << "  n" << me << " -> n" << child << " [style=bold];\n";
  }
}
}  // namespace

std::string tree_to_dot(const SeparationTree& tree) {
  std::ostringstream os;
  os << "digraph web {\n  rankdir=TB;\n";
  int id = 0;
  dot_node(tree, os, id);
  os << "}\n";
  return os.str();
}

}  // namespace sepweb
