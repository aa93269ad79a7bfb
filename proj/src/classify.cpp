#include "sepweb/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sepweb {

const char* ct_class_name(CtClass c) {
  switch (c) {
    case CtClass::Central: return "Central";
    case CtClass::NonNullAxial: return "NonNullAxial";
    case CtClass::NullAxial: return "NullAxial";
    case CtClass::Cartesian: return "Cartesian";
    case CtClass::DegenerateNullAxial: return "DegenerateNullAxial";
  }
  return "?";
}

namespace {

Mat endo_of(const Mat& contravariant, const PseudoSpace& s) {
  Mat e = contravariant;
  for (int j = 0; j < s.n; ++j) e.col(j) *= s.metric_sign(j);
  return e;
}

Mat contra_of_endo(const Mat& endo, const PseudoSpace& s) {
  Mat c = endo;
  for (int j = 0; j < s.n; ++j) c.col(j) *= s.metric_sign(j);
  return c;
}

std::vector<double> omegas(const ConcircularTensor& L) {
  const PseudoSpace& s = L.space;
  std::vector<double> om;
  om.push_back(L.m);
  Mat Ae = endo_of(L.A, s);
  Vec v = L.w;
  for (int k = 1; k <= s.n; ++k) {
    om.push_back(scalar_product(L.w, v, s));
    v = Ae * v;
  }
  return om;
}

}  // namespace

CtInvariants ct_invariants(const ConcircularTensor& L, double tol) {
  if (L.space.is_sphere())
    throw ClassifyError("ct_invariants: defined for flat-space tensors");
  std::vector<double> om = omegas(L);
  double anorm = endo_of(L.A, L.space).cwiseAbs().maxCoeff();
  double wn2 = L.w.squaredNorm();
  CtInvariants inv;
  for (size_t k = 0; k < om.size(); ++k) {
    double scale = k == 0 ? 1.0 : wn2 * std::pow(1.0 + anorm, double(k - 1));
    if (std::fabs(om[k]) > tol * std::max(1.0, scale)) {
      inv.index = static_cast<int>(k);
      inv.sign = (k % 2 == 0) ? +1 : (om[k] > 0 ? +1 : -1);
      return inv;
    }
  }
  return inv;
}

namespace {

// translation push-forward of (A,w,m): value at x of the translated field is
// the original at x - c
void translate(Mat& A, Vec& w, double m, const Vec& c) {
  A += -(w * c.transpose() + c * w.transpose()) + m * c * c.transpose();
  w -= m * c;
}

double min_real_eig(const Mat& endo) {
  Eigen::EigenSolver<Mat> es(endo);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    auto z = es.eigenvalues()[i];
    if (std::fabs(z.imag()) < 1e-8 * (1.0 + std::abs(z))) best = std::min(best, z.real());
  }
  if (!std::isfinite(best)) {
    // complex spectrum only: use the common real part
    best = es.eigenvalues()[0].real();
    for (int i = 1; i < es.eigenvalues().size(); ++i)
      best = std::min(best, es.eigenvalues()[i].real());
  }
  return best;
}

}  // namespace

GeometricReduction reduce_geometric(const ConcircularTensor& L) {
  const PseudoSpace& s = L.space;
  if (s.is_sphere()) throw ClassifyError("reduce_geometric: flat-space operation");
  if (L.is_trivial()) throw ClassifyError("reduce_geometric: L is a multiple of G");
  CtInvariants inv = ct_invariants(L);
  GeometricReduction red;
  red.shift = Vec::Zero(s.n);
  const Mat Gc = s.inverse_metric();

  if (!inv.index.has_value()) {
    double wnorm = L.w.cwiseAbs().maxCoeff();
    if (wnorm > 1e-10 * (1.0 + L.A.cwiseAbs().maxCoeff()))
      throw ClassifyError("reduce_geometric: degenerate null axial tensor has no canonical form");
    // Cartesian: a A + b with smallest eigenvalue 0, largest 1 (>= 2 distinct)
    Mat Ae = endo_of(L.A, s);
    Eigen::EigenSolver<Mat> es(Ae);
    double lo = es.eigenvalues().real().minCoeff();
    double hi = es.eigenvalues().real().maxCoeff();
    if (hi - lo > 1e-12 * (1.0 + std::fabs(hi))) {
      red.a = 1.0 / (hi - lo);
      red.b = -lo / (hi - lo);
    } else {
      red.a = 1.0;
      red.b = -lo;
    }
    Mat An = red.a * L.A + red.b * Gc;
    red.normalized = ConcircularTensor(s, An, Vec::Zero(s.n), 0.0);
    return red;
  }

  const int k = *inv.index;
  if (k == 0) {
    // Central: m -> 1, kill w by a shift, then min real eigenvalue of A -> 0
    red.shift = L.w / L.m;
    Mat A = L.A;
    Vec w = L.w;
    translate(A, w, L.m, red.shift);
    red.a = 1.0 / L.m;
    Mat A1 = red.a * A;
    double lam = min_real_eig(endo_of(A1, s));
    red.b = -lam;
    red.normalized = ConcircularTensor(s, A1 + red.b * Gc, Vec::Zero(s.n), 1.0);
    return red;
  }

  if (k == 1) {
    // Non-null axial: m = 0; translate so A e1 = 0, scale |<w,w>| -> 1,
    // then zero the smallest eigenvalue of A on w-perp
    Mat A = L.A;
    Vec w = L.w;
    double ww = scalar_product(w, w, s);
    for (int pass = 0; pass < 2; ++pass) {
      Mat Ae = endo_of(A, s);
      Vec Aw = Ae * w;
      double cw = scalar_product(Aw, w, s) / (2.0 * ww);
      Vec c = (Aw - cw * w) / ww;
      translate(A, w, 0.0, c);
      red.shift += c;
      if (pass == 0) {
        // spend the b-freedom on the perp spectrum
        Mat Ae2 = endo_of(A, s);
        // eigenvalues on w-perp: deflate the (null eigenvector) w direction
        Eigen::EigenSolver<Mat> es(Ae2);
        double lam = std::numeric_limits<double>::infinity();
        for (int i = 0; i < es.eigenvalues().size(); ++i)
          if (std::fabs(es.eigenvalues()[i].imag()) < 1e-8)
            lam = std::min(lam, es.eigenvalues()[i].real());
        if (!std::isfinite(lam)) lam = 0.0;
        red.b = -lam;
        A += red.b * Gc;
      }
    }
    red.a = 1.0 / std::sqrt(std::fabs(ww));
    // scaling L by a scales w by a and A by a; b was applied pre-scale
    A *= red.a;
    w *= red.a;
    red.b *= red.a;
    red.normalized = ConcircularTensor(s, A, w, 0.0);
    return red;
  }

  // Null axial, k >= 2: shift the chain eigenvalue to zero, translate to the
  // exact skew-normal chain, scale <e1,e_k> -> epsilon
  {
    std::vector<double> om = omegas(L);
    double lam0 = om[k + 1] / (k * om[k]);
    Mat A = L.A - lam0 * Gc;  // b-shift
    red.b = -lam0;
    Vec w = L.w;
    if (k == 2) {
      // closed-form translation: p = <c,w>, q = <c,e2>
      std::vector<double> o2 = omegas(ConcircularTensor(s, A, w, 0.0));
      double p = o2[3] / (2.0 * o2[2]);  // = 0 after the shift, kept for generality
      double q = ((o2[4] - p * o2[3]) / o2[2] - p * p) / 2.0;
      Mat Ae = endo_of(A, s);
      Vec c = (Ae * Ae * w - p * Ae * w - q * w) / o2[2];
      translate(A, w, 0.0, c);
      red.shift = c;
    } else {
      // Newton on c for A^k-chain termination
      Vec c = Vec::Zero(s.n);
      for (int it = 0; it < 60; ++it) {
        Mat At = A;
        Vec wt = w;
        translate(At, wt, 0.0, c);
        Mat Ae = endo_of(At, s);
        Vec r = w;
        for (int j = 0; j < k; ++j) r = Ae * r;  // want A^k w = 0
        if (r.cwiseAbs().maxCoeff() < 1e-13 * (1.0 + Ae.cwiseAbs().maxCoeff())) break;
        // finite-difference Jacobian
        Mat J(s.n, s.n);
        double h = 1e-6;
        for (int d = 0; d < s.n; ++d) {
          Vec cp = c;
          cp[d] += h;
          Mat Ap = A;
          Vec wp = w;
          translate(Ap, wp, 0.0, cp);
          Mat Aep = endo_of(Ap, s);
          Vec rp = w;
          for (int j = 0; j < k; ++j) rp = Aep * rp;
          J.col(d) = (rp - r) / h;
        }
        c -= J.completeOrthogonalDecomposition().solve(r);
      }
      translate(A, w, 0.0, c);
      red.shift = c;
    }
    // scale so the k-th pairing equals the canonical sign
    std::vector<double> o3 = omegas(ConcircularTensor(s, A, w, 0.0));
    double target = o3[k];
    double a;
    if (k % 2 == 0)
      a = (target > 0 ? 1.0 : -1.0) / std::pow(std::fabs(target), 1.0 / (k + 1));
    else
      a = 1.0 / std::pow(std::fabs(target), 1.0 / (k + 1));
    red.a = a;
    red.b *= a;
    red.normalized = ConcircularTensor(s, a * A, a * w, 0.0);
    return red;
  }
}

namespace {

std::string blocks_key(const std::vector<JordanBlock>& blocks_in) {
  // eigenvalue values are collapsed to distinct-value ranks so that the key
  // is independent of chart parameters
  auto blocks = blocks_in;
  sort_blocks(blocks);
  std::vector<double> reals;
  for (auto& b : blocks)
    if (b.lambda.imag() == 0.0) reals.push_back(b.lambda.real());
  std::sort(reals.begin(), reals.end());
  reals.erase(std::unique(reals.begin(), reals.end(),
                          [](double a, double b) { return std::fabs(a - b) < 1e-7 * (1 + std::fabs(a)); }),
              reals.end());
  auto rank_of = [&](double v) {
    for (size_t i = 0; i < reals.size(); ++i)
      if (std::fabs(v - reals[i]) < 1e-7 * (1 + std::fabs(v))) return static_cast<int>(i);
    return -1;
  };
  std::ostringstream os;
  for (auto& b : blocks) {
    if (b.lambda.imag() > 0.0) os << "c" << b.size << "|";        // conjugate pair marker
    else if (b.lambda.imag() < 0.0) continue;                     // folded into the pair
    else os << b.size << (b.sign > 0 ? "+" : "-") << "r" << rank_of(b.lambda.real()) << "|";
  }
  return os.str();
}

}  // namespace

CanonicalClass classify_ct(const ConcircularTensor& L, double tol) {
  const PseudoSpace& s = L.space;
  if (s.is_sphere()) {
    CanonicalClass out;
    out.tag = CtClass::Central;  // sphere CTs carry only A; report blocks
    JordanBlockSpec spec = metric_jordan_form(
        SymTensor2(L.A, Variance::Contravariant), s, -1.0);
    out.blocks = spec.blocks;
    out.normalized_ct = L;
    out.key = std::string("S:") + sphere_class_key(L.A, s);
    return out;
  }
  // ambiguity band on the omegas
  {
    std::vector<double> om = omegas(L);
    double anorm = endo_of(L.A, s).cwiseAbs().maxCoeff();
    double wn2 = L.w.squaredNorm();
    for (size_t k = 0; k < om.size(); ++k) {
      double scale = std::max(1.0, k == 0 ? 1.0 : wn2 * std::pow(1.0 + anorm, double(k - 1)));
      double v = std::fabs(om[k]);
      if (v > tol * scale) break;  // decided nonzero: index found
      if (v > 0.1 * tol * scale) {
        std::ostringstream os;
        os << "classify_ct: omega_" << k << " = " << om[k]
           << " is inside the ambiguity band at tol " << tol;
        throw ClassifyError(os.str());
      }
    }
  }
  CtInvariants inv = ct_invariants(L, tol);
  CanonicalClass out;
  out.index = inv.index;
  out.sign = inv.sign;
  if (!inv.index.has_value()) {
    double wnorm = L.w.cwiseAbs().maxCoeff();
    double sc = 1.0 + L.A.cwiseAbs().maxCoeff();
    out.tag = wnorm > 1e3 * tol * sc ? CtClass::DegenerateNullAxial : CtClass::Cartesian;
  } else if (*inv.index == 0) {
    out.tag = CtClass::Central;
  } else if (*inv.index == 1) {
    out.tag = CtClass::NonNullAxial;
  } else {
    out.tag = CtClass::NullAxial;
  }
  if (out.tag == CtClass::DegenerateNullAxial) {
    out.normalized_ct = L;
    out.key = "degenerate-null-axial";
    return out;
  }
  out.reduction = reduce_geometric(L);
  out.normalized_ct = out.reduction.normalized;
  JordanBlockSpec spec = metric_jordan_form(
      SymTensor2(out.normalized_ct.A, Variance::Contravariant), s, -1.0);
  out.blocks = spec.blocks;
  if (out.tag == CtClass::NullAxial) {
    // skew-normal chain existence: the normalized A must carry a size-k block
    bool ok = false;
    for (auto& b : out.blocks)
      if (b.size >= *inv.index) ok = true;
    if (!ok) throw ClassifyError("classify_ct: null-axial chain verification failed");
  }
  std::ostringstream os;
  os << ct_class_name(out.tag);
  if (out.index) os << ":k" << *out.index;
  if (out.sign) os << ":e" << (*out.sign > 0 ? "+" : "-");
  os << ":" << blocks_key(out.blocks);
  out.key = os.str();
  return out;
}

std::string sphere_class_key(const Mat& A_contravariant, const PseudoSpace& space) {
  // affine-normalize the spectrum (min real -> 0, spread -> 1) then key the
  // block pattern
  JordanBlockSpec spec =
      metric_jordan_form(SymTensor2(A_contravariant, Variance::Contravariant), space, -1.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (auto& b : spec.blocks)
    if (b.lambda.imag() == 0.0) {
      lo = std::min(lo, b.lambda.real());
      hi = std::max(hi, b.lambda.real());
    }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  double span = (hi - lo) > 1e-10 ? (hi - lo) : 1.0;
  auto blocks = spec.blocks;
  for (auto& b : blocks) b.lambda = (b.lambda - lo) / span;
  return blocks_key(blocks);
}

}  // namespace sepweb
