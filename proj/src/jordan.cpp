#include "sepweb/jordan.hpp"

#include "sepweb/poly.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace sepweb {

namespace {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Cplx = std::complex<double>;

// complex-bilinear pairing u^T g v (no conjugation)
Cplx bilinear(const CVec& u, const CVec& v, const PseudoSpace& s) {
  Cplx r = 0.0;
  for (int i = 0; i < s.n; ++i) r += s.metric_sign(i) * u[i] * v[i];
  return r;
}

int rank_of(const CMat& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMat> svd(m);
  int r = 0;
  double top = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol * std::max(1.0, top)) ++r;
  return r;
}

CMat kernel_of(const CMat& m, double tol) {
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
  int r = rank_of(m, tol);
  return svd.matrixV().rightCols(m.cols() - r);
}

}  // namespace

void sort_blocks(std::vector<JordanBlock>& blocks) {
  std::sort(blocks.begin(), blocks.end(), [](const JordanBlock& a, const JordanBlock& b) {
    if (a.size != b.size) return a.size > b.size;
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
    return a.sign > b.sign;
  });
}

bool JordanBlockSpec::same_blocks(const JordanBlockSpec& o, double tol) const {
  if (blocks.size() != o.blocks.size()) return false;
  auto a = blocks;
  auto b = o.blocks;
  sort_blocks(a);
  sort_blocks(b);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size != b[i].size || a[i].sign != b[i].sign) return false;
    if (std::abs(a[i].lambda - b[i].lambda) > tol) return false;
  }
  return true;
}

JordanBlockSpec metric_jordan_form(const SymTensor2& T, const PseudoSpace& space, double tol) {
  const int n = space.n;
  if (n > kMaxVars) throw JordanError("metric_jordan_form: dimension cap exceeded");
  SymTensor2 endo = raise_lower(T, Variance::Endomorphism, space);
  const Mat& M = endo.m;
  double scale = 1.0 + M.cwiseAbs().maxCoeff();
  if (tol <= 0.0) tol = 1e-8 * scale;

  if (self_adjoint_residual(M, space) > 1e3 * tol)
    throw JordanError("metric_jordan_form: operator is not self-adjoint w.r.t. g");

  Eigen::EigenSolver<Mat> es(M);
  if (es.info() != Eigen::Success) throw JordanError("metric_jordan_form: eigensolver failed");
  std::vector<Cplx> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = es.eigenvalues()[i];

  // single-linkage clustering with radius tol
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(eig[i] - eig[j]) <= tol) parent[find(i)] = find(j);

  struct Cluster {
    Cplx mean;
    int mult = 0;
  };
  std::vector<Cluster> clusters;
  std::vector<int> cl_of(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    if (cl_of[r] < 0) {
      cl_of[r] = static_cast<int>(clusters.size());
      clusters.push_back({});
    }
    cl_of[i] = cl_of[r];
    clusters[cl_of[i]].mean += eig[i];
    clusters[cl_of[i]].mult += 1;
  }
  for (auto& c : clusters) {
    c.mean /= double(c.mult);
    if (std::abs(c.mean.imag()) <= tol) c.mean = Cplx(c.mean.real(), 0.0);
  }
  // rescue pass: defective eigenvalues split by ~eps^{1/k}, far beyond tol.
  // A genuinely close pair has sigma_min(M - mean) ~ gap/2, a split Jordan
  // block has sigma_min << gap; merge only the latter.
  {
    CMat Mc0 = M.cast<Cplx>();
    bool merged = true;
    while (merged && clusters.size() > 1) {
      merged = false;
      for (size_t i = 0; i < clusters.size() && !merged; ++i)
        for (size_t j = i + 1; j < clusters.size() && !merged; ++j) {
          double gap = std::abs(clusters[i].mean - clusters[j].mean);
          if (gap > 1e-4 * scale) continue;
          Cplx mean = (clusters[i].mean * double(clusters[i].mult) +
                       clusters[j].mean * double(clusters[j].mult)) /
                      double(clusters[i].mult + clusters[j].mult);
          Eigen::JacobiSVD<CMat> svd(CMat(Mc0 - mean * CMat::Identity(n, n)));
          double smin = svd.singularValues().tail(1)[0];
          if (smin < 1e-2 * gap) {
            clusters[i].mean = mean;
            clusters[i].mult += clusters[j].mult;
            clusters.erase(clusters.begin() + j);
            merged = true;
          }
        }
    }
    for (auto& c : clusters)
      if (std::abs(c.mean.imag()) <= 10 * tol) c.mean = Cplx(c.mean.real(), 0.0);
  }
  // refuse when distinct clusters nearly merge
  for (size_t i = 0; i < clusters.size(); ++i)
    for (size_t j = i + 1; j < clusters.size(); ++j) {
      double gap = std::abs(clusters[i].mean - clusters[j].mean);
      if (gap < 10.0 * tol) {
        std::ostringstream os;
        os << "metric_jordan_form: eigenvalue clusters ambiguous at tol (gap " << gap << ")";
        throw AmbiguousSpectrumError(os.str(), gap);
      }
    }

  // deterministic cluster order
  std::vector<int> order(clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Cplx &x = clusters[a].mean, &y = clusters[b].mean;
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });

  JordanBlockSpec spec;
  spec.basis = CMat::Zero(n, n);
  int col = 0;
  CMat Mc = M.cast<Cplx>();

  for (int ci : order) {
    const Cluster& cl = clusters[ci];
    const bool is_real = cl.mean.imag() == 0.0;
    if (!is_real && cl.mean.imag() < 0.0) continue;  // conjugate of a processed cluster

    CMat N = Mc - cl.mean * CMat::Identity(n, n);
    // generalized eigenspace ker(N^mult)
    CMat P = CMat::Identity(n, n);
    for (int k = 0; k < cl.mult; ++k) P = N * P;
    CMat W = kernel_of(P, 1e-10);
    if (W.cols() != cl.mult)
      throw JordanError("metric_jordan_form: generalized eigenspace extraction failed");

    // peel chains, longest first
    while (W.cols() > 0) {
      int dim = static_cast<int>(W.cols());
      // longest remaining chain length within span(W)
      int k = 1;
      {
        CMat Nj = N * W;
        while (k < n && rank_of(Nj, 1e-10) > 0 &&
               (Nj.cwiseAbs().maxCoeff() > 1e-9 * scale)) {
          // does N^k annihilate W? if not, chain longer than k
          ++k;
          Nj = N * Nj;
        }
      }
      // pick the top-of-chain direction: maximize |N^{k-1} W c|
      CMat Nk1 = W;
      for (int j = 0; j < k - 1; ++j) Nk1 = N * Nk1;
      Eigen::JacobiSVD<CMat> svd(Nk1, Eigen::ComputeFullV);
      CVec top = W * svd.matrixV().col(0);

      // candidate adjustments in case the bilinear pairing degenerates
      std::vector<CVec> cands;
      cands.push_back(top);
      for (int a = 1; a < dim; ++a) cands.push_back(top + W * svd.matrixV().col(a));
      bool done = false;
      for (const CVec& cand : cands) {
        CVec e1 = cand;
        std::vector<CVec> chain(k);
        chain[0] = e1;
        for (int j = 1; j < k; ++j) chain[j] = N * chain[j - 1];
        Cplx ck1 = bilinear(chain[0], chain[k - 1], space);
        if (std::abs(ck1) < 1e-7 * chain[0].norm() * chain[k - 1].norm()) continue;

        // zero the lower pairings c_m, m = k-2 .. 0, by e1 += alpha_s N^s e1
        std::vector<CVec> pow_e(k);
        pow_e[0] = e1;
        for (int j = 1; j < k; ++j) pow_e[j] = N * pow_e[j - 1];
        std::vector<Cplx> alpha(k, 0.0);
        alpha[0] = 1.0;
        for (int s = 1; s < k; ++s) {
          // current c_{k-1-s} with alpha_s = 0
          CVec cur = CVec::Zero(n);
          for (int p = 0; p < s; ++p) cur += alpha[p] * pow_e[p];
          // pair with full (alpha_0..alpha_{s-1}) expansion shifted by N^{k-1-s}
          CVec curN = cur;
          for (int j = 0; j < k - 1 - s; ++j) curN = N * curN;
          Cplx cm = bilinear(cur, curN, space);
          alpha[s] = -cm / (2.0 * ck1);
        }
        CVec e1adj = CVec::Zero(n);
        for (int p = 0; p < k; ++p) e1adj += alpha[p] * pow_e[p];
        std::vector<CVec> ch(k);
        ch[0] = e1adj;
        for (int j = 1; j < k; ++j) ch[j] = N * ch[j - 1];
        Cplx cfin = bilinear(ch[0], ch[k - 1], space);

        int sign = +1;
        if (is_real) {
          double c = cfin.real();
          sign = c >= 0.0 ? +1 : -1;
          double s = 1.0 / std::sqrt(std::abs(c));
          for (auto& v : ch) v *= s;
        } else {
          Cplx s = 1.0 / std::sqrt(cfin);
          for (auto& v : ch) v *= s;
        }

        // record block(s); complex clusters own their conjugate partner
        spec.blocks.push_back({k, sign, cl.mean});
        for (int j = 0; j < k; ++j) spec.basis.col(col++) = ch[j];
        if (!is_real) {
          spec.blocks.push_back({k, sign, std::conj(cl.mean)});
          for (int j = 0; j < k; ++j) spec.basis.col(col++) = ch[j].conjugate();
        }

        // remove the chain span B-orthogonally from W (the conjugate chain
        // lives in the conjugate cluster's kernel and pairs to zero here)
        auto deflate = [&](const std::vector<CVec>& c_ch, Cplx eps) {
          if (W.cols() == 0) return;
          CMat Wn(n, W.cols());
          int kept = 0;
          for (int w = 0; w < W.cols(); ++w) {
            CVec v = W.col(w);
            for (int i = 0; i < k; ++i) {
              // dual of e_i is eps^{-1} * flat(e_{k+1-i})
              Cplx coef = bilinear(c_ch[k - 1 - i], v, space) / eps;
              v -= coef * c_ch[i];
            }
            Wn.col(kept++) = v;
          }
          // re-orthonormalize, drop the collapsed directions
          Eigen::JacobiSVD<CMat> s2(Wn, Eigen::ComputeFullU);
          int r = 0;
          for (int i = 0; i < s2.singularValues().size(); ++i)
            if (s2.singularValues()[i] > 1e-9) ++r;
          W = s2.matrixU().leftCols(r);
        };
        Cplx eps = is_real ? Cplx(double(sign), 0.0) : Cplx(1.0, 0.0);
        deflate(ch, eps);
        done = true;
        break;
      }
      if (!done)
        throw JordanError("metric_jordan_form: skew-normal chain construction failed");
    }
  }

  if (col != n) throw JordanError("metric_jordan_form: basis incomplete");

  // validation: g and T in the canonical basis
  {
    CMat B = spec.basis;
    CMat g = space.metric().cast<Cplx>();
    CMat gB = B.transpose() * g * B;
    CMat TB_full = B.colPivHouseholderQr().solve(Mc * B);
    int off = 0;
    double err = 0.0;
    for (const auto& blk : spec.blocks) {
      for (int i = 0; i < blk.size; ++i)
        for (int j = 0; j < blk.size; ++j) {
          Cplx want_g = (i + j == blk.size - 1) ? Cplx(double(blk.sign), 0) : Cplx(0, 0);
          err = std::max(err, std::abs(gB(off + i, off + j) - want_g));
          Cplx want_t = (i == j) ? blk.lambda : (i == j + 1 ? Cplx(1, 0) : Cplx(0, 0));
          err = std::max(err, std::abs(TB_full(off + i, off + j) - want_t));
        }
      // cross-block orthogonality handled implicitly by the metric check below
      off += blk.size;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        // outside all diagonal blocks the metric must vanish
        // (find block membership)
        int bi = 0, oi = 0;
        while (i >= oi + spec.blocks[bi].size) oi += spec.blocks[bi++].size;
        int bj = 0, oj = 0;
        while (j >= oj + spec.blocks[bj].size) oj += spec.blocks[bj++].size;
        if (bi != bj) err = std::max(err, std::abs(gB(i, j)));
      }
    if (err > 1e5 * tol) {
      std::ostringstream os;
      os << "metric_jordan_form: canonical-basis validation failed (err " << err << ")";
      throw JordanError(os.str());
    }
  }

  // sort blocks together with their basis columns
  {
    std::vector<int> offs(spec.blocks.size());
    int o = 0;
    for (size_t b = 0; b < spec.blocks.size(); ++b) {
      offs[b] = o;
      o += spec.blocks[b].size;
    }
    std::vector<int> idx(spec.blocks.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      const JordanBlock &x = spec.blocks[a], &y = spec.blocks[b];
      if (x.size != y.size) return x.size > y.size;
      if (x.lambda.real() != y.lambda.real()) return x.lambda.real() < y.lambda.real();
      if (x.lambda.imag() != y.lambda.imag()) return x.lambda.imag() < y.lambda.imag();
      return x.sign > y.sign;
    });
    std::vector<JordanBlock> nb;
    CMat nbasis(n, n);
    int c2 = 0;
    for (int b : idx) {
      nb.push_back(spec.blocks[b]);
      for (int j = 0; j < spec.blocks[b].size; ++j)
        nbasis.col(c2++) = spec.basis.col(offs[b] + j);
    }
    spec.blocks = std::move(nb);
    spec.basis = std::move(nbasis);
  }
  return spec;
}

}  // namespace sepweb
