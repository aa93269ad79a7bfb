#include "sepweb/poly.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace sepweb {

Poly Poly::constant(int nvars, double c) {
  Poly p(nvars);
  if (c != 0.0) p.terms_[{}] = c;
  return p;
}

Poly Poly::variable(int nvars, int i) {
  Poly p(nvars);
  Expo e{};
  e[i] = 1;
  p.terms_[e] = 1.0;
  return p;
}

int Poly::degree() const {
  int d = 0;
  for (auto& [e, c] : terms_) {
    int t = 0;
    for (int k = 0; k < nvars_; ++k) t += e[k];
    d = std::max(d, t);
  }
  return d;
}

Poly& Poly::add_term(const Expo& e, double c) {
  if (c == 0.0) return *this;
  auto it = terms_.find(e);
  if (it == terms_.end()) terms_[e] = c;
  else {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
  return *this;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

Poly& Poly::operator+=(const Poly& o) {
  for (auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Poly Poly::operator-(const Poly& o) const {
  Poly r = *this;
  for (auto& [e, c] : o.terms_) r.add_term(e, -c);
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  Poly r(nvars_);
  for (auto& [e1, c1] : terms_) {
    for (auto& [e2, c2] : o.terms_) {
      Expo e{};
      int deg = 0;
      for (int k = 0; k < kMaxVars; ++k) {
        e[k] = static_cast<std::uint8_t>(e1[k] + e2[k]);
        deg += e[k];
      }
      if (deg > kMaxPolyDegree) throw std::runtime_error("Poly: degree cap exceeded");
      r.add_term(e, c1 * c2);
    }
  }
  return r;
}

Poly Poly::operator*(double s) const {
  Poly r(nvars_);
  if (s == 0.0) return r;
  for (auto& [e, c] : terms_) r.terms_[e] = c * s;
  return r;
}

Poly Poly::derivative(int var) const {
  Poly r(nvars_);
  for (auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Expo d = e;
    d[var] -= 1;
    r.add_term(d, c * e[var]);
  }
  return r;
}

double Poly::eval(const Vec& x) const {
  double s = 0.0;
  for (auto& [e, c] : terms_) {
    double t = c;
    for (int k = 0; k < nvars_; ++k)
      for (int p = 0; p < e[k]; ++p) t *= x[k];
    s += t;
  }
  return s;
}

double Poly::max_abs_coeff() const {
  double m = 0.0;
  for (auto& [e, c] : terms_) m = std::max(m, std::fabs(c));
  return m;
}

void Poly::prune(double tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::fabs(it->second) <= tol) it = terms_.erase(it);
    else ++it;
  }
}

PolySym2Field::PolySym2Field(const PseudoSpace& s) : space(s) {
  comp.assign(static_cast<size_t>(s.n) * (s.n + 1) / 2, Poly(s.n));
}

int PolySym2Field::index(int i, int j) const {
  if (i > j) std::swap(i, j);
  // row-major upper triangle
  return i * space.n - i * (i - 1) / 2 + (j - i);
}

SymTensor2 PolySym2Field::eval(const Vec& x) const {
  Mat m(space.n, space.n);
  for (int i = 0; i < space.n; ++i)
    for (int j = i; j < space.n; ++j) m(i, j) = m(j, i) = at(i, j).eval(x);
  return SymTensor2(std::move(m), Variance::Contravariant);
}

Mat PolySym2Field::eval_derivative(const Vec& x, int k) const {
  Mat m(space.n, space.n);
  for (int i = 0; i < space.n; ++i)
    for (int j = i; j < space.n; ++j) m(i, j) = m(j, i) = at(i, j).derivative(k).eval(x);
  return m;
}

PolySym2Field PolySym2Field::constant(const PseudoSpace& s, const Mat& contravariant) {
  PolySym2Field f(s);
  for (int i = 0; i < s.n; ++i)
    for (int j = i; j < s.n; ++j) f.at(i, j) = Poly::constant(s.n, contravariant(i, j));
  return f;
}

PolySym2Field PolySym2Field::metric(const PseudoSpace& s) {
  // flat: inverse metric; sphere: ambient realization of the intrinsic
  // contravariant metric, Pi^{ij} = g^{ij} - kappa x^i x^j
  PolySym2Field f = constant(s, s.inverse_metric());
  if (s.is_sphere()) {
    for (int i = 0; i < s.n; ++i)
      for (int j = i; j < s.n; ++j)
        f.at(i, j) += Poly::variable(s.n, i) * Poly::variable(s.n, j) * (-s.kappa);
  }
  return f;
}

PolySym2Field PolySym2Field::scaled(double s) const {
  PolySym2Field f(space);
  for (size_t k = 0; k < comp.size(); ++k) f.comp[k] = comp[k] * s;
  return f;
}

PolySym2Field PolySym2Field::plus(const PolySym2Field& o) const {
  PolySym2Field f(space);
  for (size_t k = 0; k < comp.size(); ++k) f.comp[k] = comp[k] + o.comp[k];
  return f;
}

PolySym2Field PolySym2Field::fit(const PseudoSpace& s, int degree,
                                 const std::vector<Vec>& pts,
                                 const std::vector<Mat>& values, double verify_tol) {
  // monomial basis of total degree <= degree
  std::vector<Poly::Expo> basis;
  Poly::Expo e{};
  // enumerate exponent tuples recursively
  std::function<void(int, int)> rec = [&](int var, int left) {
    if (var == s.n) {
      basis.push_back(e);
      return;
    }
    for (int p = 0; p <= left; ++p) {
      e[var] = static_cast<std::uint8_t>(p);
      rec(var + 1, left - p);
    }
    e[var] = 0;
  };
  rec(0, degree);

  const int nb = static_cast<int>(basis.size());
  const int npts = static_cast<int>(pts.size());
  if (npts < nb + 4) throw std::runtime_error("PolySym2Field::fit: not enough samples");
  Eigen::MatrixXd M(npts, nb);
  for (int p = 0; p < npts; ++p)
    for (int b = 0; b < nb; ++b) {
      double t = 1.0;
      for (int k = 0; k < s.n; ++k)
        for (int q = 0; q < basis[b][k]; ++q) t *= pts[p][k];
      M(p, b) = t;
    }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);

  PolySym2Field f(s);
  for (int i = 0; i < s.n; ++i)
    for (int j = i; j < s.n; ++j) {
      Eigen::VectorXd rhs(npts);
      for (int p = 0; p < npts; ++p) rhs[p] = values[p](i, j);
      Eigen::VectorXd c = qr.solve(rhs);
      double resid = (M * c - rhs).cwiseAbs().maxCoeff();
      if (resid > verify_tol * (1.0 + rhs.cwiseAbs().maxCoeff()))
        throw std::runtime_error("PolySym2Field::fit: samples are not polynomial at this degree");
      Poly pl(s.n);
      for (int b = 0; b < nb; ++b)
        if (std::fabs(c[b]) > 1e-12 * (1.0 + c.cwiseAbs().maxCoeff())) pl.add_term(basis[b], c[b]);
      f.at(i, j) = pl;
    }
  return f;
}

double killing_residual(const PolySym2Field& K, const std::vector<Vec>& pts) {
  const PseudoSpace& s = K.space;
  const int n = s.n;
  double worst = 0.0;
  for (const Vec& x : pts) {
    // covariant derivative tensor D_k K_ij (flat ambient), K lowered
    std::vector<Mat> dK(n);
    for (int k = 0; k < n; ++k) {
      Mat d = K.eval_derivative(x, k);
      // lower both slots
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) *= s.metric_sign(i) * s.metric_sign(j);
      dK[k] = d;
    }
    if (!s.is_sphere()) {
      for (int k = 0; k < n; ++k)
        for (int i = k; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double r = dK[k](i, j) + dK[i](j, k) + dK[j](k, i);
            worst = std::max(worst, std::fabs(r));
          }
    } else {
      // tangential projection: for tangent frames E_a the intrinsic
      // symmetrized derivative equals the projected ambient one
      // (tangential extension assumed; enforced by construction of K)
      Vec xf = flat_vec(x, s);
      // tangent basis: kernel of x_flat, euclidean-orthonormalized for scale
      Mat row = xf.transpose();
      Eigen::FullPivLU<Mat> lu(row);
      Mat kern = lu.kernel();  // n x (n-1), columns span {v : x_flat . v = 0}
      Eigen::HouseholderQR<Mat> qr(kern);
      Mat B = qr.householderQ() * Mat::Identity(n, n - 1);
      const int m = n - 1;
      auto proj3 = [&](int a, int b, int c) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              sum += B(k, a) * B(i, b) * B(j, c) * dK[k](i, j);
        return sum;
      };
      for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b)
          for (int c = b; c < m; ++c) {
            double r = proj3(a, b, c) + proj3(b, c, a) + proj3(c, a, b);
            worst = std::max(worst, std::fabs(r));
          }
    }
  }
  return worst;
}

}  // namespace sepweb
