#include "sepweb/hamlab.hpp"

#include <cmath>
#include <random>

namespace sepweb {

double FirstIntegral::kinetic(const PhasePoint& z) const {
  Mat Kv = K.eval(z.q).m;
  return 0.5 * z.p.dot(Kv * z.p);
}

Vec FirstIntegral::dFdp(const PhasePoint& z) const { return K.eval(z.q).m * z.p; }

Vec FirstIntegral::dFdq(const PhasePoint& z) const {
  const PseudoSpace& s = K.space;
  const int n = s.n;
  Vec out(n);
  for (int i = 0; i < n; ++i) {
    Mat dK = K.eval_derivative(z.q, i);
    out[i] = 0.5 * z.p.dot(dK * z.p);
  }
  if (V) {
    Vec dV = V->gradient(z.q);
    Mat Kl = K.eval(z.q).m;
    for (int i = 0; i < n; ++i) Kl.row(i) *= s.metric_sign(i);  // K_i^k
    out += Kl * dV;
  }
  return out;
}

FirstIntegral hamiltonian(const PotentialPtr& V, const PseudoSpace& space) {
  FirstIntegral F;
  F.K = PolySym2Field::metric(space);
  F.V = V;
  F.base = Vec::Zero(space.n);
  return F;
}

FirstIntegral first_integral(const PolySym2Field& K, const PotentialPtr& V, const Vec& base) {
  FirstIntegral F;
  F.K = K;
  F.V = V;
  F.base = base;
  return F;
}

double poisson_bracket(const FirstIntegral& F, const FirstIntegral& G, const PhasePoint& z) {
  Vec Fq = F.dFdq(z), Fp = F.dFdp(z);
  Vec Gq = G.dFdq(z), Gp = G.dFdp(z);
  return Fq.dot(Gp) - Fp.dot(Gq);
}

Trajectory integrate_trajectory(const PotentialPtr& V, const PseudoSpace& space,
                                const PhasePoint& z0, double T, double dt) {
  if (dt <= 0) throw std::invalid_argument("integrate_trajectory: dt must be positive");
  const int n = space.n;
  Mat Gc = space.inverse_metric();
  Trajectory traj;
  auto rhs = [&](const PhasePoint& z, PhasePoint& d) {
    d.q = Gc * z.p;
    d.p = V ? Vec(-V->gradient(z.q)) : Vec(Vec::Zero(n));
  };
  PhasePoint z = z0;
  traj.t.push_back(0.0);
  traj.z.push_back(z);
  int steps = static_cast<int>(std::llround(T / dt));
  PhasePoint k1, k2, k3, k4, tmp;
  for (int s = 1; s <= steps; ++s) {
    try {
      rhs(z, k1);
      tmp.q = z.q + 0.5 * dt * k1.q;
      tmp.p = z.p + 0.5 * dt * k1.p;
      rhs(tmp, k2);
      tmp.q = z.q + 0.5 * dt * k2.q;
      tmp.p = z.p + 0.5 * dt * k2.p;
      rhs(tmp, k3);
      tmp.q = z.q + dt * k3.q;
      tmp.p = z.p + dt * k3.p;
      rhs(tmp, k4);
      z.q += dt / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
      z.p += dt / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
      if (!z.q.allFinite() || !z.p.allFinite()) throw std::domain_error("blowup");
    } catch (const std::domain_error&) {
      traj.truncated = true;
      break;
    }
    traj.t.push_back(s * dt);
    traj.z.push_back(z);
  }
  return traj;
}

double conservation_drift(const FirstIntegral& F, const Trajectory& traj) {
  if (traj.z.size() < 2) return 0.0;
  const PseudoSpace& s = F.K.space;
  const int n = s.n;
  auto one_form = [&](const Vec& q) {
    // (K dV)_i
    Vec dV = F.V ? F.V->gradient(q) : Vec(Vec::Zero(n));
    Mat Kl = F.K.eval(q).m;
    for (int i = 0; i < n; ++i) Kl.row(i) *= s.metric_sign(i);
    return Vec(Kl * dV);
  };
  double F0 = F.kinetic(traj.z.front());
  double U = 0.0;
  double worst = 0.0;
  for (size_t k = 1; k < traj.z.size(); ++k) {
    const Vec& a = traj.z[k - 1].q;
    const Vec& b = traj.z[k].q;
    Vec mid = 0.5 * (a + b);
    Vec d = b - a;
    // Simpson on the segment
    U += (one_form(a).dot(d) + 4.0 * one_form(mid).dot(d) + one_form(b).dot(d)) / 6.0;
    double Fk = F.kinetic(traj.z[k]) + U;
    worst = std::max(worst, std::fabs(Fk - F0) / (1.0 + std::fabs(F0)));
  }
  return worst;
}

double independence_sigma_min(const std::vector<FirstIntegral>& Fs, const PhasePoint& z) {
  const int n = static_cast<int>(z.q.size());
  Mat M(static_cast<int>(Fs.size()), 2 * n);
  for (size_t a = 0; a < Fs.size(); ++a) {
    Vec gq = Fs[a].dFdq(z), gp = Fs[a].dFdp(z);
    Eigen::RowVectorXd row(2 * n);
    row << gq.transpose(), gp.transpose();
    double nn = row.norm();
    M.row(static_cast<int>(a)) = nn > 0 ? row / nn : row;
  }
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues().tail(1)[0];
}

WitnessReport separation_witness(const SeparationTree& tree, const PotentialPtr& V,
                                 int n_samples, std::uint64_t seed) {
  if (!tree.resolved()) throw BekmError("separation_witness: unresolved tree");
  Chart3 chart = tree_chart3(tree);
  const PseudoSpace& s = tree.space;
  Mat g = s.metric();
  Box fitbox = Box::centered(Vec::Zero(s.n), 2.0);
  PolySym2Field K = witness_tensor(tree, fitbox, seed);

  WitnessReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> un(0.0, 1.0);
  std::vector<Vec> dkdv_pts;
  int accepted = 0, guard = 0;
  while (accepted < n_samples && ++guard < 50 * n_samples) {
    Vec u(3);
    for (int i = 0; i < 3; ++i) u[i] = chart.lo[i] + (chart.hi[i] - chart.lo[i]) * un(rng);
    Vec q;
    try {
      q = chart.map(u);
      if (V && !std::isfinite(V->eval(q))) continue;
    } catch (...) {
      continue;
    }
    // chart frame via 4th-order FD
    double h = 1e-5;
    Mat J(s.n, 3);
    for (int a = 0; a < 3; ++a) {
      Vec e = Vec::Zero(3);
      e[a] = 1.0;
      J.col(a) = (-chart.map(u + 2 * h * e) + 8 * chart.map(u + h * e) -
                  8 * chart.map(u - h * e) + chart.map(u - 2 * h * e)) /
                 (12 * h);
    }
    Mat gc = J.transpose() * g * J;
    double gscale = gc.cwiseAbs().maxCoeff();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) rep.metric_offdiag = std::max(rep.metric_offdiag, std::fabs(gc(i, j)) / gscale);
    // assembled ChKT in chart frame
    Mat Kv = K.eval(q).m;
    Mat E = gc.inverse() * (J.transpose() * g * Kv * g * J);
    double escale = 1.0 + E.cwiseAbs().maxCoeff();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) rep.chkt_offdiag = std::max(rep.chkt_offdiag, std::fabs(E(i, j)) / escale);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        rep.min_eigengap = std::min(rep.min_eigengap, std::fabs(E(i, i) - E(j, j)));
    dkdv_pts.push_back(q);
    ++accepted;
  }
  if (accepted == 0) throw BekmError("separation_witness: no usable chart samples");
  rep.dkdv = dkdv_residual_field(K, V, dkdv_pts);
  return rep;
}

}  // namespace sepweb
