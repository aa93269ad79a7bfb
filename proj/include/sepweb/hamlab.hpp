#pragma once

#include "sepweb/bekm.hpp"
#include "sepweb/kbd.hpp"

namespace sepweb {

struct PhasePoint {
  Vec q, p;
};

// F(q,p) = 1/2 K^{ij} p_i p_j + U(q), with dU = K dV.  U is carried as a
// gauge-fixed line integral from `base`; derivative contracts are analytic.
struct FirstIntegral {
  PolySym2Field K;
  PotentialPtr V;  // may be null (geodesic integrals)
  Vec base;

  double kinetic(const PhasePoint& z) const;
  Vec dFdp(const PhasePoint& z) const;
  Vec dFdq(const PhasePoint& z) const;  // includes the K dV potential term
};

FirstIntegral hamiltonian(const PotentialPtr& V, const PseudoSpace& space);
FirstIntegral first_integral(const PolySym2Field& K, const PotentialPtr& V, const Vec& base);

double poisson_bracket(const FirstIntegral& F, const FirstIntegral& G, const PhasePoint& z);

struct Trajectory {
  std::vector<double> t;
  std::vector<PhasePoint> z;
  bool truncated = false;
};

// fixed-step RK4 on Hamilton's equations of the natural Hamiltonian
Trajectory integrate_trajectory(const PotentialPtr& V, const PseudoSpace& space,
                                const PhasePoint& z0, double T, double dt);

// max_t |F(z_t) - F(z_0)| / (1 + |F(z_0)|), with the potential companion
// accumulated incrementally along the path
double conservation_drift(const FirstIntegral& F, const Trajectory& traj);

// smallest singular value of the row-normalized gradient matrix dF_a at z
double independence_sigma_min(const std::vector<FirstIntegral>& Fs, const PhasePoint& z);

struct WitnessReport {
  double metric_offdiag = 0.0;   // chart-frame metric off-diagonal (relative)
  double chkt_offdiag = 0.0;     // assembled ChKT off-diagonal (relative)
  double min_eigengap = 1e300;   // smallest eigenvalue separation of the ChKT
  double dkdv = 0.0;             // d(K dV) residual of the assembled ChKT
  bool pass(double dkdv_gate = 1e-6) const {
    return metric_offdiag < 1e-8 && chkt_offdiag < 1e-7 && min_eigengap > 1e-6 &&
           dkdv < dkdv_gate;
  }
};

WitnessReport separation_witness(const SeparationTree& tree, const PotentialPtr& V,
                                 int n_samples, std::uint64_t seed);

}  // namespace sepweb
