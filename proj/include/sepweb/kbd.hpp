#pragma once

#include <cstdint>
#include <vector>

#include "sepweb/concircular.hpp"
#include "sepweb/potential.hpp"

namespace sepweb {

struct KbdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// axis-aligned sampling box
struct Box {
  Vec lo, hi;
  static Box centered(const Vec& center, double half_width);
};

struct KbdOptions {
  int n_samples = 0;          // 0: use 5 * param-count
  double svd_tol = 1e-9;
  double gap_factor = 1e3;    // required sigma_keep / sigma_drop
  std::uint64_t seed = 1;
  bool stability_check = true;
};

struct KbdSolution {
  std::vector<ConcircularTensor> basis;   // orthonormal in parameter space
  bool includes_trivial = false;
  std::vector<double> singular_values;
  Box sample_box;
  int param_count = 0;
};

// parameter packing p = (A upper triangle, w, m)
int kbd_param_count(const PseudoSpace& space);
Vec kbd_pack(const ConcircularTensor& L);
ConcircularTensor kbd_unpack(const PseudoSpace& space, const Vec& p);

// nullspace of d(K dV) = 0 over K = tr(L)G - L with L concircular
KbdSolution kbd_solve(const PotentialPtr& V, const Box& box, const KbdOptions& opts = {});

// max |d(K dV)|_{ij} over the points, K = kbdt(L)
double dkdv_residual(const ConcircularTensor& L, const PotentialPtr& V,
                     const std::vector<Vec>& pts);

// same residual for an arbitrary polynomial Killing tensor field
double dkdv_residual_field(const PolySym2Field& K, const PotentialPtr& V,
                           const std::vector<Vec>& pts);

// U(target) - U(base) along the straight segment, dU = K dV; checks closedness
double integrate_potential_U(const PolySym2Field& K, const PotentialPtr& V,
                             const Vec& base, const Vec& target,
                             double closedness_tol = 1e-5);

}  // namespace sepweb
