#pragma once

#include <complex>
#include <vector>

#include "sepweb/space.hpp"

namespace sepweb {

struct JordanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AmbiguousSpectrumError : JordanError {
  double gap;
  AmbiguousSpectrumError(const std::string& m, double g) : JordanError(m), gap(g) {}
};

struct JordanBlock {
  int size = 1;
  int sign = +1;                    // +1 for complex-eigenvalue blocks
  std::complex<double> lambda{0.0, 0.0};
};

// Blocks plus the canonical (possibly complex) basis: in that basis the
// operator is block J_k(lambda) acting as a downward chain (T e_i = lambda e_i
// + e_{i+1}, T e_k = lambda e_k) and the metric restricts to sign * S_k per
// block.
struct JordanBlockSpec {
  std::vector<JordanBlock> blocks;
  Eigen::MatrixXcd basis;           // columns ordered chain by chain

  bool same_blocks(const JordanBlockSpec& o, double tol) const;
};

// Metric-Jordan canonical form of a g-self-adjoint operator; T may carry any
// variance.  tol <= 0 picks the default 1e-8 * (1 + |T|).
JordanBlockSpec metric_jordan_form(const SymTensor2& T, const PseudoSpace& space,
                                   double tol = -1.0);

// deterministic ordering used for comparing block multisets
void sort_blocks(std::vector<JordanBlock>& blocks);

}  // namespace sepweb
