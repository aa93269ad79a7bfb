#pragma once

#include <optional>
#include <string>

#include "sepweb/concircular.hpp"
#include "sepweb/jordan.hpp"

namespace sepweb {

struct ClassifyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CtClass { Central, NonNullAxial, NullAxial, Cartesian, DegenerateNullAxial };

const char* ct_class_name(CtClass c);

// index and characteristic sign from omega_0 = m, omega_k = <w, A^{k-1} w>
struct CtInvariants {
  std::optional<int> index;
  std::optional<int> sign;
};
CtInvariants ct_invariants(const ConcircularTensor& L, double tol = 1e-10);

struct GeometricReduction {
  double a = 1.0;
  double b = 0.0;
  Vec shift;                     // L_norm = a * (shift-translated L) + b G
  ConcircularTensor normalized;
};

// normalize within the geometric-equivalence class; throws on multiples of G
// and on degenerate null axial inputs (no canonical form covers them)
GeometricReduction reduce_geometric(const ConcircularTensor& L);

struct CanonicalClass {
  CtClass tag = CtClass::Cartesian;
  std::optional<int> index;
  std::optional<int> sign;
  ConcircularTensor normalized_ct;
  std::vector<JordanBlock> blocks;  // metric-Jordan blocks of the normalized A
  GeometricReduction reduction;
  std::string key;                  // parameter-free class key for catalog matching
};

CanonicalClass classify_ct(const ConcircularTensor& L, double tol = 1e-10);

// class key of a sphere CT from its ambient A (affine-normalized block pattern)
std::string sphere_class_key(const Mat& A_contravariant, const PseudoSpace& space);

}  // namespace sepweb
