#pragma once

#include <stdexcept>

namespace sepweb {

struct JacobiPoleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Jacobi elliptic values at (u; modulus a), 0 < a < 1 (modulus convention:
// sn^2 + cn^2 = 1 and dn^2 + a^2 sn^2 = 1).
struct JacobiTriple {
  double sn = 0.0, cn = 1.0, dn = 1.0;
  double sc() const;
  double nc() const;
  double dc() const;
  double sd() const;
  double cd() const;
  double nd() const;
};

JacobiTriple jacobi_elliptic(double u, double modulus);

// Complete elliptic integral of the first kind K(a), modulus convention.
double complete_elliptic_k(double modulus);

}  // namespace sepweb
