#pragma once

#include <functional>
#include <string>

#include "sepweb/space.hpp"

namespace sepweb {

// Orthogonal coordinate charts on E3 / E3_1 used to witness separation of the
// worked systems.  The frame columns (d, e, f) adapt the chart to a system.
struct Chart3 {
  std::string name;
  PseudoSpace space;
  std::function<Vec(const Vec&)> map;  // (u1,u2,u3) -> ambient
  Vec lo, hi;                          // sampling box of valid chart coordinates
};

// names: cylindrical | spherical | prolate | oblate | parabolic (E3, frame +
// optional parameter a), null-axial (E3_1, lightlike canonical chart)
Chart3 make_chart3(const std::string& name, const Mat& frame, double a = 1.0);

}  // namespace sepweb
