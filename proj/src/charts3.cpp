#include "sepweb/charts3.hpp"

#include <cmath>

namespace sepweb {

namespace {
Vec box3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}
}  // namespace

Chart3 make_chart3(const std::string& name, const Mat& frame, double a) {
  Chart3 c;
  c.name = name;
  if (name == "cylindrical") {
    c.space = PseudoSpace::flat(3, 0);
    c.map = [frame](const Vec& u) {
      return Vec(frame.col(0) * u[0] +
                 frame.col(1) * (u[1] * std::cos(u[2])) +
                 frame.col(2) * (u[1] * std::sin(u[2])));
    };
    c.lo = box3(-1.0, 0.35, 0.25);
    c.hi = box3(1.0, 1.5, 1.25);
    return c;
  }
  if (name == "spherical") {
    c.space = PseudoSpace::flat(3, 0);
    c.map = [frame](const Vec& u) {
      return Vec(u[0] * (frame.col(0) * std::cos(u[1]) +
                         frame.col(1) * (std::sin(u[1]) * std::cos(u[2])) +
                         frame.col(2) * (std::sin(u[1]) * std::sin(u[2]))));
    };
    c.lo = box3(0.4, 0.3, 0.25);
    c.hi = box3(1.6, 1.3, 1.25);
    return c;
  }
  if (name == "prolate") {
    c.space = PseudoSpace::flat(3, 0);
    c.map = [frame, a](const Vec& u) {
      // (phi, eta, theta)
      return Vec(frame.col(0) * (a * std::cos(u[0]) * std::cosh(u[1])) +
                 (frame.col(1) * std::cos(u[2]) + frame.col(2) * std::sin(u[2])) *
                     (a * std::sin(u[0]) * std::sinh(u[1])));
    };
    c.lo = box3(0.25, 0.3, 0.25);
    c.hi = box3(1.3, 1.4, 1.25);
    return c;
  }
  if (name == "oblate") {
    c.space = PseudoSpace::flat(3, 0);
    c.map = [frame, a](const Vec& u) {
      return Vec(frame.col(0) * (a * std::sin(u[0]) * std::sinh(u[1])) +
                 (frame.col(1) * std::cos(u[2]) + frame.col(2) * std::sin(u[2])) *
                     (a * std::cos(u[0]) * std::cosh(u[1])));
    };
    c.lo = box3(0.25, 0.3, 0.25);
    c.hi = box3(1.3, 1.4, 1.25);
    return c;
  }
  if (name == "parabolic") {
    c.space = PseudoSpace::flat(3, 0);
    c.map = [frame](const Vec& u) {
      // (mu, nu, theta)
      return Vec(frame.col(0) * ((u[0] * u[0] - u[1] * u[1]) / 2) +
                 (frame.col(1) * std::cos(u[2]) + frame.col(2) * std::sin(u[2])) *
                     (u[0] * u[1]));
    };
    c.lo = box3(0.4, 0.3, 0.25);
    c.hi = box3(1.5, 1.3, 1.25);
    return c;
  }
  if (name == "null-axial") {
    // canonical chart (u, v, w), w < v < 0 < u, with lightlike coordinates
    // mu = (x+t)/sq2, nu = (x-t)/sq2:
    //   mu = -(u+v+w)/2,  nu = w(u+v)/4 - ((u-v)^2 + w^2)/8,  y^2 = u v w
    c.space = PseudoSpace::flat(3, 1);
    const double sq2 = std::sqrt(2.0);
    c.map = [sq2](const Vec& q) {
      double u = q[0], v = q[1], w = q[2];
      double mu = -(u + v + w) / 2;
      double nu = w * (u + v) / 4 - ((u - v) * (u - v) + w * w) / 8;
      double y = std::sqrt(u * v * w);
      Vec p(3);
      p << (mu - nu) / sq2, (mu + nu) / sq2, y;
      return p;
    };
    c.lo = box3(0.5, -1.5, -3.4);
    c.hi = box3(2.0, -0.4, -1.8);
    return c;
  }
  throw SpaceError("make_chart3: unknown chart '" + name + "'");
}

}  // namespace sepweb
