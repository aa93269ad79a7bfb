#include "sepweb/webs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sepweb {

namespace {

constexpr double kSq2 = 1.4142135623730951;

Vec v2(double t, double x) {
  Vec p(2);
  p << t, x;
  return p;
}
Vec v3(double t, double x, double y) {
  Vec p(3);
  p << t, x, y;
  return p;
}

// (zeta, eta) -> (t, x):  t = (zeta+eta)/sq2, x = (eta-zeta)/sq2
Vec from_lightlike(double zeta, double eta) {
  return v2((zeta + eta) / kSq2, (eta - zeta) / kSq2);
}

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

Mat diag3(double a, double b, double c) {
  Mat m = Mat::Zero(3, 3);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

double need_param(const std::map<std::string, double>& params, const std::string& key,
                  double defval, double lo, double hi) {
  double v = defval;
  auto it = params.find(key);
  if (it != params.end()) v = it->second;
  if (!(v > lo && v < hi)) {
    std::ostringstream os;
    os << "chart parameter " << key << " = " << v << " outside (" << lo << ", " << hi << ")";
    throw WebError(os.str());
  }
  return v;
}

constexpr double kRegionTol = 1e-9;

}  // namespace

std::vector<std::string> catalog_cases(const std::string& space_name) {
  if (space_name == "E2")
    return {"E2.cartesian", "E2.polar", "E2.elliptic", "E2.parabolic"};
  if (space_name == "E2_1") {
    std::vector<std::string> v;
    for (int i = 1; i <= 10; ++i) v.push_back("E21.case" + std::to_string(i));
    return v;
  }
  if (space_name == "dS2") {
    std::vector<std::string> v;
    for (int i = 1; i <= 9; ++i) v.push_back("DS2.case" + std::to_string(i));
    return v;
  }
  if (space_name == "AdS2") {
    std::vector<std::string> v;
    for (int i = 1; i <= 9; ++i) v.push_back("ADS2.case" + std::to_string(i));
    return v;
  }
  throw WebError("catalog_cases: unsupported space '" + space_name + "'");
}

namespace {

WebChart make_e2_chart(const std::string& id, const std::map<std::string, double>& params) {
  PseudoSpace E2 = PseudoSpace::flat(2, 0);
  WebChart c;
  c.case_id = id;
  c.space = E2;
  if (id == "E2.cartesian") {
    c.title = "Cartesian coordinates";
    c.ct = ConcircularTensor(E2, mat2(1, 0, 0, 0), Vec::Zero(2), 0.0);
    c.regions.push_back({"all",
                         [](double u, double v) { return v2(u, v); },
                         [](double, double) { return Eigen::Vector2d(1, 1); },
                         -2, 2, -2, 2, 0});
    c.region_of = [](const Vec&) { return std::string("all"); };
    return c;
  }
  if (id == "E2.polar") {
    c.title = "polar coordinates";
    c.ct = ConcircularTensor::dilatational(E2);
    c.regions.push_back({"plane",
                         [](double u, double v) { return v2(u * std::cos(v), u * std::sin(v)); },
                         [](double u, double) { return Eigen::Vector2d(1, u * u); },
                         0.1, 2.0, 0.1, 6.18, 0});
    c.region_of = [](const Vec& p) {
      return p.norm() < kRegionTol ? std::string("SingularSet") : std::string("plane");
    };
    return c;
  }
  if (id == "E2.elliptic") {
    double a = need_param(params, "a", 1.0, 0.0, 1e6);
    c.title = "elliptic coordinates";
    c.params["a"] = a;
    c.ct = ConcircularTensor(E2, mat2(0, 0, 0, a * a), Vec::Zero(2), 1.0);
    auto gf = [a](double u, double v) {
      double f = a * a * (std::sin(u) * std::sin(u) + std::sinh(v) * std::sinh(v));
      return Eigen::Vector2d(f, f);
    };
    const char* quad[4] = {"Q1", "Q2", "Q3", "Q4"};
    const double sx[4] = {1, -1, -1, 1}, sy[4] = {1, 1, -1, -1};
    for (int q = 0; q < 4; ++q) {
      double fx = sx[q], fy = sy[q];
      c.regions.push_back({quad[q],
                           [a, fx, fy](double u, double v) {
                             return v2(fx * a * std::cos(u) * std::cosh(v),
                                       fy * a * std::sin(u) * std::sinh(v));
                           },
                           gf, 0.08, 1.49, 0.08, 1.6, 0});
    }
    c.has_inverse = true;
    c.inverse = [a](const std::vector<double>& eig) {
      // ascending roots u1 in (0,a^2), u2 > a^2: u = acos(sqrt(u1)/a), v = acosh(sqrt(u2)/a)
      double u = std::acos(std::sqrt(std::max(0.0, eig[0])) / a);
      double v = std::acosh(std::sqrt(eig[1]) / a);
      return std::make_pair(u, v);
    };
    c.region_of = [a](const Vec& p) {
      if (std::fabs(p[1]) < kRegionTol && std::fabs(p[0]) <= a + kRegionTol)
        return std::string("SingularSet");  // focal segment
      if (p[0] > 0 && p[1] > 0) return std::string("Q1");
      if (p[0] < 0 && p[1] > 0) return std::string("Q2");
      if (p[0] < 0 && p[1] < 0) return std::string("Q3");
      if (p[0] > 0 && p[1] < 0) return std::string("Q4");
      return std::string("SingularSet");
    };
    return c;
  }
  if (id == "E2.parabolic") {
    c.title = "parabolic coordinates";
    c.ct = ConcircularTensor(E2, Mat::Zero(2, 2), v2(1, 0), 0.0);
    auto gf = [](double u, double v) {
      double f = u * u + v * v;
      return Eigen::Vector2d(f, f);
    };
    c.regions.push_back({"E",
                         [](double u, double v) { return v2((u * u - v * v) / 2, u * v); },
                         gf, 0.08, 1.8, 0.08, 1.8, 0});
    c.regions.push_back({"W",
                         [](double u, double v) { return v2((u * u - v * v) / 2, -u * v); },
                         gf, 0.08, 1.8, 0.08, 1.8, 0});
    c.has_inverse = true;
    c.inverse = [](const std::vector<double>& eig) {
      // roots u^2 and -v^2
      return std::make_pair(std::sqrt(eig[1]), std::sqrt(-eig[0]));
    };
    c.region_of = [](const Vec& p) {
      if (std::fabs(p[1]) < kRegionTol && p[0] >= -kRegionTol)
        return std::string("SingularSet");  // positive x-axis incl. focus
      return p[1] > 0 ? std::string("E") : std::string("W");
    };
    return c;
  }
  throw WebError("unknown E2 chart '" + id + "'");
}

WebChart make_e21_chart(const std::string& id, const std::map<std::string, double>& params) {
  PseudoSpace M2 = PseudoSpace::flat(2, 1);
  WebChart c;
  c.case_id = id;
  c.space = M2;
  int n = 0;
  if (sscanf(id.c_str(), "E21.case%d", &n) != 1 || n < 1 || n > 10)
    throw WebError("unknown E2_1 chart '" + id + "'");

  switch (n) {
    case 1: {
      c.title = "Cartesian coordinates";
      c.ct = ConcircularTensor(M2, mat2(1, 0, 0, 0), Vec::Zero(2), 0.0);
      c.regions.push_back({"all",
                           [](double u, double v) { return v2(u, v); },
                           [](double, double) { return Eigen::Vector2d(-1, 1); },
                           -2, 2, -2, 2, 0});
      c.region_of = [](const Vec&) { return std::string("all"); };
      return c;
    }
    case 2: {
      c.title = "Rindler coordinates";
      c.ct = ConcircularTensor::dilatational(M2);
      auto gT = [](double u, double) { return Eigen::Vector2d(-1, u * u); };
      auto gS = [](double u, double) { return Eigen::Vector2d(1, -u * u); };
      c.regions.push_back({"N", [](double u, double v) { return v2(u * std::cosh(v), u * std::sinh(v)); },
                           gT, 0.1, 2.0, -1.4, 1.4, 0});
      c.regions.push_back({"S", [](double u, double v) { return v2(-u * std::cosh(v), -u * std::sinh(v)); },
                           gT, 0.1, 2.0, -1.4, 1.4, 0});
      c.regions.push_back({"E", [](double u, double v) { return v2(u * std::sinh(v), u * std::cosh(v)); },
                           gS, 0.1, 2.0, -1.4, 1.4, 0});
      c.regions.push_back({"W", [](double u, double v) { return v2(-u * std::sinh(v), -u * std::cosh(v)); },
                           gS, 0.1, 2.0, -1.4, 1.4, 0});
      c.region_of = [](const Vec& p) {
        double t = p[0], x = p[1];
        if (std::fabs(std::fabs(t) - std::fabs(x)) < kRegionTol * (1 + p.cwiseAbs().maxCoeff()))
          return std::string("SingularSet");
        if (t > std::fabs(x)) return std::string("N");
        if (-t > std::fabs(x)) return std::string("S");
        return x > 0 ? std::string("E") : std::string("W");
      };
      return c;
    }
    case 3: {
      double a = need_param(params, "a", 1.0, 0.0, 1e6);
      c.title = "Real elliptic coordinates of Type I";
      c.params["a"] = a;
      c.ct = ConcircularTensor(M2, mat2(0, 0, 0, a * a), Vec::Zero(2), 1.0);
      auto gf = [a](double u, double v) {
        double f = a * a * (std::cosh(u) * std::cosh(u) + std::sinh(v) * std::sinh(v));
        return Eigen::Vector2d(f, -f);
      };
      const char* lab[4] = {"Q1", "Q2", "Q3", "Q4"};
      const double st[4] = {1, 1, -1, -1}, sx[4] = {1, -1, -1, 1};
      for (int q = 0; q < 4; ++q) {
        double ft = st[q], fx = sx[q];
        c.regions.push_back({lab[q],
                             [a, ft, fx](double u, double v) {
                               return v2(ft * a * std::cosh(u) * std::sinh(v),
                                         fx * a * std::sinh(u) * std::cosh(v));
                             },
                             gf, 0.08, 1.5, 0.08, 1.5, 0});
      }
      c.has_inverse = true;
      c.inverse = [a](const std::vector<double>& eig) {
        // eigenfunctions a^2 cosh^2 u (>0) and -a^2 sinh^2 v (<0)
        double u = std::acosh(std::sqrt(eig[1]) / a);
        double v = std::asinh(std::sqrt(-eig[0]) / a);
        return std::make_pair(u, v);
      };
      c.region_of = [](const Vec& p) {
        if (std::fabs(p[0]) < kRegionTol || std::fabs(p[1]) < kRegionTol)
          return std::string("SingularSet");
        if (p[0] > 0) return p[1] > 0 ? std::string("Q1") : std::string("Q2");
        return p[1] < 0 ? std::string("Q3") : std::string("Q4");
      };
      return c;
    }
    case 4: {
      double a = need_param(params, "a", 1.0, 0.0, 1e6);
      c.title = "Real elliptic coordinates of Type II";
      c.params["a"] = a;
      c.ct = ConcircularTensor(M2, mat2(-a * a, 0, 0, 0), Vec::Zero(2), 1.0);
      auto gNS = [a](double u, double v) {
        double f = a * a * (std::cosh(u) * std::cosh(u) - std::cosh(v) * std::cosh(v));
        return Eigen::Vector2d(-f, f);
      };
      auto gEW = [a](double u, double v) {
        double f = a * a * (std::cosh(v) * std::cosh(v) - std::cosh(u) * std::cosh(u));
        return Eigen::Vector2d(-f, f);
      };
      auto gC = [a](double u, double v) {
        double f = a * a * (std::cos(u) * std::cos(u) - std::cos(v) * std::cos(v));
        return Eigen::Vector2d(f, -f);
      };
      c.regions.push_back({"N",
                           [a](double u, double v) {
                             return v2(a * std::cosh(u) * std::cosh(v), a * std::sinh(u) * std::sinh(v));
                           },
                           gNS, 0.06, 1.7, 0.05, 1.6, +1});
      c.regions.push_back({"S",
                           [a](double u, double v) {
                             return v2(-a * std::cosh(u) * std::cosh(v), -a * std::sinh(u) * std::sinh(v));
                           },
                           gNS, 0.06, 1.7, 0.05, 1.6, +1});
      c.regions.push_back({"E",
                           [a](double u, double v) {
                             return v2(a * std::sinh(u) * std::sinh(v), a * std::cosh(u) * std::cosh(v));
                           },
                           gEW, 0.05, 1.6, 0.06, 1.7, -1});
      c.regions.push_back({"W",
                           [a](double u, double v) {
                             return v2(-a * std::sinh(u) * std::sinh(v), -a * std::cosh(u) * std::cosh(v));
                           },
                           gEW, 0.05, 1.6, 0.06, 1.7, -1});
      c.regions.push_back({"C",
                           [a](double u, double v) {
                             return v2(a * std::cos(u) * std::cos(v), a * std::sin(u) * std::sin(v));
                           },
                           gC, 0.06, 1.50, 0.05, 1.45, +1});
      c.has_inverse = true;
      c.inverse = [a](const std::vector<double>& eig) {
        // N-region reparameterization: eigenfunctions -a^2 sinh^2(.)
        double u = std::asinh(std::sqrt(-eig[0]) / a);
        double v = std::asinh(std::sqrt(std::max(0.0, -eig[1])) / a);
        return std::make_pair(u, v);
      };
      c.region_of = [a](const Vec& p) {
        double zm = p[0] - p[1], zp = p[0] + p[1];
        double sc = 1 + p.cwiseAbs().maxCoeff();
        if (std::fabs(std::fabs(zm) - a) < kRegionTol * sc ||
            std::fabs(std::fabs(zp) - a) < kRegionTol * sc)
          return std::string("SingularSet");
        if (zm > a && zp > a) return std::string("N");
        if (zm < -a && zp < -a) return std::string("S");
        if (zm < -a && zp > a) return std::string("E");
        if (zm > a && zp < -a) return std::string("W");
        if (std::fabs(zm) < a && std::fabs(zp) < a) return std::string("C");
        return std::string("SingularSet");
      };
      return c;
    }
    case 5: {
      double a = need_param(params, "a", 1.0, 0.0, 1e6);
      c.title = "Complex elliptic coordinates";
      c.params["a"] = a;
      c.ct = ConcircularTensor(M2, mat2(0, a * a, a * a, 0), Vec::Zero(2), 1.0);
      auto gf = [a](double u, double v) {
        double f = a * a * (std::sinh(2 * u) + std::sinh(2 * v));
        return Eigen::Vector2d(f, -f);
      };
      c.regions.push_back({"E",
                           [a](double u, double v) {
                             return from_lightlike(a * std::cosh(u + v), -a * std::sinh(u - v));
                           },
                           gf, 0.12, 1.2, -1.0, 1.0, +2});
      c.regions.push_back({"W",
                           [a](double u, double v) {
                             return from_lightlike(-a * std::cosh(u + v), a * std::sinh(u - v));
                           },
                           gf, 0.12, 1.2, -1.0, 1.0, +2});
      c.has_inverse = true;
      c.inverse = [a](const std::vector<double>& eig) {
        double b = a * a;
        double u = 0.5 * std::asinh(eig[1] / b);
        double v = 0.5 * std::asinh(-eig[0] / b);
        return std::make_pair(u, v);
      };
      c.region_of = [a](const Vec& p) {
        double zeta = (p[0] - p[1]) / kSq2;
        double sc = 1 + p.cwiseAbs().maxCoeff();
        if (std::fabs(std::fabs(zeta) - a) < kRegionTol * sc) return std::string("SingularSet");
        if (zeta > a) return std::string("E");
        if (zeta < -a) return std::string("W");
        return std::string("NotInDomain");
      };
      return c;
    }
    case 6: {
      c.title = "Null elliptic coordinates of Type I";
      c.ct = ConcircularTensor(M2, mat2(0.5, 0.5, 0.5, 0.5), Vec::Zero(2), 1.0);
      auto gf = [](double u, double v) {
        double f = std::exp(2 * u) + std::exp(2 * v);
        return Eigen::Vector2d(-f, f);
      };
      c.regions.push_back({"E",
                           [](double u, double v) {
                             return from_lightlike(std::exp(u + v), std::sinh(u - v));
                           },
                           gf, -1.1, 1.1, -1.1, 1.1, 0});
      c.regions.push_back({"W",
                           [](double u, double v) {
                             return from_lightlike(-std::exp(u + v), -std::sinh(u - v));
                           },
                           gf, -1.1, 1.1, -1.1, 1.1, 0});
      c.has_inverse = true;
      c.inverse = [](const std::vector<double>& eig) {
        // eigenfunctions -e^{2u} and e^{2v}
        return std::make_pair(0.5 * std::log(-eig[0]), 0.5 * std::log(eig[1]));
      };
      c.region_of = [](const Vec& p) {
        double zeta = (p[0] - p[1]) / kSq2;
        if (std::fabs(zeta) < kRegionTol * (1 + p.cwiseAbs().maxCoeff()))
          return std::string("SingularSet");
        return zeta > 0 ? std::string("E") : std::string("W");
      };
      return c;
    }
    case 7: {
      c.title = "Null elliptic coordinates of Type II";
      c.ct = ConcircularTensor(M2, mat2(-0.5, -0.5, -0.5, -0.5), Vec::Zero(2), 1.0);
      auto gNS = [](double u, double v) {
        double f = std::exp(2 * u) - std::exp(2 * v);
        return Eigen::Vector2d(f, -f);
      };
      auto gEW = [](double u, double v) {
        double f = std::exp(2 * v) - std::exp(2 * u);
        return Eigen::Vector2d(f, -f);
      };
      c.regions.push_back({"N",
                           [](double u, double v) {
                             return from_lightlike(-std::exp(u + v), std::cosh(u - v));
                           },
                           gNS, -1.0, 1.1, -1.1, 1.0, +1});
      c.regions.push_back({"S",
                           [](double u, double v) {
                             return from_lightlike(std::exp(u + v), -std::cosh(u - v));
                           },
                           gNS, -1.0, 1.1, -1.1, 1.0, +1});
      c.regions.push_back({"E",
                           [](double u, double v) {
                             return from_lightlike(std::exp(u + v), std::cosh(u - v));
                           },
                           gEW, -1.1, 1.0, -1.0, 1.1, -1});
      c.regions.push_back({"W",
                           [](double u, double v) {
                             return from_lightlike(-std::exp(u + v), -std::cosh(u - v));
                           },
                           gEW, -1.1, 1.0, -1.0, 1.1, -1});
      c.has_inverse = true;
      c.inverse = [](const std::vector<double>& eig) {
        // N region: eigenfunctions -e^{2u} < -e^{2v}... ascending: (-e^{2u}, -e^{2v})
        return std::make_pair(0.5 * std::log(-eig[0]), 0.5 * std::log(-eig[1]));
      };
      c.region_of = [](const Vec& p) {
        double zeta = (p[0] - p[1]) / kSq2, eta = (p[0] + p[1]) / kSq2;
        double sc = 1 + p.cwiseAbs().maxCoeff();
        if (std::fabs(zeta) < kRegionTol * sc || std::fabs(std::fabs(eta) - 1) < kRegionTol * sc)
          return std::string("SingularSet");
        if (eta > 1) return zeta < 0 ? std::string("N") : std::string("E");
        if (eta < -1) return zeta > 0 ? std::string("S") : std::string("W");
        return std::string("NotInDomain");
      };
      return c;
    }
    case 8: {
      c.title = "Timelike parabolic coordinates";
      c.ct = ConcircularTensor(M2, Mat::Zero(2, 2), v2(1, 0), 0.0);
      auto gf = [](double u, double v) {
        double f = u * u - v * v;
        return Eigen::Vector2d(-f, f);
      };
      c.regions.push_back({"N1", [](double u, double v) { return v2((u * u + v * v) / 2, u * v); },
                           gf, 0.06, 1.8, 0.05, 1.7, +1});
      c.regions.push_back({"N2", [](double u, double v) { return v2((u * u + v * v) / 2, -u * v); },
                           gf, 0.06, 1.8, 0.05, 1.7, +1});
      c.regions.push_back({"S1", [](double u, double v) { return v2(-(u * u + v * v) / 2, u * v); },
                           gf, 0.06, 1.8, 0.05, 1.7, +1});
      c.regions.push_back({"S2", [](double u, double v) { return v2(-(u * u + v * v) / 2, -u * v); },
                           gf, 0.06, 1.8, 0.05, 1.7, +1});
      c.has_inverse = true;
      c.inverse = [](const std::vector<double>& eig) {
        // eigenfunctions -u^2 < -v^2
        return std::make_pair(std::sqrt(-eig[0]), std::sqrt(-eig[1]));
      };
      c.region_of = [](const Vec& p) {
        double t = p[0], x = p[1];
        double sc = 1 + p.cwiseAbs().maxCoeff();
        if (std::fabs(std::fabs(t) - std::fabs(x)) < kRegionTol * sc || std::fabs(t) < kRegionTol)
          return std::string("SingularSet");
        if (t > std::fabs(x)) return x >= 0 ? std::string("N1") : std::string("N2");
        if (-t > std::fabs(x)) return x >= 0 ? std::string("S1") : std::string("S2");
        return std::string("NotInDomain");
      };
      return c;
    }
    case 9: {
      c.title = "Spacelike parabolic coordinates";
      c.ct = ConcircularTensor(M2, Mat::Zero(2, 2), v2(0, 1), 0.0);
      auto gf = [](double u, double v) {
        double f = u * u - v * v;
        return Eigen::Vector2d(f, -f);
      };
      c.regions.push_back({"E1", [](double u, double v) { return v2(u * v, (u * u + v * v) / 2); },
                           gf, 0.06, 1.8, 0.05, 1.7, +1});
      c.regions.push_back({"E2", [](double u, double v) { return v2(-u * v, (u * u + v * v) / 2); },
                           gf, 0.06, 1.8, 0.05, 1.7, +1});
      c.regions.push_back({"W1", [](double u, double v) { return v2(u * v, -(u * u + v * v) / 2); },
                           gf, 0.06, 1.8, 0.05, 1.7, +1});
      c.regions.push_back({"W2", [](double u, double v) { return v2(-u * v, -(u * u + v * v) / 2); },
                           gf, 0.06, 1.8, 0.05, 1.7, +1});
      c.has_inverse = true;
      c.inverse = [](const std::vector<double>& eig) {
        return std::make_pair(std::sqrt(eig[1]), std::sqrt(eig[0]));
      };
      c.region_of = [](const Vec& p) {
        double t = p[0], x = p[1];
        double sc = 1 + p.cwiseAbs().maxCoeff();
        if (std::fabs(std::fabs(t) - std::fabs(x)) < kRegionTol * sc || std::fabs(x) < kRegionTol)
          return std::string("SingularSet");
        if (x > std::fabs(t)) return t >= 0 ? std::string("E1") : std::string("E2");
        if (-x > std::fabs(t)) return t >= 0 ? std::string("W1") : std::string("W2");
        return std::string("NotInDomain");
      };
      return c;
    }
    case 10: {
      c.title = "Null parabolic coordinates";
      c.ct = ConcircularTensor(M2, mat2(0.5, 0.5, 0.5, 0.5), v2(1 / kSq2, -1 / kSq2), 0.0);
      auto gf = [](double u, double v) {
        double f = 0.25 * (u - v);
        return Eigen::Vector2d(f, -f);
      };
      c.regions.push_back({"E",
                           [](double u, double v) {
                             double d = u - v;
                             return from_lightlike(d * d / 8.0, -(u + v) / 2.0);
                           },
                           gf, -1.4, 2.0, -2.0, 1.4, +1});
      c.regions.push_back({"W",
                           [](double u, double v) {
                             double d = u - v;
                             return from_lightlike(-d * d / 8.0, (u + v) / 2.0);
                           },
                           gf, -1.4, 2.0, -2.0, 1.4, +1});
      c.has_inverse = true;
      c.inverse = [](const std::vector<double>& eig) {
        return std::make_pair(eig[1], eig[0]);  // eigenfunctions are (v, u) ascending
      };
      c.region_of = [](const Vec& p) {
        double zeta = (p[0] - p[1]) / kSq2;
        if (std::fabs(zeta) < kRegionTol * (1 + p.cwiseAbs().maxCoeff()))
          return std::string("SingularSet");
        return zeta > 0 ? std::string("E") : std::string("W");
      };
      return c;
    }
  }
  throw WebError("unreachable");
}

WebChart make_ds2_chart(const std::string& id, const std::map<std::string, double>& params) {
  PseudoSpace S = PseudoSpace::sphere(3, 1, 1.0);
  WebChart c;
  c.case_id = id;
  c.space = S;
  int n = 0;
  if (sscanf(id.c_str(), "DS2.case%d", &n) != 1 || n < 1 || n > 9)
    throw WebError("unknown dS2 chart '" + id + "'");

  switch (n) {
    case 1: {
      double a = need_param(params, "a", 0.6, 0.0, 1.0);
      double b2 = 1.0 - a * a;
      double K = complete_elliptic_k(a);
      c.title = "Real elliptic coordinates of Type I";
      c.params["a"] = a;
      c.ct = ConcircularTensor::on_sphere(S, diag3(0, b2, 1));
      c.projection = "xy";
      c.regions.push_back(
          {"P",
           [a](double u, double v) {
             JacobiTriple ju = jacobi_elliptic(u, a), jv = jacobi_elliptic(v, a);
             return v3(ju.sc() * jv.dn, ju.nc() * jv.cn, ju.dc() * jv.sn);
           },
           [a](double u, double v) {
             JacobiTriple ju = jacobi_elliptic(u, a), jv = jacobi_elliptic(v, a);
             double f = ju.dc() * ju.dc() - a * a * jv.sn * jv.sn;
             return Eigen::Vector2d(-f, f);
           },
           0.06 * K, 0.94 * K, 0.06 * K, 0.94 * K, 0});
      c.region_of = [](const Vec& p) {
        if (std::min({std::fabs(p[0]), std::fabs(p[1]), std::fabs(p[2])}) < kRegionTol)
          return std::string("SingularSet");
        return (p[0] > 0 && p[1] > 0 && p[2] > 0) ? std::string("P") : std::string("NotInDomain");
      };
      return c;
    }
    case 2: {
      double a = need_param(params, "a", 0.6, 0.0, 1.0);
      double b = std::sqrt(1.0 - a * a);
      double Ka = complete_elliptic_k(a), Kb = complete_elliptic_k(b);
      c.title = "Real elliptic coordinates of Type II";
      c.params["a"] = a;
      c.ct = ConcircularTensor::on_sphere(S, diag3(-a * a, 1, 0));
      c.projection = "tx";
      c.regions.push_back(
          {"E",
           [a, b](double u, double v) {
             JacobiTriple ju = jacobi_elliptic(u, a), jv = jacobi_elliptic(v, a);
             return v3(b / a * ju.nc() * jv.nc(), b * ju.sc() * jv.sc(),
                       ju.dc() * jv.dc() / a);
           },
           [a](double u, double v) {
             JacobiTriple ju = jacobi_elliptic(u, a), jv = jacobi_elliptic(v, a);
             double f = ju.dc() * ju.dc() - jv.dc() * jv.dc();
             return Eigen::Vector2d(-f, f);
           },
           0.06 * Ka, 0.94 * Ka, 0.05 * Ka, 0.92 * Ka, +1});
      c.regions.push_back(
          {"C",
           [a, b](double u, double v) {
             JacobiTriple ju = jacobi_elliptic(u, b), jv = jacobi_elliptic(v, b);
             return v3(a * b * ju.sd() * jv.sd(), b * ju.cd() * jv.cd(),
                       a * ju.nd() * jv.nd());
           },
           [a, b](double u, double v) {
             JacobiTriple ju = jacobi_elliptic(u, b), jv = jacobi_elliptic(v, b);
             double f = a * a * (ju.nd() * ju.nd() - jv.nd() * jv.nd());
             return Eigen::Vector2d(f, -f);
           },
           0.06 * Kb, 0.94 * Kb, 0.05 * Kb, 0.92 * Kb, +1});
      c.region_of = [a, b](const Vec& p) {
        double e = a * std::fabs(p[0]) - std::fabs(p[1]);
        double f = a * std::fabs(p[0]) + std::fabs(p[1]);
        double sc = 1 + p.cwiseAbs().maxCoeff();
        if (std::fabs(e - b) < kRegionTol * sc || std::fabs(f - b) < kRegionTol * sc)
          return std::string("SingularSet");
        if (e > b) return std::string("E");
        if (f < b) return std::string("C");
        return std::string("NotInDomain");
      };
      return c;
    }
    case 3: {
      c.title = "Spherical coordinates of Type I";
      c.ct = ConcircularTensor::on_sphere(S, diag3(1, 0, 0));
      c.projection = "xy";
      c.regions.push_back({"P",
                           [](double u, double v) {
                             return v3(std::sinh(u), std::cosh(u) * std::cos(v),
                                       std::cosh(u) * std::sin(v));
                           },
                           [](double u, double) {
                             return Eigen::Vector2d(-1, std::cosh(u) * std::cosh(u));
                           },
                           -1.4, 1.4, 0.1, 6.18, 0});
      c.region_of = [](const Vec&) { return std::string("P"); };
      return c;
    }
    case 4: {
      c.title = "Spherical coordinates of Type II";
      c.ct = ConcircularTensor::on_sphere(S, diag3(0, 0, 1));
      c.projection = "tx";
      c.regions.push_back({"E",
                           [](double u, double v) {
                             return v3(std::sin(u) * std::sinh(v), std::sin(u) * std::cosh(v),
                                       std::cos(u));
                           },
                           [](double u, double) {
                             return Eigen::Vector2d(1, -std::sin(u) * std::sin(u));
                           },
                           0.1, 3.04, -1.4, 1.4, 0});
      c.regions.push_back({"N",
                           [](double u, double v) {
                             return v3(std::sinh(u) * std::cosh(v), std::sinh(u) * std::sinh(v),
                                       std::cosh(u));
                           },
                           [](double u, double) {
                             return Eigen::Vector2d(-1, std::sinh(u) * std::sinh(u));
                           },
                           0.1, 1.5, -1.4, 1.4, 0});
      c.region_of = [](const Vec& p) {
        double d = -p[0] * p[0] + p[1] * p[1];
        if (std::fabs(d) < kRegionTol * (1 + p.squaredNorm())) return std::string("SingularSet");
        return d > 0 ? std::string("E") : std::string("N");
      };
      return c;
    }
    case 5: {
      double a = need_param(params, "a", 0.6, 0.0, 1.0);
      double b = std::sqrt(1.0 - a * a);
      double K = complete_elliptic_k(a);
      c.title = "Complex elliptic coordinates";
      c.params["a"] = a;
      Mat A = Mat::Zero(3, 3);
      A(0, 1) = A(1, 0) = 2 * a * b;
      A(2, 2) = b * b - a * a;
      c.ct = ConcircularTensor::on_sphere(S, A);
      c.projection = "xy";
      auto sndc = [a](double u) {
        JacobiTriple j = jacobi_elliptic(u, a);
        return j.sn * j.dc();
      };
      c.regions.push_back(
          {"P",
           [a, b](double u, double v) {
             JacobiTriple j2u = jacobi_elliptic(2 * u, a), j2v = jacobi_elliptic(2 * v, a);
             double Ssum = 2 * j2u.dn * j2v.dn / (a * b * (1 + j2u.cn) * (1 + j2v.cn));
             double D = 2 * (j2u.cn + j2v.cn) / ((1 + j2u.cn) * (1 + j2v.cn));
             JacobiTriple ju = jacobi_elliptic(u, a), jv = jacobi_elliptic(v, a);
             double y = ju.sn * ju.dc() * jv.sn * jv.dc();
             return v3(std::sqrt(std::max(0.0, (Ssum - D) / 2)),
                       std::sqrt(std::max(0.0, (Ssum + D) / 2)), y);
           },
           [sndc](double u, double v) {
             double f = sndc(u) * sndc(u) - sndc(v) * sndc(v);
             return Eigen::Vector2d(-f, f);
           },
           0.08 * K, 0.90 * K, 0.06 * K, 0.88 * K, +1});
      c.region_of = [](const Vec& p) {
        if (std::min({std::fabs(p[0]), std::fabs(p[1]), std::fabs(p[2])}) < kRegionTol)
          return std::string("SingularSet");
        return (p[0] > 0 && p[1] > 0 && p[2] > 0) ? std::string("P") : std::string("NotInDomain");
      };
      return c;
    }
    case 6: {
      c.title = "Null elliptic coordinates of Type I";
      Mat A = Mat::Zero(3, 3);
      A(0, 1) = A(1, 0) = -0.5;
      A(1, 1) = 1.0;
      A(2, 2) = 1.0;
      c.ct = ConcircularTensor::on_sphere(S, A);
      c.projection = "tx";
      c.regions.push_back(
          {"P",
           [](double u, double v) {
             double tpx = 1.0 / (std::cosh(u) * std::sinh(v));
             double th = std::tanh(u) / std::tanh(v);
             double tmx = -std::cosh(u) * std::sinh(v) * (1.0 - th * th);
             return v3((tpx + tmx) / 2, (tpx - tmx) / 2, th);
           },
           [](double u, double v) {
             double f = 1.0 / (std::cosh(u) * std::cosh(u)) + 1.0 / (std::sinh(v) * std::sinh(v));
             return Eigen::Vector2d(f, -f);
           },
           0.12, 1.5, 0.12, 1.5, 0});
      c.region_of = [](const Vec& p) {
        double tpx = p[0] + p[1];
        if (std::fabs(tpx) < kRegionTol * (1 + p.cwiseAbs().maxCoeff()))
          return std::string("SingularSet");
        return tpx > 0 && p[2] > 0 ? std::string("P") : std::string("NotInDomain");
      };
      return c;
    }
    case 7: {
      c.title = "Null elliptic coordinates of Type II";
      Mat A = Mat::Zero(3, 3);
      A(0, 1) = A(1, 0) = 0.5;
      A(1, 1) = -1.0;
      c.ct = ConcircularTensor::on_sphere(S, A);
      c.projection = "tx";
      c.regions.push_back(
          {"P1",
           [](double u, double v) {
             double tpx = 1.0 / (std::cos(u) * std::cos(v));
             double tt = std::tan(u) * std::tan(v);
             double tmx = -std::cos(u) * std::cos(v) * (1.0 - tt * tt);
             return v3((tpx + tmx) / 2, (tpx - tmx) / 2, tt);
           },
           [](double u, double v) {
             double f = 1.0 / (std::cos(u) * std::cos(u)) - 1.0 / (std::cos(v) * std::cos(v));
             return Eigen::Vector2d(-f, f);
           },
           0.07, 1.48, 0.06, 1.42, +1});
      c.regions.push_back(
          {"P2",
           [](double u, double v) {
             double tpx = 1.0 / (std::sinh(u) * std::sinh(v));
             double cc = std::cosh(u) / std::sinh(u) * std::cosh(v) / std::sinh(v);
             double tmx = -std::sinh(u) * std::sinh(v) * (1.0 - cc * cc);
             return v3((tpx + tmx) / 2, (tpx - tmx) / 2, cc);
           },
           [](double u, double v) {
             double f = 1.0 / (std::sinh(v) * std::sinh(v)) - 1.0 / (std::sinh(u) * std::sinh(u));
             return Eigen::Vector2d(f, -f);
           },
           0.2, 1.8, 0.15, 1.7, +1});
      c.regions.push_back(
          {"P3",
           [](double u, double v) {
             double tpx = 1.0 / (std::cosh(u) * std::cosh(v));
             double tt = std::tanh(u) * std::tanh(v);
             double tmx = -std::cosh(u) * std::cosh(v) * (1.0 - tt * tt);
             return v3((tpx + tmx) / 2, (tpx - tmx) / 2, tt);
           },
           [](double u, double v) {
             double f = 1.0 / (std::cosh(u) * std::cosh(u)) - 1.0 / (std::cosh(v) * std::cosh(v));
             return Eigen::Vector2d(f, -f);
           },
           0.15, 1.7, 0.2, 1.8, -1});
      c.region_of = [](const Vec& p) {
        double sc = 1 + p.cwiseAbs().maxCoeff();
        if (std::fabs(std::fabs(p[1]) - 1) < kRegionTol * sc ||
            std::fabs(p[0]) < kRegionTol * sc ||
            std::fabs(std::fabs(p[2]) - 1) < kRegionTol * sc)
          return std::string("SingularSet");
        if (std::fabs(p[1]) <= 1) return std::string("NotInDomain");
        if (p[0] * p[1] > 0) return std::string("P1");
        return std::fabs(p[2]) > 1 ? std::string("P2") : std::string("P3");
      };
      return c;
    }
    case 8: {
      c.title = "Null spherical coordinates";
      Mat A = Mat::Zero(3, 3);
      A(0, 0) = A(0, 1) = A(1, 0) = A(1, 1) = 0.5;
      c.ct = ConcircularTensor::on_sphere(S, A);
      c.projection = "tx";
      c.regions.push_back({"P",
                           [](double u, double v) {
                             double tpx = std::exp(-u) - v * v * std::exp(u);
                             double tmx = -std::exp(u);
                             return v3((tpx + tmx) / 2, (tpx - tmx) / 2, v * std::exp(u));
                           },
                           [](double u, double) {
                             return Eigen::Vector2d(-1, std::exp(2 * u));
                           },
                           -1.2, 1.2, -1.2, 1.2, 0});
      c.region_of = [](const Vec& p) {
        double tmx = p[0] - p[1];
        if (std::fabs(tmx) < kRegionTol * (1 + p.cwiseAbs().maxCoeff()))
          return std::string("SingularSet");
        return tmx < 0 ? std::string("P") : std::string("NotInDomain");
      };
      return c;
    }
    case 9: {
      c.title = "Null elliptic coordinates of Type III";
      Mat A = Mat::Zero(3, 3);
      A(0, 2) = A(2, 0) = -1.0 / kSq2;
      A(1, 2) = A(2, 1) = 1.0 / kSq2;
      c.ct = ConcircularTensor::on_sphere(S, A);
      c.projection = "tx";
      c.regions.push_back(
          {"P",
           [](double u, double v) {
             double tpx = 1.0 / (u * v);
             double d = u * u - v * v;
             double tmx = d * d / (4 * u * v);
             return v3((tpx + tmx) / 2, (tpx - tmx) / 2, (u * u + v * v) / (2 * u * v));
           },
           [](double u, double v) {
             double f = 1.0 / (u * u) - 1.0 / (v * v);
             return Eigen::Vector2d(-f, f);
           },
           0.25, 1.9, 0.3, 2.0, -1});
      c.region_of = [](const Vec& p) {
        double tpx = p[0] + p[1], tmx = p[0] - p[1];
        double sc = 1 + p.cwiseAbs().maxCoeff();
        if (std::fabs(tpx) < kRegionTol * sc || std::fabs(tmx) < kRegionTol * sc)
          return std::string("SingularSet");
        return (tpx > 0 && tmx >= 0 && p[2] > 0) ? std::string("P") : std::string("NotInDomain");
      };
      return c;
    }
  }
  throw WebError("unreachable");
}

}  // namespace

WebChart make_chart(const std::string& case_id, const std::map<std::string, double>& params) {
  if (case_id.rfind("E2.", 0) == 0) return make_e2_chart(case_id, params);
  if (case_id.rfind("E21.", 0) == 0) return make_e21_chart(case_id, params);
  if (case_id.rfind("DS2.", 0) == 0) return make_ds2_chart(case_id, params);
  if (case_id.rfind("ADS2.", 0) == 0) {
    std::string ds = "DS2." + case_id.substr(5);
    return ads2_swap(make_chart(ds, params));
  }
  throw WebError("unknown chart id '" + case_id + "'");
}

WebChart ads2_swap(const WebChart& ds2) {
  if (!ds2.space.is_sphere() || ds2.space.n != 3)
    throw WebError("ads2_swap: expects a dS2 chart");
  WebChart c;
  c.case_id = "ADS2." + ds2.case_id.substr(4);
  c.title = ds2.title + " (signature-swapped)";
  c.space = ds2.space;  // E3_1(1) with permuted ambient axes
  c.params = ds2.params;
  c.projection = ds2.projection;
  // ambient axis permutation: new (T, X, Y) = old (t, y, x)
  Mat P = Mat::Zero(3, 3);
  P(0, 0) = 1;
  P(1, 2) = 1;
  P(2, 1) = 1;
  c.ct = ConcircularTensor::on_sphere(c.space, Mat(P * ds2.ct.A * P.transpose()));
  for (const ChartRegion& r : ds2.regions) {
    ChartRegion s;
    s.label = r.label;
    s.map = [r, P](double u, double v) { return Vec(P * r.map(v, u)); };
    s.gfac = [r](double u, double v) {
      Eigen::Vector2d g = r.gfac(v, u);
      return Eigen::Vector2d(g[1], g[0]);
    };
    s.ulo = r.vlo;
    s.uhi = r.vhi;
    s.vlo = r.ulo;
    s.vhi = r.uhi;
    s.ordering = -r.ordering;  // v<u swaps to u<v, |v|<u swaps to |u|<v
    c.regions.push_back(std::move(s));
  }
  WebChart base = ds2;
  c.region_of = [base, P](const Vec& p) {
    // undo the axis permutation
    Vec q = P.transpose() * p;
    return base.region_of ? base.region_of(q) : std::string("P");
  };
  return c;
}

Vec web_transform(const WebChart& chart, const std::string& region, double u, double v) {
  for (const auto& r : chart.regions)
    if (r.label == region) {
      bool ok = true;
      if (r.ordering == +1) ok = v < u;
      if (r.ordering == -1) ok = u < v;
      if (r.ordering == +2) ok = std::fabs(v) < u;
      if (r.ordering == -2) ok = std::fabs(u) < v;
      if (!(u > r.ulo && u < r.uhi && v > r.vlo && v < r.vhi) || !ok)
        throw WebError("web_transform: coordinates outside the chart ranges");
      return r.map(u, v);
    }
  throw WebError("web_transform: unknown region '" + region + "'");
}

Eigen::Vector2d web_metric(const WebChart& chart, const std::string& region, double u,
                           double v) {
  for (const auto& r : chart.regions)
    if (r.label == region) {
      bool ok = true;
      if (r.ordering == +1) ok = v < u;
      if (r.ordering == -1) ok = u < v;
      if (r.ordering == +2) ok = std::fabs(v) < u;
      if (r.ordering == -2) ok = std::fabs(u) < v;
      if (!(u > r.ulo && u < r.uhi && v > r.vlo && v < r.vhi) || !ok)
        throw WebError("web_metric: coordinates outside the chart ranges");
      return r.gfac(u, v);
    }
  throw WebError("web_metric: unknown region '" + region + "'");
}

std::string web_region(const WebChart& chart, const Vec& point) {
  check_dim(point, chart.space, "web_region");
  if (chart.space.is_sphere() && sphere_residual(point, chart.space) > 1e-8)
    throw WebError("web_region: point violates the quadric constraint");
  return chart.region_of ? chart.region_of(point) : std::string("NotInDomain");
}

std::pair<double, double> region_sample(const ChartRegion& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> un(0.0, 1.0);
  for (int tries = 0; tries < 400; ++tries) {
    double u = r.ulo + (r.uhi - r.ulo) * un(rng);
    double v = r.vlo + (r.vhi - r.vlo) * un(rng);
    double du = 0.02 * (r.uhi - r.ulo);
    if (r.ordering == +1 && !(v < u - du)) continue;
    if (r.ordering == -1 && !(u < v - du)) continue;
    if (r.ordering == +2 && !(std::fabs(v) < u - du && std::fabs(v) > 0.02 * u)) continue;
    if (r.ordering == -2 && !(std::fabs(u) < v - du && std::fabs(u) > 0.02 * v)) continue;
    return {u, v};
  }
  throw WebError("region_sample: rejection sampling failed");
}

WebVerifyReport web_verify(const WebChart& chart, int samples_per_region, std::uint64_t seed) {
  WebVerifyReport rep;
  std::mt19937_64 rng(seed);
  const PseudoSpace& s = chart.space;
  Mat g = s.metric();
  for (const auto& r : chart.regions) {
    for (int k = 0; k < samples_per_region; ++k) {
      auto [u, v] = region_sample(r, rng);
      Vec p = r.map(u, v);
      rep.sphere_resid = std::max(rep.sphere_resid, sphere_residual(p, s));
      // 4th-order FD Jacobian
      double h = 1e-5 * (1.0 + std::fabs(u) + std::fabs(v));
      auto col = [&](int which) {
        auto f = [&](double du, double dv) { return r.map(u + du, v + dv); };
        if (which == 0)
          return Vec((-f(2 * h, 0) + 8 * f(h, 0) - 8 * f(-h, 0) + f(-2 * h, 0)) / (12 * h));
        return Vec((-f(0, 2 * h) + 8 * f(0, h) - 8 * f(0, -h) + f(0, -2 * h)) / (12 * h));
      };
      Mat J(s.n, 2);
      J.col(0) = col(0);
      J.col(1) = col(1);
      Mat gc = J.transpose() * g * J;
      Eigen::Vector2d want = r.gfac(u, v);
      double scale = std::max({1e-12, std::fabs(want[0]), std::fabs(want[1])});
      rep.metric_rel_err = std::max(
          rep.metric_rel_err,
          std::max({std::fabs(gc(0, 0) - want[0]), std::fabs(gc(1, 1) - want[1]),
                    std::fabs(gc(0, 1))}) /
              scale);
      // CT diagonality in the chart frame: gc^{-1} (J^T g Le J)
      SymTensor2 Lv = eval_ct(chart.ct, p, 1e-6);
      Mat Le = raise_lower(Lv, Variance::Endomorphism, s).m;
      Mat E = gc.inverse() * (J.transpose() * g * Le * J);
      double lescale = 1.0 + E.cwiseAbs().maxCoeff();
      rep.ct_offdiag =
          std::max(rep.ct_offdiag, std::max(std::fabs(E(0, 1)), std::fabs(E(1, 0))) / lescale);
      // eigenfunction inversion on the principal region
      if (chart.has_inverse && &r == &chart.regions.front()) {
        Eigenfunctions ef = eigenfunctions(chart.ct, p, 1e-8);
        if (ef.values.size() == 2) {
          auto [ui, vi] = chart.inverse(ef.values);
          rep.inverse_err = std::max(
              rep.inverse_err, std::max(std::fabs(ui - u), std::fabs(vi - v)) / (1 + std::fabs(u)));
        }
      }
      ++rep.samples;
    }
  }
  return rep;
}

std::string emit_web_svg(const WebChart& chart, int grid_density) {
  std::ostringstream os;
  const double world = chart.space.is_sphere() ? 2.2 : 2.4;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << -world << " " << -world
     << " " << 2 * world << " " << 2 * world << "\">\n";
  os << "<style>.ucurve{fill:none;stroke:#1f77b4;stroke-width:0.012}"
     << ".vcurve{fill:none;stroke:#d62728;stroke-width:0.012}"
     << ".singular{fill:none;stroke:#000;stroke-width:0.02}</style>\n";
  auto project = [&](const Vec& p) {
    double X, Y;
    if (!chart.space.is_sphere()) {
      // horizontal x, vertical t for Lorentzian planes; plain (x,y) otherwise
      if (chart.space.nu == 1) {
        X = p[1];
        Y = -p[0];
      } else {
        X = p[0];
        Y = -p[1];
      }
    } else if (chart.projection == "xy") {
      X = p[1];
      Y = -p[2];
    } else {
      X = p[1];
      Y = -p[0];
    }
    return std::make_pair(X, Y);
  };
  auto emit_polyline = [&](const std::vector<Vec>& pts, const char* cls) {
    os << "<path class=\"" << cls << "\" d=\"";
    bool first = true;
    for (const Vec& p : pts) {
      auto [X, Y] = project(p);
      if (!std::isfinite(X) || !std::isfinite(Y) || std::fabs(X) > 4 * world ||
          std::fabs(Y) > 4 * world) {
        first = true;
        continue;
      }
      os << (first ? "M" : "L") << X << " " << Y << " ";
      first = false;
    }
    os << "\"/>\n";
  };
  const int kSamples = 96;
  for (const auto& r : chart.regions) {
    os << "<g id=\"region-" << r.label << "\">\n";
    auto clamp_pair = [&](double u, double v) {
      // shrink towards the admissible wedge under ordering constraints
      if (r.ordering == +1 && v >= u) v = u - 0.02 * (r.uhi - r.ulo);
      if (r.ordering == -1 && u >= v) u = v - 0.02 * (r.vhi - r.vlo);
      if (r.ordering == +2 && std::fabs(v) >= u) v = (v >= 0 ? 1 : -1) * 0.95 * u;
      if (r.ordering == -2 && std::fabs(u) >= v) u = (u >= 0 ? 1 : -1) * 0.95 * v;
      return std::make_pair(u, v);
    };
    for (int i = 1; i <= grid_density; ++i) {
      double u = r.ulo + (r.uhi - r.ulo) * i / (grid_density + 1.0);
      std::vector<Vec> pts;
      for (int k = 0; k <= kSamples; ++k) {
        double v = r.vlo + (r.vhi - r.vlo) * k / double(kSamples);
        auto [uu, vv] = clamp_pair(u, v);
        pts.push_back(r.map(uu, vv));
      }
      emit_polyline(pts, "ucurve");
    }
    for (int i = 1; i <= grid_density; ++i) {
      double v = r.vlo + (r.vhi - r.vlo) * i / (grid_density + 1.0);
      std::vector<Vec> pts;
      for (int k = 0; k <= kSamples; ++k) {
        double u = r.ulo + (r.uhi - r.ulo) * k / double(kSamples);
        auto [uu, vv] = clamp_pair(u, v);
        pts.push_back(r.map(uu, vv));
      }
      emit_polyline(pts, "vcurve");
    }
    // singular boundary: the ordering diagonal and finite range edges
    if (r.ordering == +1 || r.ordering == -1) {
      std::vector<Vec> pts;
      double lo = std::max(r.ulo, r.vlo), hi = std::min(r.uhi, r.vhi);
      for (int k = 0; k <= kSamples; ++k) {
        double t = lo + (hi - lo) * k / double(kSamples);
        pts.push_back(r.map(r.ordering == +1 ? t : t * (1 - 1e-9),
                            r.ordering == +1 ? t * (1 - 1e-9) : t));
      }
      emit_polyline(pts, "singular");
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sepweb
