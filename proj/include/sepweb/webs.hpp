#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sepweb/concircular.hpp"
#include "sepweb/jacobi.hpp"

namespace sepweb {

struct WebError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One coordinate patch of a separable web, with its verified metric factors.
struct ChartRegion {
  std::string label;
  std::function<Vec(double, double)> map;               // (u,v) -> ambient point
  std::function<Eigen::Vector2d(double, double)> gfac;  // diagonal metric factors
  double ulo = 0, uhi = 1, vlo = 0, vhi = 1;            // sampling caps (open box)
  int ordering = 0;  // 0 none, +1 require v<u, -1 require u<v, +2 require |v|<u
};

struct WebChart {
  std::string case_id;   // e.g. "E21.case4"
  std::string title;     // e.g. "Real elliptic coordinates of Type II"
  PseudoSpace space;
  std::map<std::string, double> params;
  ConcircularTensor ct;
  std::vector<ChartRegion> regions;
  bool has_inverse = false;
  // ascending intrinsic eigenvalues -> principal-region (u,v)
  std::function<std::pair<double, double>(const std::vector<double>&)> inverse;
  // classifies an ambient point: region label, "SingularSet" or "NotInDomain"
  std::function<std::string(const Vec&)> region_of;
  std::string projection = "xy";  // plot plane
};

std::vector<std::string> catalog_cases(const std::string& space_name);
WebChart make_chart(const std::string& case_id,
                    const std::map<std::string, double>& params = {});
WebChart ads2_swap(const WebChart& ds2_chart);

Vec web_transform(const WebChart& chart, const std::string& region, double u, double v);
Eigen::Vector2d web_metric(const WebChart& chart, const std::string& region, double u,
                           double v);
std::string web_region(const WebChart& chart, const Vec& point);

// interior sample honoring the region's ordering constraint
std::pair<double, double> region_sample(const ChartRegion& r, std::mt19937_64& rng);

struct WebVerifyReport {
  double metric_rel_err = 0.0;
  double ct_offdiag = 0.0;
  double sphere_resid = 0.0;
  double inverse_err = 0.0;
  int samples = 0;
};

// finite-difference pullback vs stored factors, CT diagonality in the chart
// frame, quadric constraint, and (when available) eigenfunction inversion
WebVerifyReport web_verify(const WebChart& chart, int samples_per_region,
                           std::uint64_t seed);

std::string emit_web_svg(const WebChart& chart, int grid_density);

}  // namespace sepweb
