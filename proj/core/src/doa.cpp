#include "foagen/doa.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "foagen/error.hpp"

namespace foagen {

DecodeWeighting parse_weighting(const std::string& name) {
  if (name == "basic") return DecodeWeighting::kBasic;
  if (name == "max-re") return DecodeWeighting::kMaxRe;
  throw ConfigError("unknown decode weighting '" + name + "' (expected basic or max-re)");
}

std::string weighting_name(DecodeWeighting w) {
  return w == DecodeWeighting::kBasic ? "basic" : "max-re";
}

DoaEstimate estimate_doa(const FoaWaveform& a, const SphereGrid& grid, DecodeWeighting weighting) {
  if (grid.size() == 0) throw ConfigError("estimate_doa: empty grid");
  const std::size_t n = a.length();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  for (std::size_t t = 0; t < n; ++t) {
    const Eigen::Vector4d s(a.channel(kW)[t], a.channel(kY)[t], a.channel(kZ)[t],
                            a.channel(kX)[t]);
    cov.noalias() += s * s.transpose();
  }
  if (!cov.allFinite()) throw FormatError("estimate_doa: non-finite samples");
  if (cov.trace() == 0.0) throw NoSignalError();

  const double dipole = weighting == DecodeWeighting::kBasic ? 1.0 : 1.0 / std::sqrt(3.0);
  DoaEstimate est;
  est.power_map.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto g = foa_gains(grid.points[i]);
    const Eigen::Vector4d w(g[kW], dipole * g[kY], dipole * g[kZ], dipole * g[kX]);
    est.power_map[i] = std::max(0.0, w.dot(cov * w));
  }
  const auto [lo, hi] = std::minmax_element(est.power_map.begin(), est.power_map.end());
  est.grid_index = static_cast<std::size_t>(hi - est.power_map.begin());
  est.direction = grid.points[est.grid_index];
  est.ambiguous = (*hi - *lo) <= 1e-9 * *hi;
  return est;
}

const SphereGrid& default_grid() {
  static const SphereGrid grid = fibonacci_grid(kDefaultGridSize);
  return grid;
}

DoaEstimate estimate_doa(const FoaWaveform& a) { return estimate_doa(a, default_grid()); }

double doa_error(const Direction& est, const Direction& ref) {
  return std::clamp(rad_to_deg(angular_distance(est, ref)), 0.0, 180.0);
}

}  // namespace foagen
