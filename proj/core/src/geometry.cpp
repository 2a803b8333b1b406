#include "foagen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "foagen/error.hpp"

namespace foagen {

double wrap_azimuth(double azimuth) {
  if (!std::isfinite(azimuth)) throw ConfigError("azimuth is not finite");
  double wrapped = azimuth - 2.0 * kPi * std::floor((azimuth + kPi) / (2.0 * kPi));
  // floor() can land exactly on +pi through rounding.
  if (wrapped >= kPi) wrapped -= 2.0 * kPi;
  if (wrapped < -kPi) wrapped = -kPi;
  return wrapped;
}

Direction::Direction(double azimuth, double elevation)
    : azimuth_(wrap_azimuth(azimuth)), elevation_(elevation) {
  if (!std::isfinite(elevation) || elevation < -kPi / 2 || elevation > kPi / 2) {
    throw ConfigError("elevation out of range [-pi/2, pi/2]: " + std::to_string(elevation));
  }
}

Direction Direction::from_degrees(double azimuth_deg, double elevation_deg) {
  return Direction(deg_to_rad(azimuth_deg), deg_to_rad(elevation_deg));
}

Direction Direction::from_vector(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("direction vector must be non-zero");
  const double z = std::clamp(v.z() / n, -1.0, 1.0);
  return Direction(std::atan2(v.y(), v.x()), std::asin(z));
}

Eigen::Vector3d unit_vector(const Direction& d) {
  const double ce = std::cos(d.elevation());
  return {ce * std::cos(d.azimuth()), ce * std::sin(d.azimuth()), std::sin(d.elevation())};
}

double angular_distance(const Direction& a, const Direction& b) {
  const Eigen::Vector3d u = unit_vector(a), v = unit_vector(b);
  return 2.0 * std::atan2((u - v).norm(), (u + v).norm());
}

SphereGrid fibonacci_grid(std::size_t n) {
  if (n < 2) throw ConfigError("sphere grid needs at least 2 points");
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  SphereGrid grid;
  grid.points.reserve(n);
  grid.vectors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double azimuth = std::fmod(static_cast<double>(i) * golden_angle, 2.0 * kPi);
    Direction d(azimuth, std::asin(z));
    grid.vectors.push_back(unit_vector(d));
    grid.points.push_back(d);
  }
  return grid;
}

std::size_t nearest_grid_index(const SphereGrid& grid, const Direction& d) {
  const Eigen::Vector3d v = unit_vector(d);
  std::size_t best = 0;
  double best_dot = -2.0;
  for (std::size_t i = 0; i < grid.vectors.size(); ++i) {
    const double dot = grid.vectors[i].dot(v);
    if (dot > best_dot) {
      best_dot = dot;
      best = i;
    }
  }
  return best;
}

}  // namespace foagen
