#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace foagen {

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Maps any finite azimuth into [-pi, pi).
double wrap_azimuth(double azimuth);

// A direction on the unit sphere. Azimuth is counter-clockwise from +x in the
// horizontal plane, elevation is positive towards +z.
//
// Construction wraps the azimuth into [-pi, pi) and rejects elevations outside
// [-pi/2, pi/2]; there is no meaningful wrap for elevation.
class Direction {
 public:
  Direction() = default;
  Direction(double azimuth, double elevation);

  static Direction from_degrees(double azimuth_deg, double elevation_deg);
  // v need not be normalised but must be non-zero.
  static Direction from_vector(const Eigen::Vector3d& v);

  double azimuth() const { return azimuth_; }
  double elevation() const { return elevation_; }

 private:
  double azimuth_ = 0.0;
  double elevation_ = 0.0;
};

// x = cos(el) cos(az), y = cos(el) sin(az), z = sin(el).
Eigen::Vector3d unit_vector(const Direction& d);

// Great-circle distance in radians, in [0, pi].
double angular_distance(const Direction& a, const Direction& b);

struct SphereGrid {
  std::vector<Direction> points;
  // Cached unit vectors, one per point, same order.
  std::vector<Eigen::Vector3d> vectors;

  std::size_t size() const { return points.size(); }
};

// Deterministic Fibonacci lattice: z_i = 1 - (2i + 1)/n, azimuth advancing by
// the golden angle. Requires n >= 2.
SphereGrid fibonacci_grid(std::size_t n);

// Index of the grid point closest to d (ties resolve to the lowest index).
std::size_t nearest_grid_index(const SphereGrid& grid, const Direction& d);

}  // namespace foagen
