#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "foagen/ambisonics.hpp"
#include "foagen/geometry.hpp"

namespace foagen {

// Beam weighting of the first-order decoder. kBasic gives the (1 + cos g)
// in-phase pattern; kMaxRe scales the dipole terms by 1/sqrt(3).
enum class DecodeWeighting { kBasic, kMaxRe };

DecodeWeighting parse_weighting(const std::string& name);
std::string weighting_name(DecodeWeighting w);

inline constexpr std::size_t kDefaultGridSize = 900;

struct DoaEstimate {
  Direction direction;
  std::size_t grid_index = 0;
  std::vector<double> power_map;
  // Set when the power map is flat (omnidirectional input).
  bool ambiguous = false;
};

// Steered power P(d) = sum_t y_d(t)^2 with y_d = w . a(t), evaluated through
// the 4x4 channel covariance. Throws NoSignalError on all-zero input.
DoaEstimate estimate_doa(const FoaWaveform& a, const SphereGrid& grid,
                         DecodeWeighting weighting = DecodeWeighting::kBasic);

// Convenience overload on the default 900-point Fibonacci grid.
DoaEstimate estimate_doa(const FoaWaveform& a);

const SphereGrid& default_grid();

// Angular distance in degrees, in [0, 180].
double doa_error(const Direction& est, const Direction& ref);

}  // namespace foagen
