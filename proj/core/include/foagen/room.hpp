#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "foagen/ambisonics.hpp"
#include "foagen/geometry.hpp"

namespace foagen {

// Shoebox room with one broadband amplitude absorption shared by all six
// walls. absorption = 0 gives rigid walls, 1 removes every reflection.
struct RoomSpec {
  Eigen::Vector3d dimensions{30.0, 20.0, 10.0};
  double absorption = 0.5;
  int max_image_order = 6;
  double speed_of_sound = 343.0;
  double sample_rate = 16000.0;

  void validate() const;
  Eigen::Vector3d center() const { return 0.5 * dimensions; }
  bool contains(const Eigen::Vector3d& p) const;
};

// Tetrahedral array of four cardioid capsules pointing outwards.
struct ArraySpec {
  std::array<Eigen::Vector3d, 4> capsule_offsets;
  std::array<Eigen::Vector3d, 4> orientations;

  // Capsules at r * (1,1,1)/sqrt3, (1,-1,-1)/sqrt3, (-1,1,-1)/sqrt3,
  // (-1,-1,1)/sqrt3 from the array centre, each facing away from it.
  static ArraySpec tetrahedral(double radius = 0.02);
};

// Cardioid gain 0.5 (1 + cos psi) given cos psi.
inline double cardioid_gain(double cos_angle) { return 0.5 * (1.0 + cos_angle); }

// Half-width of the windowed-sinc fractional delay kernel (81 taps in total).
inline constexpr int kSincHalfWidth = 40;

struct ImageSource {
  Eigen::Vector3d position;
  int reflections = 0;
  double distance = 0.0;      // metres, image to capsule
  double delay_samples = 0.0;
  double amplitude = 0.0;     // (1/d) (1-absorption)^reflections * cardioid
};

// All images with total reflection order <= max_image_order, in a fixed
// enumeration order. Images whose amplitude is exactly zero are kept.
std::vector<ImageSource> image_sources(const RoomSpec& room, const Eigen::Vector3d& source,
                                       const Eigen::Vector3d& capsule,
                                       const Eigen::Vector3d& orientation);

// Impulse response from source to one capsule. Each image contributes an
// 81-tap hann-windowed sinc centred on its fractional delay; summation runs in
// image enumeration order.
std::vector<double> image_source_rir(const RoomSpec& room, const Eigen::Vector3d& source,
                                     const Eigen::Vector3d& capsule,
                                     const Eigen::Vector3d& orientation);

struct RirSet {
  std::array<std::vector<double>, 4> responses;
  double sample_rate = 16000.0;
};

// RIRs for all four capsules of an array centred at array_center, padded to a
// common length.
RirSet simulate_rirs(const RoomSpec& room, const ArraySpec& array,
                     const Eigen::Vector3d& array_center, const Eigen::Vector3d& source);

// Linear convolution truncated to the first `length` samples.
std::vector<double> convolve(std::span<const double> x, std::span<const double> h,
                             std::size_t length);

// Frequency-independent A-format to B-format matrix: the pseudo-inverse of the
// 4x4 matrix whose row j is 0.5 [1, n_y, n_z, n_x] for capsule orientation n.
Eigen::Matrix4d a_to_b_matrix(const ArraySpec& array);

FoaWaveform a_to_b(const std::array<std::vector<double>, 4>& capsule_signals,
                   const ArraySpec& array, double sample_rate);

// Places the array at the room centre and the source `distance` metres away
// towards d, convolves, converts to FOA and crops to mono.size() samples.
FoaWaveform simulate_baseline(std::span<const double> mono, const Direction& d,
                              const RoomSpec& room, const ArraySpec& array,
                              double distance = 1.0);

}  // namespace foagen
