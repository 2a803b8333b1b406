#include "foagen/room.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "foagen/error.hpp"

namespace foagen {

void RoomSpec::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(dimensions[i] > 0.0) || !std::isfinite(dimensions[i])) {
      throw ConfigError("room dimensions must all be positive");
    }
  }
  if (!(absorption >= 0.0 && absorption <= 1.0)) throw ConfigError("absorption must be in [0, 1]");
  if (max_image_order < 0) throw ConfigError("max_image_order must be >= 0");
  if (!(speed_of_sound > 0.0)) throw ConfigError("speed_of_sound must be positive");
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be positive");
}

bool RoomSpec::contains(const Eigen::Vector3d& p) const {
  for (int i = 0; i < 3; ++i) {
    if (!(p[i] > 0.0 && p[i] < dimensions[i])) return false;
  }
  return true;
}

ArraySpec ArraySpec::tetrahedral(double radius) {
  if (!(radius > 0.0)) throw ConfigError("array radius must be positive");
  const double s = 1.0 / std::sqrt(3.0);
  ArraySpec a;
  a.orientations = {Eigen::Vector3d(s, s, s), Eigen::Vector3d(s, -s, -s),
                    Eigen::Vector3d(-s, s, -s), Eigen::Vector3d(-s, -s, s)};
  for (int j = 0; j < 4; ++j) a.capsule_offsets[j] = radius * a.orientations[j];
  return a;
}

std::vector<ImageSource> image_sources(const RoomSpec& room, const Eigen::Vector3d& source,
                                       const Eigen::Vector3d& capsule,
                                       const Eigen::Vector3d& orientation) {
  room.validate();
  if (!room.contains(source)) throw ConfigError("source position is outside the room");
  if (!room.contains(capsule)) throw ConfigError("capsule position is outside the room");

  const int order = room.max_image_order;
  const double reflection = 1.0 - room.absorption;
  const Eigen::Vector3d axis = orientation.normalized();
  const int n_max = (order + 1) / 2;

  std::vector<ImageSource> images;
  for (int nx = -n_max; nx <= n_max; ++nx) {
    for (int ny = -n_max; ny <= n_max; ++ny) {
      for (int nz = -n_max; nz <= n_max; ++nz) {
        const std::array<int, 3> n{nx, ny, nz};
        for (int mask = 0; mask < 8; ++mask) {
          // u = 1 mirrors the source through the wall at coordinate 0 before
          // translating by 2 n L.
          const std::array<int, 3> u{mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
          int refl = 0;
          Eigen::Vector3d pos;
          for (int i = 0; i < 3; ++i) {
            refl += std::abs(2 * n[i] - u[i]);
            pos[i] = (1 - 2 * u[i]) * source[i] + 2.0 * n[i] * room.dimensions[i];
          }
          if (refl > order) continue;
          const Eigen::Vector3d path = pos - capsule;
          const double dist = path.norm();
          ImageSource img;
          img.position = pos;
          img.reflections = refl;
          img.distance = dist;
          img.delay_samples = dist / room.speed_of_sound * room.sample_rate;
          const double cos_angle = path.dot(axis) / dist;
          img.amplitude = std::pow(reflection, refl) * cardioid_gain(cos_angle) / dist;
          images.push_back(img);
        }
      }
    }
  }
  return images;
}

namespace {

double windowed_sinc(double x) {
  constexpr double kWidth = kSincHalfWidth + 1.0;
  if (std::abs(x) >= kWidth) return 0.0;
  const double window = 0.5 * (1.0 + std::cos(kPi * x / kWidth));
  const double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
  return window * sinc;
}

}  // namespace

std::vector<double> image_source_rir(const RoomSpec& room, const Eigen::Vector3d& source,
                                     const Eigen::Vector3d& capsule,
                                     const Eigen::Vector3d& orientation) {
  const auto images = image_sources(room, source, capsule, orientation);
  double max_delay = 0.0;
  for (const auto& img : images) max_delay = std::max(max_delay, img.delay_samples);
  const auto length = static_cast<std::size_t>(std::ceil(max_delay)) + kSincHalfWidth + 1;

  std::vector<double> rir(length, 0.0);
  for (const auto& img : images) {
    if (img.amplitude == 0.0) continue;
    const auto centre = static_cast<long>(std::lround(img.delay_samples));
    for (long n = centre - kSincHalfWidth; n <= centre + kSincHalfWidth; ++n) {
      if (n < 0 || n >= static_cast<long>(length)) continue;
      rir[n] += img.amplitude * windowed_sinc(static_cast<double>(n) - img.delay_samples);
    }
  }
  return rir;
}

RirSet simulate_rirs(const RoomSpec& room, const ArraySpec& array,
                     const Eigen::Vector3d& array_center, const Eigen::Vector3d& source) {
  RirSet set;
  set.sample_rate = room.sample_rate;
  std::size_t longest = 0;
  for (int j = 0; j < 4; ++j) {
    set.responses[j] = image_source_rir(room, source, array_center + array.capsule_offsets[j],
                                        array.orientations[j]);
    longest = std::max(longest, set.responses[j].size());
  }
  for (auto& r : set.responses) r.resize(longest, 0.0);
  return set;
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h,
                             std::size_t length) {
  std::vector<double> y(length, 0.0);
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double hk = h[k];
    if (hk == 0.0) continue;
    for (std::size_t n = k; n < length && n - k < x.size(); ++n) y[n] += hk * x[n - k];
  }
  return y;
}

Eigen::Matrix4d a_to_b_matrix(const ArraySpec& array) {
  Eigen::Matrix4d pattern;
  for (int j = 0; j < 4; ++j) {
    const Eigen::Vector3d& n = array.orientations[j];
    pattern.row(j) << 0.5, 0.5 * n.y(), 0.5 * n.z(), 0.5 * n.x();
  }
  return pattern.completeOrthogonalDecomposition().pseudoInverse();
}

FoaWaveform a_to_b(const std::array<std::vector<double>, 4>& capsule_signals,
                   const ArraySpec& array, double sample_rate) {
  const std::size_t len = capsule_signals[0].size();
  for (const auto& s : capsule_signals) {
    if (s.size() != len) throw ConfigError("a_to_b: capsule signals differ in length");
  }
  const Eigen::Matrix4d m = a_to_b_matrix(array);
  FoaWaveform out(len, sample_rate);
  for (std::size_t i = 0; i < len; ++i) {
    for (int c = 0; c < 4; ++c) {
      double acc = 0.0;
      for (int j = 0; j < 4; ++j) acc += m(c, j) * capsule_signals[j][i];
      out.channel(c)[i] = acc;
    }
  }
  return out;
}

FoaWaveform simulate_baseline(std::span<const double> mono, const Direction& d,
                              const RoomSpec& room, const ArraySpec& array, double distance) {
  if (mono.empty()) throw ConfigError("empty signal");
  if (!(distance > 0.0)) throw ConfigError("source distance must be positive");
  const Eigen::Vector3d center = room.center();
  const Eigen::Vector3d source = center + distance * unit_vector(d);
  const RirSet rirs = simulate_rirs(room, array, center, source);

  std::array<std::vector<double>, 4> capsules;
  for (int j = 0; j < 4; ++j) capsules[j] = convolve(mono, rirs.responses[j], mono.size());
  return a_to_b(capsules, array, room.sample_rate);
}

}  // namespace foagen
