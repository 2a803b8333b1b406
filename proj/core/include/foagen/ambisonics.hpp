#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "foagen/geometry.hpp"

namespace foagen {

// ACN channel order.
enum FoaChannel : int { kW = 0, kY = 1, kZ = 2, kX = 3 };
inline constexpr int kFoaChannels = 4;

// First-order SN3D gains (W, Y, Z, X) for a plane wave from d.
std::array<double, 4> foa_gains(const Direction& d);

// Four equal-length channels in ACN order W, Y, Z, X.
class FoaWaveform {
 public:
  FoaWaveform() = default;
  FoaWaveform(std::array<std::vector<double>, 4> channels, double sample_rate);
  // Silent waveform of the given length.
  FoaWaveform(std::size_t length, double sample_rate);

  std::size_t length() const { return channels_[0].size(); }
  double sample_rate() const { return sample_rate_; }

  const std::vector<double>& channel(int c) const { return channels_.at(c); }
  std::vector<double>& channel(int c) { return channels_.at(c); }
  const std::array<std::vector<double>, 4>& channels() const { return channels_; }

 private:
  std::array<std::vector<double>, 4> channels_;
  double sample_rate_ = 16000.0;
};

// Pans a mono signal to d. Each channel is gain * mono, sample for sample.
FoaWaveform encode_foa(std::span<const double> mono, const Direction& d,
                       double sample_rate = 16000.0);

}  // namespace foagen
