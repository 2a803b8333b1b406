#include "foagen/ambisonics.hpp"

#include <cmath>
#include <utility>

#include "foagen/error.hpp"

namespace foagen {

std::array<double, 4> foa_gains(const Direction& d) {
  const double ce = std::cos(d.elevation());
  return {1.0, std::sin(d.azimuth()) * ce, std::sin(d.elevation()), std::cos(d.azimuth()) * ce};
}

FoaWaveform::FoaWaveform(std::array<std::vector<double>, 4> channels, double sample_rate)
    : channels_(std::move(channels)), sample_rate_(sample_rate) {
  if (!(sample_rate_ > 0.0)) throw ConfigError("sample rate must be positive");
  for (const auto& ch : channels_) {
    if (ch.size() != channels_[0].size()) throw ConfigError("FOA channels differ in length");
  }
}

FoaWaveform::FoaWaveform(std::size_t length, double sample_rate)
    : FoaWaveform({std::vector<double>(length), std::vector<double>(length),
                   std::vector<double>(length), std::vector<double>(length)},
                  sample_rate) {}

FoaWaveform encode_foa(std::span<const double> mono, const Direction& d, double sample_rate) {
  if (mono.empty()) throw ConfigError("empty signal");
  const auto gains = foa_gains(d);
  FoaWaveform out(mono.size(), sample_rate);
  for (int c = 0; c < kFoaChannels; ++c) {
    auto& ch = out.channel(c);
    for (std::size_t i = 0; i < mono.size(); ++i) ch[i] = gains[c] * mono[i];
  }
  return out;
}

}  // namespace foagen
