#pragma once

#include <filesystem>
#include <vector>

#include "foagen/ambisonics.hpp"

namespace foagen {

struct WavData {
  double sample_rate = 16000.0;
  // One vector per channel, equal lengths.
  std::vector<std::vector<double>> channels;
};

// Reads RIFF/WAVE with IEEE float32 samples (plain or extensible format tag).
// 16-bit integer PCM is also accepted and scaled to [-1, 1).
WavData read_wav(const std::filesystem::path& path);

// Writes IEEE float32 samples. Channels must have equal lengths.
void write_wav(const std::filesystem::path& path, const WavData& wav);

// Four-channel files in ACN order. Throws ConfigError on any other channel count.
FoaWaveform read_foa_wav(const std::filesystem::path& path);
void write_foa_wav(const std::filesystem::path& path, const FoaWaveform& a);

}  // namespace foagen
