#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace foagen {

enum class Generator { kSine, kChirp, kNoiseBurst, kToneBurstTrain };

std::string generator_name(Generator g);

struct SynthClassSpec {
  int class_id = 0;
  Generator generator = Generator::kSine;
  double f0 = 440.0;        // sine frequency; tone-burst carrier
  double f_lo = 200.0;      // chirp start
  double f_hi = 2000.0;     // chirp end
  double decay = 0.15;      // noise-burst envelope time constant, seconds
  double cutoff = 3500.0;   // noise-burst low-pass cutoff, Hz
  double rate = 8.0;        // tone bursts per second
  bool jitter = true;

  void validate(double sample_rate = 16000.0) const;
};

inline constexpr double kSynthPeak = 0.5;
inline constexpr double kFreqJitter = 0.10;       // +-10 %
inline constexpr double kAmpJitterDb = 3.0;       // +-3 dB
inline constexpr double kOnsetJitterSec = 0.100;  // +-100 ms around a 100 ms nominal onset

// Windowed-sinc (hann) low-pass FIR with `taps` coefficients (odd), unit DC
// gain.
std::vector<double> lowpass_fir(double cutoff, double sample_rate, int taps = 129);

// Zero-phase application of a symmetric FIR; output has the input length.
std::vector<double> apply_fir(const std::vector<double>& x, const std::vector<double>& h);

// Unit impulse at sample 0 low-passed at `cutoff`, length n.
std::vector<double> bandlimited_impulse(std::size_t n, double cutoff, double sample_rate);

// Deterministic per seed. Peak is normalised to 0.5 before the amplitude
// jitter is applied, so jittered clips peak within 0.5 * 10^(+-3/20).
std::vector<double> synth_mono(const SynthClassSpec& spec, std::uint64_t seed,
                               double sample_rate = 16000.0, double duration = 1.0);

// Built-in, spectrally separated class set: sine, chirp, noise burst, tone
// burst train, then further sines and tone trains at other frequencies.
std::vector<SynthClassSpec> default_classes(int n, bool jitter = true);

}  // namespace foagen
