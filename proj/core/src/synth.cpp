#include "foagen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "foagen/error.hpp"
#include "foagen/geometry.hpp"

namespace foagen {

std::string generator_name(Generator g) {
  switch (g) {
    case Generator::kSine: return "sine";
    case Generator::kChirp: return "chirp";
    case Generator::kNoiseBurst: return "noise_burst";
    case Generator::kToneBurstTrain: return "tone_burst_train";
  }
  return "unknown";
}

void SynthClassSpec::validate(double sample_rate) const {
  const double nyq = sample_rate / 2.0;
  const double top = jitter ? nyq / (1.0 + kFreqJitter) : nyq;
  if (class_id < 0) throw ConfigError("synth: class id must be >= 0");
  switch (generator) {
    case Generator::kSine:
    case Generator::kToneBurstTrain:
      if (!(f0 > 0.0 && f0 < top)) throw ConfigError("synth: frequency outside (0, Nyquist)");
      if (generator == Generator::kToneBurstTrain && !(rate > 0.0 && rate <= 100.0))
        throw ConfigError("synth: burst rate must be in (0, 100] Hz");
      break;
    case Generator::kChirp:
      if (!(f_lo > 0.0 && f_hi > f_lo && f_hi < top))
        throw ConfigError("synth: chirp needs 0 < f_lo < f_hi < Nyquist");
      break;
    case Generator::kNoiseBurst:
      if (!(decay > 0.0)) throw ConfigError("synth: decay must be > 0");
      if (!(cutoff > 0.0 && cutoff < nyq)) throw ConfigError("synth: cutoff outside (0, Nyquist)");
      break;
  }
}

std::vector<double> lowpass_fir(double cutoff, double sample_rate, int taps) {
  if (taps < 1 || taps % 2 == 0) throw ConfigError("lowpass_fir: taps must be odd");
  if (!(cutoff > 0.0 && cutoff < sample_rate / 2.0))
    throw ConfigError("lowpass_fir: cutoff outside (0, Nyquist)");
  const int half = taps / 2;
  const double fc = cutoff / sample_rate;
  std::vector<double> h(taps);
  double sum = 0.0;
  for (int i = 0; i < taps; ++i) {
    const int k = i - half;
    const double sinc = k == 0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * k) / (kPi * k);
    const double w = 0.5 * (1.0 + std::cos(kPi * k / (half + 1)));
    sum += (h[i] = sinc * w);
  }
  for (double& v : h) v /= sum;
  return h;
}

std::vector<double> apply_fir(const std::vector<double>& x, const std::vector<double>& h) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(h.size() / 2);
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(h.size()); ++k) {
      const std::ptrdiff_t j = i + half - k;
      if (j >= 0 && j < n) acc += h[k] * x[j];
    }
    y[i] = acc;
  }
  return y;
}

std::vector<double> bandlimited_impulse(std::size_t n, double cutoff, double sample_rate) {
  if (n == 0) throw ConfigError("bandlimited_impulse: empty length");
  std::vector<double> x(n, 0.0);
  x[0] = 1.0;
  return apply_fir(x, lowpass_fir(cutoff, sample_rate));
}

std::vector<double> synth_mono(const SynthClassSpec& spec, std::uint64_t seed, double sample_rate,
                               double duration) {
  spec.validate(sample_rate);
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  if (n == 0) throw ConfigError("synth: duration too short");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  double fscale = 1.0, gain = 1.0;
  std::size_t onset = 0;
  if (spec.jitter) {
    fscale = 1.0 + kFreqJitter * u(rng);
    gain = std::pow(10.0, kAmpJitterDb * u(rng) / 20.0);
    const double onset_s = kOnsetJitterSec + kOnsetJitterSec * u(rng);
    onset = std::min(n - 1, static_cast<std::size_t>(std::llround(onset_s * sample_rate)));
  }

  std::vector<double> x(n, 0.0);
  const double two_pi = 2.0 * kPi;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = onset; i < n; ++i) {
    const double t = static_cast<double>(i - onset) / sample_rate;
    switch (spec.generator) {
      case Generator::kSine:
        x[i] = std::sin(two_pi * spec.f0 * fscale * t);
        break;
      case Generator::kChirp: {
        // Linear sweep over the full clip length.
        const double lo = spec.f_lo * fscale, hi = spec.f_hi * fscale;
        const double k = (hi - lo) / duration;
        x[i] = std::sin(two_pi * (lo * t + 0.5 * k * t * t));
        break;
      }
      case Generator::kNoiseBurst:
        x[i] = normal(rng) * std::exp(-t / spec.decay);
        break;
      case Generator::kToneBurstTrain: {
        const double period = 1.0 / spec.rate;
        const double burst = 0.5 * period;
        const double phase = std::fmod(t, period);
        const double env = phase < burst ? std::pow(std::sin(kPi * phase / burst), 2) : 0.0;
        x[i] = env * std::sin(two_pi * spec.f0 * fscale * t);
        break;
      }
    }
  }
  if (spec.generator == Generator::kNoiseBurst)
    x = apply_fir(x, lowpass_fir(spec.cutoff, sample_rate));
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) throw ConfigError("synth: generated silence");
  const double s = kSynthPeak / peak * gain;
  for (double& v : x) v *= s;
  return x;
}

std::vector<SynthClassSpec> default_classes(int n, bool jitter) {
  if (n < 1) throw ConfigError("synth: need at least one class");
  if (n > 16) throw ConfigError("synth: at most 16 default classes");
  std::vector<SynthClassSpec> out;
  for (int c = 0; c < n; ++c) {
    SynthClassSpec s;
    s.class_id = c;
    s.jitter = jitter;
    const int round = c / 4;
    switch (c % 4) {
      case 0:
        s.generator = Generator::kSine;
        s.f0 = 440.0 * std::pow(2.0, round);
        break;
      case 1:
        s.generator = Generator::kChirp;
        s.f_lo = 200.0 * (round + 1);
        s.f_hi = 2000.0 + 500.0 * round;
        break;
      case 2:
        s.generator = Generator::kNoiseBurst;
        s.decay = 0.15 / (round + 1);
        s.cutoff = 3500.0 - 500.0 * round;
        break;
      case 3:
        s.generator = Generator::kToneBurstTrain;
        s.f0 = 2500.0 + 250.0 * round;
        s.rate = 8.0;
        break;
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace foagen
