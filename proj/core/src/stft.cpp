#include "foagen/stft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "foagen/error.hpp"

namespace foagen {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans live for the program lifetime.
struct RealFftPlans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

const RealFftPlans& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, RealFftPlans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> real(n);
  std::vector<fftw_complex> cplx(n / 2 + 1);
  RealFftPlans p;
  p.forward = fftw_plan_dft_r2c_1d(n, real.data(), cplx.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.inverse = fftw_plan_dft_c2r_1d(n, cplx.data(), real.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
  if (!p.forward || !p.inverse) throw Error("FFTW planning failed for n=" + std::to_string(n));
  return cache.emplace(n, p).first->second;
}

}  // namespace

std::size_t StftConfig::covered_length() const {
  return static_cast<std::size_t>(frames - 1) * hop + win_length;
}

void StftConfig::validate() const {
  if (n_fft < 2) throw ConfigError("stft: n_fft must be >= 2");
  if (win_length < 1 || win_length > n_fft) throw ConfigError("stft: win_length must be in [1, n_fft]");
  if (hop < 1) throw ConfigError("stft: hop must be >= 1");
  // With hop > win_length some samples fall between frames and the squared
  // window sum is zero there.
  if (hop > win_length) throw ConfigError("stft: hop must not exceed win_length");
  if (frames < 1) throw ConfigError("stft: frames must be >= 1");
  if (!(sample_rate > 0.0)) throw ConfigError("stft: sample_rate must be positive");
}

StftConfig StftConfig::hann128() { return StftConfig{254, 254, 125, Window::kHann, 128, 16000.0}; }

StftConfig StftConfig::paper_shape() { return StftConfig{254, 254, 250, Window::kRect, 64, 16000.0}; }

StftConfig StftConfig::from_preset(const std::string& name) {
  if (name == "hann-128") return hann128();
  if (name == "paper-shape") return paper_shape();
  throw ConfigError("unknown stft preset '" + name + "' (expected hann-128 or paper-shape)");
}

std::string window_name(Window w) { return w == Window::kHann ? "hann" : "rect"; }

Window parse_window(const std::string& name) {
  if (name == "hann") return Window::kHann;
  if (name == "rect") return Window::kRect;
  throw ConfigError("unknown window '" + name + "' (expected hann or rect)");
}

std::vector<double> make_window(Window w, int win_length) {
  std::vector<double> win(win_length, 1.0);
  if (w == Window::kHann) {
    for (int n = 0; n < win_length; ++n) {
      const double s = std::sin(kPi * (n + 1) / (win_length + 1.0));
      win[n] = s * s;
    }
  }
  return win;
}

ComplexMatrix stft(std::span<const double> signal, const StftConfig& cfg) {
  cfg.validate();
  if (signal.empty()) throw ConfigError("stft: empty signal");
  const auto& plans = plans_for(cfg.n_fft);
  const auto window = make_window(cfg.window, cfg.win_length);
  const int bins = cfg.bins();

  ComplexMatrix out(cfg.frames, bins);
  std::vector<double> frame(cfg.n_fft);
  std::vector<fftw_complex> spectrum(bins);
  for (int m = 0; m < cfg.frames; ++m) {
    std::fill(frame.begin(), frame.end(), 0.0);
    const std::size_t start = static_cast<std::size_t>(m) * cfg.hop;
    for (int n = 0; n < cfg.win_length; ++n) {
      const std::size_t idx = start + n;
      if (idx < signal.size()) frame[n] = signal[idx] * window[n];
    }
    fftw_execute_dft_r2c(plans.forward, frame.data(), spectrum.data());
    for (int k = 0; k < bins; ++k) out(m, k) = {spectrum[k][0], spectrum[k][1]};
  }
  return out;
}

std::vector<double> istft(const ComplexMatrix& spec, const StftConfig& cfg, std::size_t length) {
  cfg.validate();
  if (spec.rows() != cfg.frames || spec.cols() != cfg.bins()) {
    throw ConfigError("istft: spectrogram is " + std::to_string(spec.rows()) + "x" +
                      std::to_string(spec.cols()) + ", config expects " +
                      std::to_string(cfg.frames) + "x" + std::to_string(cfg.bins()));
  }
  const auto& plans = plans_for(cfg.n_fft);
  const auto window = make_window(cfg.window, cfg.win_length);
  const std::size_t covered = cfg.covered_length();
  std::vector<double> acc(covered, 0.0);
  std::vector<double> norm(covered, 0.0);

  std::vector<fftw_complex> spectrum(cfg.bins());
  std::vector<double> frame(cfg.n_fft);
  const double scale = 1.0 / cfg.n_fft;
  for (int m = 0; m < cfg.frames; ++m) {
    for (int k = 0; k < cfg.bins(); ++k) {
      spectrum[k][0] = spec(m, k).real();
      spectrum[k][1] = spec(m, k).imag();
    }
    fftw_execute_dft_c2r(plans.inverse, spectrum.data(), frame.data());
    const std::size_t start = static_cast<std::size_t>(m) * cfg.hop;
    for (int n = 0; n < cfg.win_length; ++n) {
      acc[start + n] += frame[n] * scale * window[n];
      norm[start + n] += window[n] * window[n];
    }
  }
  if (length == 0) length = covered;
  std::vector<double> out(length, 0.0);
  const std::size_t n_out = std::min(length, covered);
  for (std::size_t i = 0; i < n_out; ++i) out[i] = acc[i] / norm[i];
  return out;
}

FoaSpectrogram::FoaSpectrogram(Tensor planes, StftConfig cfg)
    : planes_(std::move(planes)), cfg_(cfg) {
  if (planes_.channels() != 2 * kFoaChannels || planes_.frames() != cfg_.frames ||
      planes_.bins() != cfg_.bins()) {
    throw ConfigError("FOA spectrogram shape " + shape_string(planes_.shape()) +
                      " does not match (8," + std::to_string(cfg_.frames) + "," +
                      std::to_string(cfg_.bins()) + ")");
  }
}

FoaSpectrogram waveform_to_spec(const FoaWaveform& a, const StftConfig& cfg) {
  cfg.validate();
  Tensor planes({2 * kFoaChannels, cfg.frames, cfg.bins()});
  for (int c = 0; c < kFoaChannels; ++c) {
    const ComplexMatrix s = stft(a.channel(c), cfg);
    for (int t = 0; t < cfg.frames; ++t) {
      for (int f = 0; f < cfg.bins(); ++f) {
        planes(2 * c, t, f) = s(t, f).real();
        planes(2 * c + 1, t, f) = s(t, f).imag();
      }
    }
  }
  return FoaSpectrogram(std::move(planes), cfg);
}

FoaWaveform spec_to_waveform(const FoaSpectrogram& spec, std::size_t length) {
  const auto& cfg = spec.config();
  const auto& planes = spec.planes();
  std::array<std::vector<double>, 4> channels;
  ComplexMatrix s(cfg.frames, cfg.bins());
  for (int c = 0; c < kFoaChannels; ++c) {
    for (int t = 0; t < cfg.frames; ++t) {
      for (int f = 0; f < cfg.bins(); ++f) s(t, f) = {planes(2 * c, t, f), planes(2 * c + 1, t, f)};
    }
    channels[c] = istft(s, cfg, length);
  }
  return FoaWaveform(std::move(channels), cfg.sample_rate);
}

}  // namespace foagen
