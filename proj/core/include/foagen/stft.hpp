#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "foagen/ambisonics.hpp"
#include "foagen/tensor.hpp"

namespace foagen {

enum class Window { kHann, kRect };

// Frame m covers samples [m*hop, m*hop + win_length), zero-padded to n_fft.
// Bins F = n_fft/2 + 1.
struct StftConfig {
  int n_fft = 254;
  int win_length = 254;
  int hop = 125;
  Window window = Window::kHann;
  int frames = 128;
  double sample_rate = 16000.0;

  int bins() const { return n_fft / 2 + 1; }
  // Number of samples spanned by all frames.
  std::size_t covered_length() const;
  // Throws ConfigError on any violated invariant.
  void validate() const;

  // n_fft 254, hann 254, hop 125, 128 frames: F = 128, T = 128.
  static StftConfig hann128();
  // n_fft 254, rect 254, hop 250, 64 frames: F = 128, T = 64.
  static StftConfig paper_shape();
  // "hann-128" or "paper-shape".
  static StftConfig from_preset(const std::string& name);

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

std::string window_name(Window w);
Window parse_window(const std::string& name);

// Analysis window of length win_length. The hann variant excludes the zero
// endpoints, w[n] = sin^2(pi (n + 1) / (win + 1)), so every covered sample
// has a strictly positive squared-window sum.
std::vector<double> make_window(Window w, int win_length);

using ComplexMatrix =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// (frames x bins) complex spectrogram. Samples beyond covered_length() are
// ignored; a short signal is zero-padded.
ComplexMatrix stft(std::span<const double> signal, const StftConfig& cfg);

// Weighted overlap-add inverse. Returns `length` samples (covered_length()
// when length is 0).
std::vector<double> istft(const ComplexMatrix& spec, const StftConfig& cfg,
                          std::size_t length = 0);

// Eight planes [W_re, W_im, Y_re, Y_im, Z_re, Z_im, X_re, X_im], each T x F.
class FoaSpectrogram {
 public:
  FoaSpectrogram() = default;
  FoaSpectrogram(Tensor planes, StftConfig cfg);

  const Tensor& planes() const { return planes_; }
  Tensor& planes() { return planes_; }
  const StftConfig& config() const { return cfg_; }

 private:
  Tensor planes_;
  StftConfig cfg_;
};

FoaSpectrogram waveform_to_spec(const FoaWaveform& a, const StftConfig& cfg);
// Inverse of waveform_to_spec; `length` as in istft.
FoaWaveform spec_to_waveform(const FoaSpectrogram& spec, std::size_t length = 0);

}  // namespace foagen
