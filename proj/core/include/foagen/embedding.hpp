#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace foagen {

// Triangular mel filterbank (HTK mel scale) over an rfft of size n_fft.
// Rows are bands, columns are bins.
Eigen::MatrixXd mel_filterbank(int bands, int n_fft, double sample_rate, double f_min = 0.0,
                               double f_max = 0.0);

struct MelConfig {
  int bands = 32;
  int n_fft = 512;
  int hop = 256;
  double sample_rate = 16000.0;
  double floor = 1e-10;
};

// Log-mel energies, one row per frame. Signals shorter than n_fft are
// zero-padded to a single frame.
Eigen::MatrixXd log_mel(std::span<const double> signal, const MelConfig& cfg);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd embed(std::span<const double> mono) const = 0;
};

// Per-band mean and standard deviation of log-mel energies: 2 * bands values.
class MelStatsEmbedder : public Embedder {
 public:
  explicit MelStatsEmbedder(MelConfig cfg = {});
  int dim() const override { return 2 * cfg_.bands; }
  Eigen::VectorXd embed(std::span<const double> mono) const override;

 private:
  MelConfig cfg_;
  Eigen::MatrixXd fb_;
};

// Embedder behind FD (32 bands) and the FAD stand-in (16 bands).
MelStatsEmbedder fd_embedder();
MelStatsEmbedder fad_embedder();

// Nearest-centroid classifier on level-normalised mean log-mel features.
// posterior(c) is proportional to exp(-|f - mu_c|^2 / tau), tau being the
// mean squared distance of the fitting data to its own centroids.
class ClassifierOracle {
 public:
  explicit ClassifierOracle(MelConfig cfg = {});

  void fit(const std::vector<std::vector<double>>& clips, const std::vector<int>& labels);
  bool fitted() const { return !centroids_.empty(); }
  int num_classes() const { return static_cast<int>(centroids_.size()); }
  double temperature() const { return tau_; }

  Eigen::VectorXd features(std::span<const double> mono) const;
  std::vector<double> posterior(std::span<const double> mono) const;
  int predict(std::span<const double> mono) const;

 private:
  MelConfig cfg_;
  Eigen::MatrixXd fb_;
  std::vector<Eigen::VectorXd> centroids_;
  double tau_ = 1.0;
};

// Percentage of clips whose argmax posterior equals the label.
double class_accuracy(const std::vector<std::vector<double>>& clips,
                      const std::vector<int>& labels, const ClassifierOracle& oracle);

// Same, from precomputed posteriors.
double class_accuracy(const std::vector<std::vector<double>>& posteriors,
                      const std::vector<int>& labels);

// Mean over pairs of sum_c p_ref(c) log(p_ref(c) / p_gen(c)), with p_gen
// floored at 1e-10 and 0 log 0 taken as 0.
double kl_divergence(const std::vector<std::vector<double>>& gen,
                     const std::vector<std::vector<double>>& ref);

inline constexpr double kKlFloor = 1e-10;

}  // namespace foagen
