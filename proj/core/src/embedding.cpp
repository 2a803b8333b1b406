#include "foagen/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "foagen/error.hpp"
#include "foagen/stft.hpp"

namespace foagen {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

Eigen::MatrixXd mel_filterbank(int bands, int n_fft, double sample_rate, double f_min,
                               double f_max) {
  if (bands < 1 || n_fft < 2) throw ConfigError("mel_filterbank: bad size");
  if (f_max <= 0.0) f_max = sample_rate / 2.0;
  const int bins = n_fft / 2 + 1;
  const double m_lo = hz_to_mel(f_min), m_hi = hz_to_mel(f_max);
  std::vector<double> edges(bands + 2);
  for (int i = 0; i < bands + 2; ++i)
    edges[i] = mel_to_hz(m_lo + (m_hi - m_lo) * i / (bands + 1));
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(bands, bins);
  for (int b = 0; b < bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = k * sample_rate / n_fft;
      if (f > lo && f < hi) fb(b, k) = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
    }
    // Narrow low bands can fall between bins; give them the nearest bin.
    if (fb.row(b).sum() == 0.0) {
      const int k = std::clamp(static_cast<int>(std::lround(mid * n_fft / sample_rate)), 0, bins - 1);
      fb(b, k) = 1.0;
    }
  }
  return fb;
}

namespace {

StftConfig analysis_config(const MelConfig& cfg, std::size_t length) {
  StftConfig s;
  s.n_fft = cfg.n_fft;
  s.win_length = cfg.n_fft;
  s.hop = cfg.hop;
  s.window = Window::kHann;
  s.sample_rate = cfg.sample_rate;
  s.frames = length <= static_cast<std::size_t>(cfg.n_fft)
                 ? 1
                 : static_cast<int>((length - cfg.n_fft) / cfg.hop) + 1;
  return s;
}

Eigen::MatrixXd log_mel_with(std::span<const double> signal, const MelConfig& cfg,
                             const Eigen::MatrixXd& fb) {
  if (signal.empty()) throw ConfigError("log_mel: empty signal");
  const ComplexMatrix spec = stft(signal, analysis_config(cfg, signal.size()));
  const Eigen::MatrixXd power = spec.cwiseAbs2();
  Eigen::MatrixXd mel = power * fb.transpose();
  return mel.array().max(cfg.floor).log().matrix();
}

void check_mel(const MelConfig& cfg) {
  if (cfg.bands < 1 || cfg.n_fft < 2 || cfg.hop < 1 || cfg.hop > cfg.n_fft)
    throw ConfigError("mel config: invalid sizes");
}

}  // namespace

Eigen::MatrixXd log_mel(std::span<const double> signal, const MelConfig& cfg) {
  check_mel(cfg);
  return log_mel_with(signal, cfg, mel_filterbank(cfg.bands, cfg.n_fft, cfg.sample_rate));
}

MelStatsEmbedder::MelStatsEmbedder(MelConfig cfg)
    : cfg_(cfg), fb_((check_mel(cfg), mel_filterbank(cfg.bands, cfg.n_fft, cfg.sample_rate))) {}

Eigen::VectorXd MelStatsEmbedder::embed(std::span<const double> mono) const {
  const Eigen::MatrixXd lm = log_mel_with(mono, cfg_, fb_);
  const Eigen::RowVectorXd mean = lm.colwise().mean();
  const Eigen::MatrixXd centred = lm.rowwise() - mean;
  const Eigen::RowVectorXd var = centred.colwise().squaredNorm() / static_cast<double>(lm.rows());
  Eigen::VectorXd e(2 * cfg_.bands);
  e.head(cfg_.bands) = mean.transpose();
  e.tail(cfg_.bands) = var.transpose().cwiseSqrt();
  return e;
}

MelStatsEmbedder fd_embedder() { return MelStatsEmbedder(MelConfig{}); }

MelStatsEmbedder fad_embedder() {
  MelConfig c;
  c.bands = 16;
  return MelStatsEmbedder(c);
}

ClassifierOracle::ClassifierOracle(MelConfig cfg)
    : cfg_(cfg), fb_((check_mel(cfg), mel_filterbank(cfg.bands, cfg.n_fft, cfg.sample_rate))) {}

Eigen::VectorXd ClassifierOracle::features(std::span<const double> mono) const {
  Eigen::VectorXd f = log_mel_with(mono, cfg_, fb_).colwise().mean().transpose();
  f.array() -= f.mean();
  return f;
}

void ClassifierOracle::fit(const std::vector<std::vector<double>>& clips,
                           const std::vector<int>& labels) {
  if (clips.empty()) throw ConfigError("classifier fit: no clips");
  if (clips.size() != labels.size()) throw ConfigError("classifier fit: clips/labels mismatch");
  const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
  if (*std::min_element(labels.begin(), labels.end()) < 0)
    throw ConfigError("classifier fit: negative label");
  std::vector<Eigen::VectorXd> feats;
  feats.reserve(clips.size());
  for (const auto& c : clips) feats.push_back(features(c));
  std::vector<Eigen::VectorXd> sums(classes, Eigen::VectorXd::Zero(cfg_.bands));
  std::vector<int> counts(classes, 0);
  for (std::size_t i = 0; i < feats.size(); ++i) {
    sums[labels[i]] += feats[i];
    ++counts[labels[i]];
  }
  for (int c = 0; c < classes; ++c)
    if (counts[c] == 0)
      throw ConfigError("classifier fit: class " + std::to_string(c) + " has no examples");
  centroids_.assign(classes, Eigen::VectorXd());
  for (int c = 0; c < classes; ++c) centroids_[c] = sums[c] / counts[c];
  double sq = 0.0;
  for (std::size_t i = 0; i < feats.size(); ++i) sq += (feats[i] - centroids_[labels[i]]).squaredNorm();
  tau_ = std::max(sq / static_cast<double>(feats.size()), 1e-6);
}

std::vector<double> ClassifierOracle::posterior(std::span<const double> mono) const {
  if (!fitted()) throw ConfigError("classifier oracle is not fitted");
  const Eigen::VectorXd f = features(mono);
  std::vector<double> logits(centroids_.size());
  for (std::size_t c = 0; c < centroids_.size(); ++c)
    logits[c] = -(f - centroids_[c]).squaredNorm() / tau_;
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& l : logits) z += (l = std::exp(l - m));
  for (double& l : logits) l /= z;
  return logits;
}

int ClassifierOracle::predict(std::span<const double> mono) const {
  const auto p = posterior(mono);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double class_accuracy(const std::vector<std::vector<double>>& posteriors,
                      const std::vector<int>& labels) {
  if (posteriors.empty()) throw ConfigError("class_accuracy: empty set");
  if (posteriors.size() != labels.size()) throw ConfigError("class_accuracy: size mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    const auto& p = posteriors[i];
    if (p.empty()) throw ConfigError("class_accuracy: empty posterior");
    const int arg = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    hits += arg == labels[i];
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(posteriors.size());
}

double class_accuracy(const std::vector<std::vector<double>>& clips,
                      const std::vector<int>& labels, const ClassifierOracle& oracle) {
  if (!oracle.fitted()) throw ConfigError("classifier oracle is not fitted");
  if (clips.empty()) throw ConfigError("class_accuracy: empty set");
  std::vector<std::vector<double>> post;
  post.reserve(clips.size());
  for (const auto& c : clips) post.push_back(oracle.posterior(c));
  return class_accuracy(post, labels);
}

double kl_divergence(const std::vector<std::vector<double>>& gen,
                     const std::vector<std::vector<double>>& ref) {
  if (gen.empty() || gen.size() != ref.size())
    throw ConfigError("kl_divergence: gen and ref must be non-empty and paired");
  double total = 0.0;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    if (gen[i].size() != ref[i].size())
      throw ConfigError("kl_divergence: posterior sizes differ at pair " + std::to_string(i));
    double kl = 0.0;
    for (std::size_t c = 0; c < ref[i].size(); ++c) {
      const double p = ref[i][c];
      if (p < 0.0 || gen[i][c] < 0.0) throw ConfigError("kl_divergence: negative probability");
      if (p == 0.0) continue;
      kl += p * std::log(p / std::max(gen[i][c], kKlFloor));
    }
    total += std::max(kl, 0.0);
  }
  return total / static_cast<double>(gen.size());
}

}  // namespace foagen
