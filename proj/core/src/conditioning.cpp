#include "foagen/conditioning.hpp"

#include <cmath>
#include <string>

#include "foagen/error.hpp"
#include "foagen/nn_ops.hpp"

namespace foagen {

void EncoderConfig::validate() const {
  if (num_classes < 1) throw ConfigError("encoder: num_classes must be >= 1");
  if (cond_dim < 1) throw ConfigError("encoder: cond_dim must be >= 1");
  if (angle_freqs < 1) throw ConfigError("encoder: angle_freqs must be >= 1");
}

EncoderParams init_encoder(const EncoderConfig& cfg) {
  cfg.validate();
  EncoderParams enc{cfg, {}};
  auto& p = enc.params;
  p.add("cond.class_embed", {cfg.num_classes + 1, cfg.cond_dim});
  p.add("cond.fc1.weight", {cfg.hidden_dim(), cfg.input_dim()});
  p.add("cond.fc1.bias", {cfg.hidden_dim()});
  p.add("cond.fc2.weight", {cfg.cond_dim, cfg.hidden_dim()});
  p.add("cond.fc2.bias", {cfg.cond_dim});

  Rng rng(cfg.seed ^ 0xC0DEC0DEULL);
  fill_truncated_normal(p.get("cond.class_embed").data, 0.02, rng);
  fill_truncated_normal(p.get("cond.fc1.weight").data, 0.02, rng);
  fill_truncated_normal(p.get("cond.fc2.weight").data, 0.02, rng);
  return enc;
}

std::vector<double> sinusoidal_angles(const Direction& d, int num_freqs) {
  std::vector<double> out;
  out.reserve(4 * num_freqs);
  for (double angle : {d.azimuth(), d.elevation()}) {
    for (int k = 0; k < num_freqs; ++k) {
      const double a = std::ldexp(angle, k);
      out.push_back(std::sin(a));
      out.push_back(std::cos(a));
    }
  }
  return out;
}

ConditionVector encode_masked(const MaskedCondition& cond, const EncoderParams& enc,
                              EncoderCache* cache) {
  const auto& cfg = enc.config;
  if (enc.params.empty()) throw ConfigError("encoder parameters are not initialised");
  int row = cfg.num_classes;
  if (cond.class_id) {
    if (*cond.class_id < 0 || *cond.class_id >= cfg.num_classes) {
      throw ConfigError("class id " + std::to_string(*cond.class_id) + " out of range [0, " +
                        std::to_string(cfg.num_classes) + ")");
    }
    row = *cond.class_id;
  }

  Eigen::VectorXd input = Eigen::VectorXd::Zero(cfg.input_dim());
  input.head(cfg.cond_dim) = enc.params.mat("cond.class_embed").row(row).transpose();
  if (cond.direction) {
    const auto angles = sinusoidal_angles(*cond.direction, cfg.angle_freqs);
    for (std::size_t i = 0; i < angles.size(); ++i) input[cfg.cond_dim + i] = angles[i];
  }

  Eigen::VectorXd pre = enc.params.mat("cond.fc1.weight") * input + enc.params.vec("cond.fc1.bias");
  Eigen::VectorXd hidden = nn::silu(pre);
  ConditionVector c;
  c.values = enc.params.mat("cond.fc2.weight") * hidden + enc.params.vec("cond.fc2.bias");
  c.is_null = cond.is_null();
  if (cache) {
    cache->embed_row = row;
    cache->input = std::move(input);
    cache->hidden_pre = std::move(pre);
    cache->hidden = std::move(hidden);
  }
  return c;
}

ConditionVector encode_condition(const Condition& cond, const EncoderParams& enc) {
  return encode_masked(MaskedCondition::full(cond), enc);
}

ConditionVector null_condition(const EncoderParams& enc) {
  return encode_masked(MaskedCondition::null(), enc);
}

void encoder_backward(const EncoderCache& cache, const Eigen::VectorXd& grad_c,
                      const EncoderParams& enc, ParamSet& grads) {
  if (cache.embed_row < 0) throw ConfigError("encoder_backward: missing forward cache");
  const auto& cfg = enc.config;
  grads.mat("cond.fc2.weight").noalias() += grad_c * cache.hidden.transpose();
  grads.vec("cond.fc2.bias") += grad_c;
  Eigen::VectorXd d_hidden = enc.params.mat("cond.fc2.weight").transpose() * grad_c;
  for (Eigen::Index i = 0; i < d_hidden.size(); ++i) d_hidden[i] *= nn::silu_grad(cache.hidden_pre[i]);
  grads.mat("cond.fc1.weight").noalias() += d_hidden * cache.input.transpose();
  grads.vec("cond.fc1.bias") += d_hidden;
  const Eigen::VectorXd d_input = enc.params.mat("cond.fc1.weight").transpose() * d_hidden;
  grads.mat("cond.class_embed").row(cache.embed_row) += d_input.head(cfg.cond_dim).transpose();
}

MaskedCondition drop_condition(const Condition& cond, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("drop probability must be in [0, 1]");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MaskedCondition out = MaskedCondition::full(cond);
  if (u(rng) < p) out.class_id.reset();
  if (u(rng) < p) out.direction.reset();
  return out;
}

}  // namespace foagen
