#include "foagen/flow.hpp"

#include <cmath>
#include <string>

#include "foagen/error.hpp"

namespace foagen {

FlowState interpolate(const Tensor& x, const Tensor& eps, double t) {
  require_same_shape(x, eps, "interpolate");
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("interpolate: t must be in [0, 1]");
  FlowState s{Tensor(x.shape()), t};
  const double a = InterpolantSchedule::alpha(t), b = InterpolantSchedule::beta(t);
  for (std::size_t i = 0; i < x.size(); ++i) s.x_t[i] = a * x[i] + b * eps[i];
  return s;
}

Tensor velocity_target(const Tensor& x, const Tensor& eps) {
  require_same_shape(x, eps, "velocity_target");
  Tensor v(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i] - eps[i];
  return v;
}

Tensor cfg_velocity(const Tensor& v_cond, const Tensor& v_null, double zeta) {
  require_same_shape(v_cond, v_null, "cfg_velocity");
  if (!(zeta >= 0.0)) throw ConfigError("cfg scale must be >= 0");
  // Exact endpoints: zeta * v + 0 * v_null is not bit-identical to v when
  // v_null holds infinities, and 1 - zeta rounds for large zeta.
  if (zeta == 1.0) return v_cond;
  if (zeta == 0.0) return v_null;
  Tensor v(v_cond.shape());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = zeta * v_cond[i] + (1.0 - zeta) * v_null[i];
  return v;
}

void SamplerConfig::validate() const {
  if (steps < 1) throw ConfigError("sampler: steps must be >= 1");
  if (!(cfg_scale >= 0.0)) throw ConfigError("sampler: cfg scale must be >= 0");
}

Integrator parse_integrator(const std::string& name) {
  if (name == "euler") return Integrator::kEuler;
  if (name == "heun") return Integrator::kHeun;
  throw ConfigError("unknown integrator '" + name + "' (expected euler or heun)");
}

Tensor gaussian_tensor(const Tensor::Shape& shape, Rng& rng) {
  Tensor x(shape);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : x.values()) v = normal(rng);
  return x;
}

Tensor integrate_flow(const VelocityField& v, Tensor x, int steps, Integrator integrator) {
  if (steps < 1) throw ConfigError("integrate_flow: steps must be >= 1");
  for (int k = 0; k < steps; ++k) {
    const double t0 = static_cast<double>(k) / steps;
    const double t1 = k + 1 == steps ? 1.0 : static_cast<double>(k + 1) / steps;
    const double h = t1 - t0;
    const Tensor v0 = v(x, t0);
    require_same_shape(x, v0, "velocity field");
    if (integrator == Integrator::kEuler) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += h * v0[i];
    } else {
      Tensor pred = x;
      for (std::size_t i = 0; i < x.size(); ++i) pred[i] += h * v0[i];
      const Tensor v1 = v(pred, t1);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += 0.5 * h * (v0[i] + v1[i]);
    }
  }
  return x;
}

VelocityField guided_field(const VelocityModel& model, const ConditionVector& cond,
                           const ConditionVector& null_cond, double zeta) {
  if (!model.loaded()) throw ConfigError("velocity model is not loaded");
  return [&model, cond, null_cond, zeta](const Tensor& x, double t) {
    Tensor v_cond = model.forward(x, t, cond);
    if (zeta == 1.0) return v_cond;
    return cfg_velocity(v_cond, model.forward(x, t, null_cond), zeta);
  };
}

Tensor sample_tensor(const VelocityModel& model, const EncoderParams& encoder,
                     const MaskedCondition& cond, const SamplerConfig& cfg,
                     const Tensor::Shape& shape) {
  cfg.validate();
  if (!model.loaded() || encoder.params.empty()) throw ConfigError("model is not loaded");
  Rng rng(cfg.seed);
  Tensor x0 = gaussian_tensor(shape, rng);
  const ConditionVector c = encode_masked(cond, encoder);
  const ConditionVector c_null = null_condition(encoder);
  return integrate_flow(guided_field(model, c, c_null, cfg.cfg_scale), std::move(x0), cfg.steps,
                        cfg.integrator);
}

FoaSpectrogram sample(const VelocityModel& model, const EncoderParams& encoder,
                      const Condition& cond, const SamplerConfig& cfg, double sigma_data,
                      const StftConfig& stft) {
  stft.validate();
  Tensor x = sample_tensor(model, encoder, MaskedCondition::full(cond), cfg,
                           {2 * kFoaChannels, stft.frames, stft.bins()});
  for (double& v : x.values()) v *= sigma_data;
  return FoaSpectrogram(std::move(x), stft);
}

TrainingDraw draw_training_item(const Tensor::Shape& shape, const Condition& cond, double p_drop,
                                Rng& rng) {
  TrainingDraw d;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  d.t = uniform(rng);
  d.eps = gaussian_tensor(shape, rng);
  d.cond = drop_condition(cond, p_drop, rng);
  return d;
}

double flow_matching_loss(std::span<const TrainingItem> batch, const VelocityModel& model,
                          const EncoderParams& encoder, double p_drop, Rng& rng,
                          ParamSet* model_grads, ParamSet* encoder_grads) {
  if (batch.empty()) throw ConfigError("flow_matching_loss: empty batch");
  const bool want_grads = model_grads != nullptr;
  double total = 0.0;
  ForwardCache cache;
  EncoderCache enc_cache;
  for (const auto& item : batch) {
    const Tensor& x = *item.x;
    TrainingDraw draw = draw_training_item(x.shape(), item.cond, p_drop, rng);
    const FlowState state = interpolate(x, draw.eps, draw.t);
    const Tensor target = velocity_target(x, draw.eps);
    const ConditionVector c = encode_masked(draw.cond, encoder, want_grads ? &enc_cache : nullptr);
    const Tensor pred = model.forward(state.x_t, draw.t, c, want_grads ? &cache : nullptr);

    const double n = static_cast<double>(x.size());
    double sq = 0.0;
    Tensor grad(x.shape());
    const double scale = 2.0 / (n * static_cast<double>(batch.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = pred[i] - target[i];
      sq += r * r;
      grad[i] = scale * r;
    }
    total += sq / n;
    if (want_grads) {
      const Eigen::VectorXd grad_c = model.backward(cache, grad, *model_grads);
      if (encoder_grads) encoder_backward(enc_cache, grad_c, encoder, *encoder_grads);
    }
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace foagen
