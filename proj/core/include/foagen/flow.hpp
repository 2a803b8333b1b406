#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "foagen/conditioning.hpp"
#include "foagen/model.hpp"
#include "foagen/params.hpp"
#include "foagen/stft.hpp"
#include "foagen/tensor.hpp"

namespace foagen {

// Linear interpolant: noise at t = 0, data at t = 1.
struct InterpolantSchedule {
  static double alpha(double t) { return t; }
  static double beta(double t) { return 1.0 - t; }
  static constexpr double alpha_dot = 1.0;
  static constexpr double beta_dot = -1.0;
};

struct FlowState {
  Tensor x_t;
  double t = 0.0;
};

// x_t = t x + (1 - t) eps.
FlowState interpolate(const Tensor& x, const Tensor& eps, double t);
// x - eps, independent of t.
Tensor velocity_target(const Tensor& x, const Tensor& eps);
// zeta v_cond + (1 - zeta) v_null.
Tensor cfg_velocity(const Tensor& v_cond, const Tensor& v_null, double zeta);

enum class Integrator { kEuler, kHeun };

struct SamplerConfig {
  int steps = 250;
  double cfg_scale = 4.0;
  Integrator integrator = Integrator::kEuler;
  std::uint64_t seed = 0;

  void validate() const;
};

Integrator parse_integrator(const std::string& name);

Tensor gaussian_tensor(const Tensor::Shape& shape, Rng& rng);

using VelocityField = std::function<Tensor(const Tensor& x, double t)>;

// Integrates dx = v(x, t) dt from t = 0 to t = 1 with `steps` uniform steps.
// The last step lands exactly on t = 1.
Tensor integrate_flow(const VelocityField& v, Tensor x0, int steps, Integrator integrator);

// Guided velocity for the model: zeta v(x, t; c) + (1 - zeta) v(x, t; null).
// With zeta == 1 only the conditional branch is evaluated.
VelocityField guided_field(const VelocityModel& model, const ConditionVector& cond,
                           const ConditionVector& null_cond, double zeta);

// Draws x0 ~ N(0, I) from cfg.seed and integrates the guided field. Returns
// the normalised sample (no sigma_data scaling).
Tensor sample_tensor(const VelocityModel& model, const EncoderParams& encoder,
                     const MaskedCondition& cond, const SamplerConfig& cfg,
                     const Tensor::Shape& shape);

// Full FOA sampler: sample_tensor at the spectrogram shape of `stft`, scaled
// by sigma_data.
FoaSpectrogram sample(const VelocityModel& model, const EncoderParams& encoder,
                      const Condition& cond, const SamplerConfig& cfg, double sigma_data,
                      const StftConfig& stft);

// Random quantities drawn for one training item, in draw order: t, then eps,
// then the two condition-drop decisions.
struct TrainingDraw {
  double t = 0.0;
  Tensor eps;
  MaskedCondition cond;
};

TrainingDraw draw_training_item(const Tensor::Shape& shape, const Condition& cond, double p_drop,
                                Rng& rng);

struct TrainingItem {
  const Tensor* x = nullptr;  // normalised data
  Condition cond;
};

// Mean over items of mean_elements (v_theta(x_t, t; c) - (x - eps))^2.
// Gradients for the model and encoder are accumulated into the given buffers
// (pass nullptr to skip backward).
double flow_matching_loss(std::span<const TrainingItem> batch, const VelocityModel& model,
                          const EncoderParams& encoder, double p_drop, Rng& rng,
                          ParamSet* model_grads, ParamSet* encoder_grads);

}  // namespace foagen
