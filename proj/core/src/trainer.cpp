#include "foagen/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "foagen/error.hpp"
#include "foagen/flow.hpp"

namespace foagen {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (!(p_drop >= 0.0 && p_drop <= 1.0)) throw ConfigError("train: p_drop must be in [0, 1]");
  if (!(adam.lr > 0.0)) throw ConfigError("train: lr must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ConfigError("train: Adam betas must be in [0, 1)");
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double compute_sigma_data(const std::vector<Tensor>& planes) {
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& p : planes) {
    for (double v : p.values()) sum += v;
    n += p.size();
  }
  if (n < 2) throw ConfigError("sigma_data needs at least two values");
  const double mean = sum / static_cast<double>(n);
  for (const auto& p : planes)
    for (double v : p.values()) sq += (v - mean) * (v - mean);
  const double s = std::sqrt(sq / static_cast<double>(n));
  if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("training planes are constant");
  return s;
}

Trainer::Trainer(const ModelConfig& model_cfg, const EncoderConfig& enc_cfg, const TrainConfig& cfg)
    : cfg_(cfg), model_(model_cfg), encoder_(init_encoder(enc_cfg)) {
  cfg_.validate();
  if (model_cfg.cond_dim != enc_cfg.cond_dim)
    throw ConfigError("model cond_dim and encoder cond_dim differ");
  model_opt_ = Adam(cfg_.adam, model_.params());
  encoder_opt_ = Adam(cfg_.adam, encoder_.params);
  model_grads_ = model_.params().zeros_like();
  encoder_grads_ = encoder_.params.zeros_like();
}

namespace {

ParamSet pick(const ParamSet& all, const ParamSet& layout) {
  ParamSet out;
  for (const auto& t : layout.tensors()) {
    if (!all.contains(t.name)) throw FormatError("checkpoint missing optimizer state for " + t.name);
    const auto& src = all.get(t.name);
    if (src.shape != t.shape) throw FormatError("optimizer state shape mismatch for " + t.name);
    out.add(t.name, t.shape).data = src.data;
  }
  return out;
}

ParamSet concat(const ParamSet& a, const ParamSet& b) {
  ParamSet out;
  for (const auto* s : {&a, &b})
    for (const auto& t : s->tensors()) out.add(t.name, t.shape).data = t.data;
  return out;
}

}  // namespace

Trainer::Trainer(const Checkpoint& ckpt, const ModelConfig& model_cfg,
                 const EncoderConfig& enc_cfg, const TrainConfig& cfg)
    : cfg_(cfg) {
  cfg_.validate();
  ModelConfig a = ckpt.model_config, b = model_cfg;
  a.seed = b.seed = 0;
  EncoderConfig ea = ckpt.encoder.config, eb = enc_cfg;
  ea.seed = eb.seed = 0;
  if (!(a == b)) throw ConfigError("cannot resume: model config differs from checkpoint");
  if (!(ea == eb)) throw ConfigError("cannot resume: encoder config differs from checkpoint");
  model_ = VelocityModel(ckpt.model_config, ckpt.model_params);
  encoder_ = ckpt.encoder;
  model_opt_ = Adam(cfg_.adam, model_.params());
  encoder_opt_ = Adam(cfg_.adam, encoder_.params);
  if (!ckpt.adam_m.empty()) {
    model_opt_.first_moment() = pick(ckpt.adam_m, model_.params());
    model_opt_.second_moment() = pick(ckpt.adam_v, model_.params());
    encoder_opt_.first_moment() = pick(ckpt.adam_m, encoder_.params);
    encoder_opt_.second_moment() = pick(ckpt.adam_v, encoder_.params);
  }
  model_opt_.set_steps(ckpt.step);
  encoder_opt_.set_steps(ckpt.step);
  step_ = ckpt.step;
  model_grads_ = model_.params().zeros_like();
  encoder_grads_ = encoder_.params.zeros_like();
}

namespace {

std::vector<TrainingItem> make_items(const TrainingSet& data,
                                     const std::vector<std::size_t>& indices) {
  std::vector<TrainingItem> items;
  items.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= data.size()) throw ConfigError("training index out of range");
    items.push_back({&data.x[i], data.conds[i]});
  }
  return items;
}

}  // namespace

double Trainer::evaluate(const TrainingSet& data, std::uint64_t seed) const {
  if (data.size() == 0) throw ConfigError("evaluate: empty training set");
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto items = make_items(data, all);
  Rng rng(seed);
  return flow_matching_loss(items, model_, encoder_, cfg_.p_drop, rng, nullptr, nullptr);
}

double Trainer::train_step(const TrainingSet& data, const std::vector<std::size_t>& indices) {
  const auto items = make_items(data, indices);
  model_grads_.set_zero();
  encoder_grads_.set_zero();
  Rng rng(mix_seed(cfg_.seed, step_));
  const double loss = flow_matching_loss(items, model_, encoder_, cfg_.p_drop, rng, &model_grads_,
                                         &encoder_grads_);
  model_opt_.step(model_.params(), model_grads_);
  encoder_opt_.step(encoder_.params, encoder_grads_);
  ++step_;
  return loss;
}

EpochReport Trainer::train_epoch(const TrainingSet& data) {
  if (data.size() == 0) throw ConfigError("train: empty training set");
  if (data.conds.size() != data.x.size()) throw ConfigError("train: conditions/data size mismatch");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(mix_seed(cfg_.seed ^ 0x5EEDULL, step_));
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  double loss_sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
    const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg_.batch_size));
    std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);
    loss_sum += train_step(data, idx);
    ++batches;
  }
  ++epochs_done_;
  return {epochs_done_, loss_sum / static_cast<double>(batches), step_};
}

Checkpoint Trainer::to_checkpoint(double sigma_data, const StftConfig& stft,
                                  const std::vector<std::string>& vocabulary) const {
  Checkpoint c;
  c.model_config = model_.config();
  c.model_params = model_.params();
  c.encoder = encoder_;
  c.sigma_data = sigma_data;
  c.stft = stft;
  c.vocabulary = vocabulary;
  c.step = step_;
  c.adam_m = concat(model_opt_.first_moment(), encoder_opt_.first_moment());
  c.adam_v = concat(model_opt_.second_moment(), encoder_opt_.second_moment());
  return c;
}

}  // namespace foagen
