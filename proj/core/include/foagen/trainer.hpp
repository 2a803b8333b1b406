#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "foagen/adam.hpp"
#include "foagen/checkpoint.hpp"
#include "foagen/conditioning.hpp"
#include "foagen/model.hpp"
#include "foagen/tensor.hpp"

namespace foagen {

struct TrainConfig {
  AdamConfig adam;
  int batch_size = 8;
  int epochs = 1;
  double p_drop = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Standard deviation over every value of every plane tensor.
double compute_sigma_data(const std::vector<Tensor>& planes);

struct TrainingSet {
  std::vector<Tensor> x;  // already divided by sigma_data
  std::vector<Condition> conds;

  std::size_t size() const { return x.size(); }
};

struct EpochReport {
  int epoch = 0;          // 1-based global epoch index
  double mean_loss = 0.0;
  std::uint64_t step = 0;
};

class Trainer {
 public:
  // Fresh run.
  Trainer(const ModelConfig& model_cfg, const EncoderConfig& enc_cfg, const TrainConfig& cfg);
  // Resume: the checkpoint's model and encoder configs must match `model_cfg`
  // and `enc_cfg`.
  Trainer(const Checkpoint& ckpt, const ModelConfig& model_cfg, const EncoderConfig& enc_cfg,
          const TrainConfig& cfg);

  // Loss of the current parameters on `data` with a fixed evaluation seed.
  // No parameter update.
  double evaluate(const TrainingSet& data, std::uint64_t seed) const;

  // One pass over `data` in a seed-stable shuffled order.
  EpochReport train_epoch(const TrainingSet& data);
  // Single optimizer step on the given items. Returns the batch loss.
  double train_step(const TrainingSet& data, const std::vector<std::size_t>& indices);

  const VelocityModel& model() const { return model_; }
  const EncoderParams& encoder() const { return encoder_; }
  std::uint64_t step() const { return step_; }
  int epochs_done() const { return epochs_done_; }

  Checkpoint to_checkpoint(double sigma_data, const StftConfig& stft,
                           const std::vector<std::string>& vocabulary) const;

 private:
  TrainConfig cfg_;
  VelocityModel model_;
  EncoderParams encoder_;
  Adam model_opt_, encoder_opt_;
  ParamSet model_grads_, encoder_grads_;
  std::uint64_t step_ = 0;
  int epochs_done_ = 0;
};

// splitmix64 finaliser; used to derive per-step seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace foagen
