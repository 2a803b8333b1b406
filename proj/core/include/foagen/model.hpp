#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "foagen/conditioning.hpp"
#include "foagen/params.hpp"
#include "foagen/tensor.hpp"

namespace foagen {

struct ModelConfig {
  int in_channels = 8;
  int patch_t = 2;
  int patch_f = 2;
  int embed_dim = 192;
  int depth = 6;
  int heads = 6;
  int cond_dim = 256;
  int time_freq_dim = 256;
  int mlp_ratio = 4;
  std::uint64_t seed = 0;

  int patch_dim() const { return in_channels * patch_t * patch_f; }
  int head_dim() const { return embed_dim / heads; }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Splits (C, T, F) into (T/pt)(F/pf) tokens. Token (i, j) holds the block at
// rows [i pt, (i+1) pt) and cols [j pf, (j+1) pf), flattened channel-major
// (channel, then frame offset, then bin offset). Row index = i (F/pf) + j.
RowMatrix patchify(const Tensor& x, int patch_t, int patch_f);
Tensor unpatchify(const RowMatrix& tokens, const Tensor::Shape& shape, int patch_t, int patch_f);

// Fixed 2-D sinusoidal position table, (rows * cols) x dim. dim % 4 == 0.
RowMatrix sincos_position_table(int rows, int cols, int dim);

// Sinusoidal features of 1000 t: [cos(1000 t w_i), sin(1000 t w_i)],
// w_i = 10000^(-i/half).
Eigen::VectorXd timestep_features(double t, int dim);

// Activations kept by forward() for backward(). Attention probabilities are
// recomputed during backward rather than stored.
struct ForwardCache {
  struct Block {
    RowMatrix xn1, h1, qkv, attn, proj, xn2, h2, fc1, act, fc2;
    Eigen::VectorXd rstd1, rstd2, mod;
  };

  bool valid = false;
  Tensor::Shape shape{0, 0, 0};
  RowMatrix tokens;
  Eigen::VectorXd t_features, t_hidden_pre, t_hidden, cond_in, emb, emb_act;
  std::vector<Block> blocks;
  RowMatrix xn_final, y_final;
  Eigen::VectorXd rstd_final, mod_final;
};

// Diffusion-transformer velocity field v(x_t, t; c). Conditioning enters each
// block through adaptive layer-norm shift/scale/gate vectors computed from
// SiLU(time embedding + projected condition).
class VelocityModel {
 public:
  VelocityModel() = default;
  explicit VelocityModel(const ModelConfig& cfg);
  VelocityModel(const ModelConfig& cfg, ParamSet params);

  const ModelConfig& config() const { return cfg_; }
  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }
  bool loaded() const { return !params_.empty(); }

  Tensor forward(const Tensor& x, double t, const ConditionVector& c,
                 ForwardCache* cache = nullptr) const;

  // Accumulates parameter gradients into grads (same layout as params()) and
  // returns d(loss)/d(c). Throws when the cache does not hold a forward pass.
  Eigen::VectorXd backward(const ForwardCache& cache, const Tensor& grad_out,
                           ParamSet& grads) const;

 private:
  void check_input(const Tensor& x, double t, const ConditionVector& c) const;

  ModelConfig cfg_;
  ParamSet params_;
};

// Registers every tensor for cfg with zero values.
ParamSet make_model_params(const ModelConfig& cfg);
// Truncated-normal(0.02) projections, zero biases and a zero output layer.
ParamSet init_model_params(const ModelConfig& cfg);

}  // namespace foagen
