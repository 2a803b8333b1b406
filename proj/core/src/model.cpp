#include "foagen/model.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "foagen/error.hpp"
#include "foagen/nn_ops.hpp"

namespace foagen {

namespace {

std::string block_name(int b, const char* leaf) {
  return "blocks." + std::to_string(b) + "." + leaf;
}

Eigen::VectorXd col_sum(const RowMatrix& m) { return m.colwise().sum().transpose(); }

// Row-wise y = x * (1 + scale) + shift.
RowMatrix modulate(const RowMatrix& x, const Eigen::VectorXd& shift, const Eigen::VectorXd& scale) {
  RowMatrix y = x.array().rowwise() * (1.0 + scale.array()).transpose();
  y.rowwise() += shift.transpose();
  return y;
}

RowMatrix scale_rows(const RowMatrix& x, const Eigen::VectorXd& gate) {
  return x.array().rowwise() * gate.array().transpose();
}

void softmax_rows(RowMatrix& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double mx = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - mx).exp();
    s.row(i) /= s.row(i).sum();
  }
}

RowMatrix attention_probs(const RowMatrix& qkv, int head, int dim, int head_dim) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const auto q = qkv.middleCols(head * head_dim, head_dim);
  const auto k = qkv.middleCols(dim + head * head_dim, head_dim);
  RowMatrix s = (q * k.transpose()) * scale;
  softmax_rows(s);
  return s;
}

RowMatrix attention(const RowMatrix& qkv, int heads, int dim) {
  const int hd = dim / heads;
  RowMatrix out(qkv.rows(), dim);
  for (int h = 0; h < heads; ++h) {
    const RowMatrix p = attention_probs(qkv, h, dim, hd);
    out.middleCols(h * hd, hd).noalias() = p * qkv.middleCols(2 * dim + h * hd, hd);
  }
  return out;
}

RowMatrix attention_backward(const RowMatrix& qkv, const RowMatrix& d_out, int heads, int dim) {
  const int hd = dim / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  RowMatrix d_qkv(qkv.rows(), 3 * dim);
  for (int h = 0; h < heads; ++h) {
    const RowMatrix p = attention_probs(qkv, h, dim, hd);
    const auto q = qkv.middleCols(h * hd, hd);
    const auto k = qkv.middleCols(dim + h * hd, hd);
    const auto v = qkv.middleCols(2 * dim + h * hd, hd);
    const auto d_o = d_out.middleCols(h * hd, hd);
    d_qkv.middleCols(2 * dim + h * hd, hd).noalias() = p.transpose() * d_o;
    RowMatrix d_s = d_o * v.transpose();
    const Eigen::VectorXd row_dot = (d_s.array() * p.array()).rowwise().sum();
    d_s = p.array() * (d_s.array().colwise() - row_dot.array());
    d_qkv.middleCols(h * hd, hd).noalias() = scale * (d_s * k);
    d_qkv.middleCols(dim + h * hd, hd).noalias() = scale * (d_s.transpose() * q);
  }
  return d_qkv;
}

void accumulate_linear(ParamSet& grads, const std::string& prefix, const RowMatrix& d_y,
                       const RowMatrix& x) {
  grads.mat(prefix + ".weight").noalias() += d_y.transpose() * x;
  grads.vec(prefix + ".bias") += col_sum(d_y);
}

}  // namespace

void ModelConfig::validate() const {
  if (in_channels < 1 || patch_t < 1 || patch_f < 1) throw ConfigError("model: channels and patch sizes must be >= 1");
  if (embed_dim < 4 || embed_dim % 4 != 0) throw ConfigError("model: embed_dim must be a positive multiple of 4");
  if (depth < 1 || heads < 1) throw ConfigError("model: depth and heads must be >= 1");
  if (embed_dim % heads != 0) throw ConfigError("model: embed_dim must be divisible by heads");
  if (cond_dim < 1 || mlp_ratio < 1) throw ConfigError("model: cond_dim and mlp_ratio must be >= 1");
  if (time_freq_dim < 2 || time_freq_dim % 2 != 0) throw ConfigError("model: time_freq_dim must be even");
}

RowMatrix patchify(const Tensor& x, int patch_t, int patch_f) {
  const int c = x.channels(), t = x.frames(), f = x.bins();
  if (patch_t < 1 || patch_f < 1 || t % patch_t != 0 || f % patch_f != 0) {
    throw ConfigError("patchify: shape " + shape_string(x.shape()) + " is not divisible by patch " +
                      std::to_string(patch_t) + "x" + std::to_string(patch_f));
  }
  const int gt = t / patch_t, gf = f / patch_f;
  RowMatrix tokens(gt * gf, c * patch_t * patch_f);
  for (int i = 0; i < gt; ++i) {
    for (int j = 0; j < gf; ++j) {
      const int row = i * gf + j;
      int col = 0;
      for (int ch = 0; ch < c; ++ch) {
        for (int dt = 0; dt < patch_t; ++dt) {
          for (int df = 0; df < patch_f; ++df) tokens(row, col++) = x(ch, i * patch_t + dt, j * patch_f + df);
        }
      }
    }
  }
  return tokens;
}

Tensor unpatchify(const RowMatrix& tokens, const Tensor::Shape& shape, int patch_t, int patch_f) {
  const int c = shape[0], t = shape[1], f = shape[2];
  if (patch_t < 1 || patch_f < 1 || t % patch_t != 0 || f % patch_f != 0) {
    throw ConfigError("unpatchify: shape " + shape_string(shape) + " is not divisible by patch");
  }
  const int gt = t / patch_t, gf = f / patch_f;
  if (tokens.rows() != gt * gf || tokens.cols() != c * patch_t * patch_f) {
    throw ConfigError("unpatchify: token matrix does not match shape " + shape_string(shape));
  }
  Tensor x(shape);
  for (int i = 0; i < gt; ++i) {
    for (int j = 0; j < gf; ++j) {
      const int row = i * gf + j;
      int col = 0;
      for (int ch = 0; ch < c; ++ch) {
        for (int dt = 0; dt < patch_t; ++dt) {
          for (int df = 0; df < patch_f; ++df) x(ch, i * patch_t + dt, j * patch_f + df) = tokens(row, col++);
        }
      }
    }
  }
  return x;
}

RowMatrix sincos_position_table(int rows, int cols, int dim) {
  if (dim % 4 != 0) throw ConfigError("position table dim must be a multiple of 4");
  const int quarter = dim / 4;
  RowMatrix table(rows * cols, dim);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int r = i * cols + j;
      for (int k = 0; k < quarter; ++k) {
        const double omega = std::pow(10000.0, -static_cast<double>(k) / quarter);
        table(r, k) = std::sin(i * omega);
        table(r, quarter + k) = std::cos(i * omega);
        table(r, 2 * quarter + k) = std::sin(j * omega);
        table(r, 3 * quarter + k) = std::cos(j * omega);
      }
    }
  }
  return table;
}

Eigen::VectorXd timestep_features(double t, int dim) {
  const int half = dim / 2;
  Eigen::VectorXd out(dim);
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / half);
    out[i] = std::cos(1000.0 * t * freq);
    out[half + i] = std::sin(1000.0 * t * freq);
  }
  return out;
}

ParamSet make_model_params(const ModelConfig& cfg) {
  cfg.validate();
  const int d = cfg.embed_dim;
  const int hidden = cfg.mlp_ratio * d;
  ParamSet p;
  p.add("x_embed.weight", {d, cfg.patch_dim()});
  p.add("x_embed.bias", {d});
  p.add("t_embed.fc1.weight", {d, cfg.time_freq_dim});
  p.add("t_embed.fc1.bias", {d});
  p.add("t_embed.fc2.weight", {d, d});
  p.add("t_embed.fc2.bias", {d});
  p.add("c_embed.weight", {d, cfg.cond_dim});
  p.add("c_embed.bias", {d});
  for (int b = 0; b < cfg.depth; ++b) {
    p.add(block_name(b, "adaln.weight"), {6 * d, d});
    p.add(block_name(b, "adaln.bias"), {6 * d});
    p.add(block_name(b, "qkv.weight"), {3 * d, d});
    p.add(block_name(b, "qkv.bias"), {3 * d});
    p.add(block_name(b, "proj.weight"), {d, d});
    p.add(block_name(b, "proj.bias"), {d});
    p.add(block_name(b, "fc1.weight"), {hidden, d});
    p.add(block_name(b, "fc1.bias"), {hidden});
    p.add(block_name(b, "fc2.weight"), {d, hidden});
    p.add(block_name(b, "fc2.bias"), {d});
  }
  p.add("final.adaln.weight", {2 * d, d});
  p.add("final.adaln.bias", {2 * d});
  p.add("final.linear.weight", {cfg.patch_dim(), d});
  p.add("final.linear.bias", {cfg.patch_dim()});
  return p;
}

ParamSet init_model_params(const ModelConfig& cfg) {
  ParamSet p = make_model_params(cfg);
  Rng rng(cfg.seed);
  for (auto& t : p.tensors()) {
    const bool is_weight = t.shape.size() == 2;
    if (is_weight && t.name != "final.linear.weight") fill_truncated_normal(t.data, 0.02, rng);
  }
  return p;
}

VelocityModel::VelocityModel(const ModelConfig& cfg) : cfg_(cfg), params_(init_model_params(cfg)) {}

VelocityModel::VelocityModel(const ModelConfig& cfg, ParamSet params)
    : cfg_(cfg), params_(std::move(params)) {
  if (!params_.same_layout(make_model_params(cfg_))) {
    throw ConfigError("model parameters do not match the model configuration");
  }
}

void VelocityModel::check_input(const Tensor& x, double t, const ConditionVector& c) const {
  if (!loaded()) throw ConfigError("velocity model is not loaded");
  if (x.channels() != cfg_.in_channels) {
    throw ConfigError("model expects " + std::to_string(cfg_.in_channels) + " channels, got " +
                      shape_string(x.shape()));
  }
  if (x.frames() % cfg_.patch_t != 0 || x.bins() % cfg_.patch_f != 0 || x.frames() == 0 || x.bins() == 0) {
    throw ConfigError("input shape " + shape_string(x.shape()) + " is not divisible by the patch size");
  }
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("time must be in [0, 1]");
  if (c.values.size() != cfg_.cond_dim) {
    throw ConfigError("condition vector has dimension " + std::to_string(c.values.size()) +
                      ", model expects " + std::to_string(cfg_.cond_dim));
  }
}

Tensor VelocityModel::forward(const Tensor& x, double t, const ConditionVector& c,
                              ForwardCache* cache) const {
  check_input(x, t, c);
  const int d = cfg_.embed_dim;
  const auto& p = params_;

  RowMatrix tokens = patchify(x, cfg_.patch_t, cfg_.patch_f);
  RowMatrix h = nn::linear(tokens, p.mat("x_embed.weight"), p.vec("x_embed.bias"));
  h += sincos_position_table(x.frames() / cfg_.patch_t, x.bins() / cfg_.patch_f, d);

  Eigen::VectorXd t_features = timestep_features(t, cfg_.time_freq_dim);
  Eigen::VectorXd t_pre = p.mat("t_embed.fc1.weight") * t_features + p.vec("t_embed.fc1.bias");
  Eigen::VectorXd t_hidden = nn::silu(t_pre);
  Eigen::VectorXd emb = p.mat("t_embed.fc2.weight") * t_hidden + p.vec("t_embed.fc2.bias");
  emb += p.mat("c_embed.weight") * c.values + p.vec("c_embed.bias");
  Eigen::VectorXd s = nn::silu(emb);

  if (cache) {
    cache->blocks.clear();
    cache->blocks.reserve(cfg_.depth);
  }
  for (int b = 0; b < cfg_.depth; ++b) {
    ForwardCache::Block blk;
    blk.mod = p.mat(block_name(b, "adaln.weight")) * s + p.vec(block_name(b, "adaln.bias"));
    const Eigen::VectorXd shift1 = blk.mod.segment(0, d), scale1 = blk.mod.segment(d, d),
                          gate1 = blk.mod.segment(2 * d, d), shift2 = blk.mod.segment(3 * d, d),
                          scale2 = blk.mod.segment(4 * d, d), gate2 = blk.mod.segment(5 * d, d);

    blk.xn1 = nn::layer_norm(h, blk.rstd1);
    blk.h1 = modulate(blk.xn1, shift1, scale1);
    blk.qkv = nn::linear(blk.h1, p.mat(block_name(b, "qkv.weight")), p.vec(block_name(b, "qkv.bias")));
    blk.attn = attention(blk.qkv, cfg_.heads, d);
    blk.proj = nn::linear(blk.attn, p.mat(block_name(b, "proj.weight")), p.vec(block_name(b, "proj.bias")));
    h += scale_rows(blk.proj, gate1);

    blk.xn2 = nn::layer_norm(h, blk.rstd2);
    blk.h2 = modulate(blk.xn2, shift2, scale2);
    blk.fc1 = nn::linear(blk.h2, p.mat(block_name(b, "fc1.weight")), p.vec(block_name(b, "fc1.bias")));
    blk.act = blk.fc1.unaryExpr([](double v) { return nn::gelu(v); });
    blk.fc2 = nn::linear(blk.act, p.mat(block_name(b, "fc2.weight")), p.vec(block_name(b, "fc2.bias")));
    h += scale_rows(blk.fc2, gate2);

    if (cache) cache->blocks.push_back(std::move(blk));
  }

  Eigen::VectorXd mod_final = p.mat("final.adaln.weight") * s + p.vec("final.adaln.bias");
  Eigen::VectorXd rstd_final;
  RowMatrix xn_final = nn::layer_norm(h, rstd_final);
  RowMatrix y_final = modulate(xn_final, mod_final.segment(0, d), mod_final.segment(d, d));
  const RowMatrix out = nn::linear(y_final, p.mat("final.linear.weight"), p.vec("final.linear.bias"));

  if (cache) {
    cache->valid = true;
    cache->shape = x.shape();
    cache->tokens = std::move(tokens);
    cache->t_features = std::move(t_features);
    cache->t_hidden_pre = std::move(t_pre);
    cache->t_hidden = std::move(t_hidden);
    cache->cond_in = c.values;
    cache->emb = std::move(emb);
    cache->emb_act = std::move(s);
    cache->xn_final = std::move(xn_final);
    cache->y_final = std::move(y_final);
    cache->rstd_final = std::move(rstd_final);
    cache->mod_final = std::move(mod_final);
  }
  return unpatchify(out, x.shape(), cfg_.patch_t, cfg_.patch_f);
}

Eigen::VectorXd VelocityModel::backward(const ForwardCache& cache, const Tensor& grad_out,
                                        ParamSet& grads) const {
  if (!cache.valid || static_cast<int>(cache.blocks.size()) != cfg_.depth) {
    throw ConfigError("backward: missing forward cache");
  }
  if (grad_out.shape() != cache.shape) throw ConfigError("backward: gradient shape does not match forward input");
  if (!grads.same_layout(params_)) throw ConfigError("backward: gradient buffer layout mismatch");
  const int d = cfg_.embed_dim;
  const auto& p = params_;

  // unpatchify is a permutation, so its adjoint is patchify.
  const RowMatrix d_out = patchify(grad_out, cfg_.patch_t, cfg_.patch_f);
  accumulate_linear(grads, "final.linear", d_out, cache.y_final);
  const RowMatrix d_y = d_out * p.mat("final.linear.weight");
  Eigen::VectorXd d_mod_final(2 * d);
  d_mod_final.segment(0, d) = col_sum(d_y);
  d_mod_final.segment(d, d) = col_sum(d_y.cwiseProduct(cache.xn_final));
  RowMatrix dh = nn::layer_norm_backward(
      d_y.array().rowwise() * (1.0 + cache.mod_final.segment(d, d).array()).transpose(),
      cache.xn_final, cache.rstd_final);
  grads.mat("final.adaln.weight").noalias() += d_mod_final * cache.emb_act.transpose();
  grads.vec("final.adaln.bias") += d_mod_final;
  Eigen::VectorXd d_s = p.mat("final.adaln.weight").transpose() * d_mod_final;

  for (int b = cfg_.depth - 1; b >= 0; --b) {
    const auto& blk = cache.blocks[b];
    const Eigen::VectorXd scale1 = blk.mod.segment(d, d), gate1 = blk.mod.segment(2 * d, d),
                          scale2 = blk.mod.segment(4 * d, d), gate2 = blk.mod.segment(5 * d, d);
    Eigen::VectorXd d_mod(6 * d);

    // MLP branch.
    const RowMatrix d_fc2 = scale_rows(dh, gate2);
    d_mod.segment(5 * d, d) = col_sum(dh.cwiseProduct(blk.fc2));
    accumulate_linear(grads, block_name(b, "fc2"), d_fc2, blk.act);
    RowMatrix d_fc1 = d_fc2 * p.mat(block_name(b, "fc2.weight"));
    d_fc1.array() *= blk.fc1.unaryExpr([](double v) { return nn::gelu_grad(v); }).array();
    accumulate_linear(grads, block_name(b, "fc1"), d_fc1, blk.h2);
    const RowMatrix d_h2 = d_fc1 * p.mat(block_name(b, "fc1.weight"));
    d_mod.segment(3 * d, d) = col_sum(d_h2);
    d_mod.segment(4 * d, d) = col_sum(d_h2.cwiseProduct(blk.xn2));
    dh += nn::layer_norm_backward(scale_rows(d_h2, (1.0 + scale2.array()).matrix()), blk.xn2, blk.rstd2);

    // Attention branch.
    const RowMatrix d_proj = scale_rows(dh, gate1);
    d_mod.segment(2 * d, d) = col_sum(dh.cwiseProduct(blk.proj));
    accumulate_linear(grads, block_name(b, "proj"), d_proj, blk.attn);
    const RowMatrix d_attn = d_proj * p.mat(block_name(b, "proj.weight"));
    const RowMatrix d_qkv = attention_backward(blk.qkv, d_attn, cfg_.heads, d);
    accumulate_linear(grads, block_name(b, "qkv"), d_qkv, blk.h1);
    const RowMatrix d_h1 = d_qkv * p.mat(block_name(b, "qkv.weight"));
    d_mod.segment(0, d) = col_sum(d_h1);
    d_mod.segment(d, d) = col_sum(d_h1.cwiseProduct(blk.xn1));
    dh += nn::layer_norm_backward(scale_rows(d_h1, (1.0 + scale1.array()).matrix()), blk.xn1, blk.rstd1);

    grads.mat(block_name(b, "adaln.weight")).noalias() += d_mod * cache.emb_act.transpose();
    grads.vec(block_name(b, "adaln.bias")) += d_mod;
    d_s.noalias() += p.mat(block_name(b, "adaln.weight")).transpose() * d_mod;
  }

  accumulate_linear(grads, "x_embed", dh, cache.tokens);

  Eigen::VectorXd d_emb(d);
  for (int i = 0; i < d; ++i) d_emb[i] = d_s[i] * nn::silu_grad(cache.emb[i]);
  grads.mat("c_embed.weight").noalias() += d_emb * cache.cond_in.transpose();
  grads.vec("c_embed.bias") += d_emb;
  grads.mat("t_embed.fc2.weight").noalias() += d_emb * cache.t_hidden.transpose();
  grads.vec("t_embed.fc2.bias") += d_emb;
  Eigen::VectorXd d_t_hidden = p.mat("t_embed.fc2.weight").transpose() * d_emb;
  for (Eigen::Index i = 0; i < d_t_hidden.size(); ++i) d_t_hidden[i] *= nn::silu_grad(cache.t_hidden_pre[i]);
  grads.mat("t_embed.fc1.weight").noalias() += d_t_hidden * cache.t_features.transpose();
  grads.vec("t_embed.fc1.bias") += d_t_hidden;

  return p.mat("c_embed.weight").transpose() * d_emb;
}

}  // namespace foagen
