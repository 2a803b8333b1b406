#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "foagen/adam.hpp"
#include "foagen/checkpoint.hpp"
#include "foagen/error.hpp"
#include "foagen/model.hpp"
#include "foagen/nn_ops.hpp"
#include "oracles.hpp"

using namespace foagen;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.embed_dim = 16;
  c.depth = 2;
  c.heads = 2;
  c.cond_dim = 8;
  c.time_freq_dim = 8;
  c.seed = 3;
  return c;
}

EncoderParams encoder_for(const ModelConfig& m, int classes = 2) {
  EncoderConfig e;
  e.num_classes = classes;
  e.cond_dim = m.cond_dim;
  e.angle_freqs = 4;
  e.seed = 4;
  return init_encoder(e);
}

void randomise(ParamSet& p, std::mt19937_64& rng, double std) {
  std::normal_distribution<double> g(0.0, std);
  for (auto& t : p.tensors())
    for (double& v : t.data) v = g(rng);
}

}  // namespace

TEST(Patchify, PaperShapeTokenCount) {
  const Tensor x({8, 64, 128});
  const auto tok = patchify(x, 2, 2);
  EXPECT_EQ(tok.rows(), 2048);
  EXPECT_EQ(tok.cols(), 32);
  EXPECT_EQ(tok.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Patchify, LayoutAndRoundTrip) {
  std::mt19937_64 rng(41);
  const auto x = oracle::random_tensor({8, 6, 10}, rng);
  const auto tok = patchify(x, 2, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j)
      for (int c = 0; c < 8; ++c)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            EXPECT_EQ(tok(i * 5 + j, c * 4 + a * 2 + b), x(c, 2 * i + a, 2 * j + b));
  EXPECT_EQ(unpatchify(tok, x.shape(), 2, 2), x);
  const auto y = oracle::random_tensor({1, 1, 2}, rng);
  EXPECT_EQ(unpatchify(patchify(y, 1, 2), y.shape(), 1, 2), y);
  EXPECT_THROW(patchify(Tensor({8, 5, 4}), 2, 2), ConfigError);
  EXPECT_THROW(unpatchify(tok, {8, 6, 12}, 2, 2), ConfigError);
}

TEST(PositionTable, SincosStructure) {
  const auto p = sincos_position_table(3, 4, 16);
  EXPECT_EQ(p.rows(), 12);
  EXPECT_EQ(p.cols(), 16);
  for (int r = 0; r < 12; ++r)
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR(p(r, k) * p(r, k) + p(r, 4 + k) * p(r, 4 + k), 1.0, 1e-12);
      EXPECT_NEAR(p(r, 8 + k) * p(r, 8 + k) + p(r, 12 + k) * p(r, 12 + k), 1.0, 1e-12);
    }
  std::set<std::vector<double>> rows;
  for (int r = 0; r < 12; ++r) rows.insert(std::vector<double>(p.row(r).data(), p.row(r).data() + 16));
  EXPECT_EQ(rows.size(), 12u);
}

TEST(TimestepFeatures, Shape) {
  const auto f = timestep_features(0.5, 16);
  EXPECT_EQ(f.size(), 16);
  EXPECT_TRUE(f.allFinite());
  EXPECT_GT((timestep_features(0.25, 16) - f).norm(), 0.0);
}

TEST(NnOps, GeluAndSiluDerivatives) {
  for (double x = -4; x <= 4; x += 0.37) {
    const double h = 1e-6;
    EXPECT_NEAR(nn::gelu_grad(x), (nn::gelu(x + h) - nn::gelu(x - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(nn::silu_grad(x), (nn::silu(x + h) - nn::silu(x - h)) / (2 * h), 1e-8);
  }
}

TEST(ModelConfig, DeskParameterCount) {
  const ModelConfig c;
  EXPECT_EQ(c.embed_dim, 192);
  EXPECT_EQ(c.depth, 6);
  EXPECT_EQ(c.heads, 6);
  const auto p = make_model_params(c);
  EXPECT_LT(p.total_size(), 5'000'000u);
  EXPECT_GT(p.total_size(), 1'000'000u);
  ModelConfig bad = c;
  bad.heads = 5;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Model, InitialisationZeroesFinalLayer) {
  const auto p = init_model_params(tiny_config());
  for (const auto& t : p.tensors()) {
    const bool bias = t.name.find("bias") != std::string::npos;
    const bool final = t.name.rfind("final.linear", 0) == 0;
    const double m = *std::max_element(t.data.begin(), t.data.end(),
                                       [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (bias || final)
      EXPECT_EQ(m, 0.0) << t.name;
    else
      EXPECT_GT(std::abs(m), 0.0) << t.name;
    if (!bias && !final) {
      for (double v : t.data) EXPECT_LE(std::abs(v), 0.04 + 1e-15) << t.name;
    }
  }
}

TEST(Model, ZeroFinalLayerGivesZeroVelocity) {
  const auto cfg = tiny_config();
  const VelocityModel m(cfg);
  const auto enc = encoder_for(cfg);
  std::mt19937_64 rng(42);
  const auto x = oracle::random_tensor({8, 4, 6}, rng, -3, 3);
  const auto v = m.forward(x, 0.3, encode_condition({1, Direction(0.1, 0.2)}, enc));
  EXPECT_EQ(v.shape(), x.shape());
  for (double e : v.values()) EXPECT_EQ(e, 0.0);
}

TEST(Model, DeterministicFiniteBounded) {
  const auto cfg = tiny_config();
  VelocityModel m(cfg);
  std::mt19937_64 rng(43);
  randomise(m.params(), rng, 0.02);
  const auto enc = encoder_for(cfg);
  const auto c = encode_condition({0, Direction(-1, 0.5)}, enc);
  const auto x = oracle::random_tensor({8, 4, 6}, rng, -3, 3);
  const auto a = m.forward(x, 0.7, c), b = m.forward(x, 0.7, c);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a.all_finite());
  EXPECT_LT(std::sqrt(a.squared_norm()), 1e3);
  EXPECT_GT(a.squared_norm(), 0.0);
}

TEST(Model, InputValidation) {
  const auto cfg = tiny_config();
  const VelocityModel m(cfg);
  const auto enc = encoder_for(cfg);
  const auto c = null_condition(enc);
  EXPECT_THROW(m.forward(Tensor({4, 4, 6}), 0.5, c), ConfigError);
  EXPECT_THROW(m.forward(Tensor({8, 3, 6}), 0.5, c), ConfigError);
  EXPECT_THROW(m.forward(Tensor({8, 4, 6}), 1.5, c), ConfigError);
  ConditionVector wrong;
  wrong.values = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(m.forward(Tensor({8, 4, 6}), 0.5, wrong), ConfigError);
  EXPECT_THROW(VelocityModel().forward(Tensor({8, 4, 6}), 0.5, c), ConfigError);
  ParamSet g = m.params().zeros_like();
  EXPECT_THROW(m.backward(ForwardCache{}, Tensor({8, 4, 6}), g), ConfigError);
}

TEST(Model, ZeroUpstreamGradient) {
  const auto cfg = tiny_config();
  VelocityModel m(cfg);
  std::mt19937_64 rng(44);
  randomise(m.params(), rng, 0.1);
  const auto enc = encoder_for(cfg);
  const auto x = oracle::random_tensor({8, 4, 6}, rng);
  ForwardCache cache;
  m.forward(x, 0.2, encode_condition({1, Direction()}, enc), &cache);
  ParamSet g = m.params().zeros_like();
  const Eigen::VectorXd dc = m.backward(cache, Tensor(x.shape()), g);
  EXPECT_EQ(dc.norm(), 0.0);
  for (std::size_t i = 0; i < g.total_size(); ++i) ASSERT_EQ(g.flat(i), 0.0);
}

TEST(Model, ReadoutGradientIsOuterProduct) {
  const auto cfg = tiny_config();
  VelocityModel m(cfg);
  std::mt19937_64 rng(45);
  randomise(m.params(), rng, 0.1);
  const auto enc = encoder_for(cfg);
  const auto x = oracle::random_tensor({8, 4, 6}, rng);
  ForwardCache cache;
  m.forward(x, 0.6, encode_condition({0, Direction(0.3, 0.3)}, enc), &cache);
  const auto up = oracle::random_tensor(x.shape(), rng);
  ParamSet g = m.params().zeros_like();
  m.backward(cache, up, g);
  const RowMatrix gt = patchify(up, cfg.patch_t, cfg.patch_f);
  const RowMatrix expect_w = gt.transpose() * cache.y_final;
  const Eigen::VectorXd expect_b = gt.colwise().sum().transpose();
  EXPECT_LT((g.mat("final.linear.weight") - expect_w).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((g.vec("final.linear.bias") - expect_b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Model, GradientCheckSmallConfig) {
  auto cfg = tiny_config();
  cfg.depth = 1;
  VelocityModel m(cfg);
  std::mt19937_64 rng(46);
  randomise(m.params(), rng, 0.2);
  auto enc = encoder_for(cfg);
  randomise(enc.params, rng, 0.2);
  const auto x = oracle::random_tensor({8, 4, 4}, rng);
  const auto target = oracle::random_tensor({8, 4, 4}, rng);
  const MaskedCondition mc = MaskedCondition::full({1, Direction(0.4, -0.2)});
  auto loss = [&] {
    const auto v = m.forward(x, 0.35, encode_masked(mc, enc));
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) s += (v[i] - target[i]) * (v[i] - target[i]);
    return s;
  };
  ForwardCache cache;
  EncoderCache ecache;
  const auto v = m.forward(x, 0.35, encode_masked(mc, enc, &ecache), &cache);
  Tensor up(v.shape());
  for (std::size_t i = 0; i < v.size(); ++i) up[i] = 2 * (v[i] - target[i]);
  ParamSet g = m.params().zeros_like(), ge = enc.params.zeros_like();
  const Eigen::VectorXd dc = m.backward(cache, up, g);
  encoder_backward(ecache, dc, enc, ge);
  // Every coordinate of the small model.
  for (auto* pair : {&m.params(), &enc.params}) {
    ParamSet& grads = pair == &enc.params ? ge : g;
    for (std::size_t i = 0; i < pair->total_size(); ++i) {
      const double orig = pair->flat(i), h = 1e-5;
      pair->flat(i) = orig + h;
      const double lp = loss();
      pair->flat(i) = orig - h;
      const double lm = loss();
      pair->flat(i) = orig;
      const double num = (lp - lm) / (2 * h), an = grads.flat(i);
      // Absolute slack covers cancellation error of the central difference.
      ASSERT_LE(std::abs(num - an), 1e-4 * std::max(std::abs(num), std::abs(an)) + 1e-7) << i;
    }
  }
}

TEST(Model, AccumulatesGradients) {
  const auto cfg = tiny_config();
  VelocityModel m(cfg);
  std::mt19937_64 rng(47);
  randomise(m.params(), rng, 0.1);
  const auto enc = encoder_for(cfg);
  const auto x = oracle::random_tensor({8, 4, 6}, rng);
  const auto up = oracle::random_tensor(x.shape(), rng);
  ForwardCache cache;
  m.forward(x, 0.5, null_condition(enc), &cache);
  ParamSet once = m.params().zeros_like(), twice = m.params().zeros_like();
  m.backward(cache, up, once);
  m.backward(cache, up, twice);
  m.backward(cache, up, twice);
  for (std::size_t i = 0; i < once.total_size(); ++i)
    EXPECT_NEAR(twice.flat(i), 2 * once.flat(i), 1e-12 * (1 + std::abs(once.flat(i))));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamSet p;
  p.add("w", {3}).data = {1.0, -2.0, 0.5};
  ParamSet g = p.zeros_like();
  g.get("w").data = {0.3, -4.0, 0.0};
  Adam opt(AdamConfig{}, p);
  opt.step(p, g);
  EXPECT_NEAR(p.get("w").data[0], 1.0 - 1e-4, 1e-10);
  EXPECT_NEAR(p.get("w").data[1], -2.0 + 1e-4, 1e-10);
  EXPECT_EQ(p.get("w").data[2], 0.5);
  EXPECT_EQ(opt.steps(), 1u);
}

TEST(Adam, MatchesReferenceRecurrence) {
  ParamSet p;
  p.add("w", {1}).data = {0.0};
  ParamSet g = p.zeros_like();
  AdamConfig cfg;
  cfg.lr = 0.01;
  Adam opt(cfg, p);
  double w = 0, m = 0, v = 0;
  for (int t = 1; t <= 50; ++t) {
    const double grad = std::sin(0.3 * t) + w;
    g.get("w").data[0] = grad;
    opt.step(p, g);
    m = 0.9 * m + 0.1 * grad;
    v = 0.999 * v + 0.001 * grad * grad;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    w -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    EXPECT_NEAR(p.get("w").data[0], w, 1e-12);
  }
}

TEST(Checkpoint, RoundTripBitExact) {
  oracle::TempDir dir("ckpt");
  const auto cfg = tiny_config();
  std::mt19937_64 rng(48);
  Checkpoint c;
  c.model_config = cfg;
  c.model_params = init_model_params(cfg);
  randomise(c.model_params, rng, 1.0);
  c.encoder = encoder_for(cfg, 3);
  c.sigma_data = 0.123456789012345678;
  c.stft = StftConfig::paper_shape();
  c.vocabulary = {"sine", "chirp", "noise burst"};
  c.step = 987654321;
  // Moments cover model tensors followed by encoder tensors.
  c.adam_m = c.model_params;
  for (const auto& t : c.encoder.params.tensors()) c.adam_m.add(t.name, t.shape).data = t.data;
  c.adam_v = c.adam_m.zeros_like();
  c.adam_v.flat(c.adam_v.total_size() - 1) = 2.5;
  c.model_params.flat(0) = -0.0;
  c.model_params.flat(1) = 1e-310;
  save_checkpoint(dir / "m.ckpt", c);
  const auto d = load_checkpoint(dir / "m.ckpt");
  EXPECT_TRUE(d == c);
  EXPECT_TRUE(std::signbit(d.model_params.flat(0)));
  EXPECT_EQ(serialize_checkpoint(d), serialize_checkpoint(c));
  EXPECT_FALSE(std::filesystem::exists(dir / "m.ckpt.tmp"));
}

TEST(Checkpoint, DistinctErrors) {
  Checkpoint c;
  c.model_config = tiny_config();
  c.model_params = init_model_params(c.model_config);
  c.encoder = encoder_for(c.model_config);
  const std::string good = serialize_checkpoint(c);

  auto message = [](const std::string& bytes) {
    try {
      deserialize_checkpoint(bytes);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_NE(message(bad).find("not a checkpoint"), std::string::npos);
  bad = good;
  bad[4] = static_cast<char>(kCheckpointVersion + 1);
  EXPECT_NE(message(bad).find("unsupported version"), std::string::npos);
  EXPECT_NE(message(good.substr(0, good.size() / 2)).find("truncated"), std::string::npos);
  EXPECT_NE(message(good.substr(0, 6)).find("truncated"), std::string::npos);
  EXPECT_EQ(message(good), "no error");
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/x.ckpt"), IoError);
}
