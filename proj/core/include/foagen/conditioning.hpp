#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "foagen/geometry.hpp"
#include "foagen/params.hpp"

namespace foagen {

struct Condition {
  int class_id = 0;
  Direction direction;
};

// A condition whose parts may each be replaced by the null token. Both parts
// absent is the fully-null condition used for guidance.
struct MaskedCondition {
  std::optional<int> class_id;
  std::optional<Direction> direction;

  static MaskedCondition full(const Condition& c) { return {c.class_id, c.direction}; }
  static MaskedCondition null() { return {}; }
  bool is_null() const { return !class_id && !direction; }
};

struct ConditionVector {
  Eigen::VectorXd values;
  bool is_null = false;
};

struct EncoderConfig {
  int num_classes = 1;
  int cond_dim = 256;     // D_c; also the class embedding width
  int angle_freqs = 16;   // K per angle
  std::uint64_t seed = 0;

  int hidden_dim() const { return 2 * cond_dim; }
  int input_dim() const { return cond_dim + 4 * angle_freqs; }
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Class embedding table (num_classes + 1 rows, the last row is the learned
// null embedding) followed by Linear -> SiLU -> Linear.
struct EncoderParams {
  EncoderConfig config;
  ParamSet params;
};

EncoderParams init_encoder(const EncoderConfig& cfg);

// [sin(2^k az), cos(2^k az)]_{k<K} followed by the same ladder for elevation.
std::vector<double> sinusoidal_angles(const Direction& d, int num_freqs);

struct EncoderCache {
  int embed_row = -1;
  Eigen::VectorXd input;
  Eigen::VectorXd hidden_pre;
  Eigen::VectorXd hidden;
};

ConditionVector encode_masked(const MaskedCondition& cond, const EncoderParams& enc,
                              EncoderCache* cache = nullptr);
ConditionVector encode_condition(const Condition& cond, const EncoderParams& enc);
// Null embedding with a zero angle vector.
ConditionVector null_condition(const EncoderParams& enc);

// Accumulates d(loss)/d(params) into grads given d(loss)/d(c).
void encoder_backward(const EncoderCache& cache, const Eigen::VectorXd& grad_c,
                      const EncoderParams& enc, ParamSet& grads);

// Drops the class and the direction independently, each with probability p.
MaskedCondition drop_condition(const Condition& cond, double p, Rng& rng);

}  // namespace foagen
