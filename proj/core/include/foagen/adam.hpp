#pragma once

#include <cstdint>

#include "foagen/params.hpp"

namespace foagen {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction over one ParamSet.
class Adam {
 public:
  Adam() = default;
  Adam(const AdamConfig& cfg, const ParamSet& layout);

  void step(ParamSet& params, const ParamSet& grads);

  std::uint64_t steps() const { return steps_; }
  void set_steps(std::uint64_t s) { steps_ = s; }
  const ParamSet& first_moment() const { return m_; }
  const ParamSet& second_moment() const { return v_; }
  ParamSet& first_moment() { return m_; }
  ParamSet& second_moment() { return v_; }
  AdamConfig& config() { return cfg_; }

 private:
  AdamConfig cfg_;
  ParamSet m_, v_;
  std::uint64_t steps_ = 0;
};

}  // namespace foagen
