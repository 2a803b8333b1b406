#include "foagen/adam.hpp"

#include <cmath>

#include "foagen/error.hpp"

namespace foagen {

Adam::Adam(const AdamConfig& cfg, const ParamSet& layout)
    : cfg_(cfg), m_(layout.zeros_like()), v_(layout.zeros_like()) {}

void Adam::step(ParamSet& params, const ParamSet& grads) {
  if (!params.same_layout(grads) || !params.same_layout(m_)) {
    throw ConfigError("adam: parameter layout mismatch");
  }
  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  auto& pt = params.tensors();
  const auto& gt = grads.tensors();
  auto& mt = m_.tensors();
  auto& vt = v_.tensors();
  for (std::size_t k = 0; k < pt.size(); ++k) {
    auto& w = pt[k].data;
    const auto& g = gt[k].data;
    auto& m = mt[k].data;
    auto& v = vt[k].data;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      w[i] -= cfg_.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.eps);
    }
  }
}

}  // namespace foagen
