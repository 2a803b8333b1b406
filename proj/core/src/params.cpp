#include "foagen/params.hpp"

#include <cmath>
#include <numeric>

#include "foagen/error.hpp"

namespace foagen {

ParamTensor& ParamSet::add(const std::string& name, std::vector<int> shape) {
  if (contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ConfigError("parameter '" + name + "' has a non-positive dimension");
    n *= static_cast<std::size_t>(d);
  }
  index_[name] = tensors_.size();
  tensors_.push_back({name, std::move(shape), std::vector<double>(n, 0.0)});
  return tensors_.back();
}

ParamTensor& ParamSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return tensors_[it->second];
}

const ParamTensor& ParamSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return tensors_[it->second];
}

MatrixMap ParamSet::mat(const std::string& name) {
  auto& t = get(name);
  if (t.shape.size() != 2) throw ConfigError("parameter '" + name + "' is not a matrix");
  return MatrixMap(t.data.data(), t.shape[0], t.shape[1]);
}

ConstMatrixMap ParamSet::mat(const std::string& name) const {
  const auto& t = get(name);
  if (t.shape.size() != 2) throw ConfigError("parameter '" + name + "' is not a matrix");
  return ConstMatrixMap(t.data.data(), t.shape[0], t.shape[1]);
}

VectorMap ParamSet::vec(const std::string& name) {
  auto& t = get(name);
  return VectorMap(t.data.data(), static_cast<Eigen::Index>(t.data.size()));
}

ConstVectorMap ParamSet::vec(const std::string& name) const {
  const auto& t = get(name);
  return ConstVectorMap(t.data.data(), static_cast<Eigen::Index>(t.data.size()));
}

std::size_t ParamSet::total_size() const {
  return std::accumulate(tensors_.begin(), tensors_.end(), std::size_t{0},
                         [](std::size_t acc, const ParamTensor& t) { return acc + t.data.size(); });
}

double& ParamSet::flat(std::size_t i) {
  for (auto& t : tensors_) {
    if (i < t.data.size()) return t.data[i];
    i -= t.data.size();
  }
  throw ConfigError("flat parameter index out of range");
}

double ParamSet::flat(std::size_t i) const {
  return const_cast<ParamSet*>(this)->flat(i);
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& t : tensors_) out.add(t.name, t.shape);
  return out;
}

void ParamSet::set_zero() {
  for (auto& t : tensors_) std::fill(t.data.begin(), t.data.end(), 0.0);
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name != other.tensors_[i].name || tensors_[i].shape != other.tensors_[i].shape) {
      return false;
    }
  }
  return true;
}

bool ParamSet::all_finite() const {
  for (const auto& t : tensors_) {
    for (double v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void fill_truncated_normal(std::vector<double>& v, double std, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& x : v) {
    double z = normal(rng);
    while (std::abs(z) > 2.0) z = normal(rng);
    x = std * z;
  }
}

}  // namespace foagen
