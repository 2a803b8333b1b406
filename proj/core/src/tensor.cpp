#include "foagen/tensor.hpp"

#include <cmath>
#include <utility>

#include "foagen/error.hpp"

namespace foagen {

namespace {

std::size_t element_count(const Tensor::Shape& s) {
  for (int d : s) {
    if (d < 0) throw ConfigError("negative tensor dimension");
  }
  return static_cast<std::size_t>(s[0]) * s[1] * s[2];
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(element_count(shape), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), data_(std::move(values)) {
  if (data_.size() != element_count(shape_)) {
    throw ConfigError("tensor data does not match shape " + shape_string(shape_));
  }
}

double Tensor::squared_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string shape_string(const Tensor::Shape& s) {
  return "(" + std::to_string(s[0]) + "," + std::to_string(s[1]) + "," + std::to_string(s[2]) + ")";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ConfigError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) +
                      " vs " + shape_string(b.shape()));
  }
}

}  // namespace foagen
