#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace foagen {

// Dense (channels, frames, bins) array of doubles, row-major with bins
// fastest. Spectrogram stacks, velocities and noise all share this layout.
class Tensor {
 public:
  using Shape = std::array<int, 3>;

  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  int channels() const { return shape_[0]; }
  int frames() const { return shape_[1]; }
  int bins() const { return shape_[2]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int c, int t, int f) {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + t) * shape_[2] + f];
  }
  double operator()(int c, int t, int f) const {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + t) * shape_[2] + f];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double squared_norm() const;
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_{0, 0, 0};
  std::vector<double> data_;
};

std::string shape_string(const Tensor::Shape& s);

// Throws ConfigError naming `what` when the shapes differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace foagen
