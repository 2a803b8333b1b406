#pragma once

#include <cmath>

#include <Eigen/Core>

#include "foagen/params.hpp"

// Small dense building blocks shared by the condition encoder and the velocity
// model. Activations are row-major (rows = tokens); weights are (out, in).
namespace foagen::nn {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

// tanh approximation of GELU.
inline double gelu(double x) {
  constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
  return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
}
inline double gelu_grad(double x) {
  constexpr double k = 0.7978845608028654;
  const double inner = k * (x + 0.044715 * x * x * x);
  const double th = std::tanh(inner);
  return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * k * (1.0 + 3.0 * 0.044715 * x * x);
}

template <typename Derived>
Eigen::VectorXd silu(const Eigen::MatrixBase<Derived>& x) {
  return x.unaryExpr([](double v) { return silu(v); });
}

// y = x W^T + b for every row of x.
inline RowMatrix linear(const RowMatrix& x, const ConstMatrixMap& w, const ConstVectorMap& b) {
  RowMatrix y = x * w.transpose();
  y.rowwise() += b.transpose();
  return y;
}

// Row-wise layer norm without affine parameters. Stores the normalised rows
// and reciprocal standard deviations for the backward pass.
inline RowMatrix layer_norm(const RowMatrix& x, Eigen::VectorXd& rstd, double eps = 1e-6) {
  const Eigen::Index d = x.cols();
  RowMatrix out(x.rows(), d);
  rstd.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().sum() / static_cast<double>(d);
    rstd[i] = 1.0 / std::sqrt(var + eps);
    out.row(i) = (x.row(i).array() - mean) * rstd[i];
  }
  return out;
}

// Gradient of layer_norm w.r.t. its input, given the normalised output.
inline RowMatrix layer_norm_backward(const RowMatrix& dy, const RowMatrix& y,
                                     const Eigen::VectorXd& rstd) {
  const double inv_d = 1.0 / static_cast<double>(y.cols());
  RowMatrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double mean_dy = dy.row(i).sum() * inv_d;
    const double mean_dy_y = dy.row(i).dot(y.row(i)) * inv_d;
    dx.row(i) = rstd[i] * (dy.row(i).array() - mean_dy - y.row(i).array() * mean_dy_y);
  }
  return dx;
}

}  // namespace foagen::nn
