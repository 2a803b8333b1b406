#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace foagen {

struct EmbeddingStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t count = 0;

  int dim() const { return static_cast<int>(mean.size()); }
};

// Sample mean and unbiased covariance. Needs at least two rows.
EmbeddingStats compute_stats(const std::vector<Eigen::VectorXd>& embeddings);

inline constexpr double kFrechetRegularisation = 1e-6;

// Principal square root of A B for symmetric PSD A, B:
// S = A^{1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}. A must be positive definite.
Eigen::MatrixXd sqrtm_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Trace of (A B)^{1/2} through the symmetric form; negative eigenvalues are
// clamped to zero.
double trace_sqrtm_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// |mu_p - mu_q|^2 + Tr(S_p + S_q - 2 (S_p S_q)^{1/2}) with S = Sigma + 1e-6 I.
// Clamped at zero.
double frechet_distance(const EmbeddingStats& p, const EmbeddingStats& q);

}  // namespace foagen
