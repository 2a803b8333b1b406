#include "foagen/frechet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "foagen/error.hpp"

namespace foagen {

EmbeddingStats compute_stats(const std::vector<Eigen::VectorXd>& embeddings) {
  if (embeddings.size() < 2) throw ConfigError("embedding stats need at least two samples");
  const Eigen::Index d = embeddings.front().size();
  EmbeddingStats s;
  s.count = embeddings.size();
  s.mean = Eigen::VectorXd::Zero(d);
  for (const auto& e : embeddings) {
    if (e.size() != d) throw ConfigError("embedding stats: dimension mismatch");
    s.mean += e;
  }
  s.mean /= static_cast<double>(s.count);
  s.cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& e : embeddings) {
    const Eigen::VectorXd c = e - s.mean;
    s.cov.noalias() += c * c.transpose();
  }
  s.cov /= static_cast<double>(s.count - 1);
  s.cov = 0.5 * (s.cov + s.cov.transpose()).eval();
  return s;
}

namespace {

struct SymRoot {
  Eigen::MatrixXd root, inv_root;
};

SymRoot sym_root(const Eigen::MatrixXd& a, bool want_inverse) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd& v = es.eigenvectors();
  SymRoot r;
  r.root = v * lam.cwiseSqrt().asDiagonal() * v.transpose();
  if (want_inverse) {
    if (lam.minCoeff() <= 0.0) throw ConfigError("sqrtm_product: A is not positive definite");
    r.inv_root = v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  }
  return r;
}

}  // namespace

Eigen::MatrixXd sqrtm_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw ConfigError("sqrtm_product: shape mismatch");
  const SymRoot ra = sym_root(a, true);
  const Eigen::MatrixXd m = ra.root * b * ra.root;
  return ra.root * sym_root(m, false).root * ra.inv_root;
}

double trace_sqrtm_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw ConfigError("trace_sqrtm_product: shape mismatch");
  const Eigen::MatrixXd ra = sym_root(a, false).root;
  const Eigen::MatrixXd m = ra * b * ra;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

double frechet_distance(const EmbeddingStats& p, const EmbeddingStats& q) {
  if (p.dim() != q.dim() || p.cov.rows() != p.dim() || q.cov.rows() != q.dim() ||
      p.cov.cols() != p.dim() || q.cov.cols() != q.dim())
    throw ConfigError("frechet_distance: dimension mismatch (" + std::to_string(p.dim()) + " vs " +
                      std::to_string(q.dim()) + ")");
  if (p.dim() == 0) throw ConfigError("frechet_distance: empty statistics");
  if (p.count < 2 || q.count < 2) throw ConfigError("frechet_distance: need at least two samples");
  const Eigen::MatrixXd reg = kFrechetRegularisation * Eigen::MatrixXd::Identity(p.dim(), p.dim());
  const Eigen::MatrixXd sp = p.cov + reg, sq = q.cov + reg;
  const double mean_term = (p.mean - q.mean).squaredNorm();
  const double tr = sp.trace() + sq.trace() - 2.0 * trace_sqrtm_product(sp, sq);
  return std::max(0.0, mean_term + tr);
}

}  // namespace foagen
