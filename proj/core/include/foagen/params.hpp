#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace foagen {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

using Rng = std::mt19937_64;

struct ParamTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<double> data;

  friend bool operator==(const ParamTensor&, const ParamTensor&) = default;
};

// Named, ordered collection of parameter tensors. Insertion order is the flat
// index order used by gradient checks and the checkpoint tensor table.
class ParamSet {
 public:
  ParamTensor& add(const std::string& name, std::vector<int> shape);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  ParamTensor& get(const std::string& name);
  const ParamTensor& get(const std::string& name) const;

  // Rank-2 tensors as (rows, cols) row-major matrices; rank-1 as vectors.
  MatrixMap mat(const std::string& name);
  ConstMatrixMap mat(const std::string& name) const;
  VectorMap vec(const std::string& name);
  ConstVectorMap vec(const std::string& name) const;

  const std::vector<ParamTensor>& tensors() const { return tensors_; }
  std::vector<ParamTensor>& tensors() { return tensors_; }
  bool empty() const { return tensors_.empty(); }

  std::size_t total_size() const;
  double& flat(std::size_t i);
  double flat(std::size_t i) const;

  // Same names and shapes, all zeros.
  ParamSet zeros_like() const;
  void set_zero();
  bool same_layout(const ParamSet& other) const;
  bool all_finite() const;

  friend bool operator==(const ParamSet& a, const ParamSet& b) { return a.tensors_ == b.tensors_; }

 private:
  std::vector<ParamTensor> tensors_;
  std::map<std::string, std::size_t> index_;
};

// Normal(0, std) truncated to +/- 2 std by resampling.
void fill_truncated_normal(std::vector<double>& v, double std, Rng& rng);

}  // namespace foagen
