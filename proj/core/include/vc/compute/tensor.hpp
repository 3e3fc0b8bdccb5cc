#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vc/errors.hpp"
#include "vc/random.hpp"

namespace vc::compute {

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles with a fixed shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }

  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return rank() < 2 ? 1 : size() / shape_[0]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  // View as rows() x cols(); rank-1 tensors view as a column.
  MatrixMap matrix() { return {values_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols())}; }
  ConstMatrixMap matrix() const {
    return {values_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols())};
  }
  Eigen::Map<Vector> flat() { return {values_.data(), static_cast<Eigen::Index>(size())}; }
  Eigen::Map<const Vector> flat() const { return {values_.data(), static_cast<Eigen::Index>(size())}; }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

// Trainable (or frozen) named tensor with a gradient buffer of the same shape.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
  // Weight decay applies to weight matrices and embeddings, never to biases.
  bool decay = true;

  Parameter(std::string n, Tensor v, bool is_bias = false)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()), decay(!is_bias) {}

  void zero_grad() { grad.fill(0.0); }
};

enum class Init { kZero, kXavier };

// Owns the parameters of a model. Addresses are stable for the lifetime of
// the set, so graph operations may hold raw references across calls.
class ParameterSet {
 public:
  Parameter& add(const std::string& name, const Shape& shape, Init init, Rng& rng, bool is_bias = false);

  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  // Definition order.
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

// Xavier/Glorot uniform fill: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
void xavier_uniform(Tensor& t, Rng& rng);

}  // namespace vc::compute
