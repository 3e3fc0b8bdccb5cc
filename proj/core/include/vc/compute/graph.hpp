#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vc/compute/tensor.hpp"

namespace vc::compute {

// l2norm and every divisor in the engine add this to keep gradients finite.
inline constexpr double kEpsilon = 1e-8;

// Handle to a node in a Graph. Cheap to copy; only meaningful for the graph
// that produced it.
class Var {
 public:
  Var() = default;
  int id() const { return id_; }
  bool valid() const { return id_ >= 0; }

 private:
  friend class Graph;
  explicit Var(int id) : id_(id) {}
  int id_ = -1;
};

using Mask = std::vector<bool>;

// Per-example reverse-mode computation graph. Nodes hold vectors; scalars are
// length-1 vectors. Parameter-backed operations accumulate into
// Parameter::grad on backward(). Reading values never touches parameters, so
// concurrent forward passes over frozen parameters are safe as long as each
// thread owns its Graph.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaves.
  Var constant(Vector value);
  Var constant(std::span<const double> value);
  Var scalar_constant(double v);
  Var parameter(Parameter& p);                       // whole tensor, flattened
  Var row(Parameter& table, std::size_t r);          // embedding lookup

  // fc layers. W has shape [out, in].
  Var linear(Parameter& w, Var x);
  Var affine(Parameter& w, Parameter& b, Var x);
  // W[:, offset : offset + dim(x)] x. Lets fc([a, b]) be evaluated as the sum
  // of two column-block products that can be reused across pairs.
  Var linear_block(Parameter& w, std::size_t col_offset, Var x);
  Var affine_block(Parameter& w, Parameter& b, std::size_t col_offset, Var x);

  // Elementwise.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var neg(Var a) { return scale(a, -1.0); }
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var log_sigmoid(Var a);

  // Structural.
  Var concat(std::span<const Var> parts);
  Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }
  Var slice(Var a, std::size_t offset, std::size_t length);
  Var pick(Var a, std::size_t index);

  // Reductions.
  Var sum(Var a);
  Var dot(Var a, Var b);
  Var max(Var a);  // subgradient routed to the first maximal entry
  Var weighted_sum(Var weights, std::span<const Var> rows);

  // x / (||x||_2 + eps).
  Var l2norm(Var a);
  // Masked entries are exactly zero. Throws DomainError when all are masked.
  Var softmax(Var a, const Mask* mask = nullptr);
  // Masked entries hold 0 and receive no gradient.
  Var log_softmax(Var a, const Mask* mask = nullptr);
  // log(max(1 - prod_j (1 - p_j), floor)).
  Var noisy_or_log(Var probs, double floor);

  const Vector& value(Var v) const { return nodes_[v.id_].value; }
  const Vector& grad(Var v) const { return nodes_[v.id_].grad; }
  double scalar(Var v) const;
  std::size_t dim(Var v) const { return static_cast<std::size_t>(nodes_[v.id_].value.size()); }
  std::size_t node_count() const { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 and propagates to every node and parameter.
  // May be called once per graph.
  void backward(Var root);

 private:
  struct Node {
    Vector value;
    Vector grad;
    std::function<void(const Vector& g)> back;
  };

  Var push(Vector value, std::function<void(const Vector& g)> back = {});
  Vector& g(int id) { return nodes_[id].grad; }
  const Vector& val(int id) const { return nodes_[id].value; }
  void check_same(Var a, Var b, const char* op) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace vc::compute
