#include "vc/compute/graph.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace vc::compute {

namespace {

void require_finite(const Vector& v, const char* op) {
  if (!v.allFinite()) throw NumericalError(std::string("non-finite value produced by ") + op);
}

}  // namespace

Var Graph::push(Vector value, std::function<void(const Vector& g)> back) {
  if (backward_done_) throw DomainError("graph already differentiated; build a new graph");
  nodes_.push_back(Node{std::move(value), Vector(), std::move(back)});
  return Var(static_cast<int>(nodes_.size() - 1));
}

void Graph::check_same(Var a, Var b, const char* op) const {
  if (dim(a) != dim(b))
    throw DimensionError(std::string(op) + ": extents " + std::to_string(dim(a)) + " and " + std::to_string(dim(b)));
}

double Graph::scalar(Var v) const {
  const auto& x = value(v);
  if (x.size() != 1) throw DimensionError("expected a scalar node, got extent " + std::to_string(x.size()));
  return x[0];
}

Var Graph::constant(Vector value) {
  require_finite(value, "constant");
  return push(std::move(value));
}

Var Graph::constant(std::span<const double> value) {
  Vector v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) v[static_cast<Eigen::Index>(i)] = value[i];
  return constant(std::move(v));
}

Var Graph::scalar_constant(double v) { return constant(Vector::Constant(1, v)); }

Var Graph::parameter(Parameter& p) {
  Vector v = p.value.flat();
  require_finite(v, "parameter");
  Parameter* ptr = &p;
  return push(std::move(v), [ptr](const Vector& g) { ptr->grad.flat() += g; });
}

Var Graph::row(Parameter& table, std::size_t r) {
  if (table.value.rank() != 2 || r >= table.value.rows())
    throw DimensionError("row " + std::to_string(r) + " out of range for " + table.name + " " +
                         shape_string(table.value.shape()));
  Vector v = table.value.matrix().row(static_cast<Eigen::Index>(r)).transpose();
  Parameter* ptr = &table;
  return push(std::move(v),
              [ptr, r](const Vector& g) { ptr->grad.matrix().row(static_cast<Eigen::Index>(r)) += g.transpose(); });
}

Var Graph::linear(Parameter& w, Var x) {
  if (w.value.rank() != 2 || w.value.cols() != dim(x))
    throw DimensionError("fc " + w.name + " " + shape_string(w.value.shape()) + " applied to extent " +
                         std::to_string(dim(x)));
  Vector y = w.value.matrix() * val(x.id_);
  require_finite(y, "linear");
  Parameter* ptr = &w;
  const int xid = x.id_;
  return push(std::move(y), [this, ptr, xid](const Vector& g) {
    nodes_[xid].grad.noalias() += ptr->value.matrix().transpose() * g;
    ptr->grad.matrix().noalias() += g * nodes_[xid].value.transpose();
  });
}

Var Graph::affine(Parameter& w, Parameter& b, Var x) {
  if (b.value.size() != w.value.rows())
    throw DimensionError("fc bias " + b.name + " does not match " + w.name);
  Var wx = linear(w, x);
  Vector y = val(wx.id_) + b.value.flat();
  require_finite(y, "affine");
  Parameter* bp = &b;
  const int id = wx.id_;
  return push(std::move(y), [this, bp, id](const Vector& g) {
    nodes_[id].grad += g;
    bp->grad.flat() += g;
  });
}

Var Graph::linear_block(Parameter& w, std::size_t col_offset, Var x) {
  const std::size_t n = dim(x);
  if (w.value.rank() != 2 || col_offset + n > w.value.cols())
    throw DimensionError("fc block of " + w.name + " " + shape_string(w.value.shape()) + " at column " +
                         std::to_string(col_offset) + " applied to extent " + std::to_string(n));
  const auto off = static_cast<Eigen::Index>(col_offset);
  const auto cols = static_cast<Eigen::Index>(n);
  Vector y = w.value.matrix().middleCols(off, cols) * val(x.id_);
  require_finite(y, "linear_block");
  Parameter* ptr = &w;
  const int xid = x.id_;
  return push(std::move(y), [this, ptr, xid, off, cols](const Vector& g) {
    nodes_[xid].grad.noalias() += ptr->value.matrix().middleCols(off, cols).transpose() * g;
    ptr->grad.matrix().middleCols(off, cols).noalias() += g * nodes_[xid].value.transpose();
  });
}

Var Graph::affine_block(Parameter& w, Parameter& b, std::size_t col_offset, Var x) {
  if (b.value.size() != w.value.rows())
    throw DimensionError("fc bias " + b.name + " does not match " + w.name);
  Var wx = linear_block(w, col_offset, x);
  Vector y = val(wx.id_) + b.value.flat();
  Parameter* bp = &b;
  const int id = wx.id_;
  return push(std::move(y), [this, bp, id](const Vector& g) {
    nodes_[id].grad += g;
    bp->grad.flat() += g;
  });
}

Var Graph::add(Var a, Var b) {
  check_same(a, b, "add");
  const int ia = a.id_, ib = b.id_;
  return push(val(ia) + val(ib), [this, ia, ib](const Vector& g) {
    nodes_[ia].grad += g;
    nodes_[ib].grad += g;
  });
}

Var Graph::sub(Var a, Var b) {
  check_same(a, b, "sub");
  const int ia = a.id_, ib = b.id_;
  return push(val(ia) - val(ib), [this, ia, ib](const Vector& g) {
    nodes_[ia].grad += g;
    nodes_[ib].grad -= g;
  });
}

Var Graph::mul(Var a, Var b) {
  check_same(a, b, "mul");
  const int ia = a.id_, ib = b.id_;
  Vector y = val(ia).cwiseProduct(val(ib));
  require_finite(y, "mul");
  return push(std::move(y), [this, ia, ib](const Vector& g) {
    nodes_[ia].grad += g.cwiseProduct(nodes_[ib].value);
    nodes_[ib].grad += g.cwiseProduct(nodes_[ia].value);
  });
}

Var Graph::scale(Var a, double s) {
  const int ia = a.id_;
  Vector y = val(ia) * s;
  require_finite(y, "scale");
  return push(std::move(y), [this, ia, s](const Vector& g) { nodes_[ia].grad += s * g; });
}

Var Graph::sigmoid(Var a) {
  const int ia = a.id_;
  Vector y = val(ia).unaryExpr([](double v) {
    return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  });
  const int iy = static_cast<int>(nodes_.size());
  return push(std::move(y), [this, ia, iy](const Vector& g) {
    const Vector& y = nodes_[iy].value;
    nodes_[ia].grad += g.cwiseProduct(y.cwiseProduct(Vector::Ones(y.size()) - y));
  });
}

Var Graph::tanh(Var a) {
  const int ia = a.id_;
  Vector y = val(ia).array().tanh().matrix();
  const int iy = static_cast<int>(nodes_.size());
  return push(std::move(y), [this, ia, iy](const Vector& g) {
    const Vector& y = nodes_[iy].value;
    nodes_[ia].grad += g.cwiseProduct((1.0 - y.array().square()).matrix());
  });
}

Var Graph::exp(Var a) {
  const int ia = a.id_;
  Vector y = val(ia).array().exp().matrix();
  return push(Vector(y), [this, ia, y](const Vector& g) { nodes_[ia].grad += g.cwiseProduct(y); });
}

Var Graph::log(Var a) {
  const int ia = a.id_;
  if ((val(ia).array() <= 0.0).any()) throw DomainError("log of non-positive value");
  Vector y = val(ia).array().log().matrix();
  return push(std::move(y), [this, ia](const Vector& g) { nodes_[ia].grad += g.cwiseQuotient(nodes_[ia].value); });
}

Var Graph::log_sigmoid(Var a) {
  const int ia = a.id_;
  // log sigma(x) = -softplus(-x), evaluated without overflow.
  Vector y = val(ia).unaryExpr([](double v) { return v >= 0 ? -std::log1p(std::exp(-v)) : v - std::log1p(std::exp(v)); });
  return push(std::move(y), [this, ia](const Vector& g) {
    const Vector& x = nodes_[ia].value;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double v = x[k];
      const double one_minus_sig = v >= 0 ? std::exp(-v) / (1.0 + std::exp(-v)) : 1.0 / (1.0 + std::exp(v));
      nodes_[ia].grad[k] += g[k] * one_minus_sig;
    }
  });
}

Var Graph::concat(std::span<const Var> parts) {
  Eigen::Index total = 0;
  std::vector<int> ids;
  ids.reserve(parts.size());
  for (auto p : parts) {
    total += val(p.id_).size();
    ids.push_back(p.id_);
  }
  Vector y(total);
  Eigen::Index off = 0;
  for (int id : ids) {
    const auto n = val(id).size();
    y.segment(off, n) = val(id);
    off += n;
  }
  return push(std::move(y), [this, ids = std::move(ids)](const Vector& g) {
    Eigen::Index off = 0;
    for (int id : ids) {
      const auto n = nodes_[id].value.size();
      nodes_[id].grad += g.segment(off, n);
      off += n;
    }
  });
}

Var Graph::slice(Var a, std::size_t offset, std::size_t length) {
  if (offset + length > dim(a) || length == 0) throw DimensionError("slice out of range");
  const int ia = a.id_;
  const auto off = static_cast<Eigen::Index>(offset);
  const auto len = static_cast<Eigen::Index>(length);
  return push(val(ia).segment(off, len),
              [this, ia, off, len](const Vector& g) { nodes_[ia].grad.segment(off, len) += g; });
}

Var Graph::pick(Var a, std::size_t index) {
  if (index >= dim(a)) throw DimensionError("pick index out of range");
  const int ia = a.id_;
  const auto k = static_cast<Eigen::Index>(index);
  return push(Vector::Constant(1, val(ia)[k]), [this, ia, k](const Vector& g) { nodes_[ia].grad[k] += g[0]; });
}

Var Graph::sum(Var a) {
  const int ia = a.id_;
  return push(Vector::Constant(1, val(ia).sum()), [this, ia](const Vector& g) { nodes_[ia].grad.array() += g[0]; });
}

Var Graph::dot(Var a, Var b) {
  check_same(a, b, "dot");
  const int ia = a.id_, ib = b.id_;
  const double y = val(ia).dot(val(ib));
  if (!std::isfinite(y)) throw NumericalError("non-finite value produced by dot");
  return push(Vector::Constant(1, y), [this, ia, ib](const Vector& g) {
    nodes_[ia].grad += g[0] * nodes_[ib].value;
    nodes_[ib].grad += g[0] * nodes_[ia].value;
  });
}

Var Graph::max(Var a) {
  const int ia = a.id_;
  Eigen::Index k = 0;
  const double y = val(ia).maxCoeff(&k);
  return push(Vector::Constant(1, y), [this, ia, k](const Vector& g) { nodes_[ia].grad[k] += g[0]; });
}

Var Graph::weighted_sum(Var weights, std::span<const Var> rows) {
  if (rows.empty() || dim(weights) != rows.size())
    throw DimensionError("weighted_sum: " + std::to_string(dim(weights)) + " weights for " +
                         std::to_string(rows.size()) + " rows");
  std::vector<int> ids;
  ids.reserve(rows.size());
  const auto d = val(rows[0].id_).size();
  Vector y = Vector::Zero(d);
  const Vector& w = val(weights.id_);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (val(rows[j].id_).size() != d) throw DimensionError("weighted_sum: ragged rows");
    y += w[static_cast<Eigen::Index>(j)] * val(rows[j].id_);
    ids.push_back(rows[j].id_);
  }
  const int iw = weights.id_;
  return push(std::move(y), [this, iw, ids = std::move(ids)](const Vector& g) {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      nodes_[iw].grad[jj] += nodes_[ids[j]].value.dot(g);
      nodes_[ids[j]].grad += nodes_[iw].value[jj] * g;
    }
  });
}

Var Graph::l2norm(Var a) {
  const int ia = a.id_;
  const double n = val(ia).norm();
  const double denom = n + kEpsilon;
  Vector y = val(ia) / denom;
  return push(std::move(y), [this, ia, n, denom](const Vector& g) {
    const Vector& x = nodes_[ia].value;
    nodes_[ia].grad += g / denom;
    if (n > 0.0) nodes_[ia].grad -= x * (x.dot(g) / (n * denom * denom));
  });
}

Var Graph::softmax(Var a, const Mask* mask) {
  const int ia = a.id_;
  const Vector& x = val(ia);
  if (mask && mask->size() != static_cast<std::size_t>(x.size())) throw DimensionError("softmax mask extent");
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (!mask || (*mask)[static_cast<std::size_t>(k)]) mx = std::max(mx, x[k]);
  if (!std::isfinite(mx)) throw DomainError("softmax over an all-masked input");
  Vector y = Vector::Zero(x.size());
  double total = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (!mask || (*mask)[static_cast<std::size_t>(k)]) {
      y[k] = std::exp(x[k] - mx);
      total += y[k];
    }
  y /= total;
  const int iy = static_cast<int>(nodes_.size());
  return push(std::move(y), [this, ia, iy](const Vector& g) {
    const Vector& y = nodes_[iy].value;
    const double yg = y.dot(g);
    nodes_[ia].grad += y.cwiseProduct(g - Vector::Constant(g.size(), yg));
  });
}

Var Graph::log_softmax(Var a, const Mask* mask) {
  const int ia = a.id_;
  const Vector& x = val(ia);
  if (mask && mask->size() != static_cast<std::size_t>(x.size())) throw DimensionError("log_softmax mask extent");
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (!mask || (*mask)[static_cast<std::size_t>(k)]) mx = std::max(mx, x[k]);
  if (!std::isfinite(mx)) throw DomainError("log_softmax over an all-masked input");
  double total = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (!mask || (*mask)[static_cast<std::size_t>(k)]) total += std::exp(x[k] - mx);
  const double lse = mx + std::log(total);
  Vector y = Vector::Zero(x.size());
  Vector p = Vector::Zero(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (!mask || (*mask)[static_cast<std::size_t>(k)]) {
      y[k] = x[k] - lse;
      p[k] = std::exp(y[k]);
    }
  Mask m = mask ? *mask : Mask(static_cast<std::size_t>(x.size()), true);
  return push(std::move(y), [this, ia, p = std::move(p), m = std::move(m)](const Vector& g) {
    double gs = 0.0;
    for (Eigen::Index k = 0; k < g.size(); ++k)
      if (m[static_cast<std::size_t>(k)]) gs += g[k];
    for (Eigen::Index k = 0; k < g.size(); ++k)
      if (m[static_cast<std::size_t>(k)]) nodes_[ia].grad[k] += g[k] - p[k] * gs;
  });
}

Var Graph::noisy_or_log(Var probs, double floor) {
  const int ip = probs.id_;
  const Vector& p = val(ip);
  if ((p.array() < 0.0).any() || (p.array() > 1.0).any()) throw DomainError("noisy-or input outside [0,1]");
  double prod = 1.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) prod *= 1.0 - p[k];
  const double inner = 1.0 - prod;
  const bool floored = inner < floor;
  const double y = std::log(floored ? floor : inner);
  return push(Vector::Constant(1, y), [this, ip, inner, floored](const Vector& g) {
    if (floored) return;
    const Vector& p = nodes_[ip].value;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      double others = 1.0;
      for (Eigen::Index j = 0; j < p.size(); ++j)
        if (j != k) others *= 1.0 - p[j];
      nodes_[ip].grad[k] += g[0] * others / inner;
    }
  });
}

void Graph::backward(Var root) {
  if (backward_done_) throw DomainError("backward called twice on the same graph");
  if (dim(root) != 1) throw DimensionError("backward root must be scalar");
  for (auto& n : nodes_) n.grad = Vector::Zero(n.value.size());
  nodes_[root.id_].grad[0] = 1.0;
  for (int i = root.id_; i >= 0; --i) {
    auto& n = nodes_[static_cast<std::size_t>(i)];
    // Nodes off the root's ancestry carry a zero adjoint.
    if (n.back && !n.grad.isZero(0.0)) n.back(n.grad);
  }
  backward_done_ = true;
}

}  // namespace vc::compute
