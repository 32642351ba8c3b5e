#pragma once

#include "eamat/common.hpp"

#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>

namespace eamat {

class Graph;

/// Dense row-major tensor of 64-bit floats, optionally tracked by a
/// reverse-mode tape. A Tensor is a shared handle: copies alias the same
/// storage, which is what lets parameters, optimizer state and graph nodes
/// refer to one buffer.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Real value, bool requires_grad = false);
  static Tensor scalar(Real value);
  static Tensor vector(std::initializer_list<Real> values);
  static Tensor vector(const std::vector<Real>& values);
  static Tensor from_rows(std::initializer_list<std::initializer_list<Real>> rows);
  static Tensor from_flat(Shape shape, ArrayX data, bool requires_grad = false);
  static Tensor uniform(Shape shape, Real lo, Real hi, Rng& rng, bool requires_grad = false);

  bool valid() const { return impl_ != nullptr; }

  const Shape& shape() const { return impl_->shape; }
  Index rank() const { return static_cast<Index>(impl_->shape.size()); }
  Index size() const { return impl_->value.size(); }
  Index extent(Index axis) const { return impl_->shape[static_cast<size_t>(axis)]; }
  Index rows() const;
  Index cols() const;

  ArrayX& values() { return impl_->value; }
  const ArrayX& values() const { return impl_->value; }
  Real operator[](Index flat) const { return impl_->value[flat]; }
  Real& at(Index flat) { return impl_->value[flat]; }
  Real at2(Index r, Index c) const;
  Real scalar_value() const;

  /// Rank-2 view (rank-1 maps to a single row, rank-0 to 1x1).
  CMatMap matrix() const;
  MatMap matrix();

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool v);

  bool has_grad() const { return impl_->grad.size() > 0; }
  ArrayX& grad_buffer();
  /// Gradient contents; exact zeros when nothing has been accumulated.
  ArrayX grad() const;
  void zero_grad() { impl_->grad.resize(0); }
  void accumulate_grad(const ArrayX& g);

  Graph* graph() const;
  int node_id() const { return impl_->node; }

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  friend class Graph;

  struct Impl {
    Shape shape;
    ArrayX value;
    ArrayX grad;  // size 0 until first accumulation
    bool requires_grad = false;
    std::weak_ptr<Graph> producer;
    int node = -1;
  };

  std::shared_ptr<Impl> impl_;

  static Tensor make(Shape shape, ArrayX data, bool requires_grad);
};

/// Reverse-mode tape. Nodes are appended in execution order, so append order
/// is a topological order; backward sweeps the list once in reverse.
/// Graphs are rebuilt per forward pass and must be held in a shared_ptr
/// (use Graph::create) so tensors can name their producer safely.
class Graph : public std::enable_shared_from_this<Graph> {
 public:
  struct Node {
    const char* op;
    std::vector<Tensor> inputs;
    Tensor output;
    std::function<void(const ArrayX& out_grad)> backward;
  };

  static std::shared_ptr<Graph> create() { return std::shared_ptr<Graph>(new Graph()); }

  void record(const char* op, std::vector<Tensor> inputs, Tensor& output,
              std::function<void(const ArrayX&)> backward);

  /// Seeds d(loss)/d(loss)=1 and accumulates into every reachable
  /// gradient-tracked tensor. Leaf gradients accumulate across calls;
  /// intermediate gradients are reset on every call.
  void backward(const Tensor& loss);

  size_t size() const { return nodes_.size(); }
  const Node& node(size_t i) const { return nodes_[i]; }

  /// First node whose output holds a non-finite value, if any.
  std::optional<std::pair<size_t, std::string>> first_nonfinite() const;

 private:
  Graph() = default;
  std::vector<Node> nodes_;
};

/// Scoped activation of a tape: ops record onto the innermost active graph.
/// No active graph means pure evaluation (inference mode).
class TapeScope {
 public:
  explicit TapeScope(const std::shared_ptr<Graph>& g);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Graph* prev_;
  std::shared_ptr<Graph> held_;
};

Graph* active_graph();

// ---- kernels -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// Elementwise binaries accept equal shapes, a size-1 scalar on either side,
/// or a rank-1 vector of length rows paired with a rank-2 matrix
/// (scalar-per-row broadcast over the feature axis).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);

Tensor softmax(const Tensor& x, int axis);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, Real eps);

Tensor concat(std::span<const Tensor> parts, int axis);
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& x, int axis, Index start, Index count);
Tensor reshape(const Tensor& x, Shape shape);

/// Bias broadcast: adds a length-d vector to every row of a Txd matrix.
Tensor add_rowvec(const Tensor& x, const Tensor& bias);

Tensor sum(const Tensor& x);
Tensor scale(const Tensor& x, Real c);

/// Gathers rows of `table` at `ids`; gradients scatter back to those rows only.
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids);

/// -log softmax(scores)[target], fused for stability. scores is rank-1.
Tensor cross_entropy_logits(const Tensor& scores, Index target);
/// -log p[target] on an explicit probability vector.
Tensor nll_pick(const Tensor& probs, Index target);
/// Mean binary cross-entropy with probabilities clamped to [1e-7, 1-1e-7].
Tensor bce_mean(const Tensor& probs, const std::vector<int>& targets);

void backward(const Tensor& loss);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

}  // namespace eamat
