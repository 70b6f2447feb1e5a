#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pdnet/errors.hpp"

namespace pdnet {

using Shape = std::vector<int>;

int shape_size(const Shape& s);
std::string shape_str(const Shape& s);

class Tape;

// Dense double tensor with value semantics over shared storage. A tensor is
// either plain data or tracked on a Tape; arithmetic on tracked tensors
// records backward rules as a side effect (define-by-run).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);
  static Tensor scalar(double v) { return Tensor(Shape{}, {v}); }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int size() const { return data_ ? static_cast<int>(data_->size()) : 0; }
  bool defined() const { return static_cast<bool>(data_); }

  double* data() { return data_->data(); }
  const double* data() const { return data_->data(); }
  std::vector<double>& vec() { return *data_; }
  const std::vector<double>& vec() const { return *data_; }

  // Scalar (rank-0) value.
  double value() const;

  bool tracked() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }

  bool all_finite() const;
  double max_abs() const;

  // Same storage, no tape. Gradients do not flow past a detached tensor.
  Tensor detached() const;
  // Deep copy, no tape.
  Tensor clone() const;

 private:
  friend class Tape;
  std::shared_ptr<std::vector<double>> data_;
  Shape shape_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

// Reverse-mode tape. Every op output becomes one node; backward() seeds the
// scalar loss with 1 and sweeps the nodes exactly once in reverse recording
// order, accumulating gradients additively at fan-out.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers a leaf; the returned tensor shares storage with t.
  Tensor watch(const Tensor& t);

  void backward(const Tensor& loss);
  bool ran_backward() const { return ran_backward_; }

  // Gradient of the last backward() w.r.t. a tensor tracked on this tape.
  // Null if the tensor never influenced the loss.
  const std::vector<double>* grad(const Tensor& t) const;
  std::vector<double> grad_or_zeros(const Tensor& t) const;

  std::size_t node_count() const { return nodes_.size(); }

  // --- op-recording interface (used by the ops layer) ---
  using BackwardFn = std::function<void(Tape&, const std::vector<double>&)>;
  int record(BackwardFn backward, int out_size);
  Tensor make_tracked(Shape shape, std::vector<double> values, BackwardFn backward);
  // Tracks an existing plain tensor as an op output (shares its storage).
  Tensor adopt(const Tensor& t, BackwardFn backward);
  // Gradient accumulator for a node, lazily zero-initialized to `size`.
  std::vector<double>& accum(int node, int size);

 private:
  struct Node {
    BackwardFn backward;  // may be empty (leaves)
    int out_size = 0;
  };
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
  bool ran_backward_ = false;
};

}  // namespace pdnet
