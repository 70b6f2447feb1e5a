#include "pdnet/tensor.hpp"

#include <cmath>
#include <sstream>

namespace pdnet {

int shape_size(const Shape& s) {
  int n = 1;
  for (int d : s) {
    if (d <= 0) throw ShapeError("shape dimension must be positive, got " + shape_str(s));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i];
  }
  os << ")";
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : data_(std::make_shared<std::vector<double>>(shape_size(shape), fill)),
      shape_(std::move(shape)) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : data_(std::make_shared<std::vector<double>>(std::move(values))),
      shape_(std::move(shape)) {
  if (static_cast<int>(data_->size()) != shape_size(shape_)) {
    throw ShapeError("value count " + std::to_string(data_->size()) +
                     " does not match shape " + shape_str(shape_));
  }
}

double Tensor::value() const {
  if (!defined() || size() != 1 || rank() != 0)
    throw ShapeError("value() requires a rank-0 tensor, got " + shape_str(shape_));
  return (*data_)[0];
}

bool Tensor::all_finite() const {
  for (double v : *data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double v : *data_) m = std::max(m, std::abs(v));
  return m;
}

Tensor Tensor::detached() const {
  Tensor t = *this;
  t.tape_ = nullptr;
  t.node_ = -1;
  return t;
}

Tensor Tensor::clone() const {
  Tensor t;
  t.data_ = std::make_shared<std::vector<double>>(*data_);
  t.shape_ = shape_;
  return t;
}

Tensor Tape::watch(const Tensor& t) {
  if (!t.defined()) throw ShapeError("cannot watch an undefined tensor");
  if (t.tape_ == this) return t;
  if (t.tape_ != nullptr) throw ConfigError("tensor is already tracked on another tape");
  Tensor out = t;
  out.tape_ = this;
  out.node_ = record(nullptr, t.size());
  return out;
}

int Tape::record(BackwardFn backward, int out_size) {
  nodes_.push_back(Node{std::move(backward), out_size});
  return static_cast<int>(nodes_.size()) - 1;
}

Tensor Tape::make_tracked(Shape shape, std::vector<double> values, BackwardFn backward) {
  return adopt(Tensor(std::move(shape), std::move(values)), std::move(backward));
}

Tensor Tape::adopt(const Tensor& t, BackwardFn backward) {
  if (t.tracked()) throw ConfigError("adopt: tensor is already tracked");
  Tensor out = t;
  out.tape_ = this;
  out.node_ = record(std::move(backward), out.size());
  return out;
}

std::vector<double>& Tape::accum(int node, int size) {
  if (grads_[node].empty()) grads_[node].assign(size, 0.0);
  return grads_[node];
}

void Tape::backward(const Tensor& loss) {
  if (loss.tape_ != this) throw ConfigError("backward: tensor is not tracked on this tape");
  if (loss.size() != 1) throw ShapeError("backward requires a scalar, got " + shape_str(loss.shape()));
  grads_.assign(nodes_.size(), {});
  grads_[loss.node_] = {1.0};
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    if (grads_[i].empty() || !nodes_[i].backward) continue;
    nodes_[i].backward(*this, grads_[i]);
  }
  ran_backward_ = true;
}

const std::vector<double>* Tape::grad(const Tensor& t) const {
  if (t.tape_ != this) throw ConfigError("grad: tensor is not tracked on this tape");
  if (!ran_backward_) throw ConfigError("grad: backward has not been run");
  if (grads_[t.node_].empty()) return nullptr;
  return &grads_[t.node_];
}

std::vector<double> Tape::grad_or_zeros(const Tensor& t) const {
  const std::vector<double>* g = grad(t);
  if (g) return *g;
  return std::vector<double>(t.size(), 0.0);
}

}  // namespace pdnet
