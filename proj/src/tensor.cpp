#include "ndr/tensor.hpp"

#include <cmath>
#include <sstream>

namespace ndr {

std::size_t numel_of(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

std::span<double> detail::TensorImpl::grad_buffer() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  return grad;
}

Tensor::Tensor() : impl_(std::make_shared<detail::TensorImpl>()) { impl_->shape = {0}; }

Tensor::Tensor(Shape shape, double fill) : impl_(std::make_shared<detail::TensorImpl>()) {
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  impl_->data.assign(numel_of(shape), fill);
  impl_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  if (numel_of(shape) != values.size()) {
    throw DimensionError("shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) throw DimensionError("axis out of range for " + shape_str(shape()));
  return impl_->shape[axis];
}

namespace {
std::size_t flat_index(const Shape& shape, std::initializer_list<std::size_t> index) {
  if (index.size() != shape.size()) throw DimensionError("index rank mismatch for " + shape_str(shape));
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape[axis]) throw DimensionError("index out of range for " + shape_str(shape));
    flat = flat * shape[axis] + i;
    ++axis;
  }
  return flat;
}
}  // namespace

double Tensor::at(std::initializer_list<std::size_t> index) const {
  return impl_->data[flat_index(shape(), index)];
}

double& Tensor::at(std::initializer_list<std::size_t> index) {
  return impl_->data[flat_index(shape(), index)];
}

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return impl_->data[0];
}

Tensor& Tensor::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  return *this;
}

std::vector<double> Tensor::grad() const {
  if (impl_->grad.empty()) return std::vector<double>(numel(), 0.0);
  return impl_->grad;
}

Tensor Tensor::clone() const {
  Tensor out;
  out.impl_->shape = impl_->shape;
  out.impl_->data = impl_->data;
  return out;
}

Tape& Tape::active() {
  thread_local Tape tape;
  return tape;
}

void Tape::backward(const Tensor& loss) {
  const auto& root = loss.impl();
  if (loss.numel() != 1) {
    throw GraphError("backward() needs a scalar loss, got " + shape_str(loss.shape()));
  }
  if (!root->requires_grad || !root->recorded) {
    throw GraphError("backward() on a loss that is detached from the tape");
  }
  root->grad_buffer()[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->output->grad.empty()) continue;  // not reachable from the loss
    it->backward();
  }
  entries_.clear();
}

void backward(const Tensor& loss) { Tape::active().backward(loss); }

void check_finite(std::span<const double> values, const char* where) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NonFiniteError(std::string("non-finite value produced by ") + where);
  }
}

}  // namespace ndr
