#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ndr {

using Shape = std::vector<std::size_t>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

std::size_t numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  bool recorded = false;  // produced by an op on the tape

  std::span<double> grad_buffer();
};

}  // namespace detail

/// Dense row-major array of doubles with reference semantics (copies share
/// storage, like a framework tensor handle). Use clone() for a deep copy.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor(Shape{1}, v); }

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return impl_->data.size(); }

  std::span<double> data() { return impl_->data; }
  std::span<const double> data() const { return impl_->data; }
  double operator[](std::size_t i) const { return impl_->data[i]; }
  double& operator[](std::size_t i) { return impl_->data[i]; }
  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on = true);
  bool has_grad() const { return !impl_->grad.empty(); }
  /// Gradient view; all zeros if nothing has been accumulated yet.
  std::vector<double> grad() const;
  std::span<double> grad_mut() { return impl_->grad_buffer(); }
  void zero_grad() { impl_->grad.clear(); }

  Tensor clone() const;   // deep copy of values, not attached to the tape
  Tensor detach() const { return clone(); }

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }
  const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Ordered record of differentiable ops executed on the current thread.
/// backward() replays adjoints in exact reverse execution order.
class Tape {
 public:
  struct Entry {
    const char* op;
    std::shared_ptr<detail::TensorImpl> output;
    std::function<void()> backward;
  };

  static Tape& active();

  bool enabled() const { return enabled_; }
  void set_enabled(bool on) { enabled_ = on; }
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }
  void record(Entry entry) { entries_.push_back(std::move(entry)); }

  void backward(const Tensor& loss);

 private:
  std::vector<Entry> entries_;
  bool enabled_ = true;
};

/// Disables op recording for the guard's lifetime (evaluation passes).
class NoGradGuard {
 public:
  NoGradGuard() : prev_(Tape::active().enabled()) { Tape::active().set_enabled(false); }
  ~NoGradGuard() { Tape::active().set_enabled(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

/// Populates grad of every requires_grad leaf reachable from `loss`.
/// The tape is cleared afterwards.
void backward(const Tensor& loss);

void check_finite(std::span<const double> values, const char* where);

}  // namespace ndr
