#include "replume/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "replume/errors.hpp"
#include "replume/tape.hpp"

namespace replume {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << "x";
    out << shape[i];
  }
  out << "]";
  return out.str();
}

namespace detail {

void ensure_grad(TensorImpl& impl) {
  if (impl.grad.empty()) impl.grad.assign(impl.data.size(), 0.0f);
}

}  // namespace detail

namespace {

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have rank >= 1");
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor shape " + shape_str(shape) + " has a zero dimension");
  }
}

std::shared_ptr<detail::TensorImpl> make_impl(Shape shape, std::vector<float> data,
                                              bool requires_grad) {
  validate_shape(shape);
  if (shape_size(shape) != data.size()) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_str(shape));
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  impl->requires_grad = requires_grad;
  return impl;
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0f, requires_grad);
}

Tensor Tensor::full(Shape shape, float value, bool requires_grad) {
  validate_shape(shape);
  std::vector<float> data(shape_size(shape), value);
  return Tensor(make_impl(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::from_data(Shape shape, std::vector<float> data, bool requires_grad) {
  return Tensor(make_impl(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::scalar(float value) { return from_data({1}, {value}); }

Tensor Tensor::truncated_normal(Shape shape, float stdev, std::mt19937_64& rng,
                                bool requires_grad) {
  validate_shape(shape);
  std::normal_distribution<float> dist(0.0f, stdev);
  std::vector<float> data(shape_size(shape));
  for (float& x : data) {
    float v = dist(rng);
    while (std::abs(v) > 2.0f * stdev) v = dist(rng);
    x = v;
  }
  return Tensor(make_impl(std::move(shape), std::move(data), requires_grad));
}

const Shape& Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::rank() const { return impl_->shape.size(); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= impl_->shape.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_str(impl_->shape));
  }
  return impl_->shape[axis];
}

std::size_t Tensor::size() const { return impl_->data.size(); }

std::span<float> Tensor::data() { return impl_->data; }
std::span<const float> Tensor::data() const { return impl_->data; }

float Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item() requires a single-element tensor, got " + shape_str(impl_->shape));
  }
  return impl_->data[0];
}

float Tensor::at(std::size_t i) const { return impl_->data.at(i); }

float Tensor::at(std::size_t i, std::size_t j) const {
  if (rank() != 2) throw ShapeError("2-d access on tensor of shape " + shape_str(impl_->shape));
  return impl_->data.at(i * impl_->shape[1] + j);
}

float& Tensor::at(std::size_t i) { return impl_->data.at(i); }

float& Tensor::at(std::size_t i, std::size_t j) {
  if (rank() != 2) throw ShapeError("2-d access on tensor of shape " + shape_str(impl_->shape));
  return impl_->data.at(i * impl_->shape[1] + j);
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }

void Tensor::set_requires_grad(bool value) { impl_->requires_grad = value; }

bool Tensor::has_grad() const { return defined() && !impl_->grad.empty(); }

std::span<float> Tensor::grad() {
  ensure_grad();
  return impl_->grad;
}

std::span<const float> Tensor::grad() const {
  if (impl_->grad.empty()) throw NumericError("gradient buffer not populated");
  return impl_->grad;
}

void Tensor::ensure_grad() { detail::ensure_grad(*impl_); }

void Tensor::zero_grad() {
  if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0f);
}

void backward(const Tensor& loss, Tape& tape) {
  if (!loss.defined() || loss.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got " +
                     (loss.defined() ? shape_str(loss.shape()) : std::string("<empty>")));
  }
  // Intermediates get fresh gradients every call; leaves are never node
  // outputs, so their gradients survive and accumulate.
  for (const TapeNode& node : tape.nodes()) {
    node.output->grad.assign(node.output->data.size(), 0.0f);
  }
  loss.impl()->grad.assign(1, 1.0f);
  const auto& nodes = tape.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    if (it->backward) it->backward();
  }
}

}  // namespace replume
