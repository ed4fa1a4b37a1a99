#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace replume {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<float> data;   // flat, row-major
  std::vector<float> grad;   // empty until first use
  bool requires_grad = false;
};

// Allocates a zero-filled gradient buffer if the tensor does not have one yet.
void ensure_grad(TensorImpl& impl);

}  // namespace detail

// Dense row-major float32 tensor with an optional gradient buffer.
// Copying a Tensor copies the handle, not the storage: model parameters are
// shared between the tape, the optimizer and checkpointing by design.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, float value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<float> data, bool requires_grad = false);
  static Tensor scalar(float value);
  // Normal(0, stdev) with samples beyond 2*stdev redrawn.
  static Tensor truncated_normal(Shape shape, float stdev, std::mt19937_64& rng,
                                 bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<float> data();
  std::span<const float> data() const;

  float item() const;  // single-element read; throws ShapeError if size() != 1
  float at(std::size_t i) const;
  float at(std::size_t i, std::size_t j) const;
  float& at(std::size_t i);
  float& at(std::size_t i, std::size_t j);

  bool requires_grad() const;
  void set_requires_grad(bool value);

  bool has_grad() const;
  std::span<float> grad();
  std::span<const float> grad() const;
  void ensure_grad();
  void zero_grad();

  // Identity of the underlying storage; two handles alias iff impls are equal.
  const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

}  // namespace replume
