#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aed/error.hpp"

namespace aed {

enum class Precision : std::uint8_t { f32 = 32, f64 = 64 };

inline const char* precision_name(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

// When on (the default), tensors built from external data reject NaN/Inf
// entries and zero-sized dimensions. Kernel outputs skip the scan.
void set_checked_tensors(bool on);
bool checked_tensors();

namespace detail {
inline std::size_t shape_numel(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}
}  // namespace detail

// Dense row-major array of f32 or f64 values.
template <class T>
class Tensor {
  static_assert(std::is_floating_point_v<T>);

 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.check_shape();
    t.data_.assign(detail::shape_numel(t.shape_), T(0));
    return t;
  }

  static Tensor full(std::vector<std::size_t> shape, T value) {
    Tensor t = zeros(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  static Tensor from_data(std::vector<std::size_t> shape, std::vector<T> data) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    t.check_shape();
    if (t.data_.size() != detail::shape_numel(t.shape_))
      fail(errc::shape, "tensor data length " + std::to_string(t.data_.size()) +
                            " does not match shape (numel " +
                            std::to_string(detail::shape_numel(t.shape_)) + ")");
    if (checked_tensors()) t.require_finite();
    return t;
  }

  static Tensor scalar(T value) { return from_data({1}, {value}); }

  // Adopts op-output storage without the checked-mode finite scan.
  static Tensor wrap(std::vector<std::size_t> shape, std::vector<T> data) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    t.check_shape();
    if (t.data_.size() != detail::shape_numel(t.shape_))
      fail(errc::shape, "tensor data length does not match shape");
    return t;
  }

  // Seeded i.i.d. normal fill, used for parameter init.
  static Tensor randn(std::vector<std::size_t> shape, T stddev, std::uint64_t seed) {
    Tensor t = zeros(std::move(shape));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (T& v : t.data_) v = static_cast<T>(dist(rng) * static_cast<double>(stddev));
    return t;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> out = Tensor<U>::zeros(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool all_finite() const {
    for (T v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void require_finite() const {
    if (!all_finite()) fail(errc::numeric, "tensor contains non-finite entries");
  }

  static constexpr Precision precision() {
    return sizeof(T) == 4 ? Precision::f32 : Precision::f64;
  }

  std::string shape_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(shape_[i]);
    }
    return s + ")";
  }

 private:
  void check_shape() const {
    for (std::size_t d : shape_)
      if (d == 0) fail(errc::shape, "tensor shape has zero-sized dimension");
  }

  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

using Tensor32 = Tensor<float>;
using Tensor64 = Tensor<double>;

}  // namespace aed
