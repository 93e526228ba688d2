#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <vector>

#include "vvnet/common.hpp"

namespace vvnet {

inline std::int64_t shape_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    require(d >= 0, ErrorCategory::shape, "negative dimension");
    n *= d;
  }
  return n;
}

inline std::vector<std::int64_t> strides_of(const std::vector<int>& shape) {
  std::vector<std::int64_t> st(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i)
    st[i] = st[i + 1] * shape[i + 1];
  return st;
}

inline std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

// Dense row-major tensor (last axis fastest) with an optional gradient
// buffer of the same shape.
template <class S>
struct Tensor {
  std::vector<int> shape;
  std::vector<S> values;
  std::vector<S> grad;  // empty unless ensure_grad() was called

  Tensor() = default;
  explicit Tensor(std::vector<int> shp)
      : shape(std::move(shp)), values(static_cast<std::size_t>(shape_numel(shape)), S(0)) {}

  static Tensor zeros(std::vector<int> shp) { return Tensor(std::move(shp)); }

  std::int64_t numel() const { return static_cast<std::int64_t>(values.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), S(0));
  }
  void zero_grad() { grad.assign(values.size(), S(0)); }

  S& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
  const S& operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }

  S* data() { return values.data(); }
  const S* data() const { return values.data(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (S v : values)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <class T>
  Tensor<T> cast() const {
    Tensor<T> out;
    out.shape = shape;
    out.values.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = static_cast<T>(values[i]);
    return out;
  }
};

template <class S>
inline void check_shape(const Tensor<S>& t, const std::vector<int>& want, const char* what) {
  require(t.shape == want, ErrorCategory::shape,
          std::string(what) + ": expected shape " + shape_str(want) + ", got " + shape_str(t.shape));
}

}  // namespace vvnet
