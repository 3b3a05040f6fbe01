#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridlab {

// Dense row-major n-d array. Plain value type; copies never alias.
template <typename T>
struct TensorT {
  std::vector<std::int64_t> shape;
  std::vector<T> data;

  TensorT() = default;
  explicit TensorT(std::vector<std::int64_t> s)
      : shape(std::move(s)), data(checked_numel(shape), T(0)) {}
  TensorT(std::vector<std::int64_t> s, std::vector<T> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<std::int64_t>(data.size()) != checked_numel(shape))
      throw std::invalid_argument("tensor data does not match shape");
  }

  static TensorT zeros(std::vector<std::int64_t> s) { return TensorT(std::move(s)); }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  std::int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& at(std::initializer_list<std::int64_t> idx) {
    return data[static_cast<size_t>(flat(idx))];
  }
  T at(std::initializer_list<std::int64_t> idx) const {
    return data[static_cast<size_t>(flat(idx))];
  }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i)
      s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
  }

 private:
  static std::int64_t checked_numel(const std::vector<std::int64_t>& s) {
    std::int64_t n = 1;
    for (auto d : s) {
      if (d < 0) throw std::invalid_argument("negative dimension");
      n *= d;
    }
    return n;
  }
  std::int64_t flat(std::initializer_list<std::int64_t> idx) const {
    std::int64_t off = 0;
    size_t k = 0;
    for (auto i : idx) off = off * shape[k++] + i;
    return off;
  }
};

using Tensor = TensorT<float>;

}  // namespace gridlab
