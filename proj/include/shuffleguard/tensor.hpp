#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace shuffleguard {

template <typename S>
using MatrixRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using ArrayX = Eigen::Array<S, Eigen::Dynamic, 1>;

inline std::string shape_string(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

inline int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw std::invalid_argument("negative dimension in shape " + shape_string(shape));
    n *= d;
  }
  return n;
}

// Dense row-major tensor. An empty shape is a scalar holding one element.
template <typename S>
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<S> data;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> dims)
      : shape(std::move(dims)), data(static_cast<std::size_t>(shape_numel(shape)), S(0)) {}
  Tensor(std::vector<int64_t> dims, std::vector<S> values)
      : shape(std::move(dims)), data(std::move(values)) {
    if (static_cast<int64_t>(data.size()) != shape_numel(shape)) {
      throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                  " does not match shape " + shape_string(shape));
    }
  }

  static Tensor zeros(std::vector<int64_t> dims) { return Tensor(std::move(dims)); }
  static Tensor full(std::vector<int64_t> dims, S v) {
    Tensor t(std::move(dims));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }
  static Tensor scalar(S v) {
    Tensor t{std::vector<int64_t>{}};
    t.data[0] = v;
    return t;
  }

  std::size_t rank() const { return shape.size(); }
  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int64_t dim(std::size_t i) const {
    if (i >= shape.size()) {
      throw std::invalid_argument("dimension index " + std::to_string(i) +
                                  " out of range for shape " + shape_string(shape));
    }
    return shape[i];
  }

  Eigen::Map<MatrixRM<S>> matrix(int64_t rows, int64_t cols) {
    check_view(rows * cols);
    return {data.data(), rows, cols};
  }
  Eigen::Map<const MatrixRM<S>> matrix(int64_t rows, int64_t cols) const {
    check_view(rows * cols);
    return {data.data(), rows, cols};
  }
  Eigen::Map<ArrayX<S>> flat() { return {data.data(), numel()}; }
  Eigen::Map<const ArrayX<S>> flat() const { return {data.data(), numel()}; }

 private:
  void check_view(int64_t n) const {
    if (n != numel()) {
      throw std::invalid_argument("view of " + std::to_string(n) +
                                  " elements requested on shape " + shape_string(shape));
    }
  }
};

template <typename S>
struct NamedTensor {
  std::string name;
  Tensor<S> value;
};

}  // namespace shuffleguard
