// Dense row-major tensor plus the handful of kernels the models need.
// Training math runs in double; checkpoints downcast to float32 on disk.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "snipforge/rng.hpp"

namespace snipforge::numkit {

struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
    data.assign(numel(shape), 0.0);
  }
  Tensor(std::vector<size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != numel(shape)) throw std::invalid_argument("tensor data/shape mismatch");
  }

  static size_t numel(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
    return n;
  }

  size_t size() const { return data.size(); }
  size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(size_t i, size_t j) { return data[i * cols() + j]; }
  double at(size_t i, size_t j) const { return data[i * cols() + j]; }
  double& operator[](size_t i) { return data[i]; }
  double operator[](size_t i) const { return data[i]; }

  std::string shape_str() const {
    std::ostringstream ss;
    ss << '[';
    for (size_t i = 0; i < shape.size(); ++i) ss << (i ? "x" : "") << shape[i];
    ss << ']';
    return ss.str();
  }
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (a.shape != b.shape)
    throw std::invalid_argument(std::string(where) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

inline bool all_finite(const Tensor& t) {
  for (double v : t.data)
    if (!std::isfinite(v)) return false;
  return true;
}

inline void ensure_finite(const Tensor& t, const char* where) {
  if (!all_finite(t)) throw std::runtime_error(std::string(where) + ": non-finite values");
}

// C = A[n x k] * B[k x m]
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dims differ " + a.shape_str() + " vs " + b.shape_str());
  size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor c({n, m});
  for (size_t i = 0; i < n; ++i) {
    const double* arow = &a.data[i * k];
    double* crow = &c.data[i * m];
    for (size_t p = 0; p < k; ++p) {
      double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = &b.data[p * m];
      for (size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

// C = A^T[k x n] * B ... computed as a[n x k]^T b[n x m] -> [k x m]
inline Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("matmul_tn: outer dims differ " + a.shape_str() + " vs " + b.shape_str());
  size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor c({k, m});
  for (size_t i = 0; i < n; ++i) {
    const double* arow = &a.data[i * k];
    const double* brow = &b.data[i * m];
    for (size_t p = 0; p < k; ++p) {
      double av = arow[p];
      if (av == 0.0) continue;
      double* crow = &c.data[p * m];
      for (size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

// C = A[n x k] * B[m x k]^T -> [n x m]
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("matmul_nt: inner dims differ " + a.shape_str() + " vs " + b.shape_str());
  size_t n = a.rows(), k = a.cols(), m = b.rows();
  Tensor c({n, m});
  for (size_t i = 0; i < n; ++i) {
    const double* arow = &a.data[i * k];
    double* crow = &c.data[i * m];
    for (size_t j = 0; j < m; ++j) {
      const double* brow = &b.data[j * k];
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = acc;
    }
  }
  return c;
}

inline void axpy(double alpha, const Tensor& x, Tensor& y) {
  check_same_shape(x, y, "axpy");
  for (size_t i = 0; i < y.size(); ++i) y.data[i] += alpha * x.data[i];
}

inline double dot(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "dot");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

// Samples lie in +-sqrt(6 / (fan_in + fan_out)).
inline Tensor glorot_uniform(std::vector<size_t> shape, size_t fan_in, size_t fan_out, Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(std::move(shape));
  for (double& v : t.data) v = rng.uniform(-limit, limit);
  return t;
}

}  // namespace snipforge::numkit
