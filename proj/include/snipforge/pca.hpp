// PCA projection of embedding rows via a cyclic Jacobi eigensolver on the
// covariance matrix. Dimensions here are small (d <= a few hundred).
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "snipforge/tensor.hpp"

namespace snipforge::embed {

struct PcaResult {
  numkit::Tensor projected;       // [V x components]
  std::vector<double> ratios;     // explained variance per component
  numkit::Tensor components;      // [d x components], column-major loadings
};

namespace pca_detail {

// in-place cyclic Jacobi on symmetric a [n x n]; v receives eigenvectors
inline void jacobi_eigen(std::vector<double>& a, size_t n, std::vector<double>& eigvals,
                         std::vector<double>& eigvecs) {
  eigvecs.assign(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) eigvecs[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-24) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        double app = a[p * n + p], aqq = a[q * n + q];
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (size_t k = 0; k < n; ++k) {
          double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (size_t k = 0; k < n; ++k) {
          double vkp = eigvecs[k * n + p], vkq = eigvecs[k * n + q];
          eigvecs[k * n + p] = c * vkp - s * vkq;
          eigvecs[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  eigvals.resize(n);
  for (size_t i = 0; i < n; ++i) eigvals[i] = a[i * n + i];
}

}  // namespace pca_detail

// Mean-centers the rows, eigendecomposes the covariance and projects onto
// the top eigenvectors. Ratios are eigenvalues over the trace. Sign
// convention: the first nonzero loading of each component is positive.
inline PcaResult pca_project(const numkit::Tensor& rows, size_t components = 2) {
  const size_t n = rows.rows(), d = rows.cols();
  if (components > d) throw std::invalid_argument("pca_project: components exceed dimension");
  if (n < components) throw std::invalid_argument("pca_project: fewer rows than components");

  std::vector<double> mean(d, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) mean[j] += rows.at(i, j);
  for (double& m : mean) m /= static_cast<double>(n);

  numkit::Tensor centered({n, d});
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) centered.at(i, j) = rows.at(i, j) - mean[j];

  std::vector<double> cov(d * d, 0.0);
  double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t a = 0; a < d; ++a) {
      double va = centered.at(i, a);
      if (va == 0.0) continue;
      for (size_t b = 0; b < d; ++b) cov[a * d + b] += va * centered.at(i, b) / denom;
    }

  std::vector<double> eigvals, eigvecs;
  pca_detail::jacobi_eigen(cov, d, eigvals, eigvecs);

  std::vector<size_t> order(d);
  for (size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return eigvals[a] > eigvals[b]; });

  double trace = 0.0;
  for (double v : eigvals) trace += v;

  PcaResult result;
  result.components = numkit::Tensor({d, components});
  result.ratios.resize(components);
  for (size_t c = 0; c < components; ++c) {
    size_t src = order[c];
    // flip so the first nonzero loading is positive
    double lead = 0.0;
    for (size_t j = 0; j < d; ++j) {
      if (std::abs(eigvecs[j * d + src]) > 1e-12) {
        lead = eigvecs[j * d + src];
        break;
      }
    }
    double sign = lead < 0.0 ? -1.0 : 1.0;
    for (size_t j = 0; j < d; ++j) result.components.at(j, c) = sign * eigvecs[j * d + src];
    result.ratios[c] = trace > 0.0 ? std::max(0.0, eigvals[src]) / trace : 0.0;
  }

  result.projected = numkit::matmul(centered, result.components);
  return result;
}

}  // namespace snipforge::embed
