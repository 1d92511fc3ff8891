// Hand-written forward/backward passes: activations, dense layer, dropout,
// losses and the LSTM cell. The models built on top are fixed topologies,
// so there is no autograd graph; each layer exposes its own backward.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "snipforge/rng.hpp"
#include "snipforge/tensor.hpp"

namespace snipforge::numkit {

enum class Activation { identity, relu, sigmoid, tanh_fn, softmax };

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline void apply_activation(Tensor& t, Activation act) {
  switch (act) {
    case Activation::identity:
      break;
    case Activation::relu:
      for (double& v : t.data) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::sigmoid:
      for (double& v : t.data) v = sigmoid(v);
      break;
    case Activation::tanh_fn:
      for (double& v : t.data) v = std::tanh(v);
      break;
    case Activation::softmax: {
      // row-wise, stabilized by subtracting the row max
      size_t n = t.rows(), m = t.cols();
      for (size_t i = 0; i < n; ++i) {
        double* row = &t.data[i * m];
        double mx = row[0];
        for (size_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (size_t j = 0; j < m; ++j) {
          row[j] = std::exp(row[j] - mx);
          sum += row[j];
        }
        for (size_t j = 0; j < m; ++j) row[j] /= sum;
      }
      break;
    }
  }
}

// y = act(x W + b); x is [n x d], W [d x m], b [m].
inline Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Activation act) {
  if (x.cols() != w.rows() || w.cols() != b.size())
    throw std::invalid_argument("dense_forward: shape mismatch x" + x.shape_str() + " W" + w.shape_str() + " b" +
                                b.shape_str());
  Tensor y = matmul(x, w);
  size_t n = y.rows(), m = y.cols();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) y.data[i * m + j] += b.data[j];
  apply_activation(y, act);
  ensure_finite(y, "dense_forward");
  return y;
}

struct DenseCache {
  Tensor x;  // input
  Tensor y;  // post-activation output
};

inline Tensor dense_forward_cached(const Tensor& x, const Tensor& w, const Tensor& b, Activation act,
                                   DenseCache& cache) {
  cache.x = x;
  cache.y = dense_forward(x, w, b, act);
  return cache.y;
}

// Activation derivative expressed through the post-activation value.
inline double act_deriv_from_output(double y, Activation act) {
  switch (act) {
    case Activation::identity: return 1.0;
    case Activation::relu: return y > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::tanh_fn: return 1.0 - y * y;
    case Activation::softmax:
      throw std::invalid_argument("softmax backward only via fused cross-entropy path");
  }
  return 0.0;
}

// Given dL/dy, accumulates dW/db and returns dL/dx.
inline Tensor dense_backward(const DenseCache& cache, const Tensor& w, Activation act, const Tensor& dy, Tensor& dw,
                             Tensor& db) {
  check_same_shape(dy, cache.y, "dense_backward");
  Tensor dpre = dy;
  for (size_t i = 0; i < dpre.size(); ++i) dpre.data[i] *= act_deriv_from_output(cache.y.data[i], act);
  Tensor dwi = matmul_tn(cache.x, dpre);
  axpy(1.0, dwi, dw);
  size_t n = dpre.rows(), m = dpre.cols();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) db.data[j] += dpre.data[i * m + j];
  return matmul_nt(dpre, w);
}

// Inverted dropout: zero with probability rate, scale survivors by 1/(1-rate).
// Identity at inference. The mask, when requested, feeds the backward pass.
inline Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng, Tensor* mask_out = nullptr) {
  if (rate >= 1.0 || rate < 0.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  if (!training || rate == 0.0) {
    if (mask_out) {
      *mask_out = Tensor(x.shape);
      for (double& v : mask_out->data) v = 1.0;
    }
    return x;
  }
  Tensor y(x.shape);
  Tensor mask(x.shape);
  double scale = 1.0 / (1.0 - rate);
  for (size_t i = 0; i < x.size(); ++i) {
    double keep = rng.bernoulli(rate) ? 0.0 : scale;
    mask.data[i] = keep;
    y.data[i] = x.data[i] * keep;
  }
  if (mask_out) *mask_out = std::move(mask);
  return y;
}

enum class LossKind { bce, categorical_xent };

struct LossResult {
  double value = 0.0;
  Tensor grad;  // dL/dpred
};

constexpr double kProbClamp = 1e-7;

// bce: -mean[t ln p + (1-t) ln(1-p)], p clamped to [1e-7, 1-1e-7].
// categorical_xent: rows of pred are probability vectors, target one-hot;
// value is -mean over rows of ln p[target index].
inline LossResult loss(LossKind kind, const Tensor& pred, const Tensor& target) {
  check_same_shape(pred, target, "loss");
  LossResult r;
  r.grad = Tensor(pred.shape);
  if (kind == LossKind::bce) {
    size_t n = pred.size();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double p = std::clamp(pred.data[i], kProbClamp, 1.0 - kProbClamp);
      double t = target.data[i];
      acc += t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
      r.grad.data[i] = (p - t) / (p * (1.0 - p)) / static_cast<double>(n);
    }
    r.value = -acc / static_cast<double>(n);
  } else {
    size_t n = pred.rows(), m = pred.cols();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < m; ++j) {
        double t = target.data[i * m + j];
        if (t == 0.0) continue;
        double p = std::max(pred.data[i * m + j], kProbClamp);
        acc += t * std::log(p);
        r.grad.data[i * m + j] = -t / p / static_cast<double>(n);
      }
    }
    r.value = -acc / static_cast<double>(n);
  }
  return r;
}

// ---------------------------------------------------------------------------
// LSTM cell, gate order [i, f, g, o] as blocks of h rows.

struct LstmCellParams {
  Tensor w;  // [4h x d]
  Tensor u;  // [4h x h]
  Tensor b;  // [4h]
  size_t hidden = 0;
  size_t input = 0;

  static LstmCellParams init(size_t hidden, size_t input, Rng& rng) {
    LstmCellParams p;
    p.hidden = hidden;
    p.input = input;
    p.w = glorot_uniform({4 * hidden, input}, input, hidden, rng);
    p.u = glorot_uniform({4 * hidden, hidden}, hidden, hidden, rng);
    p.b = Tensor({4 * hidden});
    // forget-gate bias starts at +1
    for (size_t j = 0; j < hidden; ++j) p.b.data[hidden + j] = 1.0;
    return p;
  }
};

struct LstmCache {
  Tensor x, h_prev, c_prev;
  Tensor i, f, g, o;  // post-activation gates [h]
  Tensor c, tanh_c;   // new cell state and its tanh
};

// Gates i,f,o are sigmoid, candidate g is tanh:
//   c_t = f (*) c_prev + i (*) g;  h_t = o (*) tanh(c_t)
inline void lstm_cell_step(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev, const LstmCellParams& p,
                           Tensor& h_out, Tensor& c_out, LstmCache* cache = nullptr) {
  size_t h = p.hidden, d = p.input;
  if (x.size() != d || h_prev.size() != h || c_prev.size() != h)
    throw std::invalid_argument("lstm_cell_step: shape mismatch x" + x.shape_str() + " h" + h_prev.shape_str() + " c" +
                                c_prev.shape_str());
  Tensor pre({4 * h});
  for (size_t r = 0; r < 4 * h; ++r) {
    const double* wrow = &p.w.data[r * d];
    const double* urow = &p.u.data[r * h];
    double acc = p.b.data[r];
    for (size_t j = 0; j < d; ++j) acc += wrow[j] * x.data[j];
    for (size_t j = 0; j < h; ++j) acc += urow[j] * h_prev.data[j];
    pre.data[r] = acc;
  }
  Tensor gi({h}), gf({h}), gg({h}), go({h});
  for (size_t j = 0; j < h; ++j) {
    gi.data[j] = sigmoid(pre.data[j]);
    gf.data[j] = sigmoid(pre.data[h + j]);
    gg.data[j] = std::tanh(pre.data[2 * h + j]);
    go.data[j] = sigmoid(pre.data[3 * h + j]);
  }
  c_out = Tensor({h});
  h_out = Tensor({h});
  Tensor tc({h});
  for (size_t j = 0; j < h; ++j) {
    c_out.data[j] = gf.data[j] * c_prev.data[j] + gi.data[j] * gg.data[j];
    tc.data[j] = std::tanh(c_out.data[j]);
    h_out.data[j] = go.data[j] * tc.data[j];
  }
  ensure_finite(h_out, "lstm_cell_step");
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->c_prev = c_prev;
    cache->i = std::move(gi);
    cache->f = std::move(gf);
    cache->g = std::move(gg);
    cache->o = std::move(go);
    cache->c = c_out;
    cache->tanh_c = std::move(tc);
  }
}

struct LstmGrads {
  Tensor dw, du, db;
  explicit LstmGrads(const LstmCellParams& p) : dw(p.w.shape), du(p.u.shape), db(p.b.shape) {}
};

// dh/dc are dL/dh_t and dL/dc_t flowing in from the future; outputs are the
// gradients passed one step back. Parameter grads accumulate into `grads`.
inline void lstm_cell_backward(const LstmCache& cache, const LstmCellParams& p, const Tensor& dh, const Tensor& dc,
                               Tensor& dx, Tensor& dh_prev, Tensor& dc_prev, LstmGrads& grads) {
  size_t h = p.hidden, d = p.input;
  Tensor dpre({4 * h});
  dc_prev = Tensor({h});
  for (size_t j = 0; j < h; ++j) {
    double tc = cache.tanh_c.data[j];
    double dct = dc.data[j] + dh.data[j] * cache.o.data[j] * (1.0 - tc * tc);
    double i = cache.i.data[j], f = cache.f.data[j], g = cache.g.data[j], o = cache.o.data[j];
    dpre.data[j] = dct * g * i * (1.0 - i);
    dpre.data[h + j] = dct * cache.c_prev.data[j] * f * (1.0 - f);
    dpre.data[2 * h + j] = dct * i * (1.0 - g * g);
    dpre.data[3 * h + j] = dh.data[j] * tc * o * (1.0 - o);
    dc_prev.data[j] = dct * f;
  }
  dx = Tensor({d});
  dh_prev = Tensor({h});
  for (size_t r = 0; r < 4 * h; ++r) {
    double dp = dpre.data[r];
    if (dp == 0.0) continue;
    grads.db.data[r] += dp;
    double* dwrow = &grads.dw.data[r * d];
    const double* wrow = &p.w.data[r * d];
    for (size_t j = 0; j < d; ++j) {
      dwrow[j] += dp * cache.x.data[j];
      dx.data[j] += dp * wrow[j];
    }
    double* durow = &grads.du.data[r * h];
    const double* urow = &p.u.data[r * h];
    for (size_t j = 0; j < h; ++j) {
      durow[j] += dp * cache.h_prev.data[j];
      dh_prev.data[j] += dp * urow[j];
    }
  }
}

}  // namespace snipforge::numkit
