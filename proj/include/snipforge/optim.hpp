// Adam and AdaGrad parameter updates.
#pragma once

#include <cmath>
#include <stdexcept>

#include "snipforge/tensor.hpp"

namespace snipforge::numkit {

struct AdamState {
  uint64_t t = 0;
  Tensor m, v;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_param(const Tensor& param, double lr = 0.001) {
    AdamState s;
    s.m = Tensor(param.shape);
    s.v = Tensor(param.shape);
    s.lr = lr;
    return s;
  }
};

inline void adam_step(Tensor& param, const Tensor& grad, AdamState& state) {
  check_same_shape(param, grad, "adam_step");
  check_same_shape(param, state.m, "adam_step state");
  state.t += 1;
  double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < param.size(); ++i) {
    double g = grad.data[i];
    state.m.data[i] = state.beta1 * state.m.data[i] + (1.0 - state.beta1) * g;
    state.v.data[i] = state.beta2 * state.v.data[i] + (1.0 - state.beta2) * g * g;
    double mhat = state.m.data[i] / b1t;
    double vhat = state.v.data[i] / b2t;
    param.data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
  ensure_finite(param, "adam_step");
}

constexpr double kAdagradEps = 1e-8;

inline void adagrad_step(Tensor& param, const Tensor& grad, Tensor& accumulator, double lr) {
  check_same_shape(param, grad, "adagrad_step");
  check_same_shape(param, accumulator, "adagrad_step accumulator");
  for (size_t i = 0; i < param.size(); ++i) {
    double g = grad.data[i];
    accumulator.data[i] += g * g;
    param.data[i] -= lr * g / std::sqrt(accumulator.data[i] + kAdagradEps);
  }
  ensure_finite(param, "adagrad_step");
}

}  // namespace snipforge::numkit
