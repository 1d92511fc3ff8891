// Central-difference gradient checker for the hand-written backward passes.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "snipforge/tensor.hpp"

namespace snipforge::numkit {

// f evaluates the scalar objective at the supplied flat parameter vector;
// analytic is the gradient under test, one entry per coordinate.
// Returns max over coordinates of |numeric - analytic| / max(1, |analytic|).
inline double grad_check(const std::function<double(const std::vector<double>&)>& f, std::vector<double> params,
                         const std::vector<double>& analytic, double h = 1e-5) {
  if (params.size() != analytic.size()) throw std::invalid_argument("grad_check: param/gradient size mismatch");
  double worst = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    double saved = params[i];
    params[i] = saved + h;
    double fp = f(params);
    params[i] = saved - h;
    double fm = f(params);
    params[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) throw std::runtime_error("grad_check: non-finite objective");
    double numeric = (fp - fm) / (2.0 * h);
    double err = std::abs(numeric - analytic[i]) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace snipforge::numkit
