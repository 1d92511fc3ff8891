// Binary-classification metrics: confusion counts, F1, ROC and PR curves
// with trapezoid AUCs, and the MetricsReport emitted by the evaluate stage.
// Threshold convention throughout: prob >= t predicts positive.
#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "snipforge/util.hpp"

namespace snipforge::evalkit {

struct Confusion {
  int64_t tp = 0, fp = 0, tn = 0, fn = 0;

  int64_t n() const { return tp + fp + tn + fn; }
  double accuracy() const { return n() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n()); }
};

inline Confusion confusion(const std::vector<int>& labels, const std::vector<double>& probs,
                           double threshold = 0.5) {
  if (labels.size() != probs.size())
    throw std::invalid_argument("confusion: " + std::to_string(labels.size()) + " labels vs " +
                                std::to_string(probs.size()) + " probs");
  if (labels.empty()) throw std::invalid_argument("confusion: empty input");
  Confusion c;
  for (size_t i = 0; i < labels.size(); ++i) {
    bool pred = probs[i] >= threshold;
    if (pred && labels[i] == 1) ++c.tp;
    else if (pred && labels[i] == 0) ++c.fp;
    else if (!pred && labels[i] == 0) ++c.tn;
    else ++c.fn;
  }
  return c;
}

// Undefined precision or recall counts as 0; P = R = 0 gives F1 = 0.
inline double f1(const Confusion& c) {
  double precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  double recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

struct Curve {
  std::vector<std::pair<double, double>> points;  // (x, y)
  double auc = 0.0;

  std::string to_csv(const char* xname, const char* yname) const {
    std::string out = std::string(xname) + "," + yname + "\n";
    char buf[80];
    for (const auto& [x, y] : points) {
      std::snprintf(buf, sizeof(buf), "%.10g,%.10g\n", x, y);
      out += buf;
    }
    return out;
  }
};

namespace detail {

struct Sweep {
  // cumulative tp/fp after admitting each distinct-score group, scores desc
  std::vector<int64_t> tps, fps;
  int64_t pos = 0, neg = 0;
};

inline Sweep threshold_sweep(const std::vector<int>& labels, const std::vector<double>& probs) {
  if (labels.size() != probs.size()) throw std::invalid_argument("metrics: length mismatch");
  std::vector<size_t> order(labels.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return probs[a] > probs[b]; });

  Sweep s;
  for (int l : labels) (l == 1 ? s.pos : s.neg) += 1;
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    double score = probs[order[i]];
    while (i < order.size() && probs[order[i]] == score) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    s.tps.push_back(tp);
    s.fps.push_back(fp);
  }
  return s;
}

}  // namespace detail

// ROC curve over the distinct score thresholds, anchored at (0,0) and
// (1,1); AUC by trapezoid, which with tie groups equals the Mann-Whitney
// pairwise statistic (ties counting one half).
inline Curve roc_auc(const std::vector<int>& labels, const std::vector<double>& probs) {
  detail::Sweep s = detail::threshold_sweep(labels, probs);
  if (s.pos == 0 || s.neg == 0) throw std::invalid_argument("roc_auc: both classes required");
  Curve c;
  c.points.emplace_back(0.0, 0.0);
  for (size_t k = 0; k < s.tps.size(); ++k)
    c.points.emplace_back(static_cast<double>(s.fps[k]) / static_cast<double>(s.neg),
                          static_cast<double>(s.tps[k]) / static_cast<double>(s.pos));
  if (c.points.back() != std::make_pair(1.0, 1.0)) c.points.emplace_back(1.0, 1.0);
  for (size_t k = 1; k < c.points.size(); ++k) {
    auto [x0, y0] = c.points[k - 1];
    auto [x1, y1] = c.points[k];
    c.auc += (x1 - x0) * (y0 + y1) / 2.0;
  }
  return c;
}

// PR curve: one point per distinct score threshold in descending score
// order, prefixed with a recall-0 anchor at the first precision; the final
// point has recall 1 at the all-positive threshold. AUC by trapezoid over
// recall.
inline Curve pr_auc(const std::vector<int>& labels, const std::vector<double>& probs) {
  detail::Sweep s = detail::threshold_sweep(labels, probs);
  if (s.pos == 0) throw std::invalid_argument("pr_auc: at least one positive required");
  Curve c;
  for (size_t k = 0; k < s.tps.size(); ++k) {
    double recall = static_cast<double>(s.tps[k]) / static_cast<double>(s.pos);
    double precision = static_cast<double>(s.tps[k]) / static_cast<double>(s.tps[k] + s.fps[k]);
    if (k == 0) c.points.emplace_back(0.0, precision);
    c.points.emplace_back(recall, precision);
  }
  for (size_t k = 1; k < c.points.size(); ++k) {
    auto [x0, y0] = c.points[k - 1];
    auto [x1, y1] = c.points[k];
    c.auc += (x1 - x0) * (y0 + y1) / 2.0;
  }
  return c;
}

struct MetricsReport {
  double loss = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double auc_roc = 0.0;
  double auc_pr = 0.0;
  Confusion confusion;
  int64_t n = 0;

  nlohmann::json to_json() const {
    return {{"loss", loss},
            {"accuracy", accuracy},
            {"f1", f1},
            {"auc_roc", auc_roc},
            {"auc_pr", auc_pr},
            {"confusion", {{"tp", confusion.tp}, {"fp", confusion.fp}, {"tn", confusion.tn}, {"fn", confusion.fn}}},
            {"n", n}};
  }
};

inline MetricsReport metrics_report(const std::vector<int>& labels, const std::vector<double>& probs, double loss,
                                    double threshold = 0.5) {
  MetricsReport r;
  r.loss = loss;
  r.confusion = confusion(labels, probs, threshold);
  r.accuracy = r.confusion.accuracy();
  r.f1 = f1(r.confusion);
  r.auc_roc = roc_auc(labels, probs).auc;
  r.auc_pr = pr_auc(labels, probs).auc;
  r.n = r.confusion.n();
  return r;
}

}  // namespace snipforge::evalkit
