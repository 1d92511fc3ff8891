// Intent/code pair classifier: per-pair 100-d intent and code embeddings,
// concatenated and pushed through a decreasing relu MLP with dropout after
// every hidden layer and a sigmoid head. Trained with BCE + Adam.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "snipforge/checkpoint.hpp"
#include "snipforge/embed.hpp"
#include "snipforge/layers.hpp"
#include "snipforge/optim.hpp"
#include "snipforge/rng.hpp"
#include "snipforge/seq2seq.hpp"

namespace snipforge::pairclassifier {

enum class Variant { avg_w2v_current, avg_glove_current, avg_w2v_csn, avg_glove_csn, hidden_state };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::avg_w2v_current: return "w2v-current";
    case Variant::avg_glove_current: return "glove-current";
    case Variant::avg_w2v_csn: return "w2v-csn";
    case Variant::avg_glove_csn: return "glove-csn";
    case Variant::hidden_state: return "hidden";
  }
  return "?";
}

inline Variant parse_variant(const std::string& name) {
  if (name == "w2v-current") return Variant::avg_w2v_current;
  if (name == "glove-current") return Variant::avg_glove_current;
  if (name == "w2v-csn") return Variant::avg_w2v_csn;
  if (name == "glove-csn") return Variant::avg_glove_csn;
  if (name == "hidden") return Variant::hidden_state;
  throw std::invalid_argument("unknown variant: " + name);
}

struct PairFeatures {
  numkit::Tensor intent_vec;
  numkit::Tensor code_vec;
  int label = 0;
};

// Elementwise product of the hidden and cell states.
inline numkit::Tensor code_vec_hadamard(const seq2seq::EncodedState& state) {
  numkit::check_same_shape(state.h, state.c, "code_vec_hadamard");
  numkit::Tensor out(state.h.shape);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = state.h.data[i] * state.c.data[i];
  return out;
}

// Average embedding of a predicted code index sequence.
inline numkit::Tensor code_vec_average(const std::vector<int>& predicted, const embed::EmbeddingTable& table) {
  std::vector<std::string> tokens;
  tokens.reserve(predicted.size());
  for (int idx : predicted) tokens.push_back(table.vocab.token(idx));
  return embed::average_embedding(tokens, table);
}

// Feature construction runs seq2seq inference per sample: the code vector
// comes from the greedy-decoded sequence (average variants) or from the
// hadamard of the decoder's final states. With use_encoder_state set, the
// hidden_state variant uses the encoder's final states instead.
inline std::vector<PairFeatures> build_features(const std::vector<corpus::Sample>& samples,
                                                const seq2seq::Seq2SeqModel& model, Variant variant,
                                                const embed::EmbeddingTable& intent_table,
                                                const embed::EmbeddingTable& code_table,
                                                bool use_encoder_state = false) {
  std::vector<PairFeatures> out;
  out.reserve(samples.size());
  for (const corpus::Sample& s : samples) {
    if (!s.label) throw std::invalid_argument("build_features: sample without label (qid=" +
                                              std::to_string(s.question_id) + ")");
    PairFeatures f;
    f.label = *s.label;
    auto intent_tokens = util::split_ws(s.intent);
    f.intent_vec = embed::average_embedding(intent_tokens, intent_table);

    std::vector<int> intent_idx(model.config.intent_len, embed::Vocabulary::kPad);
    for (size_t i = 0; i < intent_tokens.size() && i < model.config.intent_len; ++i)
      intent_idx[i] = model.intent_emb.vocab.index(intent_tokens[i]);

    if (variant == Variant::hidden_state) {
      if (use_encoder_state) {
        f.code_vec = code_vec_hadamard(seq2seq::encode(intent_idx, model));
      } else {
        auto r = seq2seq::infer_greedy(intent_idx, model, model.config.code_len);
        f.code_vec = code_vec_hadamard(r.final_state);
      }
    } else {
      auto r = seq2seq::infer_greedy(intent_idx, model, model.config.code_len);
      f.code_vec = code_vec_average(r.tokens, code_table);
    }
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ClassifierConfig {
  std::vector<size_t> layers = {100, 50, 25};
  double dropout = 0.5;
  int epochs = 25;
  size_t batch = 256;
  double val_fraction = 0.1;
  double lr = 0.001;

  void validate() const {
    if (layers.empty()) throw std::invalid_argument("classifier: no hidden layers");
    for (size_t i = 1; i < layers.size(); ++i)
      if (layers[i] >= layers[i - 1]) throw std::invalid_argument("classifier: layer sizes must strictly decrease");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("classifier: dropout must be in [0,1)");
    if (val_fraction < 0.0 || val_fraction >= 1.0) throw std::invalid_argument("classifier: bad val_fraction");
  }
};

struct Classifier {
  ClassifierConfig config;
  std::vector<numkit::Tensor> w;  // hidden layers then output head
  std::vector<numkit::Tensor> b;

  size_t input_dim() const { return w.empty() ? 0 : w[0].rows(); }
};

inline Classifier init_classifier(const ClassifierConfig& cfg, size_t input_dim, uint64_t seed) {
  cfg.validate();
  Classifier c;
  c.config = cfg;
  Rng rng(seed);
  size_t in = input_dim;
  for (size_t width : cfg.layers) {
    c.w.push_back(numkit::glorot_uniform({in, width}, in, width, rng));
    c.b.push_back(numkit::Tensor({width}));
    in = width;
  }
  c.w.push_back(numkit::glorot_uniform({in, 1}, in, 1, rng));
  c.b.push_back(numkit::Tensor({1}));
  return c;
}

namespace detail {

inline numkit::Tensor stack_features(const std::vector<PairFeatures>& feats, const std::vector<size_t>& idx) {
  if (idx.empty()) return numkit::Tensor();
  size_t d = feats[idx[0]].intent_vec.size() + feats[idx[0]].code_vec.size();
  numkit::Tensor x({idx.size(), d});
  for (size_t r = 0; r < idx.size(); ++r) {
    const PairFeatures& f = feats[idx[r]];
    std::copy(f.intent_vec.data.begin(), f.intent_vec.data.end(), x.data.begin() + static_cast<long>(r * d));
    std::copy(f.code_vec.data.begin(), f.code_vec.data.end(),
              x.data.begin() + static_cast<long>(r * d + f.intent_vec.size()));
  }
  return x;
}

inline numkit::Tensor labels_of(const std::vector<PairFeatures>& feats, const std::vector<size_t>& idx) {
  numkit::Tensor y({idx.size(), 1});
  for (size_t r = 0; r < idx.size(); ++r) y.data[r] = static_cast<double>(feats[idx[r]].label);
  return y;
}

// forward over a batch; dropout active only when training
inline numkit::Tensor mlp_forward(const Classifier& c, const numkit::Tensor& x, bool training, Rng* rng,
                                  std::vector<numkit::DenseCache>* caches = nullptr,
                                  std::vector<numkit::Tensor>* masks = nullptr) {
  numkit::Tensor h = x;
  size_t hidden_layers = c.w.size() - 1;
  for (size_t i = 0; i < hidden_layers; ++i) {
    if (caches) {
      caches->emplace_back();
      h = numkit::dense_forward_cached(h, c.w[i], c.b[i], numkit::Activation::relu, caches->back());
    } else {
      h = numkit::dense_forward(h, c.w[i], c.b[i], numkit::Activation::relu);
    }
    if (training) {
      numkit::Tensor mask;
      h = numkit::dropout(h, c.config.dropout, true, *rng, masks ? &mask : nullptr);
      if (masks) masks->push_back(std::move(mask));
    }
  }
  if (caches) {
    caches->emplace_back();
    return numkit::dense_forward_cached(h, c.w.back(), c.b.back(), numkit::Activation::sigmoid, caches->back());
  }
  return numkit::dense_forward(h, c.w.back(), c.b.back(), numkit::Activation::sigmoid);
}

}  // namespace detail

struct EvalStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

inline EvalStats evaluate(const Classifier& c, const std::vector<PairFeatures>& feats,
                          const std::vector<size_t>& idx) {
  if (idx.empty()) return {};
  numkit::Tensor x = detail::stack_features(feats, idx);
  numkit::Tensor y = detail::labels_of(feats, idx);
  numkit::Tensor p = detail::mlp_forward(c, x, false, nullptr);
  auto l = numkit::loss(numkit::LossKind::bce, p, y);
  int64_t correct = 0;
  for (size_t i = 0; i < idx.size(); ++i) {
    int pred = p.data[i] >= 0.5 ? 1 : 0;
    if (pred == static_cast<int>(y.data[i])) ++correct;
  }
  return {l.value, static_cast<double>(correct) / static_cast<double>(idx.size())};
}

inline EvalStats evaluate(const Classifier& c, const std::vector<PairFeatures>& feats) {
  std::vector<size_t> idx(feats.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return evaluate(c, feats, idx);
}

struct ClassifierCurve {
  std::vector<double> train_loss, train_accuracy, val_loss, val_accuracy;

  std::string to_csv() const {
    std::string out = "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
    char buf[160];
    for (size_t e = 0; e < train_loss.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g\n", e + 1, train_loss[e], train_accuracy[e],
                    val_loss[e], val_accuracy[e]);
      out += buf;
    }
    return out;
  }
};

// 90/10 stratified split by label, BCE + Adam, dropout active in training
// only. Deterministic given seed.
inline ClassifierCurve train_classifier(Classifier& c, const std::vector<PairFeatures>& feats, uint64_t seed) {
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < feats.size(); ++i) (feats[i].label == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw std::invalid_argument("train_classifier: single-class training set");

  Rng rng(seed);
  auto shuffle = [&](std::vector<size_t>& v) {
    for (size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[rng.bounded(k)]);
  };
  shuffle(pos);
  shuffle(neg);
  size_t val_pos = static_cast<size_t>(static_cast<double>(pos.size()) * c.config.val_fraction);
  size_t val_neg = static_cast<size_t>(static_cast<double>(neg.size()) * c.config.val_fraction);
  std::vector<size_t> val_idx(pos.begin(), pos.begin() + static_cast<long>(val_pos));
  val_idx.insert(val_idx.end(), neg.begin(), neg.begin() + static_cast<long>(val_neg));
  std::vector<size_t> train_idx(pos.begin() + static_cast<long>(val_pos), pos.end());
  train_idx.insert(train_idx.end(), neg.begin() + static_cast<long>(val_neg), neg.end());

  std::vector<numkit::AdamState> sw, sb;
  for (size_t i = 0; i < c.w.size(); ++i) {
    sw.push_back(numkit::AdamState::for_param(c.w[i], c.config.lr));
    sb.push_back(numkit::AdamState::for_param(c.b[i], c.config.lr));
  }

  ClassifierCurve curve;
  for (int epoch = 0; epoch < c.config.epochs; ++epoch) {
    shuffle(train_idx);
    double epoch_loss = 0.0;
    int64_t correct = 0;
    for (size_t start = 0; start < train_idx.size(); start += c.config.batch) {
      size_t end = std::min(train_idx.size(), start + c.config.batch);
      std::vector<size_t> batch(train_idx.begin() + static_cast<long>(start),
                                train_idx.begin() + static_cast<long>(end));
      numkit::Tensor x = detail::stack_features(feats, batch);
      numkit::Tensor y = detail::labels_of(feats, batch);

      std::vector<numkit::DenseCache> caches;
      std::vector<numkit::Tensor> masks;
      numkit::Tensor p = detail::mlp_forward(c, x, true, &rng, &caches, &masks);
      auto l = numkit::loss(numkit::LossKind::bce, p, y);
      epoch_loss += l.value * static_cast<double>(batch.size());
      for (size_t i = 0; i < batch.size(); ++i)
        if ((p.data[i] >= 0.5 ? 1 : 0) == static_cast<int>(y.data[i])) ++correct;

      std::vector<numkit::Tensor> dw(c.w.size()), db(c.b.size());
      for (size_t i = 0; i < c.w.size(); ++i) {
        dw[i] = numkit::Tensor(c.w[i].shape);
        db[i] = numkit::Tensor(c.b[i].shape);
      }
      size_t last = c.w.size() - 1;
      numkit::Tensor dh = numkit::dense_backward(caches[last], c.w[last], numkit::Activation::sigmoid, l.grad,
                                                 dw[last], db[last]);
      for (size_t i = last; i-- > 0;) {
        // undo dropout: dL/d(pre-dropout) = dL/d(post) * mask
        for (size_t k = 0; k < dh.size(); ++k) dh.data[k] *= masks[i].data[k];
        dh = numkit::dense_backward(caches[i], c.w[i], numkit::Activation::relu, dh, dw[i], db[i]);
      }
      for (size_t i = 0; i < c.w.size(); ++i) {
        numkit::adam_step(c.w[i], dw[i], sw[i]);
        numkit::adam_step(c.b[i], db[i], sb[i]);
      }
    }
    curve.train_loss.push_back(epoch_loss / static_cast<double>(train_idx.size()));
    curve.train_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(train_idx.size()));
    EvalStats val = evaluate(c, feats, val_idx);
    curve.val_loss.push_back(val.loss);
    curve.val_accuracy.push_back(val.accuracy);
  }
  return curve;
}

// Dropout-free inference; outputs clamped strictly inside (0,1).
inline std::vector<double> predict(const Classifier& c, const std::vector<PairFeatures>& feats) {
  if (feats.empty()) return {};
  std::vector<size_t> idx(feats.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  numkit::Tensor x = detail::stack_features(feats, idx);
  if (x.cols() != c.input_dim())
    throw std::invalid_argument("predict: feature dim " + std::to_string(x.cols()) + " vs classifier input " +
                                std::to_string(c.input_dim()));
  numkit::Tensor p = detail::mlp_forward(c, x, false, nullptr);
  std::vector<double> out(p.data.begin(), p.data.end());
  for (double& v : out) v = std::clamp(v, numkit::kProbClamp, 1.0 - numkit::kProbClamp);
  return out;
}

// ---------------------------------------------------------------------------
// Persistence: fc1.* .. fcN.* plus out.*; features cache as X/y tensors
// with a JSON sidecar naming the variant.

inline numkit::TensorMap classifier_tensors(const Classifier& c) {
  numkit::TensorMap t;
  for (size_t i = 0; i + 1 < c.w.size(); ++i) {
    std::string base = "fc" + std::to_string(i + 1);
    t[base + ".W"] = c.w[i];
    t[base + ".b"] = c.b[i];
  }
  t["out.W"] = c.w.back();
  t["out.b"] = c.b.back();
  return t;
}

inline void save_classifier(const std::string& path, const Classifier& c) {
  numkit::save_checkpoint(path, classifier_tensors(c));
}

inline Classifier load_classifier(const std::string& path, const ClassifierConfig& cfg) {
  numkit::TensorMap t = numkit::load_checkpoint(path);
  Classifier c;
  c.config = cfg;
  for (size_t i = 1;; ++i) {
    std::string base = "fc" + std::to_string(i);
    auto wi = t.find(base + ".W");
    if (wi == t.end()) break;
    c.w.push_back(wi->second);
    c.b.push_back(t.at(base + ".b"));
  }
  c.w.push_back(t.at("out.W"));
  c.b.push_back(t.at("out.b"));
  return c;
}

inline void save_features(const std::string& path, const std::vector<PairFeatures>& feats, Variant variant,
                          const std::string& sidecar_path, const nlohmann::json& provenance) {
  std::vector<size_t> idx(feats.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  numkit::TensorMap t;
  t["X"] = detail::stack_features(feats, idx);
  t["y"] = numkit::Tensor({feats.size()});
  for (size_t i = 0; i < feats.size(); ++i) t["y"].data[i] = static_cast<double>(feats[i].label);
  numkit::save_checkpoint(path, t);

  nlohmann::json side;
  side["variant"] = variant_name(variant);
  side["count"] = feats.size();
  side["provenance"] = provenance;
  util::write_file(sidecar_path, side.dump(2) + "\n");
}

inline std::vector<PairFeatures> load_features(const std::string& path) {
  numkit::TensorMap t = numkit::load_checkpoint(path);
  const numkit::Tensor& x = t.at("X");
  const numkit::Tensor& y = t.at("y");
  if (x.rows() != y.size()) throw std::runtime_error("features cache: X/y row mismatch");
  size_t d = x.cols() / 2;
  std::vector<PairFeatures> out(x.rows());
  for (size_t i = 0; i < x.rows(); ++i) {
    out[i].intent_vec = numkit::Tensor({d});
    out[i].code_vec = numkit::Tensor({d});
    for (size_t j = 0; j < d; ++j) {
      out[i].intent_vec.data[j] = x.at(i, j);
      out[i].code_vec.data[j] = x.at(i, j + d);
    }
    out[i].label = y.data[i] >= 0.5 ? 1 : 0;
  }
  return out;
}

}  // namespace snipforge::pairclassifier
