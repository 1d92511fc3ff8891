// Encoder-decoder LSTM mapping a padded intent word sequence to a padded
// code token sequence. Teacher-forced training with categorical
// cross-entropy over every decoder position (PAD included unless mask_pad
// is set, mirroring how the reference accuracies were computed), Adam
// updates, greedy inference.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "snipforge/checkpoint.hpp"
#include "snipforge/codelex.hpp"
#include "snipforge/corpus.hpp"
#include "snipforge/embed.hpp"
#include "snipforge/layers.hpp"
#include "snipforge/optim.hpp"
#include "snipforge/rng.hpp"
#include "snipforge/tensor.hpp"
#include "snipforge/util.hpp"

namespace snipforge::seq2seq {

struct Seq2SeqConfig {
  size_t intent_len = 35;
  size_t code_len = 50;  // decoder sequences run code_len + 1 with START/END
  size_t hidden = 100;
  size_t intent_vocab_cap = 5000;
  size_t code_vocab_cap = 5000;
  bool freeze_embeddings = true;
  bool mask_pad = false;
  int epochs = 25;
  size_t batch = 32;
  double lr = 0.001;

  size_t decoder_len() const { return code_len + 1; }
};

struct EncodedState {
  numkit::Tensor h, c;
};

struct Seq2SeqModel {
  Seq2SeqConfig config;
  embed::EmbeddingTable intent_emb;
  embed::EmbeddingTable code_emb;
  numkit::LstmCellParams enc;
  numkit::LstmCellParams dec;
  numkit::Tensor out_w;  // [hidden x code vocab]
  numkit::Tensor out_b;  // [code vocab]

  size_t code_vocab_size() const { return code_emb.matrix.rows(); }
};

inline Seq2SeqModel init_model(const Seq2SeqConfig& cfg, embed::EmbeddingTable intent_emb,
                               embed::EmbeddingTable code_emb, uint64_t seed) {
  Seq2SeqModel m;
  m.config = cfg;
  m.intent_emb = std::move(intent_emb);
  m.code_emb = std::move(code_emb);
  Rng rng(seed);
  m.enc = numkit::LstmCellParams::init(cfg.hidden, m.intent_emb.dim(), rng);
  m.dec = numkit::LstmCellParams::init(cfg.hidden, m.code_emb.dim(), rng);
  size_t vc = m.code_emb.matrix.rows();
  m.out_w = numkit::glorot_uniform({cfg.hidden, vc}, cfg.hidden, vc, rng);
  m.out_b = numkit::Tensor({vc});
  return m;
}

// ---------------------------------------------------------------------------
// Vectorization.

struct VectorizedPair {
  std::vector<int> intent;      // [intent_len]
  std::vector<int> dec_input;   // [code_len + 1], starts with START
  std::vector<int> dec_target;  // [code_len + 1], ends the code with END
};

inline VectorizedPair vectorize(const std::vector<std::string>& intent_tokens,
                                const std::vector<std::string>& code_tokens, const Seq2SeqConfig& cfg,
                                const embed::Vocabulary& intent_vocab, const embed::Vocabulary& code_vocab) {
  VectorizedPair p;
  p.intent.assign(cfg.intent_len, embed::Vocabulary::kPad);
  for (size_t i = 0; i < intent_tokens.size() && i < cfg.intent_len; ++i)
    p.intent[i] = intent_vocab.index(intent_tokens[i]);

  size_t n = std::min(code_tokens.size(), cfg.code_len);
  p.dec_input.assign(cfg.decoder_len(), embed::Vocabulary::kPad);
  p.dec_target.assign(cfg.decoder_len(), embed::Vocabulary::kPad);
  p.dec_input[0] = embed::Vocabulary::kStart;
  for (size_t i = 0; i < n; ++i) {
    int idx = code_vocab.index(code_tokens[i]);
    p.dec_input[i + 1] = idx;
    p.dec_target[i] = idx;
  }
  p.dec_target[n] = embed::Vocabulary::kEnd;
  return p;
}

// Training pairs use the cleaned intent split on whitespace and the
// normalized code token sequence.
inline VectorizedPair vectorize(const corpus::Sample& pair, const Seq2SeqConfig& cfg,
                                const embed::Vocabulary& intent_vocab, const embed::Vocabulary& code_vocab,
                                const codelex::ApiWhitelist& whitelist) {
  auto code = codelex::normalize(codelex::tokenize(pair.snippet), whitelist);
  return vectorize(util::split_ws(pair.intent), code.texts(), cfg, intent_vocab, code_vocab);
}

// ---------------------------------------------------------------------------
// Forward passes.

namespace detail {

inline numkit::Tensor embedding_row(const embed::EmbeddingTable& table, int idx) {
  numkit::Tensor x({table.dim()});
  const double* row = table.row(idx);
  std::copy(row, row + table.dim(), x.data.begin());
  return x;
}

struct StepCache {
  numkit::LstmCache lstm;
  std::vector<double> probs;  // softmax output, decoder steps only
};

// logits -> stabilized softmax over the code vocabulary
inline std::vector<double> output_softmax(const Seq2SeqModel& m, const numkit::Tensor& h) {
  size_t vc = m.code_vocab_size();
  std::vector<double> logits(vc);
  for (size_t j = 0; j < vc; ++j) logits[j] = m.out_b.data[j];
  for (size_t i = 0; i < m.config.hidden; ++i) {
    double hv = h.data[i];
    if (hv == 0.0) continue;
    const double* wrow = &m.out_w.data[i * vc];
    for (size_t j = 0; j < vc; ++j) logits[j] += hv * wrow[j];
  }
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
  return logits;
}

}  // namespace detail

// Runs embedding lookup plus one LSTM step per intent position; PAD
// positions are processed like ordinary steps (no masking).
inline EncodedState encode(const std::vector<int>& intent_idx, const Seq2SeqModel& m,
                           std::vector<detail::StepCache>* caches = nullptr) {
  if (intent_idx.size() != m.config.intent_len)
    throw std::invalid_argument("encode: expected intent length " + std::to_string(m.config.intent_len));
  EncodedState st;
  st.h = numkit::Tensor({m.config.hidden});
  st.c = numkit::Tensor({m.config.hidden});
  for (int idx : intent_idx) {
    numkit::Tensor x = detail::embedding_row(m.intent_emb, idx);
    numkit::Tensor h_out, c_out;
    if (caches) {
      caches->emplace_back();
      numkit::lstm_cell_step(x, st.h, st.c, m.enc, h_out, c_out, &caches->back().lstm);
    } else {
      numkit::lstm_cell_step(x, st.h, st.c, m.enc, h_out, c_out);
    }
    st.h = std::move(h_out);
    st.c = std::move(c_out);
  }
  return st;
}

struct Seq2SeqGrads {
  numkit::LstmGrads enc, dec;
  numkit::Tensor dout_w, dout_b;
  numkit::Tensor demb_intent, demb_code;

  explicit Seq2SeqGrads(const Seq2SeqModel& m)
      : enc(m.enc),
        dec(m.dec),
        dout_w(m.out_w.shape),
        dout_b(m.out_b.shape),
        demb_intent(m.intent_emb.matrix.shape),
        demb_code(m.code_emb.matrix.shape) {}
};

struct PairStats {
  double loss = 0.0;  // mean over counted positions
  int64_t correct = 0;
  int64_t counted = 0;
};

// Teacher-forced forward for one pair; fills grads (scaled for this pair's
// mean loss) when non-null.
inline PairStats pair_forward_backward(const Seq2SeqModel& m, const VectorizedPair& p, Seq2SeqGrads* grads) {
  const size_t h = m.config.hidden;
  const size_t td = m.config.decoder_len();
  std::vector<detail::StepCache> enc_caches, dec_caches;
  enc_caches.reserve(m.config.intent_len);
  EncodedState st = encode(p.intent, m, grads ? &enc_caches : nullptr);

  dec_caches.reserve(td);
  PairStats stats;
  numkit::Tensor dh = st.h, dc = st.c;  // reused as running state
  for (size_t t = 0; t < td; ++t) {
    numkit::Tensor x = detail::embedding_row(m.code_emb, p.dec_input[t]);
    numkit::Tensor h_out, c_out;
    dec_caches.emplace_back();
    numkit::lstm_cell_step(x, dh, dc, m.dec, h_out, c_out, &dec_caches.back().lstm);
    dh = std::move(h_out);
    dc = std::move(c_out);
    int target = p.dec_target[t];
    bool count = !(m.config.mask_pad && target == embed::Vocabulary::kPad);
    auto probs = detail::output_softmax(m, dh);
    if (count) {
      stats.loss += -std::log(std::max(probs[static_cast<size_t>(target)], 1e-12));
      size_t best = 0;
      for (size_t j = 1; j < probs.size(); ++j)
        if (probs[j] > probs[best]) best = j;
      if (static_cast<int>(best) == target) ++stats.correct;
      ++stats.counted;
    }
    dec_caches.back().probs = std::move(probs);
  }
  if (stats.counted > 0) stats.loss /= static_cast<double>(stats.counted);
  if (!grads) return stats;

  const double scale = stats.counted > 0 ? 1.0 / static_cast<double>(stats.counted) : 0.0;
  const size_t vc = m.code_vocab_size();
  numkit::Tensor dh_next({h}), dc_next({h});
  for (size_t t = td; t-- > 0;) {
    const auto& cache = dec_caches[t];
    int target = p.dec_target[t];
    bool count = !(m.config.mask_pad && target == embed::Vocabulary::kPad);
    numkit::Tensor dh_t = dh_next;
    if (count) {
      // fused softmax + cross-entropy gradient: (p - onehot) * scale
      std::vector<double> dlogits(vc);
      for (size_t j = 0; j < vc; ++j) dlogits[j] = cache.probs[j] * scale;
      dlogits[static_cast<size_t>(target)] -= scale;
      // the state this step produced, rebuilt from the cached gates
      numkit::Tensor h_after({h});
      for (size_t i = 0; i < h; ++i) h_after.data[i] = cache.lstm.o.data[i] * cache.lstm.tanh_c.data[i];
      for (size_t i = 0; i < h; ++i) {
        double hv = h_after.data[i];
        double* dwrow = &grads->dout_w.data[i * vc];
        const double* wrow = &m.out_w.data[i * vc];
        double acc = 0.0;
        for (size_t j = 0; j < vc; ++j) {
          dwrow[j] += hv * dlogits[j];
          acc += wrow[j] * dlogits[j];
        }
        dh_t.data[i] += acc;
      }
      for (size_t j = 0; j < vc; ++j) grads->dout_b.data[j] += dlogits[j];
    }
    numkit::Tensor dx, dh_prev, dc_prev;
    numkit::lstm_cell_backward(cache.lstm, m.dec, dh_t, dc_next, dx, dh_prev, dc_prev, grads->dec);
    if (!m.config.freeze_embeddings) {
      double* row = &grads->demb_code.data[static_cast<size_t>(p.dec_input[t]) * m.code_emb.dim()];
      for (size_t j = 0; j < m.code_emb.dim(); ++j) row[j] += dx.data[j];
    }
    dh_next = std::move(dh_prev);
    dc_next = std::move(dc_prev);
  }

  // gradient flows into the encoder only through its final state
  for (size_t t = m.config.intent_len; t-- > 0;) {
    numkit::Tensor dx, dh_prev, dc_prev;
    numkit::lstm_cell_backward(enc_caches[t].lstm, m.enc, dh_next, dc_next, dx, dh_prev, dc_prev, grads->enc);
    if (!m.config.freeze_embeddings) {
      double* row = &grads->demb_intent.data[static_cast<size_t>(p.intent[t]) * m.intent_emb.dim()];
      for (size_t j = 0; j < m.intent_emb.dim(); ++j) row[j] += dx.data[j];
    }
    dh_next = std::move(dh_prev);
    dc_next = std::move(dc_prev);
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Training.

struct TrainCurve {
  std::vector<double> loss;
  std::vector<double> token_accuracy;

  std::string to_csv() const {
    std::string out = "epoch,loss,token_accuracy\n";
    char buf[96];
    for (size_t e = 0; e < loss.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g\n", e + 1, loss[e], token_accuracy[e]);
      out += buf;
    }
    return out;
  }
};

// Teacher-forced loss/accuracy without updates.
inline PairStats evaluate(const Seq2SeqModel& m, const std::vector<VectorizedPair>& pairs) {
  PairStats total;
  double loss_sum = 0.0;
  for (const auto& p : pairs) {
    PairStats s = pair_forward_backward(m, p, nullptr);
    loss_sum += s.loss;
    total.correct += s.correct;
    total.counted += s.counted;
  }
  total.loss = pairs.empty() ? 0.0 : loss_sum / static_cast<double>(pairs.size());
  return total;
}

inline TrainCurve train(Seq2SeqModel& m, const std::vector<VectorizedPair>& pairs, uint64_t seed) {
  if (pairs.empty()) throw std::invalid_argument("seq2seq::train: no pairs");
  Rng rng(seed);
  const double lr = m.config.lr;
  numkit::AdamState s_enc_w = numkit::AdamState::for_param(m.enc.w, lr);
  numkit::AdamState s_enc_u = numkit::AdamState::for_param(m.enc.u, lr);
  numkit::AdamState s_enc_b = numkit::AdamState::for_param(m.enc.b, lr);
  numkit::AdamState s_dec_w = numkit::AdamState::for_param(m.dec.w, lr);
  numkit::AdamState s_dec_u = numkit::AdamState::for_param(m.dec.u, lr);
  numkit::AdamState s_dec_b = numkit::AdamState::for_param(m.dec.b, lr);
  numkit::AdamState s_out_w = numkit::AdamState::for_param(m.out_w, lr);
  numkit::AdamState s_out_b = numkit::AdamState::for_param(m.out_b, lr);
  numkit::AdamState s_emb_i = numkit::AdamState::for_param(m.intent_emb.matrix, lr);
  numkit::AdamState s_emb_c = numkit::AdamState::for_param(m.code_emb.matrix, lr);

  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainCurve curve;
  for (int epoch = 0; epoch < m.config.epochs; ++epoch) {
    for (size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.bounded(k)]);
    double epoch_loss = 0.0;
    int64_t correct = 0, counted = 0;
    for (size_t start = 0; start < order.size(); start += m.config.batch) {
      size_t end = std::min(order.size(), start + m.config.batch);
      Seq2SeqGrads grads(m);
      for (size_t k = start; k < end; ++k) {
        PairStats s = pair_forward_backward(m, pairs[order[k]], &grads);
        epoch_loss += s.loss;
        correct += s.correct;
        counted += s.counted;
      }
      double inv = 1.0 / static_cast<double>(end - start);
      for (numkit::Tensor* g : {&grads.enc.dw, &grads.enc.du, &grads.enc.db, &grads.dec.dw, &grads.dec.du,
                                &grads.dec.db, &grads.dout_w, &grads.dout_b, &grads.demb_intent, &grads.demb_code})
        for (double& v : g->data) v *= inv;
      numkit::adam_step(m.enc.w, grads.enc.dw, s_enc_w);
      numkit::adam_step(m.enc.u, grads.enc.du, s_enc_u);
      numkit::adam_step(m.enc.b, grads.enc.db, s_enc_b);
      numkit::adam_step(m.dec.w, grads.dec.dw, s_dec_w);
      numkit::adam_step(m.dec.u, grads.dec.du, s_dec_u);
      numkit::adam_step(m.dec.b, grads.dec.db, s_dec_b);
      numkit::adam_step(m.out_w, grads.dout_w, s_out_w);
      numkit::adam_step(m.out_b, grads.dout_b, s_out_b);
      if (!m.config.freeze_embeddings) {
        numkit::adam_step(m.intent_emb.matrix, grads.demb_intent, s_emb_i);
        numkit::adam_step(m.code_emb.matrix, grads.demb_code, s_emb_c);
      }
    }
    curve.loss.push_back(epoch_loss / static_cast<double>(pairs.size()));
    curve.token_accuracy.push_back(counted > 0 ? static_cast<double>(correct) / static_cast<double>(counted) : 0.0);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Inference.

struct InferResult {
  std::vector<int> tokens;  // generated indices, without START/END
  EncodedState final_state;  // decoder state after the last executed step
};

// Greedy decoding: argmax per step, ties to the lowest index, stopping at
// END or max_len.
inline InferResult infer_greedy(const std::vector<int>& intent_idx, const Seq2SeqModel& m, size_t max_len = 50) {
  InferResult r;
  r.final_state = encode(intent_idx, m);
  int input = embed::Vocabulary::kStart;
  for (size_t t = 0; t < max_len; ++t) {
    numkit::Tensor x = detail::embedding_row(m.code_emb, input);
    numkit::Tensor h_out, c_out;
    numkit::lstm_cell_step(x, r.final_state.h, r.final_state.c, m.dec, h_out, c_out);
    r.final_state.h = std::move(h_out);
    r.final_state.c = std::move(c_out);
    auto probs = detail::output_softmax(m, r.final_state.h);
    size_t best = 0;
    for (size_t j = 1; j < probs.size(); ++j)
      if (probs[j] > probs[best]) best = j;
    if (static_cast<int>(best) == embed::Vocabulary::kEnd) break;
    r.tokens.push_back(static_cast<int>(best));
    input = static_cast<int>(best);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Checkpoints.

inline numkit::TensorMap model_tensors(const Seq2SeqModel& m) {
  numkit::TensorMap t;
  t["enc.W"] = m.enc.w;
  t["enc.U"] = m.enc.u;
  t["enc.b"] = m.enc.b;
  t["dec.W"] = m.dec.w;
  t["dec.U"] = m.dec.u;
  t["dec.b"] = m.dec.b;
  t["out.W"] = m.out_w;
  t["out.b"] = m.out_b;
  t["emb.intent"] = m.intent_emb.matrix;
  t["emb.code"] = m.code_emb.matrix;
  return t;
}

inline void save_model(const std::string& path, const Seq2SeqModel& m) {
  numkit::save_checkpoint(path, model_tensors(m));
}

inline void load_model_weights(Seq2SeqModel& m, const numkit::TensorMap& tensors) {
  auto fetch = [&](const char* name, numkit::Tensor& dst) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw std::runtime_error(std::string("checkpoint missing tensor ") + name);
    if (it->second.shape != dst.shape)
      throw std::runtime_error(std::string("checkpoint tensor ") + name + " has shape " + it->second.shape_str() +
                               ", expected " + dst.shape_str());
    dst = it->second;
  };
  fetch("enc.W", m.enc.w);
  fetch("enc.U", m.enc.u);
  fetch("enc.b", m.enc.b);
  fetch("dec.W", m.dec.w);
  fetch("dec.U", m.dec.u);
  fetch("dec.b", m.dec.b);
  fetch("out.W", m.out_w);
  fetch("out.b", m.out_b);
  fetch("emb.intent", m.intent_emb.matrix);
  fetch("emb.code", m.code_emb.matrix);
}

}  // namespace snipforge::seq2seq
