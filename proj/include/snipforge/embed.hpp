// Embedding training from scratch: skip-gram with negative sampling and
// GloVe (AdaGrad over the weighted least-squares objective), plus the
// average-embedding pooling used by the classifier and the text file
// format shared by every table.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "snipforge/rng.hpp"
#include "snipforge/tensor.hpp"
#include "snipforge/util.hpp"
#include "snipforge/vocab.hpp"

namespace snipforge::embed {

struct EmbeddingMeta {
  std::string algorithm;  // "w2v" or "glove"
  std::string corpus_tag;
  int window = 0;
  int64_t min_count = 1;
  int epochs = 0;
  size_t dim = 0;
};

struct EmbeddingTable {
  Vocabulary vocab;
  numkit::Tensor matrix;  // [V x dim]
  EmbeddingMeta meta;

  size_t dim() const { return matrix.cols(); }

  const double* row(int idx) const {
    if (idx < 0 || static_cast<size_t>(idx) >= matrix.rows())
      throw std::out_of_range("embedding row " + std::to_string(idx));
    return &matrix.data[static_cast<size_t>(idx) * dim()];
  }
};

// ---------------------------------------------------------------------------
// Skip-gram with negative sampling.

struct SkipgramConfig {
  size_t dim = 100;
  int window = 4;
  int negatives = 5;
  int epochs = 10;
  double lr = 0.025;  // decays linearly to lr/10 across epochs
  uint64_t rng_seed = 0;
  int threads = 1;  // >1 enables the racy hogwild mode (nondeterministic)
};

struct SkipgramResult {
  EmbeddingTable table;          // input vectors
  numkit::Tensor context_matrix;  // output vectors, exposed for analysis
};

namespace detail {

// unigram^0.75 noise distribution as a cumulative table
struct NoiseTable {
  std::vector<double> cumulative;
  std::vector<int> indices;
  double total = 0.0;

  explicit NoiseTable(const Vocabulary& vocab) {
    for (size_t i = Vocabulary::kReserved; i < vocab.size(); ++i) {
      int64_t c = vocab.count(vocab.token(static_cast<int>(i)));
      if (c <= 0) continue;
      total += std::pow(static_cast<double>(c), 0.75);
      cumulative.push_back(total);
      indices.push_back(static_cast<int>(i));
    }
  }

  int sample(Rng& rng) const {
    double u = rng.uniform01() * total;
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
    size_t k = static_cast<size_t>(it - cumulative.begin());
    if (k >= indices.size()) k = indices.size() - 1;
    return indices[k];
  }
};

inline std::vector<std::vector<int>> index_corpus(const std::vector<std::vector<std::string>>& corpus,
                                                  const Vocabulary& vocab) {
  std::vector<std::vector<int>> out;
  out.reserve(corpus.size());
  for (const auto& sent : corpus) {
    std::vector<int> idx;
    idx.reserve(sent.size());
    for (const auto& tok : sent) idx.push_back(vocab.index(tok));
    out.push_back(std::move(idx));
  }
  return out;
}

inline void sgns_pass(const std::vector<std::vector<int>>& sentences, size_t begin, size_t end, numkit::Tensor& input,
                      numkit::Tensor& output, const NoiseTable& noise, const SkipgramConfig& cfg, double lr,
                      Rng& rng) {
  const size_t dim = cfg.dim;
  std::vector<double> accum(dim);
  for (size_t s = begin; s < end; ++s) {
    const auto& sent = sentences[s];
    const int n = static_cast<int>(sent.size());
    for (int center = 0; center < n; ++center) {
      const int w = sent[static_cast<size_t>(center)];
      double* vw = &input.data[static_cast<size_t>(w) * dim];
      for (int off = -cfg.window; off <= cfg.window; ++off) {
        if (off == 0) continue;
        int ctx_pos = center + off;
        if (ctx_pos < 0 || ctx_pos >= n) continue;
        const int c = sent[static_cast<size_t>(ctx_pos)];
        std::fill(accum.begin(), accum.end(), 0.0);
        // positive pair, then k noise draws
        for (int k = 0; k <= cfg.negatives; ++k) {
          int target;
          double label;
          if (k == 0) {
            target = c;
            label = 1.0;
          } else {
            target = noise.sample(rng);
            if (target == c) continue;
            label = 0.0;
          }
          double* vt = &output.data[static_cast<size_t>(target) * dim];
          double z = 0.0;
          for (size_t j = 0; j < dim; ++j) z += vw[j] * vt[j];
          double g = lr * (label - 1.0 / (1.0 + std::exp(-z)));
          for (size_t j = 0; j < dim; ++j) {
            accum[j] += g * vt[j];
            vt[j] += g * vw[j];
          }
        }
        for (size_t j = 0; j < dim; ++j) vw[j] += accum[j];
      }
    }
  }
}

}  // namespace detail

// For each (center, context) pair within the window, raises
// ln sigmoid(v'_c . v_w) plus the negative-sample terms; noise draws
// follow the unigram^0.75 distribution. Bitwise reproducible when
// threads == 1; the multi-threaded mode is hogwild-style and documented
// as nondeterministic.
inline SkipgramResult train_skipgram(const std::vector<std::vector<std::string>>& corpus, const Vocabulary& vocab,
                                     const SkipgramConfig& cfg) {
  if (corpus.empty()) throw std::invalid_argument("train_skipgram: empty corpus");
  const size_t v = vocab.size(), dim = cfg.dim;
  Rng rng(cfg.rng_seed);
  numkit::Tensor input({v, dim});
  for (double& x : input.data) x = rng.uniform(-0.5 / static_cast<double>(dim), 0.5 / static_cast<double>(dim));
  numkit::Tensor output({v, dim});

  auto sentences = detail::index_corpus(corpus, vocab);
  detail::NoiseTable noise(vocab);
  if (noise.total > 0.0) {
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      double progress = cfg.epochs > 1 ? static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1) : 0.0;
      double lr = cfg.lr * (1.0 - 0.9 * progress);
      if (cfg.threads <= 1) {
        detail::sgns_pass(sentences, 0, sentences.size(), input, output, noise, cfg, lr, rng);
      } else {
        std::vector<std::thread> workers;
        size_t shard = (sentences.size() + static_cast<size_t>(cfg.threads) - 1) / static_cast<size_t>(cfg.threads);
        for (int t = 0; t < cfg.threads; ++t) {
          size_t b = static_cast<size_t>(t) * shard;
          size_t e = std::min(sentences.size(), b + shard);
          if (b >= e) break;
          workers.emplace_back([&, b, e, t]() {
            Rng worker_rng(cfg.rng_seed + 0x9e3779b9u * static_cast<uint64_t>(t + 1));
            detail::sgns_pass(sentences, b, e, input, output, noise, cfg, lr, worker_rng);
          });
        }
        for (auto& w : workers) w.join();
      }
    }
  }

  SkipgramResult result;
  result.table.vocab = vocab;
  result.table.matrix = std::move(input);
  result.table.meta.algorithm = "w2v";
  result.table.meta.window = cfg.window;
  result.table.meta.epochs = cfg.epochs;
  result.table.meta.dim = dim;
  result.context_matrix = std::move(output);
  return result;
}

// ---------------------------------------------------------------------------
// GloVe.

// symmetric weighted counts keyed by (i, j); both directions stored
using Cooccurrence = std::map<std::pair<int, int>, double>;

// X_ij accumulates 1/distance for each pair within the window.
inline Cooccurrence build_cooccurrence(const std::vector<std::vector<std::string>>& corpus, const Vocabulary& vocab,
                                       int window) {
  Cooccurrence x;
  for (const auto& sent : corpus) {
    std::vector<int> idx;
    idx.reserve(sent.size());
    for (const auto& tok : sent) idx.push_back(vocab.index(tok));
    const int n = static_cast<int>(idx.size());
    for (int p = 0; p < n; ++p) {
      for (int d = 1; d <= window && p + d < n; ++d) {
        double wgt = 1.0 / static_cast<double>(d);
        x[{idx[static_cast<size_t>(p)], idx[static_cast<size_t>(p + d)]}] += wgt;
        x[{idx[static_cast<size_t>(p + d)], idx[static_cast<size_t>(p)]}] += wgt;
      }
    }
  }
  return x;
}

struct GloveConfig {
  size_t dim = 100;
  int epochs = 10;
  double lr = 0.05;
  double x_max = 100.0;
  double alpha = 0.75;
  uint64_t rng_seed = 0;
};

struct GloveResult {
  EmbeddingTable table;             // w + w~ per token
  std::vector<double> epoch_cost;   // J per epoch
};

// Minimizes J = sum f(X_ij) (w_i . w~_j + b_i + b~_j - ln X_ij)^2 with
// AdaGrad over the nonzero entries, visiting them in a seeded shuffle.
inline GloveResult train_glove(const Cooccurrence& x, const Vocabulary& vocab, const GloveConfig& cfg) {
  if (x.empty()) throw std::invalid_argument("train_glove: empty co-occurrence matrix");
  const size_t v = vocab.size(), dim = cfg.dim;
  Rng rng(cfg.rng_seed);

  numkit::Tensor w({v, dim}), wt({v, dim}), b({v}), bt({v});
  for (double& q : w.data) q = (rng.uniform01() - 0.5) / static_cast<double>(dim);
  for (double& q : wt.data) q = (rng.uniform01() - 0.5) / static_cast<double>(dim);
  for (double& q : b.data) q = (rng.uniform01() - 0.5) / static_cast<double>(dim);
  for (double& q : bt.data) q = (rng.uniform01() - 0.5) / static_cast<double>(dim);
  // squared-gradient accumulators start at 1 so early steps stay bounded
  numkit::Tensor gw({v, dim}), gwt({v, dim}), gb({v}), gbt({v});
  for (numkit::Tensor* t : {&gw, &gwt, &gb, &gbt})
    for (double& q : t->data) q = 1.0;

  struct Entry {
    int i, j;
    double val;
  };
  std::vector<Entry> entries;
  entries.reserve(x.size());
  for (const auto& [key, val] : x) entries.push_back({key.first, key.second, val});

  GloveResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // seeded Fisher-Yates keeps runs reproducible
    for (size_t k = entries.size(); k > 1; --k) std::swap(entries[k - 1], entries[rng.bounded(k)]);
    double cost = 0.0;
    for (const Entry& e : entries) {
      double* wi = &w.data[static_cast<size_t>(e.i) * dim];
      double* wj = &wt.data[static_cast<size_t>(e.j) * dim];
      double diff = b.data[static_cast<size_t>(e.i)] + bt.data[static_cast<size_t>(e.j)] - std::log(e.val);
      for (size_t k = 0; k < dim; ++k) diff += wi[k] * wj[k];
      double f = e.val < cfg.x_max ? std::pow(e.val / cfg.x_max, cfg.alpha) : 1.0;
      cost += f * diff * diff;
      double fdiff = f * diff;
      for (size_t k = 0; k < dim; ++k) {
        double grad_wi = fdiff * wj[k];
        double grad_wj = fdiff * wi[k];
        wi[k] -= cfg.lr * grad_wi / std::sqrt(gw.data[static_cast<size_t>(e.i) * dim + k]);
        wj[k] -= cfg.lr * grad_wj / std::sqrt(gwt.data[static_cast<size_t>(e.j) * dim + k]);
        gw.data[static_cast<size_t>(e.i) * dim + k] += grad_wi * grad_wi;
        gwt.data[static_cast<size_t>(e.j) * dim + k] += grad_wj * grad_wj;
      }
      b.data[static_cast<size_t>(e.i)] -= cfg.lr * fdiff / std::sqrt(gb.data[static_cast<size_t>(e.i)]);
      bt.data[static_cast<size_t>(e.j)] -= cfg.lr * fdiff / std::sqrt(gbt.data[static_cast<size_t>(e.j)]);
      gb.data[static_cast<size_t>(e.i)] += fdiff * fdiff;
      gbt.data[static_cast<size_t>(e.j)] += fdiff * fdiff;
    }
    result.epoch_cost.push_back(cost);
  }

  result.table.vocab = vocab;
  result.table.matrix = numkit::Tensor({v, dim});
  for (size_t i = 0; i < v * dim; ++i) result.table.matrix.data[i] = w.data[i] + wt.data[i];
  result.table.meta.algorithm = "glove";
  result.table.meta.epochs = cfg.epochs;
  result.table.meta.dim = dim;
  return result;
}

// ---------------------------------------------------------------------------

// Mean of the vectors for the given tokens; out-of-vocabulary tokens
// contribute the UNK row; an empty sequence yields the zero vector.
inline numkit::Tensor average_embedding(const std::vector<std::string>& tokens, const EmbeddingTable& table) {
  numkit::Tensor out({table.dim()});
  if (tokens.empty()) return out;
  for (const auto& tok : tokens) {
    const double* row = table.row(table.vocab.index(tok));
    for (size_t j = 0; j < table.dim(); ++j) out.data[j] += row[j];
  }
  for (double& v : out.data) v /= static_cast<double>(tokens.size());
  return out;
}

// Text format: first line "V d", then one line per token
// "token v1 ... vd". Tokens may contain spaces, so parsing splits the
// trailing d floats off the right.
inline std::string format_embedding_text(const EmbeddingTable& table) {
  std::string out = std::to_string(table.matrix.rows()) + " " + std::to_string(table.dim()) + "\n";
  char buf[64];
  for (size_t i = 0; i < table.matrix.rows(); ++i) {
    out += table.vocab.token(static_cast<int>(i));
    for (size_t j = 0; j < table.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), " %.17g", table.matrix.at(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline EmbeddingTable parse_embedding_text(const std::string& text) {
  auto lines = util::split(text, '\n');
  if (lines.empty()) throw std::runtime_error("embedding file: empty");
  auto header = util::split_ws(lines[0]);
  if (header.size() != 2) throw std::runtime_error("embedding file: bad header");
  size_t v = std::stoull(header[0]), dim = std::stoull(header[1]);
  if (lines.size() < v + 1) throw std::runtime_error("embedding file: truncated");

  EmbeddingTable table;
  table.matrix = numkit::Tensor({v, dim});
  table.meta.dim = dim;
  table.vocab.index_to_token.clear();
  table.vocab.token_to_index.clear();
  for (size_t i = 0; i < v; ++i) {
    const std::string& line = lines[i + 1];
    size_t end = line.size();
    for (size_t j = dim; j > 0; --j) {
      size_t sp = line.rfind(' ', end - 1);
      if (sp == std::string::npos) throw std::runtime_error("embedding file: short row " + std::to_string(i));
      table.matrix.at(i, j - 1) = std::stod(line.substr(sp + 1, end - sp - 1));
      end = sp;
    }
    std::string tok = line.substr(0, end);
    table.vocab.token_to_index[tok] = static_cast<int>(i);
    table.vocab.index_to_token.push_back(std::move(tok));
  }
  for (int i = 0; i < Vocabulary::kReserved; ++i) {
    static const char* reserved[] = {"<PAD>", "<UNK>", "<START>", "<END>"};
    if (static_cast<size_t>(i) >= table.vocab.index_to_token.size() ||
        table.vocab.index_to_token[static_cast<size_t>(i)] != reserved[i])
      throw std::runtime_error("embedding file: reserved token rows missing");
  }
  return table;
}

}  // namespace snipforge::embed
