#include <gtest/gtest.h>

#include <cmath>

#include "snipforge/classifier.hpp"
#include "snipforge/gradcheck.hpp"

using namespace snipforge;
using namespace snipforge::pairclassifier;

namespace {

PairFeatures feat(std::vector<double> intent, std::vector<double> code, int label) {
  PairFeatures f;
  f.intent_vec = numkit::Tensor({intent.size()}, intent);
  f.code_vec = numkit::Tensor({code.size()}, code);
  f.label = label;
  return f;
}

// positives: code vector tracks the intent vector; negatives: independent
std::vector<PairFeatures> separable_features(size_t n, size_t d, uint64_t seed) {
  Rng rng(seed);
  std::vector<PairFeatures> out;
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> a(d), b(d);
    for (double& v : a) v = rng.uniform(-1, 1);
    bool positive = i % 2 == 0;
    for (size_t j = 0; j < d; ++j) b[j] = positive ? a[j] + rng.uniform(-0.05, 0.05) : rng.uniform(-1, 1);
    out.push_back(feat(a, b, positive ? 1 : 0));
  }
  return out;
}

ClassifierConfig small_config() {
  ClassifierConfig cfg;
  cfg.layers = {16, 8, 4};
  cfg.epochs = 40;
  cfg.batch = 32;
  cfg.lr = 0.005;
  return cfg;
}

}  // namespace

TEST(Hadamard, ToyDim2) {
  seq2seq::EncodedState st;
  st.h = numkit::Tensor({2}, {1, 2});
  st.c = numkit::Tensor({2}, {3, 4});
  auto v = code_vec_hadamard(st);
  EXPECT_DOUBLE_EQ(v.data[0], 3.0);
  EXPECT_DOUBLE_EQ(v.data[1], 8.0);
}

TEST(Hadamard, ZeroCellGivesZeroVector) {
  seq2seq::EncodedState st;
  st.h = numkit::Tensor({3}, {1, -2, 5});
  st.c = numkit::Tensor({3});
  auto v = code_vec_hadamard(st);
  for (double x : v.data) EXPECT_DOUBLE_EQ(x, 0.0);
}

TEST(Hadamard, MatchesScalarLoop) {
  Rng rng(1);
  seq2seq::EncodedState st;
  st.h = numkit::Tensor({100});
  st.c = numkit::Tensor({100});
  for (double& v : st.h.data) v = rng.uniform(-1, 1);
  for (double& v : st.c.data) v = rng.uniform(-1, 1);
  auto v = code_vec_hadamard(st);
  for (size_t i = 0; i < 100; ++i) EXPECT_EQ(v.data[i], st.h.data[i] * st.c.data[i]);
}

TEST(Hadamard, DimensionMismatchRejected) {
  seq2seq::EncodedState st;
  st.h = numkit::Tensor({2});
  st.c = numkit::Tensor({3});
  EXPECT_THROW(code_vec_hadamard(st), std::invalid_argument);
}

TEST(CodeVecAverage, DelegatesToAverageEmbedding) {
  embed::EmbeddingTable t;
  t.vocab = embed::build_vocab({{"a", "b"}}, 1, 10);
  t.matrix = numkit::Tensor({t.vocab.size(), 2});
  t.matrix.at(static_cast<size_t>(t.vocab.index("a")), 0) = 1.0;
  t.matrix.at(static_cast<size_t>(t.vocab.index("a")), 1) = 1.0;
  t.matrix.at(static_cast<size_t>(t.vocab.index("b")), 0) = 3.0;
  t.matrix.at(static_cast<size_t>(t.vocab.index("b")), 1) = 3.0;
  auto v = code_vec_average({t.vocab.index("a"), t.vocab.index("b")}, t);
  EXPECT_DOUBLE_EQ(v.data[0], 2.0);
  auto empty = code_vec_average({}, t);
  EXPECT_DOUBLE_EQ(empty.data[0], 0.0);
}

TEST(Predict, ZeroWeightsGiveHalf) {
  ClassifierConfig cfg;
  cfg.layers = {4, 2};
  Classifier c = init_classifier(cfg, 6, 1);
  for (auto& w : c.w)
    for (double& v : w.data) v = 0.0;
  for (auto& b : c.b)
    for (double& v : b.data) v = 0.0;
  auto probs = predict(c, {feat({1, 2, 3}, {4, 5, 6}, 1)});
  ASSERT_EQ(probs.size(), 1u);
  EXPECT_DOUBLE_EQ(probs[0], 0.5);
}

TEST(Predict, DuplicateRowsIdentical) {
  Classifier c = init_classifier(small_config(), 8, 3);
  auto f = feat({1, 0, -1, 2}, {0.5, 0.5, 0, 1}, 1);
  auto probs = predict(c, {f, f, f});
  EXPECT_EQ(probs[0], probs[1]);
  EXPECT_EQ(probs[1], probs[2]);
}

TEST(Predict, MatchesScalarOracle) {
  // one hidden relu layer, hand-set weights, dim 2 in / 2 hidden
  ClassifierConfig cfg;
  cfg.layers = {2};
  Classifier c = init_classifier(cfg, 2, 0);
  c.w[0] = numkit::Tensor({2, 2}, {1.0, 0.5, -0.25, 2.0});
  c.b[0] = numkit::Tensor({2}, {0.1, -0.2});
  c.w[1] = numkit::Tensor({2, 1}, {0.3, -0.4});
  c.b[1] = numkit::Tensor({1}, {0.05});

  double x0 = 0.5, x1 = -1.0;
  double h0 = std::max(0.0, x0 * 1.0 + x1 * -0.25 + 0.1);
  double h1 = std::max(0.0, x0 * 0.5 + x1 * 2.0 - 0.2);
  double z = h0 * 0.3 + h1 * -0.4 + 0.05;
  double expect = 1.0 / (1.0 + std::exp(-z));

  auto probs = predict(c, {feat({0.5}, {-1.0}, 1)});
  EXPECT_NEAR(probs[0], expect, 1e-12);
}

TEST(Predict, ShapeMismatchRejected) {
  Classifier c = init_classifier(small_config(), 8, 3);
  EXPECT_THROW(predict(c, {feat({1}, {2}, 0)}), std::invalid_argument);
}

TEST(Predict, OutputsStrictlyInsideUnitInterval) {
  Classifier c = init_classifier(small_config(), 4, 9);
  // saturate by scaling weights hard
  for (auto& w : c.w)
    for (double& v : w.data) v *= 200.0;
  auto probs = predict(c, {feat({5, 5}, {5, 5}, 1), feat({-5, -5}, {-5, -5}, 0)});
  for (double p : probs) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(TrainClassifier, SeparableFeaturesLearn) {
  auto train_set = separable_features(600, 4, 11);
  auto test_set = separable_features(200, 4, 12);
  Classifier c = init_classifier(small_config(), 8, 13);
  train_classifier(c, train_set, 14);
  EvalStats s = evaluate(c, test_set);
  EXPECT_GE(s.accuracy, 0.95);
}

TEST(TrainClassifier, SingleClassRejected) {
  std::vector<PairFeatures> feats = {feat({1}, {1}, 1), feat({2}, {2}, 1)};
  Classifier c = init_classifier(small_config(), 2, 1);
  EXPECT_THROW(train_classifier(c, feats, 2), std::invalid_argument);
}

TEST(TrainClassifier, ZeroEpochsStaysNearHalf) {
  // reference-scale shapes: 100-d halves, 100-50-25 stack
  ClassifierConfig cfg;
  cfg.epochs = 0;
  Rng rng(21);
  std::vector<PairFeatures> feats;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> a(100), b(100);
    for (double& v : a) v = rng.uniform(-0.5, 0.5);
    for (double& v : b) v = rng.uniform(-0.5, 0.5);
    feats.push_back(feat(a, b, i % 2));
  }
  Classifier c = init_classifier(cfg, 200, 22);
  train_classifier(c, feats, 23);
  for (double p : predict(c, feats)) {
    EXPECT_GE(p, 0.3);
    EXPECT_LE(p, 0.7);
  }
}

TEST(TrainClassifier, DeterministicGivenSeed) {
  auto feats = separable_features(120, 4, 31);
  Classifier a = init_classifier(small_config(), 8, 32);
  Classifier b = init_classifier(small_config(), 8, 32);
  train_classifier(a, feats, 33);
  train_classifier(b, feats, 33);
  for (size_t i = 0; i < a.w.size(); ++i) EXPECT_EQ(a.w[i].data, b.w[i].data);
}

TEST(TrainClassifier, ShuffledLabelsStayNearChance) {
  Rng rng(41);
  std::vector<PairFeatures> feats;
  for (int i = 0; i < 600; ++i) {
    std::vector<double> a(4), b(4);
    for (double& v : a) v = rng.uniform(-1, 1);
    for (double& v : b) v = rng.uniform(-1, 1);
    feats.push_back(feat(a, b, static_cast<int>(rng.bounded(2))));
  }
  auto test_set = feats;
  Classifier c = init_classifier(small_config(), 8, 42);
  train_classifier(c, feats, 43);
  EvalStats s = evaluate(c, test_set);
  EXPECT_GE(s.loss, 0.5);
  EXPECT_LE(s.loss, 0.95);
}

TEST(GradCheckClassifier, FullPassWithFixedDropoutMasks) {
  auto feats = separable_features(6, 3, 51);
  ClassifierConfig cfg;
  cfg.layers = {4, 2};
  cfg.dropout = 0.5;
  Classifier c = init_classifier(cfg, 6, 52);
  // nudge the zero-init biases off the relu kink: with dropout a row can
  // go all-zero, parking a pre-activation exactly at the corner where the
  // central difference straddles the non-differentiable point
  Rng bias_rng(53);
  for (auto& b : c.b)
    for (double& v : b.data) v = bias_rng.uniform(-0.05, 0.05);

  std::vector<size_t> idx = {0, 1, 2, 3, 4, 5};
  numkit::Tensor x = pairclassifier::detail::stack_features(feats, idx);
  numkit::Tensor y = pairclassifier::detail::labels_of(feats, idx);

  auto flatten = [&](const Classifier& cl) {
    std::vector<double> out;
    for (size_t i = 0; i < cl.w.size(); ++i) {
      out.insert(out.end(), cl.w[i].data.begin(), cl.w[i].data.end());
      out.insert(out.end(), cl.b[i].data.begin(), cl.b[i].data.end());
    }
    return out;
  };
  auto unflatten = [&](Classifier& cl, const std::vector<double>& flat) {
    size_t off = 0;
    for (size_t i = 0; i < cl.w.size(); ++i) {
      std::copy(flat.begin() + static_cast<long>(off), flat.begin() + static_cast<long>(off + cl.w[i].size()),
                cl.w[i].data.begin());
      off += cl.w[i].size();
      std::copy(flat.begin() + static_cast<long>(off), flat.begin() + static_cast<long>(off + cl.b[i].size()),
                cl.b[i].data.begin());
      off += cl.b[i].size();
    }
  };

  // masks re-seeded identically per evaluation so dropout is a fixed map
  Classifier probe = c;
  auto objective = [&](const std::vector<double>& flat) {
    unflatten(probe, flat);
    Rng mask_rng(77);
    numkit::Tensor p = pairclassifier::detail::mlp_forward(probe, x, true, &mask_rng);
    return numkit::loss(numkit::LossKind::bce, p, y).value;
  };

  Rng mask_rng(77);
  std::vector<numkit::DenseCache> caches;
  std::vector<numkit::Tensor> masks;
  numkit::Tensor p = pairclassifier::detail::mlp_forward(c, x, true, &mask_rng, &caches, &masks);
  auto l = numkit::loss(numkit::LossKind::bce, p, y);
  std::vector<numkit::Tensor> dw(c.w.size()), db(c.b.size());
  for (size_t i = 0; i < c.w.size(); ++i) {
    dw[i] = numkit::Tensor(c.w[i].shape);
    db[i] = numkit::Tensor(c.b[i].shape);
  }
  size_t last = c.w.size() - 1;
  numkit::Tensor dh =
      numkit::dense_backward(caches[last], c.w[last], numkit::Activation::sigmoid, l.grad, dw[last], db[last]);
  for (size_t i = last; i-- > 0;) {
    for (size_t k = 0; k < dh.size(); ++k) dh.data[k] *= masks[i].data[k];
    dh = numkit::dense_backward(caches[i], c.w[i], numkit::Activation::relu, dh, dw[i], db[i]);
  }
  std::vector<double> analytic;
  for (size_t i = 0; i < c.w.size(); ++i) {
    analytic.insert(analytic.end(), dw[i].data.begin(), dw[i].data.end());
    analytic.insert(analytic.end(), db[i].data.begin(), db[i].data.end());
  }
  EXPECT_LT(numkit::grad_check(objective, flatten(c), analytic), 1e-4);
}

TEST(BuildFeatures, CountsAndDeterminism) {
  seq2seq::Seq2SeqConfig seqcfg;
  seqcfg.intent_len = 3;
  seqcfg.code_len = 4;
  seqcfg.hidden = 4;
  embed::EmbeddingTable it, ct;
  it.vocab = embed::build_vocab({{"sort", "list"}}, 1, 100);
  ct.vocab = embed::build_vocab({{"x", "y"}}, 1, 100);
  Rng rng(5);
  it.matrix = numkit::Tensor({it.vocab.size(), 4});
  ct.matrix = numkit::Tensor({ct.vocab.size(), 4});
  for (double& v : it.matrix.data) v = rng.uniform(-0.5, 0.5);
  for (double& v : ct.matrix.data) v = rng.uniform(-0.5, 0.5);
  auto model = seq2seq::init_model(seqcfg, it, ct, 6);

  std::vector<corpus::Sample> samples;
  for (int i = 0; i < 5; ++i) {
    corpus::Sample s;
    s.question_id = i;
    s.intent = "sort list";
    s.snippet = "x = y";
    s.label = i % 2;
    samples.push_back(s);
  }
  auto f1 = build_features(samples, model, Variant::avg_w2v_current, it, ct);
  auto f2 = build_features(samples, model, Variant::avg_w2v_current, it, ct);
  ASSERT_EQ(f1.size(), samples.size());
  for (size_t i = 0; i < f1.size(); ++i) {
    EXPECT_EQ(f1[i].intent_vec.data, f2[i].intent_vec.data);
    EXPECT_EQ(f1[i].code_vec.data, f2[i].code_vec.data);
    EXPECT_EQ(f1[i].label, samples[i].label);
  }

  auto fh = build_features(samples, model, Variant::hidden_state, it, ct);
  EXPECT_EQ(fh[0].code_vec.size(), seqcfg.hidden);

  EXPECT_TRUE(build_features({}, model, Variant::hidden_state, it, ct).empty());

  corpus::Sample unlabelled;
  unlabelled.intent = "a";
  unlabelled.snippet = "b";
  EXPECT_THROW(build_features({unlabelled}, model, Variant::hidden_state, it, ct), std::invalid_argument);
}

TEST(Persistence, ClassifierRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "snipforge_clf.snf1";
  ClassifierConfig cfg;
  cfg.layers = {8, 4, 2};
  Classifier c = init_classifier(cfg, 12, 61);
  save_classifier(path.string(), c);
  Classifier back = load_classifier(path.string(), cfg);
  ASSERT_EQ(back.w.size(), c.w.size());
  for (size_t i = 0; i < c.w.size(); ++i) {
    EXPECT_EQ(back.w[i].shape, c.w[i].shape);
    for (size_t k = 0; k < c.w[i].size(); ++k)
      EXPECT_DOUBLE_EQ(back.w[i].data[k], static_cast<double>(static_cast<float>(c.w[i].data[k])));
  }
  auto tensors = classifier_tensors(c);
  for (const char* name : {"fc1.W", "fc1.b", "fc2.W", "fc2.b", "fc3.W", "fc3.b", "out.W", "out.b"})
    EXPECT_TRUE(tensors.count(name)) << name;
  std::filesystem::remove(path);
}

TEST(Persistence, FeaturesCacheRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "snipforge_feats.snf1";
  auto side = std::filesystem::temp_directory_path() / "snipforge_feats.json";
  auto feats = separable_features(10, 3, 71);
  save_features(path.string(), feats, Variant::avg_glove_current, side.string(), {{"source", "test"}});
  auto back = load_features(path.string());
  ASSERT_EQ(back.size(), feats.size());
  for (size_t i = 0; i < feats.size(); ++i) {
    EXPECT_EQ(back[i].label, feats[i].label);
    for (size_t j = 0; j < feats[i].intent_vec.size(); ++j)
      EXPECT_DOUBLE_EQ(back[i].intent_vec.data[j],
                       static_cast<double>(static_cast<float>(feats[i].intent_vec.data[j])));
  }
  nlohmann::json sidecar = nlohmann::json::parse(util::read_file(side.string()));
  EXPECT_EQ(sidecar["variant"], "glove-current");
  std::filesystem::remove(path);
  std::filesystem::remove(side);
}

TEST(ConfigValidation, RejectsBadShapes) {
  ClassifierConfig inc;
  inc.layers = {50, 100};
  EXPECT_THROW(inc.validate(), std::invalid_argument);
  ClassifierConfig drop;
  drop.dropout = 1.0;
  EXPECT_THROW(drop.validate(), std::invalid_argument);
}
