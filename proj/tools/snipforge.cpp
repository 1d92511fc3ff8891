// snipforge: batch pipeline driving corpus curation, API mining, lexing,
// embedding training, seq2seq + classifier training and evaluation.
// Every subcommand reads a config tree, writes its artifacts plus a run
// manifest into --out, and echoes the normalized config beside them.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snipforge/apiminer.hpp"
#include "snipforge/classifier.hpp"
#include "snipforge/codelex.hpp"
#include "snipforge/config.hpp"
#include "snipforge/corpus.hpp"
#include "snipforge/embed.hpp"
#include "snipforge/evalkit.hpp"
#include "snipforge/manifest.hpp"
#include "snipforge/pca.hpp"
#include "snipforge/plot.hpp"
#include "snipforge/seq2seq.hpp"
#include "snipforge/util.hpp"
#include "snipforge/vocab.hpp"

namespace fs = std::filesystem;
using namespace snipforge;

namespace {

struct Context {
  cli::PipelineConfig config;
  nlohmann::json config_snapshot;
  std::string out_dir;
  std::optional<uint64_t> seed;
  bool nondeterministic = false;
  int threads = 1;
  std::string variant = "w2v-current";
};

std::string out_path(const Context& ctx, const std::string& name) {
  return (fs::path(ctx.out_dir) / name).string();
}

uint64_t stage_seed(const Context& ctx, const std::string& stage) {
  if (ctx.seed) return util::derive_seed(*ctx.seed, stage);
  if (!ctx.nondeterministic)
    throw std::runtime_error("stage '" + stage + "' is randomized: pass --seed N or --nondeterministic");
  std::random_device rd;
  return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

void prepare_out(Context& ctx) {
  if (ctx.out_dir.empty()) ctx.out_dir = ".";
  fs::create_directories(ctx.out_dir);
  util::write_file(out_path(ctx, "config.normalized.json"), ctx.config_snapshot.dump(2) + "\n");
}

std::vector<corpus::Sample> load_labelled(const std::string& path) {
  auto r = corpus::load_samples(path, corpus::FileFormat::jsonl, corpus::Source::curated);
  // label/source round-trip through the jsonl written by curate
  std::vector<corpus::Sample> out;
  std::string content = util::read_file(path);
  size_t i = 0;
  for (const std::string& line : util::split(content, '\n')) {
    if (util::trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    corpus::Sample s;
    s.question_id = j.value("question_id", int64_t{0});
    s.intent = j.value("intent", "");
    s.snippet = j.value("snippet", "");
    if (j.contains("prob")) s.prob = j["prob"].get<double>();
    if (j.contains("source")) s.source = corpus::parse_source(j["source"].get<std::string>());
    if (j.contains("label")) s.label = j["label"].get<int>();
    if (j.contains("snippet_question_id")) s.snippet_question_id = j["snippet_question_id"].get<int64_t>();
    out.push_back(std::move(s));
    ++i;
  }
  (void)r;
  return out;
}

embed::EmbeddingTable load_table(const std::string& path) {
  return embed::parse_embedding_text(util::read_file(path));
}

// seq2seq vocabularies take the top `cap` tokens of the embedding vocab
// (rows are already count-ordered), reserved rows always kept
embed::EmbeddingTable slice_table(const embed::EmbeddingTable& t, size_t cap) {
  size_t keep = std::min(t.matrix.rows(), cap + embed::Vocabulary::kReserved);
  embed::EmbeddingTable out;
  out.meta = t.meta;
  out.matrix = numkit::Tensor({keep, t.dim()});
  std::copy(t.matrix.data.begin(), t.matrix.data.begin() + static_cast<long>(keep * t.dim()),
            out.matrix.data.begin());
  out.vocab.index_to_token.clear();
  out.vocab.token_to_index.clear();
  for (size_t i = 0; i < keep; ++i) {
    out.vocab.index_to_token.push_back(t.vocab.index_to_token[i]);
    out.vocab.token_to_index[t.vocab.index_to_token[i]] = static_cast<int>(i);
  }
  return out;
}

seq2seq::Seq2SeqModel rebuild_seq2seq(const Context& ctx, const std::string& ckpt_path,
                                      const std::string& intent_emb_path, const std::string& code_emb_path) {
  seq2seq::Seq2SeqConfig cfg = ctx.config.seq2seq;
  auto intent_table = slice_table(load_table(intent_emb_path), cfg.intent_vocab_cap);
  auto code_table = slice_table(load_table(code_emb_path), cfg.code_vocab_cap);
  auto model = seq2seq::init_model(cfg, std::move(intent_table), std::move(code_table), 0);
  seq2seq::load_model_weights(model, numkit::load_checkpoint(ckpt_path));
  return model;
}

std::vector<std::string> gather_source_files(const std::vector<std::string>& paths, int64_t& unreadable) {
  std::vector<std::string> contents;
  std::vector<std::string> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::recursive_directory_iterator(p))
        if (entry.is_regular_file() && entry.path().extension() == ".py") files.push_back(entry.path().string());
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(p);
    }
  }
  for (const auto& f : files) {
    try {
      contents.push_back(util::read_file(f));
    } catch (const std::exception&) {
      ++unreadable;
    }
  }
  return contents;
}

// ---------------------------------------------------------------------------

int cmd_curate(Context& ctx, const std::string& train_path, const std::string& mined_path,
               const std::string& staqc_path, const std::string& format_name) {
  prepare_out(ctx);
  uint64_t seed = stage_seed(ctx, "curate");
  cli::RunManifest manifest("curate", ctx.config_snapshot, seed);
  corpus::FileFormat format = format_name == "tsv" ? corpus::FileFormat::tsv : corpus::FileFormat::jsonl;

  corpus::CurateInputs inputs;
  std::vector<corpus::Reject> load_rejects;
  auto load = [&](const std::string& path, corpus::Source src) {
    std::vector<corpus::Sample> out;
    if (path.empty()) return out;
    manifest.add_input(path);
    auto r = corpus::load_samples(path, format, src);
    load_rejects.insert(load_rejects.end(), r.rejects.begin(), r.rejects.end());
    return r.samples;
  };
  inputs.conala_train = load(train_path, corpus::Source::curated);
  inputs.conala_mined = load(mined_path, corpus::Source::mined);
  inputs.staqc = load(staqc_path, corpus::Source::staqc);
  manifest.mark("load");

  corpus::CurationConfig ccfg = ctx.config.curation;
  ccfg.rng_seed = seed;
  corpus::CurateResult result = corpus::curate(inputs, ccfg);
  manifest.mark("curate");

  // held-out test split with the configured positive share
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < result.samples.size(); ++i)
    (*result.samples[i].label == 1 ? pos : neg).push_back(i);
  Rng split_rng(util::derive_seed(seed, "test-split"));
  auto shuffle = [&](std::vector<size_t>& v) {
    for (size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[split_rng.bounded(k)]);
  };
  shuffle(pos);
  shuffle(neg);
  size_t want_pos = static_cast<size_t>(ctx.config.test_pos_ratio * static_cast<double>(ctx.config.test_size) + 0.5);
  size_t test_pos = std::min(want_pos, pos.size() / 2);
  size_t test_neg = std::min(ctx.config.test_size - std::min(want_pos, ctx.config.test_size), neg.size() / 2);
  std::set<size_t> test_idx(pos.begin(), pos.begin() + static_cast<long>(test_pos));
  test_idx.insert(neg.begin(), neg.begin() + static_cast<long>(test_neg));

  std::vector<corpus::Sample> train_set, test_set;
  for (size_t i = 0; i < result.samples.size(); ++i)
    (test_idx.count(i) ? test_set : train_set).push_back(result.samples[i]);

  util::write_file(out_path(ctx, "curated.jsonl"), corpus::samples_to_jsonl(train_set));
  util::write_file(out_path(ctx, "test.jsonl"), corpus::samples_to_jsonl(test_set));
  std::string rejects;
  for (const auto& r : load_rejects) rejects += r.to_json().dump() + "\n";
  for (const auto& r : result.rejects) rejects += r.to_json().dump() + "\n";
  util::write_file(out_path(ctx, "rejects.jsonl"), rejects);
  util::write_file(out_path(ctx, "curation_report.json"), result.report.to_json().dump(2) + "\n");
  manifest.mark("write");

  for (const char* f : {"curated.jsonl", "test.jsonl", "rejects.jsonl", "curation_report.json"})
    manifest.add_output(out_path(ctx, f));
  manifest.write(out_path(ctx, "curate.manifest.json"));
  std::printf("curate: %lld positives, %lld negatives, %zu test pairs, %lld rejects\n",
              static_cast<long long>(result.report.positives), static_cast<long long>(result.report.negatives),
              test_set.size(), static_cast<long long>(result.report.faulty_removed));
  return 0;
}

int cmd_mine_apis(Context& ctx, const std::string& curated_path, const std::vector<std::string>& dev_src,
                  const std::string& member_db_path) {
  prepare_out(ctx);
  cli::RunManifest manifest("mine-apis", ctx.config_snapshot, 0);
  manifest.add_input(curated_path);

  std::vector<std::string> intents;
  for (const auto& s : load_labelled(curated_path))
    if (s.label.value_or(1) == 1) intents.push_back(s.intent);
  apiminer::FrequencyTable intent_table =
      apiminer::mine_intent_apis(intents, apiminer::default_stopwords(), ctx.config.apiminer_top_k);
  manifest.mark("intents");

  int64_t unreadable = 0;
  std::vector<std::string> sources = gather_source_files(dev_src, unreadable);
  apiminer::FrequencyTable import_table = apiminer::extract_imports(sources, ctx.config.apiminer_top_k);
  if (unreadable > 0) std::fprintf(stderr, "mine-apis: skipped %lld unreadable files\n", (long long)unreadable);
  manifest.mark("imports");

  std::map<std::string, std::set<std::string>> member_db;
  if (!member_db_path.empty()) {
    manifest.add_input(member_db_path);
    auto wl = codelex::parse_whitelist(util::read_file(member_db_path));
    for (const auto& [lib, mems] : wl.members) member_db[lib] = mems;
  }
  std::vector<std::string> warnings;
  codelex::ApiWhitelist wl =
      apiminer::build_whitelist(intent_table, import_table, member_db, ctx.config.apiminer_top_k, &warnings);
  for (const auto& w : warnings) std::fprintf(stderr, "mine-apis: %s\n", w.c_str());

  util::write_file(out_path(ctx, "whitelist.txt"), codelex::format_whitelist(wl));
  util::write_file(out_path(ctx, "intent_api_freq.csv"), intent_table.to_csv());
  util::write_file(out_path(ctx, "import_freq.csv"), import_table.to_csv());
  auto bars = [](const apiminer::FrequencyTable& t, size_t k) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [tok, cnt] : t.ordered()) {
      if (out.size() >= k) break;
      out.emplace_back(tok, static_cast<double>(cnt));
    }
    return out;
  };
  util::write_file(out_path(ctx, "intent_api_freq.svg"), plot::bar_chart("intent API distribution", bars(intent_table, 20)));
  util::write_file(out_path(ctx, "import_freq.svg"), plot::bar_chart("import distribution", bars(import_table, 20)));
  manifest.mark("write");
  for (const char* f : {"whitelist.txt", "intent_api_freq.csv", "import_freq.csv"}) manifest.add_output(out_path(ctx, f));
  manifest.write(out_path(ctx, "mine-apis.manifest.json"));
  std::printf("mine-apis: %zu libraries, %zu whitelisted names\n", wl.libraries.size(), wl.flat.size());
  return 0;
}

int cmd_lex(Context& ctx, const std::string& curated_path, const std::string& whitelist_path,
            const std::vector<std::string>& dev_src) {
  prepare_out(ctx);
  cli::RunManifest manifest("lex", ctx.config_snapshot, 0);
  manifest.add_input(curated_path);
  manifest.add_input(whitelist_path);
  codelex::ApiWhitelist wl = codelex::parse_whitelist(util::read_file(whitelist_path));

  auto samples = load_labelled(curated_path);
  std::string tokens_jsonl, code_corpus, intents_corpus;
  int64_t unlexable = 0;
  for (const auto& s : samples) {
    try {
      auto norm = codelex::normalize(codelex::tokenize(s.snippet), wl, ctx.config.normalize_literals);
      nlohmann::json j;
      j["question_id"] = s.question_id;
      if (s.label) j["label"] = *s.label;
      j["tokens"] = codelex::tokens_to_json(norm);
      tokens_jsonl += j.dump() + "\n";
      if (s.label.value_or(1) == 1) {
        std::string line;
        for (const auto& t : norm.tokens) line += (line.empty() ? "" : " ") + t.text;
        code_corpus += line + "\n";
        intents_corpus += s.intent + "\n";
      }
    } catch (const codelex::LexError&) {
      ++unlexable;
    }
  }
  if (unlexable > 0) std::fprintf(stderr, "lex: %lld unlexable snippets skipped\n", (long long)unlexable);
  util::write_file(out_path(ctx, "tokens.jsonl"), tokens_jsonl);
  util::write_file(out_path(ctx, "code_corpus.txt"), code_corpus);
  util::write_file(out_path(ctx, "intents_corpus.txt"), intents_corpus);
  manifest.mark("corpus");

  if (!dev_src.empty()) {
    int64_t unreadable = 0;
    std::string dev_corpus;
    for (const auto& content : gather_source_files(dev_src, unreadable)) {
      try {
        auto norm = codelex::normalize(codelex::tokenize(content), wl, ctx.config.normalize_literals);
        std::string line;
        for (const auto& t : norm.tokens) line += (line.empty() ? "" : " ") + t.text;
        dev_corpus += line + "\n";
      } catch (const codelex::LexError&) {
        ++unlexable;
      }
    }
    util::write_file(out_path(ctx, "dev_corpus.txt"), dev_corpus);
    manifest.add_output(out_path(ctx, "dev_corpus.txt"));
  }
  for (const char* f : {"tokens.jsonl", "code_corpus.txt", "intents_corpus.txt"}) manifest.add_output(out_path(ctx, f));
  manifest.mark("write");
  manifest.write(out_path(ctx, "lex.manifest.json"));
  std::printf("lex: %zu samples tokenized\n", samples.size());
  return 0;
}

std::vector<std::vector<std::string>> read_token_corpus(const std::string& path) {
  std::vector<std::vector<std::string>> corpus;
  for (const std::string& line : util::split(util::read_file(path), '\n')) {
    if (util::trim(line).empty()) continue;
    corpus.push_back(util::split_ws(line));
  }
  return corpus;
}

int cmd_embed(Context& ctx, const std::string& preset, const std::string& corpus_path,
              const std::string& dev_corpus_path) {
  prepare_out(ctx);
  uint64_t seed = stage_seed(ctx, "embed-" + preset);
  cli::RunManifest manifest("embed-" + preset, ctx.config_snapshot, seed);
  manifest.add_input(corpus_path);

  bool is_intent = preset == "intent";
  bool is_glove = preset.rfind("glove", 0) == 0;
  bool with_dev = preset == "w2v-csn" || preset == "glove-csn";

  auto corpus = read_token_corpus(corpus_path);
  if (with_dev) {
    if (dev_corpus_path.empty()) throw std::runtime_error("preset " + preset + " needs --dev-corpus");
    manifest.add_input(dev_corpus_path);
    for (auto& sent : read_token_corpus(dev_corpus_path)) corpus.push_back(std::move(sent));
  }

  const cli::EmbedStageConfig& stage = is_intent ? ctx.config.embed_intent : ctx.config.embed_code;
  int64_t min_count = stage.min_count;
  if (preset == "w2v-csn") min_count = ctx.config.csn_w2v_min_count;

  embed::Vocabulary vocab = embed::build_vocab(corpus, min_count, std::numeric_limits<size_t>::max());
  embed::EmbeddingTable table;
  if (is_glove) {
    embed::Cooccurrence x = embed::build_cooccurrence(corpus, vocab, stage.window);
    embed::GloveConfig gcfg = ctx.config.glove;
    gcfg.dim = stage.dim;
    gcfg.rng_seed = seed;
    auto result = embed::train_glove(x, vocab, gcfg);
    table = std::move(result.table);
    std::string cost_csv = "epoch,cost\n";
    for (size_t e = 0; e < result.epoch_cost.size(); ++e)
      cost_csv += std::to_string(e + 1) + "," + std::to_string(result.epoch_cost[e]) + "\n";
    util::write_file(out_path(ctx, "glove_cost_" + preset + ".csv"), cost_csv);
  } else {
    embed::SkipgramConfig scfg;
    scfg.dim = stage.dim;
    scfg.window = stage.window;
    scfg.negatives = stage.negatives;
    scfg.epochs = stage.epochs;
    scfg.lr = stage.lr;
    scfg.rng_seed = seed;
    scfg.threads = ctx.nondeterministic ? ctx.threads : 1;
    table = train_skipgram(corpus, vocab, scfg).table;
  }
  table.meta.corpus_tag = preset;
  table.meta.min_count = min_count;
  manifest.mark("train");

  std::string emb_file = "emb_" + preset + ".txt";
  util::write_file(out_path(ctx, emb_file), embed::format_embedding_text(table));

  nlohmann::json meta;
  meta["algorithm"] = is_glove ? "glove" : "w2v";
  meta["corpus"] = preset;
  meta["window"] = stage.window;
  meta["min_count"] = min_count;
  meta["epochs"] = is_glove ? ctx.config.glove.epochs : stage.epochs;
  meta["dim"] = stage.dim;
  meta["vocab_size"] = table.matrix.rows();
  meta["seed"] = seed;
  util::write_file(out_path(ctx, "emb_" + preset + ".meta.json"), meta.dump(2) + "\n");

  std::string vocab_csv = "token,count\n";
  for (const auto& [tok, cnt] : vocab.top_tokens(vocab.size()))
    vocab_csv += util::csv_field(tok) + "," + std::to_string(cnt) + "\n";
  util::write_file(out_path(ctx, "vocab_" + preset + ".csv"), vocab_csv);

  // 2-d projection of all rows; top tokens labelled in the plot
  if (table.matrix.rows() >= 2 && table.dim() >= 2) {
    auto pca = embed::pca_project(table.matrix, 2);
    std::string pca_csv = "token,x,y\n";
    std::vector<plot::LabelledPoint> pts;
    auto top = vocab.top_tokens(10);
    std::set<std::string> top_set;
    for (const auto& [tok, cnt] : top) top_set.insert(tok);
    for (size_t i = 0; i < pca.projected.rows(); ++i) {
      const std::string& tok = table.vocab.token(static_cast<int>(i));
      char buf[80];
      std::snprintf(buf, sizeof(buf), ",%.6g,%.6g\n", pca.projected.at(i, 0), pca.projected.at(i, 1));
      pca_csv += util::csv_field(tok) + buf;
      pts.push_back({pca.projected.at(i, 0), pca.projected.at(i, 1), top_set.count(tok) ? tok : ""});
    }
    util::write_file(out_path(ctx, "pca_" + preset + ".csv"), pca_csv);
    util::write_file(out_path(ctx, "pca_" + preset + ".svg"),
                     plot::scatter_plot("PCA of " + preset + " embeddings", pts, pts.size()));
  }
  manifest.mark("write");
  for (const std::string f : {emb_file, "vocab_" + preset + ".csv"}) manifest.add_output(out_path(ctx, f));
  manifest.write(out_path(ctx, "embed-" + preset + ".manifest.json"));
  std::printf("embed %s: vocab %zu, dim %zu\n", preset.c_str(), table.matrix.rows(), table.dim());
  return 0;
}

int cmd_train_seq2seq(Context& ctx, const std::string& curated_path, const std::string& intent_emb_path,
                      const std::string& code_emb_path, const std::string& whitelist_path) {
  prepare_out(ctx);
  uint64_t seed = stage_seed(ctx, "seq2seq");
  cli::RunManifest manifest("train-seq2seq", ctx.config_snapshot, seed);
  for (const auto& p : {curated_path, intent_emb_path, code_emb_path, whitelist_path}) manifest.add_input(p);

  seq2seq::Seq2SeqConfig cfg = ctx.config.seq2seq;
  auto intent_table = slice_table(load_table(intent_emb_path), cfg.intent_vocab_cap);
  auto code_table = slice_table(load_table(code_emb_path), cfg.code_vocab_cap);
  codelex::ApiWhitelist wl = codelex::parse_whitelist(util::read_file(whitelist_path));

  std::vector<seq2seq::VectorizedPair> pairs;
  for (const auto& s : load_labelled(curated_path)) {
    if (s.label.value_or(0) != 1) continue;  // positives only
    pairs.push_back(seq2seq::vectorize(s, cfg, intent_table.vocab, code_table.vocab, wl));
  }
  if (pairs.empty()) throw std::runtime_error("no positive pairs in " + curated_path);
  manifest.mark("vectorize");

  auto model = seq2seq::init_model(cfg, std::move(intent_table), std::move(code_table), seed);
  seq2seq::TrainCurve curve = seq2seq::train(model, pairs, util::derive_seed(seed, "order"));
  manifest.mark("train");

  std::string tag = ctx.variant;
  seq2seq::save_model(out_path(ctx, "seq2seq_" + tag + ".snf1"), model);
  util::write_file(out_path(ctx, "seq2seq_" + tag + "_curve.csv"), curve.to_csv());
  plot::Series loss{"loss", {}}, acc{"accuracy", {}};
  for (size_t e = 0; e < curve.loss.size(); ++e) {
    loss.points.emplace_back(static_cast<double>(e + 1), curve.loss[e]);
    acc.points.emplace_back(static_cast<double>(e + 1), curve.token_accuracy[e]);
  }
  util::write_file(out_path(ctx, "seq2seq_" + tag + "_loss.svg"),
                   plot::line_plot("seq2seq loss (" + tag + ")", "epoch", "loss", {loss}));
  util::write_file(out_path(ctx, "seq2seq_" + tag + "_accuracy.svg"),
                   plot::line_plot("seq2seq token accuracy (" + tag + ")", "epoch", "accuracy", {acc}));
  manifest.mark("write");
  for (const std::string f : {"seq2seq_" + tag + ".snf1", "seq2seq_" + tag + "_curve.csv"})
    manifest.add_output(out_path(ctx, f));
  manifest.write(out_path(ctx, "train-seq2seq-" + tag + ".manifest.json"));
  if (!curve.loss.empty())
    std::printf("train-seq2seq %s: %zu pairs, final loss %.4f, token accuracy %.4f\n", tag.c_str(), pairs.size(),
                curve.loss.back(), curve.token_accuracy.back());
  return 0;
}

int cmd_train_classifier(Context& ctx, const std::string& curated_path, const std::string& ckpt_path,
                         const std::string& intent_emb_path, const std::string& code_emb_path) {
  prepare_out(ctx);
  uint64_t seed = stage_seed(ctx, "classifier");
  cli::RunManifest manifest("train-classifier", ctx.config_snapshot, seed);
  for (const auto& p : {curated_path, ckpt_path, intent_emb_path, code_emb_path}) manifest.add_input(p);

  auto model = rebuild_seq2seq(ctx, ckpt_path, intent_emb_path, code_emb_path);
  auto intent_table = load_table(intent_emb_path);
  auto code_table = load_table(code_emb_path);
  pairclassifier::Variant variant = pairclassifier::parse_variant(ctx.variant);

  auto samples = load_labelled(curated_path);
  auto features = pairclassifier::build_features(samples, model, variant, intent_table, code_table,
                                                 ctx.config.hadamard_encoder_state);
  manifest.mark("features");

  size_t input_dim = features.empty() ? 0 : features[0].intent_vec.size() + features[0].code_vec.size();
  auto clf = pairclassifier::init_classifier(ctx.config.classifier, input_dim, seed);
  auto curve = pairclassifier::train_classifier(clf, features, util::derive_seed(seed, "order"));
  manifest.mark("train");

  std::string tag = ctx.variant;
  pairclassifier::save_classifier(out_path(ctx, "classifier_" + tag + ".snf1"), clf);
  util::write_file(out_path(ctx, "classifier_" + tag + "_curve.csv"), curve.to_csv());
  pairclassifier::save_features(out_path(ctx, "features_" + tag + ".snf1"), features, variant,
                                out_path(ctx, "features_" + tag + ".json"),
                                {{"curated", curated_path}, {"checkpoint", ckpt_path}});
  plot::Series tl{"train_loss", {}}, vl{"val_loss", {}};
  for (size_t e = 0; e < curve.train_loss.size(); ++e) {
    tl.points.emplace_back(static_cast<double>(e + 1), curve.train_loss[e]);
    vl.points.emplace_back(static_cast<double>(e + 1), curve.val_loss[e]);
  }
  util::write_file(out_path(ctx, "classifier_" + tag + "_curve.svg"),
                   plot::line_plot("classifier loss (" + tag + ")", "epoch", "bce", {tl, vl}));
  manifest.mark("write");
  for (const std::string f : {"classifier_" + tag + ".snf1", "classifier_" + tag + "_curve.csv"})
    manifest.add_output(out_path(ctx, f));
  manifest.write(out_path(ctx, "train-classifier-" + tag + ".manifest.json"));
  if (!curve.val_loss.empty())
    std::printf("train-classifier %s: %zu features, val loss %.4f, val accuracy %.4f\n", tag.c_str(),
                features.size(), curve.val_loss.back(), curve.val_accuracy.back());
  return 0;
}

int cmd_evaluate(Context& ctx, const std::string& test_path, const std::string& ckpt_path,
                 const std::string& clf_path, const std::string& intent_emb_path, const std::string& code_emb_path) {
  prepare_out(ctx);
  cli::RunManifest manifest("evaluate", ctx.config_snapshot, 0);
  for (const auto& p : {test_path, ckpt_path, clf_path, intent_emb_path, code_emb_path}) manifest.add_input(p);

  auto model = rebuild_seq2seq(ctx, ckpt_path, intent_emb_path, code_emb_path);
  auto intent_table = load_table(intent_emb_path);
  auto code_table = load_table(code_emb_path);
  pairclassifier::Variant variant = pairclassifier::parse_variant(ctx.variant);
  auto clf = pairclassifier::load_classifier(clf_path, ctx.config.classifier);

  auto samples = load_labelled(test_path);
  auto features = pairclassifier::build_features(samples, model, variant, intent_table, code_table,
                                                 ctx.config.hadamard_encoder_state);
  std::vector<double> probs = pairclassifier::predict(clf, features);
  std::vector<int> labels;
  for (const auto& f : features) labels.push_back(f.label);
  manifest.mark("predict");

  numkit::Tensor pt({probs.size(), 1});
  numkit::Tensor yt({probs.size(), 1});
  for (size_t i = 0; i < probs.size(); ++i) {
    pt.data[i] = probs[i];
    yt.data[i] = labels[i];
  }
  double loss = numkit::loss(numkit::LossKind::bce, pt, yt).value;
  evalkit::MetricsReport report = evalkit::metrics_report(labels, probs, loss, ctx.config.eval_threshold);
  auto roc = evalkit::roc_auc(labels, probs);
  auto pr = evalkit::pr_auc(labels, probs);

  std::string tag = ctx.variant;
  util::write_file(out_path(ctx, "metrics_" + tag + ".json"), report.to_json().dump(2) + "\n");
  util::write_file(out_path(ctx, "roc_" + tag + ".csv"), roc.to_csv("fpr", "tpr"));
  util::write_file(out_path(ctx, "pr_" + tag + ".csv"), pr.to_csv("recall", "precision"));
  plot::Series roc_s{"roc", roc.points}, pr_s{"pr", pr.points};
  util::write_file(out_path(ctx, "roc_" + tag + ".svg"),
                   plot::line_plot("ROC (" + tag + ")", "fpr", "tpr", {roc_s}));
  util::write_file(out_path(ctx, "pr_" + tag + ".svg"),
                   plot::line_plot("PR (" + tag + ")", "recall", "precision", {pr_s}));
  manifest.mark("write");
  for (const std::string f : {"metrics_" + tag + ".json", "roc_" + tag + ".csv", "pr_" + tag + ".csv"})
    manifest.add_output(out_path(ctx, f));
  manifest.write(out_path(ctx, "evaluate-" + tag + ".manifest.json"));
  std::printf("evaluate %s: n=%lld loss %.4f accuracy %.4f f1 %.4f auc_roc %.4f auc_pr %.4f\n", tag.c_str(),
              static_cast<long long>(report.n), report.loss, report.accuracy, report.f1, report.auc_roc,
              report.auc_pr);
  return 0;
}

int cmd_report(Context& ctx, const std::string& run_dir) {
  prepare_out(ctx);
  cli::RunManifest manifest("report", ctx.config_snapshot, 0);
  std::string md = "# snipforge run report\n\n";

  auto maybe_read = [&](const std::string& name) -> std::optional<std::string> {
    fs::path p = fs::path(run_dir) / name;
    if (!fs::exists(p)) return std::nullopt;
    manifest.add_input(p.string());
    return util::read_file(p.string());
  };

  if (auto rep = maybe_read("curation_report.json")) {
    nlohmann::json j = nlohmann::json::parse(*rep);
    md += "## Dataset counts\n\n|stage|count|\n|---|---|\n";
    for (const char* key :
         {"ingested", "prob_filtered", "dedup_removed", "overlap_removed", "faulty_removed", "positives", "negatives",
          "total"})
      md += std::string("|") + key + "|" + j[key].dump() + "|\n";
    md += "\n";
  }

  const std::vector<std::string> presets = {"intent", "w2v-current", "glove-current", "w2v-csn", "glove-csn"};
  std::string vocab_rows;
  for (const auto& p : presets) {
    if (auto meta = maybe_read("emb_" + p + ".meta.json")) {
      nlohmann::json j = nlohmann::json::parse(*meta);
      vocab_rows += "|" + p + "|" + j["algorithm"].get<std::string>() + "|" + j["vocab_size"].dump() + "|\n";
    }
  }
  if (!vocab_rows.empty())
    md += "## Embedding vocabularies\n\n|preset|algorithm|vocabulary size|\n|---|---|---|\n" + vocab_rows + "\n";

  for (const auto& p : presets) {
    if (auto csv = maybe_read("vocab_" + p + ".csv")) {
      md += "## Top tokens: " + p + "\n\n|token|count|\n|---|---|\n";
      auto lines = util::split(*csv, '\n');
      for (size_t i = 1; i < lines.size() && i <= 10; ++i) {
        if (util::trim(lines[i]).empty()) continue;
        size_t comma = lines[i].rfind(',');
        md += "|`" + lines[i].substr(0, comma) + "`|" + lines[i].substr(comma + 1) + "|\n";
      }
      md += "\n";
    }
  }

  const std::vector<std::string> variants = {"w2v-current", "glove-current", "w2v-csn", "glove-csn", "hidden"};
  std::string seq_rows;
  for (const auto& v : variants) {
    if (auto csv = maybe_read("seq2seq_" + v + "_curve.csv")) {
      auto lines = util::split(util::trim(*csv), '\n');
      if (lines.size() > 1) {
        auto cols = util::split(lines.back(), ',');
        if (cols.size() == 3) seq_rows += "|" + v + "|" + cols[1] + "|" + cols[2] + "|\n";
      }
    }
  }
  if (!seq_rows.empty()) md += "## Seq2seq final train loss/accuracy\n\n|model|loss|token accuracy|\n|---|---|---|\n" + seq_rows + "\n";

  std::string metric_rows;
  for (const auto& v : variants) {
    if (auto mj = maybe_read("metrics_" + v + ".json")) {
      nlohmann::json j = nlohmann::json::parse(*mj);
      char buf[160];
      std::snprintf(buf, sizeof(buf), "|%s|%.2f|%.2f|%.2f|%.2f|%.2f|\n", v.c_str(), j["loss"].get<double>(),
                    j["accuracy"].get<double>() * 100.0, j["auc_roc"].get<double>(), j["auc_pr"].get<double>(),
                    j["f1"].get<double>());
      metric_rows += buf;
    }
  }
  if (!metric_rows.empty())
    md += "## Binary classifier metrics\n\n|model|Loss|Accuracy (%)|AUC ROC|AUC PR|F1|\n|---|---|---|---|---|---|\n" +
          metric_rows + "\n";

  md += "## Figures\n\n";
  for (const auto& entry : fs::directory_iterator(run_dir))
    if (entry.path().extension() == ".svg") md += "- " + entry.path().filename().string() + "\n";

  util::write_file(out_path(ctx, "report.md"), md);
  manifest.mark("write");
  manifest.add_output(out_path(ctx, "report.md"));
  manifest.write(out_path(ctx, "report.manifest.json"));
  std::printf("report: wrote %s\n", out_path(ctx, "report.md").c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snipforge: intent/code-snippet curation, embedding and classification pipeline"};
  app.require_subcommand(1);

  Context ctx;
  std::string config_path;
  app.add_option("--config", config_path, "pipeline config json");
  app.add_option("--seed", [&ctx](const std::vector<std::string>& v) {
    ctx.seed = std::stoull(v[0]);
    return true;
  }, "global seed; per-stage seeds derive from it");
  app.add_option("--threads", ctx.threads, "worker threads (>1 only takes effect with --nondeterministic)");
  app.add_option("--out", ctx.out_dir, "output directory")->envname("SNIPFORGE_OUT");
  app.add_flag("--nondeterministic", ctx.nondeterministic, "allow seedless runs and racy parallel modes");
  bool mask_pad = false;
  app.add_flag("--mask-pad", mask_pad, "mask PAD positions in seq2seq loss/accuracy");
  app.add_option("--variant", ctx.variant, "embedding/classifier variant")
      ->check(CLI::IsMember({"w2v-current", "glove-current", "w2v-csn", "glove-csn", "hidden"}));

  std::string train_path, mined_path, staqc_path, format_name = "jsonl";
  auto* curate = app.add_subcommand("curate", "clean, dedup, merge and pair the corpus");
  curate->add_option("--conala-train", train_path, "curated-source records");
  curate->add_option("--conala-mined", mined_path, "mined records with probabilities");
  curate->add_option("--staqc", staqc_path, "staqc-source records");
  curate->add_option("--format", format_name, "input format")->check(CLI::IsMember({"jsonl", "tsv"}));

  std::string curated_path, member_db_path;
  std::vector<std::string> dev_src;
  auto* mine = app.add_subcommand("mine-apis", "mine the API whitelist from intents and imports");
  mine->add_option("--curated", curated_path, "curated jsonl (intents)")->required();
  mine->add_option("--dev-src", dev_src, "development source files or directories");
  mine->add_option("--member-db", member_db_path, "library -> member names file");

  std::string whitelist_path;
  auto* lex = app.add_subcommand("lex", "tokenize and normalize snippets; emit embedding corpora");
  lex->add_option("--curated", curated_path, "curated jsonl")->required();
  lex->add_option("--whitelist", whitelist_path, "API whitelist file")->required();
  lex->add_option("--dev-src", dev_src, "development source files for the csn corpus");

  std::string preset, corpus_path, dev_corpus_path;
  auto* emb = app.add_subcommand("embed", "train an embedding preset");
  emb->add_option("--preset", preset, "intent | w2v-current | glove-current | w2v-csn | glove-csn")
      ->required()
      ->check(CLI::IsMember({"intent", "w2v-current", "glove-current", "w2v-csn", "glove-csn"}));
  emb->add_option("--corpus", corpus_path, "token corpus, one sequence per line")->required();
  emb->add_option("--dev-corpus", dev_corpus_path, "development token corpus (csn presets)");

  std::string intent_emb_path, code_emb_path;
  auto* ts = app.add_subcommand("train-seq2seq", "train the encoder-decoder on positive pairs");
  ts->add_option("--curated", curated_path, "curated jsonl")->required();
  ts->add_option("--intent-emb", intent_emb_path, "intent embedding text file")->required();
  ts->add_option("--code-emb", code_emb_path, "code embedding text file")->required();
  ts->add_option("--whitelist", whitelist_path, "API whitelist file")->required();

  std::string ckpt_path, clf_path, test_path;
  auto* tc = app.add_subcommand("train-classifier", "train the match/mismatch classifier");
  tc->add_option("--curated", curated_path, "curated jsonl")->required();
  tc->add_option("--seq2seq", ckpt_path, "seq2seq checkpoint")->required();
  tc->add_option("--intent-emb", intent_emb_path, "intent embedding text file")->required();
  tc->add_option("--code-emb", code_emb_path, "code embedding text file")->required();

  auto* ev = app.add_subcommand("evaluate", "score the classifier on held-out pairs");
  ev->add_option("--test", test_path, "test jsonl")->required();
  ev->add_option("--seq2seq", ckpt_path, "seq2seq checkpoint")->required();
  ev->add_option("--classifier", clf_path, "classifier checkpoint")->required();
  ev->add_option("--intent-emb", intent_emb_path, "intent embedding text file")->required();
  ev->add_option("--code-emb", code_emb_path, "code embedding text file")->required();

  std::string run_dir;
  auto* rep = app.add_subcommand("report", "summarize a run directory into tables and figures");
  rep->add_option("--run", run_dir, "run directory with stage artifacts")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (config_path.empty()) {
      ctx.config = cli::PipelineConfig{};
    } else {
      cli::ConfigResult cr = cli::validate_config(config_path);
      if (!cr.ok()) {
        for (const auto& e : cr.errors) std::fprintf(stderr, "config error: %s\n", e.c_str());
        std::fprintf(stderr, "error: %s: invalid config (%zu problems)\n", stage.c_str(), cr.errors.size());
        return 1;
      }
      ctx.config = cr.config;
    }
    if (mask_pad) ctx.config.seq2seq.mask_pad = true;
    ctx.config_snapshot = ctx.config.to_json();

    if (curate->parsed()) return cmd_curate(ctx, train_path, mined_path, staqc_path, format_name);
    if (mine->parsed()) return cmd_mine_apis(ctx, curated_path, dev_src, member_db_path);
    if (lex->parsed()) return cmd_lex(ctx, curated_path, whitelist_path, dev_src);
    if (emb->parsed()) return cmd_embed(ctx, preset, corpus_path, dev_corpus_path);
    if (ts->parsed()) return cmd_train_seq2seq(ctx, curated_path, intent_emb_path, code_emb_path, whitelist_path);
    if (tc->parsed()) return cmd_train_classifier(ctx, curated_path, ckpt_path, intent_emb_path, code_emb_path);
    if (ev->parsed()) return cmd_evaluate(ctx, test_path, ckpt_path, clf_path, intent_emb_path, code_emb_path);
    if (rep->parsed()) return cmd_report(ctx, run_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s: %s\n", stage.c_str(), e.what());
    return 1;
  }
  return 2;
}
