// Pipeline configuration: one structured tree covering every stage's
// hyperparameters, validated in one pass (all errors reported together,
// unknown keys rejected) with documented defaults filled in.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "snipforge/classifier.hpp"
#include "snipforge/corpus.hpp"
#include "snipforge/embed.hpp"
#include "snipforge/seq2seq.hpp"
#include "snipforge/util.hpp"

namespace snipforge::cli {

struct EmbedStageConfig {
  size_t dim = 100;
  int window = 4;
  int64_t min_count = 1;
  int epochs = 10;
  int negatives = 5;
  double lr = 0.025;
};

struct PipelineConfig {
  corpus::CurationConfig curation;
  size_t test_size = 200;          // held-out pairs emitted by curate
  double test_pos_ratio = 0.515;   // positive share of the test split

  bool normalize_literals = false;
  size_t apiminer_top_k = 40;

  // intents: window 4, 15 epochs, low-count words excluded
  EmbedStageConfig embed_intent{100, 4, 2, 15, 5, 0.025};
  // code: window 15, 10 epochs; the csn w2v preset raises min_count to 5
  EmbedStageConfig embed_code{100, 15, 1, 10, 5, 0.025};
  int64_t csn_w2v_min_count = 5;
  embed::GloveConfig glove{};  // lr 0.05, x_max 100, alpha 0.75

  seq2seq::Seq2SeqConfig seq2seq{};
  pairclassifier::ClassifierConfig classifier{};
  bool hadamard_encoder_state = false;  // default: decoder-final states
  double eval_threshold = 0.5;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["curation"] = {{"sim_threshold", curation.sim_threshold},
                     {"prob_threshold", curation.prob_threshold},
                     {"max_lines", curation.max_lines},
                     {"test_size", test_size},
                     {"test_pos_ratio", test_pos_ratio}};
    j["lex"] = {{"normalize_literals", normalize_literals}};
    j["apiminer"] = {{"top_k", apiminer_top_k}};
    auto stage = [](const EmbedStageConfig& c) {
      return nlohmann::json{{"dim", c.dim},       {"window", c.window}, {"min_count", c.min_count},
                            {"epochs", c.epochs}, {"negatives", c.negatives}, {"lr", c.lr}};
    };
    j["embed"] = {{"intent", stage(embed_intent)},
                  {"code", stage(embed_code)},
                  {"csn_w2v_min_count", csn_w2v_min_count},
                  {"glove", {{"lr", glove.lr}, {"x_max", glove.x_max}, {"alpha", glove.alpha}, {"epochs", glove.epochs}}}};
    j["seq2seq"] = {{"intent_len", seq2seq.intent_len},
                    {"code_len", seq2seq.code_len},
                    {"hidden", seq2seq.hidden},
                    {"intent_vocab_cap", seq2seq.intent_vocab_cap},
                    {"code_vocab_cap", seq2seq.code_vocab_cap},
                    {"freeze_embeddings", seq2seq.freeze_embeddings},
                    {"mask_pad", seq2seq.mask_pad},
                    {"epochs", seq2seq.epochs},
                    {"batch", seq2seq.batch},
                    {"lr", seq2seq.lr}};
    j["classifier"] = {{"layers", classifier.layers},
                       {"dropout", classifier.dropout},
                       {"epochs", classifier.epochs},
                       {"batch", classifier.batch},
                       {"val_fraction", classifier.val_fraction},
                       {"lr", classifier.lr},
                       {"hadamard_state", hadamard_encoder_state ? "encoder" : "decoder"}};
    j["eval"] = {{"threshold", eval_threshold}};
    return j;
  }
};

struct ConfigResult {
  PipelineConfig config;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

namespace detail {

class ConfigReader {
 public:
  ConfigReader(const nlohmann::json& root, std::vector<std::string>& errors) : errors_(errors) {
    if (!root.is_object()) {
      errors_.push_back("config root must be an object");
    } else {
      root_ = root;
    }
  }

  nlohmann::json section(const std::string& name) {
    seen_.insert(name);
    if (!root_.contains(name)) return nlohmann::json::object();
    if (!root_[name].is_object()) {
      errors_.push_back(name + ": must be an object");
      return nlohmann::json::object();
    }
    return root_[name];
  }

  void finish() {
    for (auto it = root_.begin(); it != root_.end(); ++it)
      if (!seen_.count(it.key())) errors_.push_back("unknown key: " + it.key());
  }

  template <typename T>
  void num(const nlohmann::json& sec, const std::string& secname, const std::string& key, T& out, double lo,
           double hi, std::set<std::string>& seen) {
    seen.insert(key);
    if (!sec.contains(key)) return;
    const auto& v = sec[key];
    if (!v.is_number()) {
      errors_.push_back(secname + "." + key + ": must be a number");
      return;
    }
    double d = v.get<double>();
    if (d < lo || d > hi) {
      errors_.push_back(secname + "." + key + ": out of [" + util::trim(std::to_string(lo)) + "," +
                        util::trim(std::to_string(hi)) + "]");
      return;
    }
    out = static_cast<T>(d);
  }

  void boolean(const nlohmann::json& sec, const std::string& secname, const std::string& key, bool& out,
               std::set<std::string>& seen) {
    seen.insert(key);
    if (!sec.contains(key)) return;
    if (!sec[key].is_boolean()) {
      errors_.push_back(secname + "." + key + ": must be a boolean");
      return;
    }
    out = sec[key].get<bool>();
  }

  void check_unknown(const nlohmann::json& sec, const std::string& secname, const std::set<std::string>& seen) {
    for (auto it = sec.begin(); it != sec.end(); ++it)
      if (!seen.count(it.key())) errors_.push_back(secname + ": unknown key " + it.key());
  }

  std::vector<std::string>& errors_;

 private:
  nlohmann::json root_ = nlohmann::json::object();
  std::set<std::string> seen_;
};

inline void read_embed_stage(ConfigReader& r, const nlohmann::json& sec, const std::string& name,
                             EmbedStageConfig& out) {
  std::set<std::string> seen;
  r.num(sec, name, "dim", out.dim, 1, 4096, seen);
  r.num(sec, name, "window", out.window, 1, 1000, seen);
  r.num(sec, name, "min_count", out.min_count, 0, 1e12, seen);
  r.num(sec, name, "epochs", out.epochs, 0, 1e6, seen);
  r.num(sec, name, "negatives", out.negatives, 0, 1000, seen);
  r.num(sec, name, "lr", out.lr, 0, 10, seen);
  r.check_unknown(sec, name, seen);
}

}  // namespace detail

// Parses and validates a config tree; every problem is reported, not just
// the first. An empty object yields all documented defaults.
inline ConfigResult validate_config_json(const nlohmann::json& root) {
  ConfigResult result;
  detail::ConfigReader r(root, result.errors);

  {
    auto sec = r.section("curation");
    std::set<std::string> seen;
    r.num(sec, "curation", "sim_threshold", result.config.curation.sim_threshold, 0, 1, seen);
    r.num(sec, "curation", "prob_threshold", result.config.curation.prob_threshold, 0, 1, seen);
    r.num(sec, "curation", "max_lines", result.config.curation.max_lines, 1, 100000, seen);
    r.num(sec, "curation", "test_size", result.config.test_size, 0, 1e9, seen);
    r.num(sec, "curation", "test_pos_ratio", result.config.test_pos_ratio, 0, 1, seen);
    r.check_unknown(sec, "curation", seen);
  }
  {
    auto sec = r.section("lex");
    std::set<std::string> seen;
    r.boolean(sec, "lex", "normalize_literals", result.config.normalize_literals, seen);
    r.check_unknown(sec, "lex", seen);
  }
  {
    auto sec = r.section("apiminer");
    std::set<std::string> seen;
    r.num(sec, "apiminer", "top_k", result.config.apiminer_top_k, 1, 100000, seen);
    r.check_unknown(sec, "apiminer", seen);
  }
  {
    auto sec = r.section("embed");
    std::set<std::string> seen;
    seen.insert("intent");
    seen.insert("code");
    seen.insert("glove");
    if (sec.contains("intent")) detail::read_embed_stage(r, sec["intent"], "embed.intent", result.config.embed_intent);
    if (sec.contains("code")) detail::read_embed_stage(r, sec["code"], "embed.code", result.config.embed_code);
    r.num(sec, "embed", "csn_w2v_min_count", result.config.csn_w2v_min_count, 0, 1e12, seen);
    if (sec.contains("glove")) {
      std::set<std::string> gseen;
      const auto& g = sec["glove"];
      r.num(g, "embed.glove", "lr", result.config.glove.lr, 0, 10, gseen);
      r.num(g, "embed.glove", "x_max", result.config.glove.x_max, 1e-9, 1e9, gseen);
      r.num(g, "embed.glove", "alpha", result.config.glove.alpha, 0, 10, gseen);
      r.num(g, "embed.glove", "epochs", result.config.glove.epochs, 0, 1e6, gseen);
      r.check_unknown(g, "embed.glove", gseen);
    }
    r.check_unknown(sec, "embed", seen);
  }
  {
    auto sec = r.section("seq2seq");
    std::set<std::string> seen;
    auto& s = result.config.seq2seq;
    r.num(sec, "seq2seq", "intent_len", s.intent_len, 1, 100000, seen);
    r.num(sec, "seq2seq", "code_len", s.code_len, 1, 100000, seen);
    r.num(sec, "seq2seq", "hidden", s.hidden, 1, 100000, seen);
    r.num(sec, "seq2seq", "intent_vocab_cap", s.intent_vocab_cap, 1, 1e9, seen);
    r.num(sec, "seq2seq", "code_vocab_cap", s.code_vocab_cap, 1, 1e9, seen);
    r.boolean(sec, "seq2seq", "freeze_embeddings", s.freeze_embeddings, seen);
    r.boolean(sec, "seq2seq", "mask_pad", s.mask_pad, seen);
    r.num(sec, "seq2seq", "epochs", s.epochs, 0, 1e6, seen);
    r.num(sec, "seq2seq", "batch", s.batch, 1, 1e9, seen);
    r.num(sec, "seq2seq", "lr", s.lr, 0, 10, seen);
    r.check_unknown(sec, "seq2seq", seen);
  }
  {
    auto sec = r.section("classifier");
    std::set<std::string> seen;
    auto& c = result.config.classifier;
    seen.insert("layers");
    if (sec.contains("layers")) {
      if (!sec["layers"].is_array()) {
        result.errors.push_back("classifier.layers: must be an array of sizes");
      } else {
        std::vector<size_t> sizes;
        bool ok = true;
        for (const auto& v : sec["layers"]) {
          if (!v.is_number_unsigned() && !v.is_number_integer()) {
            result.errors.push_back("classifier.layers: entries must be positive integers");
            ok = false;
            break;
          }
          sizes.push_back(v.get<size_t>());
        }
        if (ok) c.layers = sizes;
      }
    }
    r.num(sec, "classifier", "dropout", c.dropout, 0, 0.999999, seen);
    r.num(sec, "classifier", "epochs", c.epochs, 0, 1e6, seen);
    r.num(sec, "classifier", "batch", c.batch, 1, 1e9, seen);
    r.num(sec, "classifier", "val_fraction", c.val_fraction, 0, 0.999999, seen);
    r.num(sec, "classifier", "lr", c.lr, 0, 10, seen);
    seen.insert("hadamard_state");
    if (sec.contains("hadamard_state")) {
      std::string v = sec["hadamard_state"].is_string() ? sec["hadamard_state"].get<std::string>() : "";
      if (v == "encoder") result.config.hadamard_encoder_state = true;
      else if (v == "decoder") result.config.hadamard_encoder_state = false;
      else result.errors.push_back("classifier.hadamard_state: must be \"encoder\" or \"decoder\"");
    }
    r.check_unknown(sec, "classifier", seen);
  }
  {
    auto sec = r.section("eval");
    std::set<std::string> seen;
    r.num(sec, "eval", "threshold", result.config.eval_threshold, 0, 1, seen);
    r.check_unknown(sec, "eval", seen);
  }
  r.finish();

  if (result.ok()) {
    try {
      result.config.curation.validate();
      result.config.classifier.validate();
    } catch (const std::exception& e) {
      result.errors.push_back(e.what());
    }
  }
  return result;
}

inline ConfigResult validate_config(const std::string& path) {
  nlohmann::json root = nlohmann::json::parse(util::read_file(path), nullptr, false);
  if (root.is_discarded()) {
    ConfigResult r;
    r.errors.push_back("config is not valid json: " + path);
    return r;
  }
  return validate_config_json(root);
}

}  // namespace snipforge::cli
