// Corpus curation: ingest raw intent/snippet records, clean them,
// de-duplicate near-identical answers, merge sources and generate the
// labelled positive/negative training pairs. Rejected samples are streamed
// to a sidecar so every removal is auditable.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "snipforge/codelex.hpp"
#include "snipforge/rng.hpp"
#include "snipforge/util.hpp"
#include "snipforge/vocab.hpp"

namespace snipforge::corpus {

enum class Source { curated, mined, staqc, synthetic };

inline const char* source_name(Source s) {
  switch (s) {
    case Source::curated: return "curated";
    case Source::mined: return "mined";
    case Source::staqc: return "staqc";
    case Source::synthetic: return "synthetic";
  }
  return "?";
}

inline Source parse_source(std::string_view name) {
  if (name == "curated") return Source::curated;
  if (name == "mined") return Source::mined;
  if (name == "staqc") return Source::staqc;
  if (name == "synthetic") return Source::synthetic;
  throw std::invalid_argument("unknown source: " + std::string(name));
}

struct Sample {
  int64_t question_id = 0;
  std::string intent;
  std::string snippet;
  std::optional<double> prob;  // present iff source == mined
  Source source = Source::curated;
  std::optional<int> label;    // absent before pairing, 0/1 afterward
  // For generated negatives: the question the snippet was taken from,
  // kept so the different-question invariant stays auditable in the output.
  std::optional<int64_t> snippet_question_id;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["question_id"] = question_id;
    j["intent"] = intent;
    j["snippet"] = snippet;
    if (prob) j["prob"] = *prob;
    j["source"] = source_name(source);
    if (label) j["label"] = *label;
    if (snippet_question_id) j["snippet_question_id"] = *snippet_question_id;
    return j;
  }
};

struct CurationConfig {
  double sim_threshold = 0.5;
  double prob_threshold = 0.5;
  int max_lines = 5;
  uint64_t rng_seed = 0;

  void validate() const {
    if (sim_threshold < 0.0 || sim_threshold > 1.0) throw std::invalid_argument("sim_threshold out of [0,1]");
    if (prob_threshold < 0.0 || prob_threshold > 1.0) throw std::invalid_argument("prob_threshold out of [0,1]");
    if (max_lines < 1) throw std::invalid_argument("max_lines must be >= 1");
  }
};

// Stage-by-stage count ledger. faulty_removed covers every per-sample
// reject: empty after cleaning, over the line cap, or unlexable.
struct CurationReport {
  int64_t ingested = 0;
  int64_t prob_filtered = 0;
  int64_t dedup_removed = 0;
  int64_t overlap_removed = 0;
  int64_t faulty_removed = 0;
  int64_t positives = 0;
  int64_t negatives = 0;
  int64_t total = 0;

  nlohmann::json to_json() const {
    return {{"ingested", ingested},           {"prob_filtered", prob_filtered},
            {"dedup_removed", dedup_removed}, {"overlap_removed", overlap_removed},
            {"faulty_removed", faulty_removed}, {"positives", positives},
            {"negatives", negatives},         {"total", total}};
  }
};

struct Reject {
  Sample sample;
  std::string reason;

  nlohmann::json to_json() const {
    nlohmann::json j = sample.to_json();
    j["reason"] = reason;
    return j;
  }
};

enum class FileFormat { jsonl, tsv };

struct LoadResult {
  std::vector<Sample> samples;
  std::vector<Reject> rejects;
};

namespace detail {

inline std::string tsv_unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char n = s[i + 1];
      if (n == 'n') { out += '\n'; ++i; continue; }
      if (n == 't') { out += '\t'; ++i; continue; }
      if (n == '\\') { out += '\\'; ++i; continue; }
    }
    out += s[i];
  }
  return out;
}

}  // namespace detail

// Parses one file of records. Records with missing mandatory fields
// (question_id, intent, snippet; prob for mined) are skipped and recorded,
// never fatal. TSV columns: question_id, intent, snippet[, prob] with
// \n, \t and \\ escapes inside text fields.
inline LoadResult load_samples(const std::string& path, FileFormat format, Source source) {
  LoadResult result;
  std::string content = util::read_file(path);
  int64_t lineno = 0;
  for (const std::string& line : util::split(content, '\n')) {
    ++lineno;
    if (util::trim(line).empty()) continue;
    Sample s;
    s.source = source;
    auto reject = [&](const std::string& reason) {
      Reject r;
      r.sample.source = source;
      r.sample.intent = line.size() > 200 ? line.substr(0, 200) : line;
      result.rejects.push_back({std::move(r.sample), reason + " (line " + std::to_string(lineno) + ")"});
    };
    if (format == FileFormat::jsonl) {
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        reject("malformed json");
        continue;
      }
      if (!j.contains("question_id") || !j["question_id"].is_number_integer()) {
        reject("missing question_id");
        continue;
      }
      if (!j.contains("intent") || !j["intent"].is_string()) {
        reject("missing intent");
        continue;
      }
      if (!j.contains("snippet") || !j["snippet"].is_string()) {
        reject("missing snippet");
        continue;
      }
      s.question_id = j["question_id"].get<int64_t>();
      s.intent = j["intent"].get<std::string>();
      s.snippet = j["snippet"].get<std::string>();
      if (source == Source::mined) {
        if (!j.contains("prob") || !j["prob"].is_number()) {
          reject("missing prob on mined record");
          continue;
        }
        s.prob = j["prob"].get<double>();
      }
    } else {
      auto cols = util::split(line, '\t');
      if (cols.size() < 3) {
        reject("too few columns");
        continue;
      }
      try {
        s.question_id = std::stoll(cols[0]);
      } catch (const std::exception&) {
        reject("bad question_id");
        continue;
      }
      s.intent = detail::tsv_unescape(cols[1]);
      s.snippet = detail::tsv_unescape(cols[2]);
      if (source == Source::mined) {
        if (cols.size() < 4) {
          reject("missing prob on mined record");
          continue;
        }
        try {
          s.prob = std::stod(cols[3]);
        } catch (const std::exception&) {
          reject("bad prob");
          continue;
        }
      }
    }
    if (s.question_id < 0) {
      reject("negative question_id");
      continue;
    }
    if (s.prob && (*s.prob < 0.0 || *s.prob > 1.0)) {
      reject("prob out of [0,1]");
      continue;
    }
    result.samples.push_back(std::move(s));
  }
  return result;
}

inline std::string samples_to_jsonl(const std::vector<Sample>& samples) {
  std::string out;
  for (const Sample& s : samples) {
    out += s.to_json().dump();
    out += '\n';
  }
  return out;
}

// Removes ? ! , : " - and lowercases; dots are preserved because some
// intents name the method call they want. Whitespace runs collapse.
inline std::string clean_intent(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (c == '?' || c == '!' || c == ',' || c == ':' || c == '"' || c == '-') continue;
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

namespace detail {

// Strips '''...''' and """...""" spans; ordinary quoted strings are skipped
// over so their contents cannot open a comment. Unterminated spans run to
// the end of the text.
inline std::string strip_triple_quoted(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '\'' || c == '"') {
      bool triple = i + 2 < s.size() && s[i + 1] == c && s[i + 2] == c;
      if (triple) {
        const std::string closer(3, c);
        size_t end = s.find(closer, i + 3);
        i = end == std::string_view::npos ? s.size() : end + 3;
        continue;
      }
      // ordinary string: copy verbatim up to the closing quote or line end
      size_t j = i + 1;
      out += c;
      while (j < s.size() && s[j] != c && s[j] != '\n') {
        if (s[j] == '\\' && j + 1 < s.size()) {
          out += s[j];
          ++j;
        }
        out += s[j];
        ++j;
      }
      if (j < s.size()) {
        out += s[j];
        ++j;
      }
      i = j;
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

inline std::string strip_hash_comment(std::string_view line) {
  char quote = 0;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quote) {
      if (c == '\\') {
        ++i;
        continue;
      }
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      continue;
    }
    if (c == '#') return std::string(line.substr(0, i));
  }
  return std::string(line);
}

inline std::string rstrip(std::string_view s) {
  size_t e = s.size();
  while (e > 0 && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(0, e));
}

}  // namespace detail

// Removes, in order: triple-quoted block comments, # comments outside
// string literals, interpreter prompt markers (>>> and ...), and -- when
// any prompt marker was present -- unmarked lines, which are echoed return
// values in transcript-style snippets. Blank lines and trailing whitespace
// go last. A snippet that ends up empty is rejected downstream.
inline std::string clean_snippet(std::string_view raw) {
  std::string no_blocks = detail::strip_triple_quoted(raw);
  std::vector<std::string> lines = util::split(no_blocks, '\n');
  for (std::string& line : lines) line = detail::strip_hash_comment(line);

  struct MarkedLine {
    std::string text;
    bool prompted;
  };
  std::vector<MarkedLine> marked;
  bool any_prompt = false;
  for (const std::string& line : lines) {
    size_t indent = 0;
    while (indent < line.size() && std::isspace(static_cast<unsigned char>(line[indent]))) ++indent;
    std::string_view body = std::string_view(line).substr(indent);
    bool prompted = false;
    // markers strip repeatedly so transcript lines like ">>> ... x" reduce
    // in one pass, which keeps the whole cleaner idempotent
    bool stripped = true;
    while (stripped) {
      stripped = false;
      for (const char* marker : {">>>", "..."}) {
        if (body.substr(0, 3) == marker) {
          prompted = true;
          any_prompt = true;
          body.remove_prefix(3);
          if (!body.empty() && body[0] == ' ') body.remove_prefix(1);
          stripped = true;
          break;
        }
      }
    }
    if (prompted && util::trim(body).empty()) continue;  // bare marker line
    // prompted lines keep what followed the marker; plain lines keep
    // their indentation untouched
    marked.push_back({prompted ? std::string(body) : line, prompted});
  }

  std::string out;
  for (const MarkedLine& ml : marked) {
    if (any_prompt && !ml.prompted) continue;  // echoed value line
    std::string text = detail::rstrip(ml.text);
    if (util::trim(text).empty()) continue;
    if (!out.empty()) out += '\n';
    out += text;
  }
  return out;
}

inline int snippet_line_count(std::string_view snippet) {
  if (snippet.empty()) return 0;
  return static_cast<int>(std::count(snippet.begin(), snippet.end(), '\n')) + 1;
}

// Keeps exactly the samples with prob >= prob_threshold, order preserved.
inline std::vector<Sample> filter_mined(const std::vector<Sample>& samples, double prob_threshold) {
  std::vector<Sample> kept;
  for (const Sample& s : samples) {
    if (!s.prob)
      throw std::invalid_argument("filter_mined: sample qid=" + std::to_string(s.question_id) + " has no prob");
    if (*s.prob >= prob_threshold) kept.push_back(s);
  }
  return kept;
}

// Bag-of-token count vector over the vocabulary, stored sparse.
using CountVector = std::map<int, int64_t>;

inline CountVector count_vector(const std::vector<std::string>& tokens, const embed::Vocabulary& vocab) {
  CountVector v;
  for (const auto& t : tokens) ++v[vocab.index(t)];
  return v;
}

// Cosine of two count vectors; similarity with a zero vector is 0.
inline double cosine(const CountVector& a, const CountVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [k, va] : a) {
    na += static_cast<double>(va) * static_cast<double>(va);
    auto it = b.find(k);
    if (it != b.end()) dot += static_cast<double>(va) * static_cast<double>(it->second);
  }
  for (const auto& [k, vb] : b) nb += static_cast<double>(vb) * static_cast<double>(vb);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct DedupResult {
  std::vector<Sample> kept;
  int64_t removed = 0;
};

// Per question, greedy scan in input order: a snippet is removed iff its
// cosine similarity to an already-kept snippet of the same question is
// >= sim_threshold. First occurrence always kept. Unlexable snippets are
// routed to the faulty reject stream.
inline DedupResult dedup_answers(const std::vector<Sample>& samples, const embed::Vocabulary& vocab,
                                 double sim_threshold, std::vector<Reject>* rejects = nullptr) {
  DedupResult result;
  std::unordered_map<int64_t, std::vector<CountVector>> kept_by_qid;
  for (const Sample& s : samples) {
    CountVector vec;
    try {
      vec = count_vector(codelex::tokenize(s.snippet).texts(), vocab);
    } catch (const codelex::LexError& e) {
      if (rejects) rejects->push_back({s, std::string("unlexable: ") + e.what()});
      continue;
    }
    auto& kept_vecs = kept_by_qid[s.question_id];
    bool dup = false;
    for (const CountVector& kv : kept_vecs) {
      if (cosine(vec, kv) >= sim_threshold) {
        dup = true;
        break;
      }
    }
    if (dup) {
      ++result.removed;
    } else {
      kept_vecs.push_back(std::move(vec));
      result.kept.push_back(s);
    }
  }
  return result;
}

struct MergeStats {
  int64_t overlap_removed = 0;
  int64_t faulty_removed = 0;
};

// Union with cross-source duplicate removal: a sample is dropped when its
// question_id was already kept from the other source, or when a kept
// snippet under the same cleaned intent is cosine-similar at the
// threshold. conala samples are scanned first, then staqc.
inline std::vector<Sample> merge_sources(const std::vector<Sample>& conala, const std::vector<Sample>& staqc,
                                         const embed::Vocabulary& vocab, double sim_threshold, MergeStats& stats,
                                         std::vector<Reject>* rejects = nullptr) {
  std::vector<Sample> merged;
  std::unordered_map<int64_t, std::set<int>> qid_sources;  // qid -> sources kept under it
  std::unordered_map<std::string, std::vector<CountVector>> intent_vecs;

  auto consider = [&](const Sample& s, int source_tag) {
    CountVector vec;
    try {
      vec = count_vector(codelex::tokenize(s.snippet).texts(), vocab);
    } catch (const codelex::LexError& e) {
      ++stats.faulty_removed;
      if (rejects) rejects->push_back({s, std::string("unlexable: ") + e.what()});
      return;
    }
    auto qit = qid_sources.find(s.question_id);
    if (qit != qid_sources.end() && !qit->second.count(source_tag)) {
      ++stats.overlap_removed;  // question already present via the other source
      return;
    }
    for (const CountVector& kv : intent_vecs[s.intent]) {
      if (cosine(vec, kv) >= sim_threshold) {
        ++stats.overlap_removed;
        return;
      }
    }
    qid_sources[s.question_id].insert(source_tag);
    intent_vecs[s.intent].push_back(std::move(vec));
    merged.push_back(s);
  };

  for (const Sample& s : conala) consider(s, 0);
  for (const Sample& s : staqc) consider(s, 1);
  return merged;
}

// For each positive's intent, draws snippets uniformly from the whole
// dataset until one under a different question turns up (budget 100
// draws); the pair becomes a label-0 sample. Positives are relabelled 1.
// Deterministic given rng_seed.
inline std::vector<Sample> generate_negatives(std::vector<Sample>& positives, uint64_t rng_seed) {
  std::set<int64_t> qids;
  for (const Sample& s : positives) qids.insert(s.question_id);
  if (qids.size() < 2) throw std::runtime_error("generate_negatives: no valid negative source");

  Rng rng(rng_seed);
  std::vector<Sample> negatives;
  const size_t n = positives.size();
  for (Sample& pos : positives) {
    pos.label = 1;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const Sample& donor = positives[rng.bounded(n)];
      if (donor.question_id == pos.question_id) continue;
      Sample neg;
      neg.question_id = pos.question_id;
      neg.intent = pos.intent;
      neg.snippet = donor.snippet;
      neg.snippet_question_id = donor.question_id;
      neg.source = Source::synthetic;
      neg.label = 0;
      negatives.push_back(std::move(neg));
      break;
    }
  }
  return negatives;
}

struct CurateInputs {
  std::vector<Sample> conala_train;  // source curated
  std::vector<Sample> conala_mined;  // source mined, prob present
  std::vector<Sample> staqc;         // source staqc
};

struct CurateResult {
  std::vector<Sample> samples;  // positives then negatives, all labelled
  CurationReport report;
  std::vector<Reject> rejects;
  embed::Vocabulary code_vocab;  // dedup vocabulary, reused downstream
};

// Full curation pipeline: clean -> line cap (staqc) -> probability filter
// (mined) -> per-question dedup -> cross-source merge -> negatives.
inline CurateResult curate(const CurateInputs& in, const CurationConfig& cfg) {
  cfg.validate();
  CurateResult result;
  CurationReport& rep = result.report;
  rep.ingested = static_cast<int64_t>(in.conala_train.size() + in.conala_mined.size() + in.staqc.size());

  auto clean_set = [&](const std::vector<Sample>& src, bool line_cap) {
    std::vector<Sample> out;
    for (Sample s : src) {
      s.intent = clean_intent(s.intent);
      s.snippet = clean_snippet(s.snippet);
      if (s.intent.empty()) {
        ++rep.faulty_removed;
        result.rejects.push_back({std::move(s), "empty intent after cleaning"});
        continue;
      }
      if (s.snippet.empty()) {
        ++rep.faulty_removed;
        result.rejects.push_back({std::move(s), "empty snippet after cleaning"});
        continue;
      }
      if (line_cap && snippet_line_count(s.snippet) > cfg.max_lines) {
        ++rep.faulty_removed;
        result.rejects.push_back({std::move(s), "over line cap"});
        continue;
      }
      out.push_back(std::move(s));
    }
    return out;
  };

  std::vector<Sample> train = clean_set(in.conala_train, false);
  std::vector<Sample> mined = clean_set(in.conala_mined, false);
  std::vector<Sample> staqc = clean_set(in.staqc, true);

  size_t before = mined.size();
  mined = filter_mined(mined, cfg.prob_threshold);
  rep.prob_filtered = static_cast<int64_t>(before - mined.size());

  // conala = train then mined, deduped as one set; keep-first favors train
  std::vector<Sample> conala = train;
  conala.insert(conala.end(), mined.begin(), mined.end());

  std::vector<std::vector<std::string>> token_corpus;
  for (const auto* set : {&conala, &staqc})
    for (const Sample& s : *set) {
      try {
        token_corpus.push_back(codelex::tokenize(s.snippet).texts());
      } catch (const codelex::LexError&) {
        // leave it for dedup to reject, so the count lands in one place
      }
    }
  result.code_vocab = embed::build_vocab(token_corpus, 1, std::numeric_limits<size_t>::max());

  DedupResult conala_dedup = dedup_answers(conala, result.code_vocab, cfg.sim_threshold, &result.rejects);
  DedupResult staqc_dedup = dedup_answers(staqc, result.code_vocab, cfg.sim_threshold, &result.rejects);
  rep.dedup_removed = conala_dedup.removed + staqc_dedup.removed;
  rep.faulty_removed += static_cast<int64_t>(conala.size() + staqc.size()) -
                        static_cast<int64_t>(conala_dedup.kept.size() + staqc_dedup.kept.size()) -
                        rep.dedup_removed;

  MergeStats merge_stats;
  std::vector<Sample> merged =
      merge_sources(conala_dedup.kept, staqc_dedup.kept, result.code_vocab, cfg.sim_threshold, merge_stats,
                    &result.rejects);
  rep.overlap_removed = merge_stats.overlap_removed;
  rep.faulty_removed += merge_stats.faulty_removed;

  std::vector<Sample> negatives = generate_negatives(merged, cfg.rng_seed);
  rep.positives = static_cast<int64_t>(merged.size());
  rep.negatives = static_cast<int64_t>(negatives.size());
  rep.total = rep.positives + rep.negatives;

  result.samples = std::move(merged);
  result.samples.insert(result.samples.end(), negatives.begin(), negatives.end());
  return result;
}

}  // namespace snipforge::corpus
