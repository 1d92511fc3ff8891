// API whitelist mining: frequent API/data-type names from cleaned intents
// (stopword removal + Porter stemming + frequency count) and from import
// statements in a development code corpus, intersected and capped.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "snipforge/codelex.hpp"
#include "snipforge/porter.hpp"
#include "snipforge/util.hpp"

namespace snipforge::apiminer {

struct FrequencyTable {
  std::unordered_map<std::string, int64_t> counts;
  int64_t total = 0;

  void add(const std::string& token, int64_t n = 1) {
    counts[token] += n;
    total += n;
  }

  // count-descending, ties lexicographic
  std::vector<std::pair<std::string, int64_t>> ordered() const {
    std::vector<std::pair<std::string, int64_t>> out(counts.begin(), counts.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    return out;
  }

  FrequencyTable top_k(size_t k) const {
    FrequencyTable t;
    for (const auto& [tok, cnt] : ordered()) {
      if (t.counts.size() >= k) break;
      t.add(tok, cnt);
    }
    return t;
  }

  std::string to_csv() const {
    std::string out = "token,count\n";
    for (const auto& [tok, cnt] : ordered()) out += util::csv_field(tok) + "," + std::to_string(cnt) + "\n";
    return out;
  }
};

inline const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",      "about",  "above",  "after", "again",  "against", "all",    "am",    "an",     "and",   "any",
      "are",    "as",     "at",     "be",    "because", "been",   "before", "being", "below",  "between",
      "both",   "but",    "by",     "can",   "cannot", "could",  "did",    "do",    "does",   "doing", "down",
      "during", "each",   "few",    "for",   "from",   "further", "get",    "had",   "has",    "have",  "having",
      "he",     "her",    "here",   "hers",  "herself", "him",    "himself", "his",  "how",    "i",     "if",
      "in",     "into",   "is",     "it",    "its",    "itself", "just",   "me",    "more",   "most",  "my",
      "myself", "no",     "nor",    "not",   "now",    "of",     "off",    "on",    "once",   "only",  "or",
      "other",  "ought",  "our",    "ours",  "ourselves", "out",  "over",   "own",   "same",   "she",   "should",
      "so",     "some",   "such",   "than",  "that",   "the",    "their",  "theirs", "them",  "themselves",
      "then",   "there",  "these",  "they",  "this",   "those",  "through", "to",    "too",   "under", "until",
      "up",     "use",    "using",  "very",  "was",    "way",    "we",     "were",  "what",   "when",  "where",
      "which",  "while",  "who",    "whom",  "why",    "will",   "with",   "would", "you",    "your",  "yours",
      "yourself", "yourselves", "i'm", "it's", "don't", "can't", "won't",  "how's", "what's", "there's"};
  return words;
}

// Whitespace-tokenizes cleaned intents, drops stopwords, stems everything
// except dotted names (stemming np.fromfunction would destroy the API
// name), and returns the top-k table. Sentence-edge dots are trimmed off
// tokens before the dotted test.
inline FrequencyTable mine_intent_apis(const std::vector<std::string>& intents,
                                       const std::set<std::string>& stopwords, size_t k = 40) {
  FrequencyTable full;
  for (const std::string& intent : intents) {
    for (std::string tok : util::split_ws(intent)) {
      while (!tok.empty() && tok.front() == '.') tok.erase(tok.begin());
      while (!tok.empty() && tok.back() == '.') tok.pop_back();
      if (tok.empty() || stopwords.count(tok)) continue;
      if (tok.find('.') != std::string::npos) {
        full.add(tok);
      } else {
        full.add(porter_stem(tok));
      }
    }
  }
  return full.top_k(k);
}

// Counts root module names from `import X[, Y...]` / `from X import ...`
// lines; `import X as alias` counts X. Non-import lines are ignored.
inline FrequencyTable extract_imports(const std::vector<std::string>& source_files, size_t k = 40) {
  FrequencyTable full;
  auto root_of = [](std::string_view name) {
    size_t dot = name.find('.');
    return std::string(dot == std::string_view::npos ? name : name.substr(0, dot));
  };
  for (const std::string& text : source_files) {
    for (const std::string& raw : util::split(text, '\n')) {
      std::string line = util::trim(raw);
      if (line.rfind("import ", 0) == 0) {
        for (const std::string& piece : util::split(line.substr(7), ',')) {
          auto words = util::split_ws(piece);
          if (!words.empty()) full.add(root_of(words[0]));
        }
      } else if (line.rfind("from ", 0) == 0) {
        auto words = util::split_ws(line);
        if (words.size() >= 3 && words[2] == "import") full.add(root_of(words[1]));
      }
    }
  }
  return full.top_k(k);
}

// Candidates from both top-k tables; names present in BOTH rank first,
// then the rest by combined count, truncated to k libraries. Members come
// from the curated member_db; a missing library gets an empty member set
// and a warning.
inline codelex::ApiWhitelist build_whitelist(const FrequencyTable& intent_table, const FrequencyTable& import_table,
                                             const std::map<std::string, std::set<std::string>>& member_db, size_t k,
                                             std::vector<std::string>* warnings = nullptr) {
  auto combined_count = [&](const std::string& name) {
    int64_t c = 0;
    auto i1 = intent_table.counts.find(name);
    if (i1 != intent_table.counts.end()) c += i1->second;
    auto i2 = import_table.counts.find(name);
    if (i2 != import_table.counts.end()) c += i2->second;
    return c;
  };

  std::vector<std::string> in_both, rest;
  std::set<std::string> seen;
  for (const auto& [name, cnt] : intent_table.counts) {
    if (seen.count(name)) continue;
    seen.insert(name);
    (import_table.counts.count(name) ? in_both : rest).push_back(name);
  }
  for (const auto& [name, cnt] : import_table.counts) {
    if (seen.count(name)) continue;
    seen.insert(name);
    rest.push_back(name);
  }
  auto by_count = [&](const std::string& a, const std::string& b) {
    int64_t ca = combined_count(a), cb = combined_count(b);
    if (ca != cb) return ca > cb;
    return a < b;
  };
  std::sort(in_both.begin(), in_both.end(), by_count);
  std::sort(rest.begin(), rest.end(), by_count);

  codelex::ApiWhitelist wl;
  for (const auto& bucket : {in_both, rest}) {
    for (const std::string& name : bucket) {
      if (wl.libraries.size() >= k) break;
      auto it = member_db.find(name);
      if (it != member_db.end()) {
        wl.add_library(name, it->second);
      } else {
        wl.add_library(name);
        if (warnings) warnings->push_back("no member_db entry for library: " + name);
      }
    }
  }
  wl.rebuild_flat();
  return wl;
}

}  // namespace snipforge::apiminer
