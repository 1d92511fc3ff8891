// Porter stemming algorithm, the classic 1980 rule set (steps 1a-5b).
// Operates on lowercase ascii words; words of length <= 2 and words with
// non-letter characters pass through unchanged.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace snipforge::apiminer {

namespace porter_detail {

inline bool is_cons(const std::string& w, size_t i) {
  char c = w[i];
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
      return false;
    case 'y':
      return i == 0 ? true : !is_cons(w, i - 1);
    default:
      return true;
  }
}

// m in the [C](VC)^m[V] decomposition of w[0..len)
inline int measure(const std::string& w, size_t len) {
  int m = 0;
  size_t i = 0;
  while (i < len && is_cons(w, i)) ++i;  // optional leading C
  while (i < len) {
    while (i < len && !is_cons(w, i)) ++i;  // vowel run
    if (i == len) break;
    ++m;
    while (i < len && is_cons(w, i)) ++i;  // consonant run
  }
  return m;
}

inline bool has_vowel(const std::string& w, size_t len) {
  for (size_t i = 0; i < len; ++i)
    if (!is_cons(w, i)) return true;
  return false;
}

inline bool double_cons(const std::string& w, size_t len) {
  return len >= 2 && w[len - 1] == w[len - 2] && is_cons(w, len - 1);
}

// ends consonant-vowel-consonant where the final consonant is not w, x or y
inline bool ends_cvc(const std::string& w, size_t len) {
  if (len < 3) return false;
  if (!is_cons(w, len - 3) || is_cons(w, len - 2) || !is_cons(w, len - 1)) return false;
  char c = w[len - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

inline bool ends_with(const std::string& w, std::string_view suf) {
  return w.size() >= suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
  int min_measure;  // condition: m(stem) > min_measure
};

// First matching suffix decides the step; if its measure condition fails
// the step does nothing (per the published algorithm).
inline void apply_rule_list(std::string& w, const std::vector<Rule>& rules) {
  for (const Rule& r : rules) {
    if (!ends_with(w, r.suffix)) continue;
    size_t stem_len = w.size() - r.suffix.size();
    if (measure(w, stem_len) > r.min_measure) {
      w.resize(stem_len);
      w.append(r.replacement);
    }
    return;
  }
}

}  // namespace porter_detail

inline std::string porter_stem(std::string word) {
  using namespace porter_detail;
  if (word.size() <= 2) return word;
  for (char c : word)
    if (c < 'a' || c > 'z') return word;

  std::string& w = word;

  // step 1a
  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ies")) {
    w.resize(w.size() - 2);
  } else if (!ends_with(w, "ss") && ends_with(w, "s")) {
    w.resize(w.size() - 1);
  }

  // step 1b
  bool cleanup = false;
  if (ends_with(w, "eed")) {
    if (measure(w, w.size() - 3) > 0) w.resize(w.size() - 1);
  } else if (ends_with(w, "ed") && has_vowel(w, w.size() - 2)) {
    w.resize(w.size() - 2);
    cleanup = true;
  } else if (ends_with(w, "ing") && has_vowel(w, w.size() - 3)) {
    w.resize(w.size() - 3);
    cleanup = true;
  }
  if (cleanup) {
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
      w += 'e';
    } else if (double_cons(w, w.size())) {
      char last = w[w.size() - 1];
      if (last != 'l' && last != 's' && last != 'z') w.resize(w.size() - 1);
    } else if (measure(w, w.size()) == 1 && ends_cvc(w, w.size())) {
      w += 'e';
    }
  }

  // step 1c
  if (ends_with(w, "y") && has_vowel(w, w.size() - 1)) w[w.size() - 1] = 'i';

  // step 2
  static const std::vector<Rule> step2 = {
      {"ational", "ate", 0}, {"tional", "tion", 0}, {"enci", "ence", 0}, {"anci", "ance", 0},
      {"izer", "ize", 0},    {"abli", "able", 0},   {"alli", "al", 0},   {"entli", "ent", 0},
      {"eli", "e", 0},       {"ousli", "ous", 0},   {"ization", "ize", 0}, {"ation", "ate", 0},
      {"ator", "ate", 0},    {"alism", "al", 0},    {"iveness", "ive", 0}, {"fulness", "ful", 0},
      {"ousness", "ous", 0}, {"aliti", "al", 0},    {"iviti", "ive", 0},  {"biliti", "ble", 0}};
  apply_rule_list(w, step2);

  // step 3
  static const std::vector<Rule> step3 = {{"icate", "ic", 0}, {"ative", "", 0}, {"alize", "al", 0},
                                          {"iciti", "ic", 0}, {"ical", "ic", 0}, {"ful", "", 0},
                                          {"ness", "", 0}};
  apply_rule_list(w, step3);

  // step 4
  static const std::vector<Rule> step4 = {{"al", "", 1},    {"ance", "", 1}, {"ence", "", 1}, {"er", "", 1},
                                          {"ic", "", 1},    {"able", "", 1}, {"ible", "", 1}, {"ant", "", 1},
                                          {"ement", "", 1}, {"ment", "", 1}, {"ent", "", 1}};
  bool step4_done = false;
  for (const Rule& r : step4) {
    if (!ends_with(w, r.suffix)) continue;
    size_t stem_len = w.size() - r.suffix.size();
    if (measure(w, stem_len) > r.min_measure) w.resize(stem_len);
    step4_done = true;
    break;
  }
  if (!step4_done) {
    if (ends_with(w, "ion")) {
      size_t stem_len = w.size() - 3;
      if (stem_len > 0 && measure(w, stem_len) > 1 && (w[stem_len - 1] == 's' || w[stem_len - 1] == 't'))
        w.resize(stem_len);
    } else {
      static const std::vector<Rule> step4b = {{"ou", "", 1},  {"ism", "", 1}, {"ate", "", 1}, {"iti", "", 1},
                                               {"ous", "", 1}, {"ive", "", 1}, {"ize", "", 1}};
      apply_rule_list(w, step4b);
    }
  }

  // step 5a
  if (ends_with(w, "e")) {
    size_t stem_len = w.size() - 1;
    int m = measure(w, stem_len);
    if (m > 1 || (m == 1 && !ends_cvc(w, stem_len))) w.resize(stem_len);
  }

  // step 5b
  if (measure(w, w.size()) > 1 && double_cons(w, w.size()) && w[w.size() - 1] == 'l') w.resize(w.size() - 1);

  return word;
}

}  // namespace snipforge::apiminer
