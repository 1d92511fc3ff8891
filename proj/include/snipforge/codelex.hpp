// Lexer for short Python snippets plus identifier normalization against an
// API whitelist. Lexing is longest-match over string literals, numbers,
// identifiers/keywords and operators; indentation is never tokenized
// (snippets are capped at a few lines upstream).
#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "snipforge/util.hpp"

namespace snipforge::codelex {

enum class TokenKind { identifier, keyword, number, string_literal, operator_, punctuation, special };

inline const char* kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::identifier: return "identifier";
    case TokenKind::keyword: return "keyword";
    case TokenKind::number: return "number";
    case TokenKind::string_literal: return "string_literal";
    case TokenKind::operator_: return "operator";
    case TokenKind::punctuation: return "punctuation";
    case TokenKind::special: return "special";
  }
  return "?";
}

struct Token {
  std::string text;
  TokenKind kind;

  bool operator==(const Token& other) const = default;
};

struct TokenSeq {
  std::vector<Token> tokens;
  bool normalized = false;
  std::map<std::string, std::string> var_map;  // original identifier -> <VAR_NAME>

  std::vector<std::string> texts() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.text);
    return out;
  }
};

class LexError : public std::runtime_error {
 public:
  LexError(const std::string& what, size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

inline const std::set<std::string>& python_keywords() {
  static const std::set<std::string> kw = {
      "False",  "None",   "True",  "and",    "as",     "assert", "async", "await",    "break",
      "class",  "continue", "def", "del",    "elif",   "else",   "except", "finally", "for",
      "from",   "global", "if",    "import", "in",     "is",     "lambda", "nonlocal", "not",
      "or",     "pass",   "raise", "return", "try",    "while",  "with",   "yield"};
  return kw;
}

// Fixed builtin set: these names survive normalization even without a whitelist.
inline const std::set<std::string>& python_builtins() {
  static const std::set<std::string> b = {"len",  "print", "range", "str",       "int", "list", "dict", "set",
                                          "tuple", "open",  "enumerate", "zip",  "map", "filter", "sorted", "type",
                                          "isinstance", "sum", "min", "max",     "abs", "input"};
  return b;
}

inline const std::vector<std::string>& special_tokens() {
  static const std::vector<std::string> s = {"<VAR_NAME>", "<PAD>", "<UNK>", "<START>", "<END>"};
  return s;
}

constexpr const char* kVarName = "<VAR_NAME>";

// API whitelist: library names plus their retained function/method names.
struct ApiWhitelist {
  std::set<std::string> libraries;
  std::map<std::string, std::set<std::string>> members;
  std::set<std::string> flat;  // libraries plus all member names

  void rebuild_flat() {
    flat.clear();
    flat.insert(libraries.begin(), libraries.end());
    for (const auto& [lib, mems] : members) flat.insert(mems.begin(), mems.end());
  }

  void add_library(const std::string& lib, const std::set<std::string>& mems = {}) {
    libraries.insert(lib);
    members[lib].insert(mems.begin(), mems.end());
    rebuild_flat();
  }

  bool contains(const std::string& name) const { return flat.count(name) > 0; }
};

// File format: one record per line, `library: member1 member2 ...`;
// a bare line is a library with no members. `#` starts a comment line.
inline ApiWhitelist parse_whitelist(std::string_view text) {
  ApiWhitelist wl;
  for (const std::string& raw : util::split(text, '\n')) {
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos) {
      wl.libraries.insert(line);
      wl.members[line];
    } else {
      std::string lib = util::trim(line.substr(0, colon));
      if (lib.empty()) continue;
      wl.libraries.insert(lib);
      auto& mems = wl.members[lib];
      for (const auto& m : util::split_ws(line.substr(colon + 1))) mems.insert(m);
    }
  }
  wl.rebuild_flat();
  return wl;
}

inline std::string format_whitelist(const ApiWhitelist& wl) {
  std::ostringstream out;
  for (const auto& lib : wl.libraries) {
    out << lib;
    auto it = wl.members.find(lib);
    if (it != wl.members.end() && !it->second.empty()) {
      out << ':';
      for (const auto& m : it->second) out << ' ' << m;
    }
    out << '\n';
  }
  return out.str();
}

namespace detail {

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline const std::vector<std::string>& multi_char_operators() {
  static const std::vector<std::string> ops = {"==", "!=", "<=", ">=", "//", "**", "->", "+=", "-=", "*=", "/="};
  return ops;
}

inline bool is_single_operator(char c) {
  return std::string_view("+-*/%<>=@&|^~").find(c) != std::string_view::npos;
}

inline bool is_punctuation(char c) {
  return std::string_view("()[]{},.:;").find(c) != std::string_view::npos;
}

// Scans a string literal starting at `pos` (which must sit on a quote).
inline size_t scan_string(std::string_view s, size_t pos) {
  char q = s[pos];
  bool triple = pos + 2 < s.size() && s[pos + 1] == q && s[pos + 2] == q;
  if (triple) {
    const std::string closer(3, q);
    size_t i = pos + 3;
    while (i < s.size()) {
      if (s[i] == '\\') {
        i += 2;
        continue;
      }
      if (s.compare(i, 3, closer) == 0) return i + 3;
      ++i;
    }
    throw LexError("unterminated triple-quoted string", pos);
  }
  size_t i = pos + 1;
  while (i < s.size()) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      i += 2;
      continue;
    }
    if (s[i] == '\n') throw LexError("unterminated string literal", pos);
    if (s[i] == q) return i + 1;
    ++i;
  }
  throw LexError("unterminated string literal", pos);
}

inline size_t scan_number(std::string_view s, size_t pos) {
  size_t i = pos;
  if (s[i] == '0' && i + 1 < s.size() && (s[i + 1] == 'x' || s[i + 1] == 'X')) {
    i += 2;
    while (i < s.size() && std::isxdigit(static_cast<unsigned char>(s[i]))) ++i;
    return i;
  }
  while (i < s.size() && is_digit(s[i])) ++i;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i;
  }
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    size_t j = i + 1;
    if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
    if (j < s.size() && is_digit(s[j])) {
      i = j;
      while (i < s.size() && is_digit(s[i])) ++i;
    }
  }
  return i;
}

}  // namespace detail

inline TokenSeq tokenize(std::string_view snippet) {
  using namespace detail;
  TokenSeq seq;
  size_t i = 0;
  const size_t n = snippet.size();
  while (i < n) {
    char c = snippet[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    // reserved tokens like <VAR_NAME> lex as one special token
    if (c == '<') {
      bool matched = false;
      for (const auto& sp : special_tokens()) {
        if (snippet.compare(i, sp.size(), sp) == 0) {
          seq.tokens.push_back({sp, TokenKind::special});
          i += sp.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (c == '\'' || c == '"') {
      size_t end = scan_string(snippet, i);
      seq.tokens.push_back({std::string(snippet.substr(i, end - i)), TokenKind::string_literal});
      i = end;
      continue;
    }
    if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(snippet[i + 1]))) {
      size_t end = scan_number(snippet, i);
      seq.tokens.push_back({std::string(snippet.substr(i, end - i)), TokenKind::number});
      i = end;
      continue;
    }
    if (is_ident_start(c)) {
      size_t j = i + 1;
      while (j < n && is_ident_char(snippet[j])) ++j;
      std::string word(snippet.substr(i, j - i));
      TokenKind kind = python_keywords().count(word) ? TokenKind::keyword : TokenKind::identifier;
      seq.tokens.push_back({std::move(word), kind});
      i = j;
      continue;
    }
    bool multi = false;
    for (const auto& op : multi_char_operators()) {
      if (snippet.compare(i, op.size(), op) == 0) {
        seq.tokens.push_back({op, TokenKind::operator_});
        i += op.size();
        multi = true;
        break;
      }
    }
    if (multi) continue;
    if (is_single_operator(c)) {
      seq.tokens.push_back({std::string(1, c), TokenKind::operator_});
      ++i;
      continue;
    }
    if (is_punctuation(c)) {
      seq.tokens.push_back({std::string(1, c), TokenKind::punctuation});
      ++i;
      continue;
    }
    throw LexError(std::string("illegal character '") + c + "'", i);
  }
  return seq;
}

// Identifiers survive iff they are builtins or whitelisted; keywords keep
// their own kind and are never touched. With normalize_literals set, string
// and number literals collapse to <VAR_NAME> as well (off by default).
inline TokenSeq normalize(const TokenSeq& seq, const ApiWhitelist& whitelist, bool normalize_literals = false) {
  if (seq.normalized) return seq;
  TokenSeq out;
  out.normalized = true;
  out.tokens.reserve(seq.tokens.size());
  for (const Token& t : seq.tokens) {
    bool replace = false;
    if (t.kind == TokenKind::identifier) {
      replace = !python_builtins().count(t.text) && !whitelist.contains(t.text);
    } else if (normalize_literals && (t.kind == TokenKind::string_literal || t.kind == TokenKind::number)) {
      replace = true;
    }
    if (replace) {
      out.var_map[t.text] = kVarName;
      out.tokens.push_back({kVarName, TokenKind::special});
    } else {
      out.tokens.push_back(t);
    }
  }
  return out;
}

// Single-space join except: no space before ) ] } , . : ; no space after
// ( [ { . ; and ( or [ attach directly after an identifier or special token
// so calls render as f(x) and indexing as a[i]. Output re-lexes to the same
// token texts.
inline std::string detokenize(const TokenSeq& seq) {
  std::string out;
  const Token* prev = nullptr;
  auto no_space_before = [&](const Token& t) {
    if (t.text.size() == 1 && std::string_view(")]},.:").find(t.text[0]) != std::string_view::npos) return true;
    if ((t.text == "(" || t.text == "[") && prev &&
        (prev->kind == TokenKind::identifier || prev->kind == TokenKind::special))
      return true;
    return false;
  };
  auto no_space_after = [](const Token& t) {
    return t.text.size() == 1 && std::string_view("([{.").find(t.text[0]) != std::string_view::npos;
  };
  for (const Token& t : seq.tokens) {
    if (prev && !no_space_after(*prev) && !no_space_before(t)) out += ' ';
    out += t.text;
    prev = &t;
  }
  return out;
}

inline nlohmann::json tokens_to_json(const TokenSeq& seq) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Token& t : seq.tokens) arr.push_back({{"text", t.text}, {"kind", kind_name(t.kind)}});
  return arr;
}

}  // namespace snipforge::codelex
