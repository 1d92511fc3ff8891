// Token vocabulary with reserved specials and deterministic ordering:
// descending count, ties broken lexicographically.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace snipforge::embed {

struct Vocabulary {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kStart = 2;
  static constexpr int kEnd = 3;
  static constexpr int kReserved = 4;

  std::vector<std::string> index_to_token;
  std::unordered_map<std::string, int> token_to_index;
  std::unordered_map<std::string, int64_t> counts;

  Vocabulary() {
    index_to_token = {"<PAD>", "<UNK>", "<START>", "<END>"};
    for (int i = 0; i < kReserved; ++i) token_to_index[index_to_token[static_cast<size_t>(i)]] = i;
  }

  size_t size() const { return index_to_token.size(); }

  int index(const std::string& tok) const {
    auto it = token_to_index.find(tok);
    return it == token_to_index.end() ? kUnk : it->second;
  }

  bool contains(const std::string& tok) const { return token_to_index.count(tok) > 0; }

  const std::string& token(int idx) const {
    if (idx < 0 || static_cast<size_t>(idx) >= index_to_token.size())
      throw std::out_of_range("vocabulary index " + std::to_string(idx));
    return index_to_token[static_cast<size_t>(idx)];
  }

  int64_t count(const std::string& tok) const {
    auto it = counts.find(tok);
    return it == counts.end() ? 0 : it->second;
  }

  // Highest-count (token, count) pairs in canonical order.
  std::vector<std::pair<std::string, int64_t>> top_tokens(size_t k) const {
    std::vector<std::pair<std::string, int64_t>> all(counts.begin(), counts.end());
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (all.size() > k) all.resize(k);
    return all;
  }
};

// Tokens with count < min_count are excluded; the `cap` most frequent kept.
// Reserved specials are always present and never counted.
inline Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, int64_t min_count, size_t cap) {
  std::unordered_map<std::string, int64_t> freq;
  for (const auto& sent : corpus)
    for (const auto& tok : sent) ++freq[tok];
  for (int i = 0; i < Vocabulary::kReserved; ++i) {
    static const char* reserved[] = {"<PAD>", "<UNK>", "<START>", "<END>"};
    freq.erase(reserved[i]);
  }
  std::vector<std::pair<std::string, int64_t>> entries;
  entries.reserve(freq.size());
  for (auto& kv : freq)
    if (kv.second >= min_count) entries.emplace_back(kv.first, kv.second);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (entries.size() > cap) entries.resize(cap);

  Vocabulary v;
  for (auto& [tok, cnt] : entries) {
    v.token_to_index[tok] = static_cast<int>(v.index_to_token.size());
    v.index_to_token.push_back(tok);
    v.counts[tok] = cnt;
  }
  return v;
}

}  // namespace snipforge::embed
