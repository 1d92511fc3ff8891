#include <gtest/gtest.h>

#include <algorithm>

#include "snipforge/apiminer.hpp"
#include "snipforge/rng.hpp"

using namespace snipforge;
using namespace snipforge::apiminer;

TEST(Porter, CanonicalVector) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"caresses", "caress"}, {"ponies", "poni"},       {"ties", "ti"},
      {"agreed", "agre"},     {"plastered", "plaster"}, {"motoring", "motor"},
      {"sing", "sing"},       {"conflated", "conflat"}, {"relational", "relat"},
      {"happy", "happi"},
  };
  for (const auto& [word, stem] : cases) EXPECT_EQ(porter_stem(word), stem) << word;
}

TEST(Porter, ShortWordsUntouched) {
  EXPECT_EQ(porter_stem("as"), "as");
  EXPECT_EQ(porter_stem("is"), "is");
  EXPECT_EQ(porter_stem("a"), "a");
}

TEST(Porter, NonAlphaPassThrough) {
  EXPECT_EQ(porter_stem("file's"), "file's");
  EXPECT_EQ(porter_stem("utf8"), "utf8");
}

TEST(FrequencyTableOrder, CountDescThenLex) {
  FrequencyTable t;
  t.add("b", 3);
  t.add("a", 3);
  t.add("c", 5);
  auto ordered = t.ordered();
  ASSERT_EQ(ordered.size(), 3u);
  EXPECT_EQ(ordered[0].first, "c");
  EXPECT_EQ(ordered[1].first, "a");
  EXPECT_EQ(ordered[2].first, "b");
  EXPECT_EQ(t.total, 11);
}

TEST(FrequencyTableOrder, TopKEqualsBruteForce) {
  Rng rng(17);
  FrequencyTable t;
  for (int i = 0; i < 5000; ++i) t.add("tok" + std::to_string(rng.bounded(300)));
  size_t k = 40;
  auto top = t.top_k(k).ordered();
  auto full = t.ordered();
  ASSERT_EQ(top.size(), k);
  for (size_t i = 0; i < k; ++i) {
    EXPECT_EQ(top[i].first, full[i].first);
    EXPECT_EQ(top[i].second, full[i].second);
  }
}

TEST(MineIntents, StemsAndDropsStopwords) {
  std::vector<std::string> intents = {"sort a list", "sort the nested list"};
  std::set<std::string> stop = {"a", "the"};
  FrequencyTable t = mine_intent_apis(intents, stop, 40);
  EXPECT_EQ(t.counts.at("sort"), 2);
  EXPECT_EQ(t.counts.at("list"), 2);
  EXPECT_EQ(t.counts.at("nest"), 1);  // "nested" stems to "nest"
  EXPECT_EQ(t.counts.size(), 3u);
}

TEST(MineIntents, EmptyInput) {
  FrequencyTable t = mine_intent_apis({}, default_stopwords(), 40);
  EXPECT_TRUE(t.counts.empty());
  EXPECT_EQ(t.total, 0);
}

TEST(MineIntents, DottedNamesCountedVerbatim) {
  std::vector<std::string> intents = {"initialize numpy array with np.fromfunction"};
  FrequencyTable t = mine_intent_apis(intents, default_stopwords(), 40);
  EXPECT_EQ(t.counts.at("np.fromfunction"), 1);
  EXPECT_EQ(t.counts.count("np.fromfunct"), 0u);  // never stemmed
}

TEST(MineIntents, RespectsK) {
  std::vector<std::string> intents;
  for (int i = 0; i < 50; ++i) intents.push_back("token" + std::to_string(i));
  FrequencyTable t = mine_intent_apis(intents, {}, 10);
  EXPECT_EQ(t.counts.size(), 10u);
}

TEST(ExtractImports, PlainAndFromForms) {
  FrequencyTable t = extract_imports({"import numpy as np\nfrom os.path import join"});
  EXPECT_EQ(t.counts.at("numpy"), 1);
  EXPECT_EQ(t.counts.at("os"), 1);
  EXPECT_EQ(t.counts.size(), 2u);
}

TEST(ExtractImports, NoImports) {
  FrequencyTable t = extract_imports({"x = 1\nprint(x)"});
  EXPECT_TRUE(t.counts.empty());
}

TEST(ExtractImports, CommaList) {
  FrequencyTable t = extract_imports({"import numpy, sys"});
  EXPECT_EQ(t.counts.at("numpy"), 1);
  EXPECT_EQ(t.counts.at("sys"), 1);
}

TEST(ExtractImports, IgnoresProseFromLines) {
  FrequencyTable t = extract_imports({"from here on we do nothing"});
  EXPECT_TRUE(t.counts.empty());
}

TEST(BuildWhitelist, IntersectionRanksFirst) {
  FrequencyTable intents;
  intents.add("numpy", 10);
  intents.add("list", 9);
  FrequencyTable imports;
  imports.add("numpy", 3);
  imports.add("os", 50);
  auto wl = build_whitelist(intents, imports, {}, 2);
  // numpy appears in both tables, so it survives the k=2 cut ahead of os
  EXPECT_TRUE(wl.libraries.count("numpy"));
  EXPECT_TRUE(wl.libraries.count("os"));  // highest-count remaining name
  EXPECT_EQ(wl.libraries.size(), 2u);
}

TEST(BuildWhitelist, EmptyTables) {
  auto wl = build_whitelist({}, {}, {}, 40);
  EXPECT_TRUE(wl.libraries.empty());
  EXPECT_TRUE(wl.flat.empty());
}

TEST(BuildWhitelist, MembersAttachedFromDb) {
  FrequencyTable intents;
  intents.add("numpy", 5);
  std::map<std::string, std::set<std::string>> db = {{"numpy", {"fromfunction", "array"}}};
  auto wl = build_whitelist(intents, {}, db, 40);
  for (const char* name : {"numpy", "fromfunction", "array"}) EXPECT_TRUE(wl.flat.count(name)) << name;
}

TEST(BuildWhitelist, MissingLibraryWarns) {
  FrequencyTable intents;
  intents.add("obscurelib", 5);
  std::vector<std::string> warnings;
  auto wl = build_whitelist(intents, {}, {}, 40, &warnings);
  EXPECT_TRUE(wl.libraries.count("obscurelib"));
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("obscurelib"), std::string::npos);
}

TEST(BuildWhitelist, SizeNeverExceedsK) {
  FrequencyTable intents;
  for (int i = 0; i < 100; ++i) intents.add("lib" + std::to_string(i), 100 - i);
  auto wl = build_whitelist(intents, {}, {}, 40);
  EXPECT_LE(wl.libraries.size(), 40u);
}

TEST(FrequencyCsv, QuotesAwkwardTokens) {
  FrequencyTable t;
  t.add(",", 7);
  t.add("(", 5);
  std::string csv = t.to_csv();
  EXPECT_NE(csv.find("\",\",7"), std::string::npos);
  EXPECT_NE(csv.find("(,5"), std::string::npos);
}
