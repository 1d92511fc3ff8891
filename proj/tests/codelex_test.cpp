#include <gtest/gtest.h>

#include "snipforge/codelex.hpp"
#include "snipforge/rng.hpp"

using namespace snipforge;
using namespace snipforge::codelex;

namespace {

std::vector<std::string> texts_of(const std::string& snippet) { return tokenize(snippet).texts(); }

ApiWhitelist numpy_whitelist() {
  ApiWhitelist wl;
  wl.add_library("numpy", {"np", "array", "fromfunction", "shape", "zeros", "arange"});
  return wl;
}

}  // namespace

TEST(Tokenize, ShutilCopyCall) {
  auto t = texts_of("shutil.copy('file.txt', 'file2.txt')");
  std::vector<std::string> expect = {"shutil", ".", "copy", "(", "'file.txt'", ",", "'file2.txt'", ")"};
  EXPECT_EQ(t, expect);
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(texts_of("").empty()); }

TEST(Tokenize, LongestMatchOperators) {
  auto t = texts_of("x==1");
  std::vector<std::string> expect = {"x", "==", "1"};
  EXPECT_EQ(t, expect);

  auto t2 = texts_of("a//b**c->d");
  std::vector<std::string> expect2 = {"a", "//", "b", "**", "c", "->", "d"};
  EXPECT_EQ(t2, expect2);
}

TEST(Tokenize, KindsAreAssigned) {
  TokenSeq seq = tokenize("for i in range(10): print('x')");
  EXPECT_EQ(seq.tokens[0].kind, TokenKind::keyword);      // for
  EXPECT_EQ(seq.tokens[1].kind, TokenKind::identifier);   // i
  EXPECT_EQ(seq.tokens[2].kind, TokenKind::keyword);      // in
  EXPECT_EQ(seq.tokens[3].kind, TokenKind::identifier);   // range
  EXPECT_EQ(seq.tokens[4].kind, TokenKind::punctuation);  // (
  EXPECT_EQ(seq.tokens[5].kind, TokenKind::number);       // 10
  EXPECT_EQ(seq.tokens[10].kind, TokenKind::string_literal);  // 'x'
}

TEST(Tokenize, NumbersIncludeFloatsAndHex) {
  auto t = texts_of("x = 1.5e-3 + 0xff + .25");
  std::vector<std::string> expect = {"x", "=", "1.5e-3", "+", "0xff", "+", ".25"};
  EXPECT_EQ(t, expect);
}

TEST(Tokenize, TripleQuotedStringKeptVerbatim) {
  auto t = texts_of("s = '''a b'''");
  std::vector<std::string> expect = {"s", "=", "'''a b'''"};
  EXPECT_EQ(t, expect);
}

TEST(Tokenize, SpecialTokensLexAsOne) {
  auto t = texts_of("<VAR_NAME> = <VAR_NAME>");
  std::vector<std::string> expect = {"<VAR_NAME>", "=", "<VAR_NAME>"};
  EXPECT_EQ(t, expect);
  EXPECT_EQ(tokenize("<VAR_NAME>").tokens[0].kind, TokenKind::special);
}

TEST(Tokenize, UnterminatedStringReportsOffset) {
  try {
    tokenize("x = 'abc");
    FAIL() << "expected LexError";
  } catch (const LexError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Tokenize, IllegalCharacterReportsOffset) {
  try {
    tokenize("x = $y");
    FAIL() << "expected LexError";
  } catch (const LexError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

// The parser-output example: np.fromfunction(f, shape=(d1, d2)) keeps
// np/fromfunction/shape and normalizes exactly {d1, d2, f}.
TEST(Normalize, NumpyFromfunctionExample) {
  TokenSeq raw = tokenize("np.fromfunction(f, shape=(d1, d2))");
  EXPECT_EQ(raw.tokens.size(), 14u);

  TokenSeq norm = normalize(raw, numpy_whitelist());
  std::vector<std::string> expect = {"np", ".",  "fromfunction", "(", "<VAR_NAME>", ",",  "shape",
                                     "=",  "(",  "<VAR_NAME>",   ",", "<VAR_NAME>", ")",  ")"};
  EXPECT_EQ(norm.texts(), expect);

  std::map<std::string, std::string> expect_map = {
      {"d1", "<VAR_NAME>"}, {"d2", "<VAR_NAME>"}, {"f", "<VAR_NAME>"}};
  EXPECT_EQ(norm.var_map, expect_map);
}

TEST(Normalize, KeywordsNeverNormalized) {
  TokenSeq norm = normalize(tokenize("if x in y"), ApiWhitelist{});
  std::vector<std::string> expect = {"if", "<VAR_NAME>", "in", "<VAR_NAME>"};
  EXPECT_EQ(norm.texts(), expect);
}

TEST(Normalize, BuiltinsSurviveEmptyWhitelist) {
  TokenSeq norm = normalize(tokenize("len(v)"), ApiWhitelist{});
  std::vector<std::string> expect = {"len", "(", "<VAR_NAME>", ")"};
  EXPECT_EQ(norm.texts(), expect);
}

TEST(Normalize, IdempotentAndLengthPreserving) {
  ApiWhitelist wl = numpy_whitelist();
  TokenSeq raw = tokenize("result = np.zeros(n) + compute(x, y)");
  TokenSeq once = normalize(raw, wl);
  TokenSeq twice = normalize(once, wl);
  EXPECT_EQ(once.tokens.size(), raw.tokens.size());
  EXPECT_EQ(once.texts(), twice.texts());
  EXPECT_EQ(once.var_map, twice.var_map);
}

TEST(Normalize, VarMapDisjointFromWhitelist) {
  ApiWhitelist wl = numpy_whitelist();
  TokenSeq norm = normalize(tokenize("total = np.array(values).shape"), wl);
  for (const auto& [orig, repl] : norm.var_map) {
    EXPECT_FALSE(wl.contains(orig)) << orig;
    EXPECT_EQ(repl, "<VAR_NAME>");
  }
}

TEST(Normalize, LiteralFlagCollapsesLiterals) {
  TokenSeq norm = normalize(tokenize("x = 'abc' + 42"), ApiWhitelist{}, /*normalize_literals=*/true);
  std::vector<std::string> expect = {"<VAR_NAME>", "=", "<VAR_NAME>", "+", "<VAR_NAME>"};
  EXPECT_EQ(norm.texts(), expect);
}

TEST(Detokenize, SpacingRules) {
  EXPECT_EQ(detokenize(tokenize("x = 1")), "x = 1");
  EXPECT_EQ(detokenize(tokenize("np.array()")), "np.array()");
  EXPECT_EQ(detokenize(TokenSeq{}), "");
}

TEST(Detokenize, RoundTripOnRepresentativeSnippets) {
  std::vector<std::string> snippets = {
      "shutil.copy('file.txt', 'file2.txt')",
      "np.fromfunction(f, shape=(d1, d2))",
      "sorted(d.items(), key=lambda x: x[1])",
      "x = [i ** 2 for i in range(10) if i % 2 == 0]",
      "with open('f.txt') as fh: data = fh.read()",
      "a, b = b, a",
      "print('%s=%d' % (k, v))",
      "while n > 0: n -= 1",
      "d = {'a': 1, 'b': 2}",
      "s += 'x' * 3.5e2",
  };
  for (const auto& s : snippets) {
    TokenSeq seq = tokenize(s);
    std::string rendered = detokenize(seq);
    EXPECT_EQ(tokenize(rendered).texts(), seq.texts()) << "snippet: " << s << "\nrendered: " << rendered;
    // and again after normalization
    TokenSeq norm = normalize(seq, numpy_whitelist());
    EXPECT_EQ(tokenize(detokenize(norm)).texts(), norm.texts()) << "normalized snippet: " << s;
  }
}

TEST(Whitelist, ParseAndFormat) {
  std::string text = "numpy: array zeros fromfunction\nos: path\nsys\n# comment\n";
  ApiWhitelist wl = parse_whitelist(text);
  EXPECT_EQ(wl.libraries.size(), 3u);
  EXPECT_TRUE(wl.contains("numpy"));
  EXPECT_TRUE(wl.contains("zeros"));
  EXPECT_TRUE(wl.contains("sys"));
  EXPECT_FALSE(wl.contains("comment"));

  ApiWhitelist again = parse_whitelist(format_whitelist(wl));
  EXPECT_EQ(again.flat, wl.flat);
  EXPECT_EQ(again.libraries, wl.libraries);
}

TEST(Whitelist, FlatIsUnionOfLibrariesAndMembers) {
  ApiWhitelist wl;
  wl.add_library("numpy", {"fromfunction", "array"});
  for (const char* name : {"numpy", "fromfunction", "array"}) EXPECT_TRUE(wl.contains(name));
  EXPECT_FALSE(wl.contains("Numpy"));  // case-sensitive
}

TEST(TokenDump, JsonShape) {
  nlohmann::json j = tokens_to_json(tokenize("x = 1"));
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[0]["text"], "x");
  EXPECT_EQ(j[0]["kind"], "identifier");
  EXPECT_EQ(j[1]["kind"], "operator");
  EXPECT_EQ(j[2]["kind"], "number");
}
