#include "comet/features.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "comet/edit_encode.hpp"
#include "comet/lexer.hpp"
#include "comet/pos_tagger.hpp"

using namespace comet;

namespace {

// Shared scenario: return type int -> long, returned field oldTotal ->
// newTotal. At the subtoken level the diff is two single-token replaces.
struct Scenario {
  TokenSeq m_old = lex_method(
      "public int getCount ( ) { return oldTotal ; }");
  TokenSeq m_new = lex_method(
      "public long getCount ( ) { return newTotal ; }");
  TokenSeq c_old = tokenize_comment("@return the total count");
  EditSequence m_edit = encode_code_edits(m_old, m_new);
};

const TokenFeatures& row_for(const FeatureMatrix& fm, const std::string& text,
                             size_t nth = 0) {
  size_t seen = 0;
  for (size_t i = 0; i < fm.texts.size(); ++i) {
    if (fm.texts[i] == text) {
      if (seen == nth) return fm.rows[i];
      ++seen;
    }
  }
  ADD_FAILURE() << "no row for " << text;
  static TokenFeatures dummy;
  return dummy;
}

bool has_row(const FeatureMatrix& fm, const std::string& text) {
  for (const auto& t : fm.texts)
    if (t == text) return true;
  return false;
}

}  // namespace

TEST(FeaturizeCode, RowsMirrorSerializedStream) {
  Scenario sc;
  FeatureMatrix fm = featurize_code(sc.m_edit, sc.c_old);
  std::vector<std::string> stream = serialize(sc.m_edit);
  ASSERT_EQ(fm.texts.size(), stream.size());
  ASSERT_EQ(fm.rows.size(), stream.size());
  for (size_t i = 0; i < stream.size(); ++i) EXPECT_EQ(fm.texts[i], stream[i]);
}

TEST(FeaturizeCode, KeywordRows) {
  Scenario sc;
  FeatureMatrix fm = featurize_code(sc.m_edit, sc.c_old);
  const TokenFeatures& kw = row_for(fm, "<ReplaceOld>");
  EXPECT_TRUE(kw.is_edit_keyword);
  EXPECT_EQ(kw.span_membership, SpanMembership::None);
  EXPECT_TRUE(kw.appears_multiple);  // two replace actions in the stream
  const TokenFeatures& keep = row_for(fm, "<Keep>");
  EXPECT_TRUE(keep.is_edit_keyword);
  EXPECT_TRUE(keep.appears_multiple);
}

TEST(FeaturizeCode, SpanMembershipAndReplaceSets) {
  Scenario sc;
  FeatureMatrix fm = featurize_code(sc.m_edit, sc.c_old);

  const TokenFeatures& f_int = row_for(fm, "int");
  EXPECT_EQ(f_int.span_membership, SpanMembership::ReplaceOld);
  EXPECT_TRUE(f_int.matches_replaced_code);
  EXPECT_TRUE(f_int.is_java_keyword);
  EXPECT_FALSE(f_int.matches_comment_token);

  const TokenFeatures& f_long = row_for(fm, "long");
  EXPECT_EQ(f_long.span_membership, SpanMembership::ReplaceNew);
  EXPECT_TRUE(f_long.matches_replaced_code);

  const TokenFeatures& f_public = row_for(fm, "public");
  EXPECT_EQ(f_public.span_membership, SpanMembership::Keep);
  EXPECT_FALSE(f_public.matches_replaced_code);

  // "count" sits in a keep span and also appears in the comment.
  const TokenFeatures& f_count = row_for(fm, "count");
  EXPECT_EQ(f_count.span_membership, SpanMembership::Keep);
  EXPECT_TRUE(f_count.matches_comment_token);
  EXPECT_FALSE(f_count.matches_replaced_code);
}

TEST(FeaturizeCode, SubtokenMetadata) {
  Scenario sc;
  FeatureMatrix fm = featurize_code(sc.m_edit, sc.c_old);
  // "get" and "count" are subtokens of getCount.
  const TokenFeatures& f_get = row_for(fm, "get");
  EXPECT_TRUE(f_get.is_subtoken);
  EXPECT_EQ(f_get.subtoken_index, 0);
  const TokenFeatures& f_count = row_for(fm, "count");
  EXPECT_TRUE(f_count.is_subtoken);
  EXPECT_EQ(f_count.subtoken_index, 1);
  // "public" is a whole token.
  const TokenFeatures& f_public = row_for(fm, "public");
  EXPECT_FALSE(f_public.is_subtoken);
  EXPECT_EQ(f_public.subtoken_index, -1);
}

TEST(FeaturizeCode, ReturnVersionSignals) {
  Scenario sc;
  FeatureMatrix fm = featurize_code(sc.m_edit, sc.c_old);

  // Return type: old = [int], new = [long].
  EXPECT_EQ(row_for(fm, "int").return_type_match, VersionMatch::UniqueOld);
  EXPECT_EQ(row_for(fm, "long").return_type_match, VersionMatch::UniqueNew);
  EXPECT_EQ(row_for(fm, "public").return_type_match, VersionMatch::None);

  // Return statements: old = {old, total}, new = {new, total}.
  EXPECT_EQ(row_for(fm, "old").return_stmt_match, VersionMatch::UniqueOld);
  EXPECT_EQ(row_for(fm, "new").return_stmt_match, VersionMatch::UniqueNew);
  EXPECT_EQ(row_for(fm, "total").return_stmt_match, VersionMatch::Both);
  EXPECT_EQ(row_for(fm, "public").return_stmt_match, VersionMatch::None);
}

TEST(FeaturizeCode, InsertMembership) {
  TokenSeq m_old = lex_method("int f ( ) { return a ; }");
  TokenSeq m_new = lex_method("int f ( int b ) { return a + b ; }");
  TokenSeq c_old = tokenize_comment("@return a");
  EditSequence edit = encode_code_edits(m_old, m_new);
  FeatureMatrix fm = featurize_code(edit, c_old);
  ASSERT_TRUE(has_row(fm, "<Insert>"));
  const TokenFeatures& f_b = row_for(fm, "b");
  EXPECT_EQ(f_b.span_membership, SpanMembership::Insert);
  EXPECT_TRUE(f_b.matches_inserted_code);
  EXPECT_FALSE(f_b.matches_deleted_code);
}

TEST(FeaturizeCode, DeleteMembership) {
  TokenSeq m_old = lex_method("int f ( int b ) { return a + b ; }");
  TokenSeq m_new = lex_method("int f ( ) { return a ; }");
  TokenSeq c_old = tokenize_comment("@return a");
  EditSequence edit = encode_code_edits(m_old, m_new);
  FeatureMatrix fm = featurize_code(edit, c_old);
  ASSERT_TRUE(has_row(fm, "<Delete>"));
  const TokenFeatures& f_b = row_for(fm, "b");
  EXPECT_EQ(f_b.span_membership, SpanMembership::Delete);
  EXPECT_TRUE(f_b.matches_deleted_code);
  EXPECT_FALSE(f_b.matches_inserted_code);
}

TEST(FeaturizeComment, RowsAndSignals) {
  Scenario sc;
  FeatureMatrix fm = featurize_comment(sc.c_old, sc.m_edit);
  ASSERT_EQ(fm.rows.size(), sc.c_old.tokens.size());
  for (size_t i = 0; i < fm.rows.size(); ++i) {
    EXPECT_EQ(fm.texts[i], sc.c_old.tokens[i].text);
    EXPECT_TRUE(fm.rows[i].matches_comment_token);
    EXPECT_EQ(fm.rows[i].span_membership, SpanMembership::None);
  }
  const TokenFeatures& f_the = row_for(fm, "the");
  EXPECT_TRUE(f_the.is_stop_word);
  EXPECT_EQ(f_the.pos_tag, PosTag::Det);
  const TokenFeatures& f_total = row_for(fm, "total");
  EXPECT_EQ(f_total.return_stmt_match, VersionMatch::Both);
}

TEST(FeaturizeTarget, TextOnlySignals) {
  Scenario sc;
  TokenFeatures f = featurize_target_text("long", sc.m_edit, sc.c_old);
  EXPECT_TRUE(f.matches_replaced_code);
  EXPECT_EQ(f.return_type_match, VersionMatch::UniqueNew);
  EXPECT_TRUE(f.is_java_keyword);
  EXPECT_FALSE(f.matches_comment_token);

  TokenFeatures g = featurize_target_text("total", sc.m_edit, sc.c_old);
  EXPECT_TRUE(g.matches_comment_token);
  EXPECT_EQ(g.return_stmt_match, VersionMatch::Both);

  TokenFeatures kw = featurize_target_text("<ReplaceEnd>", sc.m_edit, sc.c_old);
  EXPECT_TRUE(kw.is_edit_keyword);
}

TEST(OneHot, WidthAndBlockSums) {
  Scenario sc;
  FeatureMatrix fm = featurize_code(sc.m_edit, sc.c_old);
  ASSERT_EQ(FeatureMatrix::kWidth, 43);
  for (size_t i = 0; i < fm.rows.size(); ++i) {
    std::vector<float> v = fm.one_hot(i);
    ASSERT_EQ(v.size(), 43u);
    auto block_sum = [&](int lo, int hi) {
      float s = 0;
      for (int k = lo; k < hi; ++k) s += v[k];
      return s;
    };
    for (int k = 0; k < 43; ++k) EXPECT_TRUE(v[k] == 0.0f || v[k] == 1.0f);
    EXPECT_EQ(block_sum(10, 16), 1.0f);  // span membership
    EXPECT_EQ(block_sum(16, 26), 1.0f);  // pos tag
    EXPECT_EQ(block_sum(26, 35), 1.0f);  // subtoken index
    EXPECT_EQ(block_sum(35, 39), 1.0f);  // return stmt match
    EXPECT_EQ(block_sum(39, 43), 1.0f);  // return type match
  }
}

TEST(OneHot, EncodesFields) {
  Scenario sc;
  FeatureMatrix fm = featurize_code(sc.m_edit, sc.c_old);
  for (size_t i = 0; i < fm.rows.size(); ++i) {
    if (fm.texts[i] != "int") continue;
    std::vector<float> v = fm.one_hot(i);
    EXPECT_EQ(v[1], 1.0f);  // java keyword
    EXPECT_EQ(v[10 + static_cast<int>(SpanMembership::ReplaceOld)], 1.0f);
    EXPECT_EQ(v[35 + static_cast<int>(VersionMatch::None)], 1.0f);
    EXPECT_EQ(v[39 + static_cast<int>(VersionMatch::UniqueOld)], 1.0f);
  }
}

TEST(SubtokenIndex, CappedAtSeven) {
  // 18 alternating letter/digit subtokens: indices past 7 are capped.
  TokenSeq seq = lex_method("a0b1c2d3e4f5g6h7i8");
  ASSERT_GT(seq.tokens.size(), 9u);
  EditSequence empty_edit;
  FeatureMatrix fm = featurize_comment(seq, empty_edit);
  bool saw_cap = false;
  for (const TokenFeatures& f : fm.rows) {
    EXPECT_LE(f.subtoken_index, kSubtokenIndexCap);
    if (f.subtoken_index == kSubtokenIndexCap) saw_cap = true;
  }
  EXPECT_TRUE(saw_cap);
}

TEST(Tsv, HeaderAndShape) {
  Scenario sc;
  FeatureMatrix fm = featurize_code(sc.m_edit, sc.c_old);
  std::string tsv = fm.tsv();
  // One header line plus one line per row; 16 tab-separated columns.
  size_t lines = 0;
  for (char c : tsv)
    if (c == '\n') ++lines;
  EXPECT_EQ(lines, fm.rows.size() + 1);
  std::string first_line = tsv.substr(0, tsv.find('\n'));
  size_t tabs = 0;
  for (char c : first_line)
    if (c == '\t') ++tabs;
  EXPECT_EQ(tabs, 15u);
  EXPECT_EQ(first_line.substr(0, 5), "token");
}

TEST(PosTagger, RuleSpotChecks) {
  const PosTaggerInterface& t = default_pos_tagger();
  EXPECT_EQ(t.tag(".", TokenKind::Punctuation), PosTag::Punct);
  EXPECT_EQ(t.tag("+", TokenKind::Operator), PosTag::Punct);
  EXPECT_EQ(t.tag("the", TokenKind::Word), PosTag::Det);
  EXPECT_EQ(t.tag("in", TokenKind::Word), PosTag::Prep);
  EXPECT_EQ(t.tag("it", TokenKind::Word), PosTag::Pron);
  EXPECT_EQ(t.tag("returns", TokenKind::Word), PosTag::Verb);
  EXPECT_EQ(t.tag("quickly", TokenKind::Word), PosTag::Adv);
  EXPECT_EQ(t.tag("running", TokenKind::Word), PosTag::Verb);
  EXPECT_EQ(t.tag("readable", TokenKind::Word), PosTag::Adj);
  EXPECT_EQ(t.tag("cat", TokenKind::Word), PosTag::Noun);
  EXPECT_EQ(t.tag("42", TokenKind::Literal), PosTag::Num);
  EXPECT_EQ(t.tag("seven", TokenKind::Word), PosTag::Num);
  EXPECT_EQ(t.tag("x2y", TokenKind::Identifier), PosTag::Other);
  EXPECT_EQ(t.tag("old", TokenKind::Word), PosTag::Adj);
}
