#include "comet/metrics.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "comet/porter_stemmer.hpp"
#include "oracles.hpp"

using comet::bleu4;
using comet::corpus_metrics;
using comet::gleu;
using comet::meteor;
using comet::porter_stem;
using comet::sari;
using comet::xmatch;

namespace {

using Seq = std::vector<std::string>;

Seq random_seq(std::mt19937& rng, size_t max_len,
               const std::vector<std::string>& alphabet,
               size_t min_len = 0) {
  std::uniform_int_distribution<size_t> len_d(min_len, max_len);
  std::uniform_int_distribution<size_t> sym_d(0, alphabet.size() - 1);
  Seq out(len_d(rng));
  for (auto& t : out) t = alphabet[sym_d(rng)];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Exact match
// ---------------------------------------------------------------------------

TEST(XMatch, Basics) {
  EXPECT_EQ(xmatch({"a", "b"}, {"a", "b"}), 1.0);
  EXPECT_EQ(xmatch({"a", "b"}, {"a", "c"}), 0.0);
  EXPECT_EQ(xmatch(Seq{}, Seq{}), 1.0);
  EXPECT_EQ(xmatch(Seq{"a"}, Seq{}), 0.0);
}

// ---------------------------------------------------------------------------
// BLEU-4
// ---------------------------------------------------------------------------

TEST(Bleu4, IdenticalIsOne) {
  Seq s{"the", "quick", "brown", "fox", "jumps"};
  EXPECT_DOUBLE_EQ(bleu4(s, s), 1.0);
}

TEST(Bleu4, FrozenOneTokenSubstitution) {
  // pred=[a,b,c,d], ref=[a,b,c,e]:
  // p1=3/4, p2=2/3, p3=1/2, p4=0 -> smoothed 1/2.
  // (3/4 * 2/3 * 1/2 * 1/2)^(1/4) = (1/8)^(1/4) = 2^(-3/4).
  double got = bleu4({"a", "b", "c", "d"}, {"a", "b", "c", "e"});
  EXPECT_NEAR(got, 0.5946035575013605, 1e-12);
  EXPECT_NEAR(got, oracle::bleu4({"a", "b", "c", "d"}, {"a", "b", "c", "e"}),
              1e-12);
}

TEST(Bleu4, FrozenBrevityPenalty) {
  // pred=[a], ref=[a,b]: precisions 1 and three smoothed 1s; BP = e^(1-2).
  EXPECT_NEAR(bleu4({"a"}, {"a", "b"}), std::exp(-1.0), 1e-12);
}

TEST(Bleu4, EmptyAndDisjoint) {
  EXPECT_EQ(bleu4({}, {"a"}), 0.0);
  EXPECT_EQ(bleu4({"x", "y"}, {"a", "b"}), 0.0);  // zero unigram overlap
}

TEST(Bleu4, OracleAgreementRandom) {
  std::mt19937 rng(411);
  std::vector<std::string> alpha{"x", "y", "z"};
  for (int it = 0; it < 2000; ++it) {
    Seq p = random_seq(rng, 6, alpha);
    Seq r = random_seq(rng, 6, alpha);
    EXPECT_NEAR(bleu4(p, r), oracle::bleu4(p, r), 1e-9)
        << "it=" << it;
  }
}

// ---------------------------------------------------------------------------
// METEOR
// ---------------------------------------------------------------------------

TEST(Meteor, FrozenIdenticalThreeTokens) {
  // matches=3, chunks=1, P=R=1 -> F=1; penalty = 0.5*(1/3)^3 = 0.5/27.
  Seq s{"a", "b", "c"};
  EXPECT_NEAR(meteor(s, s), 1.0 - 0.5 / 27.0, 1e-12);
}

TEST(Meteor, FrozenTransposedChunk) {
  // pred=[a,b,d,c] ref=[a,b,c,d]: all four tokens match; the forced
  // permutation has 3 runs -> penalty = 0.5*(3/4)^3; F = 1.
  double got = meteor({"a", "b", "d", "c"}, {"a", "b", "c", "d"});
  EXPECT_NEAR(got, 0.7890625, 1e-12);
}

TEST(Meteor, StemStageMatch) {
  // "running" and "run" share a Porter stem; single match, single chunk
  // -> F = 1, penalty = 0.5.
  ASSERT_EQ(porter_stem("running"), porter_stem("run"));
  EXPECT_NEAR(meteor({"running"}, {"run"}), 0.5, 1e-12);
}

TEST(Meteor, RecallWeighting) {
  // pred=[a], ref=[a,b]: P=1, R=1/2; F = PR/(0.9P+0.1R) = 0.5/0.95.
  // One match, one chunk -> penalty 0.5.
  double f = 0.5 / 0.95;
  EXPECT_NEAR(meteor({"a"}, {"a", "b"}), f * 0.5, 1e-12);
}

TEST(Meteor, NoMatchAndEmpty) {
  EXPECT_EQ(meteor({"x"}, {"y"}), 0.0);
  EXPECT_EQ(meteor({}, {"y"}), 0.0);
  EXPECT_EQ(meteor({"x"}, {}), 0.0);
}

TEST(Meteor, ChunkMinimizationPrefersContiguity) {
  // pred=[a,b,a] ref=[a,b,a]: the identity alignment gives 1 chunk; a
  // careless assignment of the repeated 'a' would give 3.
  Seq s{"a", "b", "a"};
  EXPECT_NEAR(meteor(s, s), 1.0 - 0.5 * std::pow(1.0 / 3.0, 3), 1e-12);
}

TEST(Meteor, OracleAgreementRandomExact) {
  std::mt19937 rng(412);
  std::vector<std::string> alpha{"a", "b", "c"};
  for (int it = 0; it < 1500; ++it) {
    Seq p = random_seq(rng, 5, alpha);
    Seq r = random_seq(rng, 5, alpha);
    EXPECT_NEAR(meteor(p, r), oracle::meteor(p, r), 1e-9)
        << "it=" << it;
  }
}

TEST(Meteor, OracleAgreementRandomStems) {
  std::mt19937 rng(413);
  // Mixed surface forms sharing stems exercise the second stage.
  std::vector<std::string> alpha{"run", "running", "runs", "walk", "walked"};
  for (int it = 0; it < 800; ++it) {
    Seq p = random_seq(rng, 5, alpha);
    Seq r = random_seq(rng, 5, alpha);
    EXPECT_NEAR(meteor(p, r), oracle::meteor(p, r), 1e-9)
        << "it=" << it;
  }
}

// ---------------------------------------------------------------------------
// GLEU
// ---------------------------------------------------------------------------

TEST(Gleu, IdenticalPredRefIsOne) {
  EXPECT_DOUBLE_EQ(gleu({"a", "b"}, {"a", "b"}, {"a", "b"}), 1.0);
  EXPECT_DOUBLE_EQ(gleu({"x"}, {"a", "b"}, {"a", "b"}), 1.0);
}

TEST(Gleu, FrozenCopyPenalty) {
  // src=pred=[a,b], ref=[a,c]: unigram overlap 1 but the source-only 'b'
  // cancels it; numerator floors at 0 -> score 0. Plain bleu4 is positive.
  EXPECT_EQ(gleu({"a", "b"}, {"a", "b"}, {"a", "c"}), 0.0);
  EXPECT_NEAR(bleu4({"a", "b"}, {"a", "c"}), std::pow(0.25, 0.25), 1e-12);
}

TEST(Gleu, EmptyPred) {
  EXPECT_EQ(gleu({"a"}, {}, {"a"}), 0.0);
}

TEST(Gleu, OracleAgreementRandom) {
  std::mt19937 rng(414);
  std::vector<std::string> alpha{"x", "y", "z"};
  for (int it = 0; it < 2000; ++it) {
    Seq s = random_seq(rng, 6, alpha);
    Seq p = random_seq(rng, 6, alpha);
    Seq r = random_seq(rng, 6, alpha);
    EXPECT_NEAR(gleu(s, p, r), oracle::gleu(s, p, r), 1e-9)
        << "it=" << it;
  }
}

// ---------------------------------------------------------------------------
// SARI
// ---------------------------------------------------------------------------

TEST(Sari, IdenticalTripleIsHundred) {
  Seq s{"a", "b", "c"};
  EXPECT_NEAR(sari(s, s, s), 100.0, 1e-12);
}

TEST(Sari, PredEqualsRefIsHundred) {
  EXPECT_NEAR(sari({"a", "b"}, {"a", "c"}, {"a", "c"}), 100.0, 1e-12);
  EXPECT_NEAR(sari({"x", "y", "z"}, {"p"}, {"p"}), 100.0, 1e-12);
}

TEST(Sari, FrozenCopyScore) {
  // S=C=[a,b], R=[a,c]:
  //  n=1 keep F=2/3, delete 0, add 0; n=2 all 0; n=3,4 vacuously perfect.
  //  -> 100*((2/3+2)/4 + 2/4 + 2/4)/3 = 500/9.
  EXPECT_NEAR(sari({"a", "b"}, {"a", "b"}, {"a", "c"}), 500.0 / 9.0, 1e-12);
}

TEST(Sari, OracleAgreementRandom) {
  std::mt19937 rng(415);
  std::vector<std::string> alpha{"x", "y", "z"};
  for (int it = 0; it < 2000; ++it) {
    Seq s = random_seq(rng, 6, alpha);
    Seq p = random_seq(rng, 6, alpha);
    Seq r = random_seq(rng, 6, alpha);
    EXPECT_NEAR(sari(s, p, r), oracle::sari(s, p, r), 1e-9)
        << "it=" << it;
  }
}

// ---------------------------------------------------------------------------
// Direction properties shared by the editing metrics
// ---------------------------------------------------------------------------

TEST(Direction, CorrectEditBeatsCopyAndCopyIsPenalized) {
  // Generator guarantees ref keeps some source content and changes some:
  // replace one token of src with a fresh symbol. Then the source holds an
  // n-gram the reference dropped (strict GLEU penalty) and the reference
  // holds an n-gram the source lacks (strict SARI add deficit for the copy).
  std::mt19937 rng(416);
  std::vector<std::string> alpha{"x", "y", "z"};
  for (int it = 0; it < 300; ++it) {
    Seq src = random_seq(rng, 8, alpha, 3);
    Seq ref = src;
    std::uniform_int_distribution<size_t> pos_d(0, ref.size() - 1);
    ref[pos_d(rng)] = "fresh";
    ASSERT_LT(gleu(src, src, ref), bleu4(src, ref)) << "it=" << it;
    ASSERT_GT(sari(src, ref, ref), sari(src, src, ref)) << "it=" << it;
  }
}

TEST(Direction, ScoresStayInRange) {
  std::mt19937 rng(417);
  std::vector<std::string> alpha{"x", "y"};
  for (int it = 0; it < 500; ++it) {
    Seq s = random_seq(rng, 5, alpha);
    Seq p = random_seq(rng, 5, alpha);
    Seq r = random_seq(rng, 5, alpha);
    double b = bleu4(p, r), m = meteor(p, r), g = gleu(s, p, r),
           sa = sari(s, p, r);
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, 1.0);
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 1.0);
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 1.0);
    EXPECT_GE(sa, 0.0);
    EXPECT_LE(sa, 100.0);
  }
}

// ---------------------------------------------------------------------------
// Corpus aggregation
// ---------------------------------------------------------------------------

TEST(CorpusMetrics, ArithmeticMeanAndScales) {
  std::vector<Seq> src{{"a", "b"}, {"a", "b"}};
  std::vector<Seq> pred{{"a", "c"}, {"a", "b"}};
  std::vector<Seq> ref{{"a", "c"}, {"a", "c"}};
  comet::CorpusScores sc = corpus_metrics(src, pred, ref);
  EXPECT_EQ(sc.count, 2u);
  EXPECT_NEAR(sc.xmatch_pct, 50.0, 1e-12);
  double b = 0.5 * (bleu4(pred[0], ref[0]) + bleu4(pred[1], ref[1]));
  EXPECT_NEAR(sc.bleu4_pct, 100.0 * b, 1e-12);
  double sa = 0.5 * (sari(src[0], pred[0], ref[0]) +
                     sari(src[1], pred[1], ref[1]));
  EXPECT_NEAR(sc.sari_score, sa, 1e-12);  // already on the 0..100 scale
}

TEST(CorpusMetrics, MismatchedLengthsThrow) {
  std::vector<Seq> two{{"a"}, {"b"}};
  std::vector<Seq> one{{"a"}};
  EXPECT_THROW(corpus_metrics(two, two, one), comet::Error);
}

// ---------------------------------------------------------------------------
// Porter stemmer spot checks (canonical pairs)
// ---------------------------------------------------------------------------

TEST(PorterStem, CanonicalPairs) {
  EXPECT_EQ(porter_stem("caresses"), "caress");
  EXPECT_EQ(porter_stem("ponies"), "poni");
  EXPECT_EQ(porter_stem("ties"), "ti");
  EXPECT_EQ(porter_stem("caress"), "caress");
  EXPECT_EQ(porter_stem("cats"), "cat");
  EXPECT_EQ(porter_stem("feed"), "feed");
  EXPECT_EQ(porter_stem("agreed"), "agre");
  EXPECT_EQ(porter_stem("plastered"), "plaster");
  EXPECT_EQ(porter_stem("motoring"), "motor");
  EXPECT_EQ(porter_stem("sing"), "sing");
  EXPECT_EQ(porter_stem("hopping"), "hop");
  EXPECT_EQ(porter_stem("failing"), "fail");
  EXPECT_EQ(porter_stem("filing"), "file");
  EXPECT_EQ(porter_stem("happy"), "happi");
  EXPECT_EQ(porter_stem("sky"), "sky");
  EXPECT_EQ(porter_stem("relational"), "relat");
  EXPECT_EQ(porter_stem("rational"), "ration");
  EXPECT_EQ(porter_stem("running"), "run");
  EXPECT_EQ(porter_stem("returns"), "return");
  EXPECT_EQ(porter_stem("indices"), "indic");
  EXPECT_EQ(porter_stem("values"), "valu");
}

TEST(PorterStem, ShortAndNonAlphaUnchanged) {
  EXPECT_EQ(porter_stem("as"), "as");
  EXPECT_EQ(porter_stem("a"), "a");
  EXPECT_EQ(porter_stem("x2"), "x2");
  EXPECT_EQ(porter_stem("."), ".");
}
