#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "align_oracle.hpp"
#include "parcorp/align.hpp"

using namespace parcorp;
using namespace parcorp::aligner;
using parcorp::testing::brute_force;

namespace {

std::vector<LinkKind> kinds_of(const std::vector<AlignLink>& links) {
  std::vector<LinkKind> out;
  for (const auto& l : links) out.push_back(l.kind);
  return out;
}

void expect_partition(const std::vector<AlignLink>& links, std::size_t n, std::size_t m) {
  std::size_t i = 0;
  std::size_t j = 0;
  for (const auto& l : links) {
    ASSERT_EQ(l.src.begin, i);
    ASSERT_EQ(l.tgt.begin, j);
    ASSERT_EQ(l.src.size(), shape(l.kind).src);
    ASSERT_EQ(l.tgt.size(), shape(l.kind).tgt);
    ASSERT_GT(l.src.size() + l.tgt.size(), 0u);
    i = l.src.end;
    j = l.tgt.end;
  }
  EXPECT_EQ(i, n);
  EXPECT_EQ(j, m);
}

}  // namespace

TEST(LengthCost, ZeroDeviationIsMinimal) {
  const AlignmentParams params;
  EXPECT_DOUBLE_EQ(length_cost(100, 100, params), 0.0);
  for (int t = 0; t <= 300; ++t) EXPECT_GE(length_cost(100, t, params), 0.0);
}

TEST(LengthCost, SymmetricInDeviation) {
  const AlignmentParams params;
  EXPECT_NEAR(length_cost(100, 120, params), length_cost(100, 80, params), 1e-9);
}

TEST(LengthCost, MonotoneInAbsoluteDeviation) {
  const AlignmentParams params;
  double prev = -1.0;
  for (int dev = 0; dev <= 200; ++dev) {
    const double hi = 100 + dev <= 300 ? length_cost(100, 100 + dev, params) : -1.0;
    const double lo = 100 - dev >= 1 ? length_cost(100, 100 - dev, params) : -1.0;
    const double c = std::max(hi, lo);
    if (hi >= 0.0 && lo >= 0.0) ASSERT_NEAR(hi, lo, 1e-9);
    ASSERT_GE(c, prev) << "dev " << dev;
    prev = c;
  }
}

TEST(LengthCost, ClampsAndRejectsNegative) {
  const AlignmentParams params;
  EXPECT_DOUBLE_EQ(length_cost(1000, 0, params), 25.0);
  EXPECT_DOUBLE_EQ(length_cost(0, 5000, params), 25.0);
  EXPECT_THROW(length_cost(-1, 10, params), Error);
  EXPECT_THROW(length_cost(10, -1, params), Error);
}

TEST(AlignmentParams, DefaultPriorsSumToOne) {
  const AlignmentParams params;
  EXPECT_NO_THROW(params.validate());
  AlignmentParams bad;
  bad.priors[0] += 0.01;
  EXPECT_THROW(bad.validate(), Error);
  bad = AlignmentParams{};
  bad.variance = 0.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Align, EqualLengthsGiveOneToOne) {
  const std::vector<std::size_t> len(3, 40);
  const auto links = align_lengths(len, len);
  EXPECT_EQ(kinds_of(links),
            (std::vector<LinkKind>{LinkKind::OneOne, LinkKind::OneOne, LinkKind::OneOne}));
}

TEST(Align, SplitTargetSentence) {
  const std::vector<std::size_t> src = {20, 40};
  const std::vector<std::size_t> tgt = {21, 19, 20};
  const auto links = align_lengths(src, tgt);
  EXPECT_EQ(kinds_of(links), (std::vector<LinkKind>{LinkKind::OneOne, LinkKind::OneTwo}));
  const auto oracle = brute_force(src, tgt);
  EXPECT_EQ(oracle.kinds, kinds_of(links));
  EXPECT_EQ(oracle.total, total_cost(links));
}

TEST(Align, EmptySidesGiveUnmatchedLinks) {
  const std::vector<std::size_t> none;
  const std::vector<std::size_t> three = {10, 20, 30};
  const auto a = align_lengths(none, three);
  EXPECT_EQ(kinds_of(a), std::vector<LinkKind>(3, LinkKind::ZeroOne));
  const auto b = align_lengths(three, none);
  EXPECT_EQ(kinds_of(b), std::vector<LinkKind>(3, LinkKind::OneZero));
  EXPECT_TRUE(align_lengths(none, none).empty());
}

TEST(Align, MatchesExhaustiveSearchOnSmallInstances) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<std::size_t> count(0, 6);
  std::uniform_int_distribution<std::size_t> len(1, 120);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> src(count(rng));
    std::vector<std::size_t> tgt(count(rng));
    for (auto& l : src) l = len(rng);
    for (auto& l : tgt) l = len(rng);
    const auto links = align_lengths(src, tgt);
    expect_partition(links, src.size(), tgt.size());
    const auto oracle = brute_force(src, tgt);
    ASSERT_EQ(total_cost(links), oracle.total) << "trial " << trial;
    ASSERT_EQ(kinds_of(links), oracle.kinds) << "trial " << trial;
  }
}

TEST(Align, TiesResolveDeterministically) {
  // Identical sentences everywhere produce many exact ties.
  const std::vector<std::size_t> src(5, 30);
  const std::vector<std::size_t> tgt(4, 30);
  const auto first = align_lengths(src, tgt);
  EXPECT_EQ(first, align_lengths(src, tgt));
  EXPECT_EQ(kinds_of(first), brute_force(src, tgt).kinds);
}

TEST(Align, CountsCodePointsNotBytes) {
  EXPECT_EQ(char_length("ba'e"), 4u);
  EXPECT_EQ(char_length("é中"), 2u);
  const std::vector<std::string> src = {"Ééééé ééééé.", "Second one here."};
  const std::vector<std::string> tgt = {"Eeeee eeeee.", "Second one here."};
  EXPECT_EQ(kinds_of(align(src, tgt)),
            (std::vector<LinkKind>{LinkKind::OneOne, LinkKind::OneOne}));
}

TEST(EmitPairs, UnmatchedLinksAreDropped) {
  const std::vector<std::string> src = {"Hello there."};
  const std::vector<std::string> tgt = {"Akkam jirta.", "Extra."};
  const std::vector<AlignLink> links = {{{0, 1}, {0, 1}, LinkKind::OneOne, 0.0},
                                        {{1, 1}, {1, 2}, LinkKind::ZeroOne, 0.0}};
  const auto result = emit_pairs(links, src, tgt, FilterRule{}, {"doc-1", Lang::EN, "t0"});
  ASSERT_EQ(result.pairs.size(), 1u);
  EXPECT_EQ(result.report.dropped.at("unmatched"), 1u);
  const auto& p = result.pairs.front();
  EXPECT_EQ(p.origin, Origin::DocumentAligned);
  EXPECT_EQ(p.status, Status::Pending);
  EXPECT_EQ(p.src.lang, Lang::EN);
  EXPECT_EQ(p.tgt.lang, Lang::OM);
}

TEST(EmitPairs, MultiSentenceSpansJoinWithSpace) {
  const std::vector<std::string> src = {"A b.", "C d."};
  const std::vector<std::string> tgt = {"A b c d."};
  const std::vector<AlignLink> links = {{{0, 2}, {0, 1}, LinkKind::TwoOne, 0.0}};
  const auto result = emit_pairs(links, src, tgt, FilterRule{}, {"doc-2", Lang::EN, "t0"});
  ASSERT_EQ(result.pairs.size(), 1u);
  EXPECT_EQ(result.pairs.front().src.normalized, "A b. C d.");
}

TEST(EmitPairs, ConservesLinkCounts) {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<std::size_t> count(0, 12);
  std::uniform_int_distribution<int> words(0, 14);
  auto sentence = [&] {
    std::string s;
    for (int w = words(rng); w > 0; --w) s += (s.empty() ? "w" : " w");
    return s + ".";
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> src(count(rng));
    std::vector<std::string> tgt(count(rng));
    for (auto& s : src) s = sentence();
    for (auto& t : tgt) t = sentence();
    const auto links = align(src, tgt);
    const auto result = emit_pairs(links, src, tgt, FilterRule{}, {"d", Lang::OM, "t"});
    ASSERT_EQ(result.report.pairs + result.report.dropped_total(), links.size());
    ASSERT_EQ(result.report.links, links.size());
  }
}
