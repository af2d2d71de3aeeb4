#include <random>
#include <string>
#include <unordered_set>

#include <gtest/gtest.h>

#include "parcorp/filter.hpp"
#include "support.hpp"

using namespace parcorp;

namespace {

SegmentPair pair_of(const std::string& en, const std::string& om) {
  SegmentPair p;
  p.id = "p";
  p.src = make_segment("s", Lang::EN, en, "doc", 0);
  p.tgt = make_segment("t", Lang::OM, om, "doc", 0);
  return p;
}

std::string words(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " w" : "w");
  return out;
}

// Independent restatement of the filter rules over integer counts.
const char* oracle_reason(std::size_t s, std::size_t t, std::size_t max_len,
                          std::size_t ratio_num, std::size_t min_len) {
  if (s * t == 0) return "empty";
  if (s > max_len || t > max_len || s < min_len || t < min_len) return "length";
  const std::size_t big = s > t ? s : t;
  const std::size_t small = s > t ? t : s;
  if (big > ratio_num * small) return "ratio";
  return "keep";
}

}  // namespace

TEST(DedupKey, EqualUnderCaseAndWhitespace) {
  EXPECT_EQ(dedup_key(pair_of("The Cat", "Adurree")), dedup_key(pair_of("the  cat", "adurree")));
}

TEST(DedupKey, DistinctTargetsDiffer) {
  EXPECT_NE(dedup_key(pair_of("The Cat", "Adurree")),
            dedup_key(pair_of("The Cat", "Adurree biraa")));
}

TEST(DedupKey, OrientationIndependent) {
  SegmentPair flipped = pair_of("The Cat", "Adurree");
  std::swap(flipped.src, flipped.tgt);
  EXPECT_EQ(dedup_key(flipped), dedup_key(pair_of("The Cat", "Adurree")));
}

TEST(DedupKey, NoCollisionsAmongDistinctPairs) {
  std::mt19937_64 rng(5);
  std::unordered_set<std::string> texts;
  std::unordered_set<std::string> keys;
  std::uniform_int_distribution<int> len(1, 6);
  while (texts.size() < 100000) {
    std::string en;
    std::string om;
    for (int i = len(rng); i > 0; --i) en += parcorp::testing::random_word(rng, 16) + " ";
    for (int i = len(rng); i > 0; --i) om += parcorp::testing::random_word(rng, 16) + " ";
    en = dedup_form(normalize_text(en));
    om = dedup_form(normalize_text(om));
    if (!texts.insert(en + '\x1f' + om).second) continue;
    ASSERT_TRUE(keys.insert(dedup_key(en, om)).second);
  }
}

TEST(FilterPair, KeepsBalancedPair) {
  EXPECT_TRUE(filter_pair(pair_of(words(10), words(9)), FilterRule{}).keep());
}

TEST(FilterPair, DropsExcessiveRatio) {
  const auto d = filter_pair(pair_of(words(40), words(4)), FilterRule{});
  ASSERT_FALSE(d.keep());
  EXPECT_EQ(*d.drop, DropReason::Ratio);
}

TEST(FilterPair, EmptyWinsOverOtherReasons) {
  const auto d = filter_pair(pair_of(words(200), ""), FilterRule{});
  EXPECT_EQ(*d.drop, DropReason::Empty);
  EXPECT_EQ(*filter_pair(pair_of(words(130), words(2)), FilterRule{}).drop, DropReason::Length);
}

TEST(FilterPair, ExhaustiveSweepMatchesOracle) {
  const FilterRule rules{};
  for (std::size_t s = 0; s <= 130; ++s) {
    for (std::size_t t = 0; t <= 130; ++t) {
      const auto d = filter_counts(s, t, rules);
      const std::string got = d.keep() ? "keep" : std::string(to_string(*d.drop));
      ASSERT_EQ(got, oracle_reason(s, t, 120, 3, 1)) << s << "," << t;
    }
  }
  // Spot-check that the text path agrees with the count path.
  for (std::size_t s : {0u, 1u, 5u, 121u}) {
    for (std::size_t t : {0u, 2u, 16u}) {
      EXPECT_EQ(filter_pair(pair_of(words(s), words(t)), rules), filter_counts(s, t, rules));
    }
  }
}

TEST(FilterRule, ValidatesInvariants) {
  EXPECT_NO_THROW(FilterRule{}.validate());
  EXPECT_THROW((FilterRule{10, 3.0, 11}.validate()), Error);
  EXPECT_THROW((FilterRule{10, 0.5, 1}.validate()), Error);
}
