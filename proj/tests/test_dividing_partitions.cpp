#include <gtest/gtest.h>

#include <random>

#include "cantor_simplex/dividing_partition.hpp"
#include "oracles.hpp"

using namespace cantor_simplex;
using oracle::r;

namespace {

using Words = std::vector<Word>;

ClopenSet set(Words ws) { return ClopenSet(std::move(ws)); }

// Brute-force check of an N-dividing partition at a fixed depth: columns
// long enough, every level the image of its base, all levels pairwise
// disjoint, and their union exactly the covered set.
::testing::AssertionResult partition_ok(const DividingPartition& p, std::size_t depth) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < p.columns.size(); ++i) {
    const auto& col = p.columns[i];
    if (col.witnesses.size() < p.N)
      return ::testing::AssertionFailure() << "column " << i << " has " << col.witnesses.size() << " witnesses";
    const auto base = oracle::points(col.base, depth);
    for (std::size_t j = 0; j <= col.witnesses.size(); ++j) {
      auto lv = j == 0 ? base : oracle::apply_points(p.generators, col.witnesses[j - 1], base);
      if (lv != oracle::points(p.level(i, j), depth))
        return ::testing::AssertionFailure() << "level " << i << "," << j << " disagrees with the oracle";
      for (const auto& x : lv)
        if (!seen.insert(x).second) return ::testing::AssertionFailure() << "point " << x << " covered twice";
    }
  }
  if (seen != oracle::points(p.covered, depth)) return ::testing::AssertionFailure() << "union is not the covered set";
  return ::testing::AssertionSuccess();
}

PrefixMapHomeo swap_map(const Word& u, const Word& v) { return PrefixMapHomeo::swap(u, v); }

}  // namespace

TEST(ClopenSet, CanonicalForm) {
  EXPECT_EQ(set({"00", "01"}).words(), Words{"0"});
  EXPECT_TRUE(set({"0", "1"}).is_full());
  EXPECT_EQ(set({"0", "01", "011"}).words(), Words{"0"});
  EXPECT_EQ(set({"110", "111", "10"}).words(), Words{"1"});
  EXPECT_THROW(set({"0a"}), Error);
}

TEST(ClopenSet, BooleanOperationsMatchPointSets) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 300; ++t) {
    auto wa = oracle::random_words(rng, 6, 5), wb = oracle::random_words(rng, 6, 5);
    auto a = set(wa), b = set(wb);
    auto pa = oracle::points(wa, 6), pb = oracle::points(wb, 6);
    std::set<std::string> u = pa, i, d;
    u.insert(pb.begin(), pb.end());
    for (const auto& x : pa) (pb.count(x) ? i : d).insert(x);
    EXPECT_EQ(oracle::points(a, 6), pa);
    EXPECT_EQ(oracle::points(set_union(a, b), 6), u);
    EXPECT_EQ(oracle::points(set_intersection(a, b), 6), i);
    EXPECT_EQ(oracle::points(set_difference(a, b), 6), d);
    EXPECT_EQ(disjoint(a, b), i.empty());
    EXPECT_EQ(subset_of(a, b), d.empty());
    EXPECT_EQ(oracle::points(complement(a), 6).size(), 64 - pa.size());
  }
}

TEST(CylinderMeasure, Examples) {
  EXPECT_EQ(cylinder_measure(ClopenSet::cylinder("101"), BernoulliMeasure(r("1/3"))), r("2/27"));
  EXPECT_EQ(cylinder_measure(ClopenSet::cylinder("101"), BernoulliMeasure::uniform()), r("1/8"));
  EXPECT_EQ(cylinder_measure(ClopenSet::full(), BernoulliMeasure(r("2/5"))), r("1"));
  EXPECT_THROW(BernoulliMeasure(r("1")), Error);
}

TEST(CylinderMeasure, MatchesPointSum) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 200; ++t) {
    auto ws = oracle::random_words(rng, 6, 6);
    for (const char* p : {"1/2", "1/3", "2/5"})
      EXPECT_EQ(cylinder_measure(set(ws), BernoulliMeasure(r(p))), oracle::measure(oracle::points(ws, 6), r(p)));
  }
}

TEST(PrefixMap, Examples) {
  std::mt19937_64 rng(43);
  auto s = set(oracle::random_words(rng, 5, 4));
  EXPECT_EQ(apply_prefix_map(PrefixMapHomeo::identity(), s), s);
  EXPECT_EQ(apply_prefix_map(swap_map("00", "01"), ClopenSet::cylinder("00")), ClopenSet::cylinder("01"));
  EXPECT_EQ(apply_prefix_map(swap_map("0", "1"), set({"00", "1"})), set({"10", "0"}));
}

TEST(PrefixMap, RejectsIncompleteCodes) {
  using Rules = std::vector<PrefixMapHomeo::Rule>;
  EXPECT_THROW(PrefixMapHomeo(Rules{{"0", "0"}}), Error);
  EXPECT_THROW(PrefixMapHomeo(Rules{{"0", "0"}, {"1", "1"}, {"10", "10"}}), Error);
  EXPECT_THROW(swap_map("0", "01"), Error);
}

TEST(PrefixMap, SwapsPreserveInvariantMeasures) {
  std::mt19937_64 rng(44);
  for (int t = 0; t < 200; ++t) {
    auto ws = oracle::random_words(rng, 6, 5);
    auto u = oracle::random_words(rng, 4, 1)[0];
    Word v = u;
    v[rng() % v.size()] ^= 1;  // same length, possibly different weight
    if (u == v) continue;
    auto g = swap_map(u, v);
    auto img = apply_prefix_map(g, set(ws));
    std::set<std::string> pts;
    for (const auto& x : oracle::points(ws, 8)) pts.insert(oracle::apply_point(g, x));
    EXPECT_EQ(oracle::points(img, 8), pts);
    EXPECT_EQ(BernoulliMeasure::uniform()(img), BernoulliMeasure::uniform()(set(ws)));
    if (weight(u) == weight(v)) {
      EXPECT_TRUE(g.weight_preserving());
      for (const char* p : {"1/3", "2/5"}) EXPECT_EQ(BernoulliMeasure(r(p))(img), BernoulliMeasure(r(p))(set(ws)));
    }
  }
}

TEST(GroupWords, ReduceAndInvert) {
  GeneratorRegistry reg;
  auto a = reg.intern(swap_map("00", "01"));
  auto b = reg.intern(swap_map("10", "11"));
  EXPECT_EQ(reg.intern(swap_map("00", "01")), a);
  auto w = reg.compose(reg.letter(a), reg.letter(b));
  EXPECT_EQ(reg.compose(w, reg.inverse(w)).letters.size(), 0u);
  EXPECT_EQ(reg.compose(reg.letter(a), reg.letter(a)).letters.size(), 0u);
  auto s = set({"00", "10"});
  EXPECT_EQ(reg.apply(w, s), set({"01", "11"}));
}

TEST(RefineColumn, SplitBaseGivesTwoColumns) {
  auto p = single_column(3, ClopenSet::cylinder("00"), {swap_map("00", "01"), swap_map("00", "10"), swap_map("00", "11")});
  auto same = refine_column(p, 0, {ClopenSet::cylinder("00")});
  EXPECT_EQ(same.columns.size(), 1u);
  auto q = refine_column(p, 0, {ClopenSet::cylinder("000"), ClopenSet::cylinder("001")});
  ASSERT_EQ(q.columns.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    auto lv = q.levels(i);
    ASSERT_EQ(lv.size(), 4u);
    for (const auto& s : lv) {
      ASSERT_EQ(s.words().size(), 1u);
      EXPECT_EQ(s.words()[0].size(), 3u);
    }
  }
  EXPECT_EQ(BernoulliMeasure::uniform()(q.covered), BernoulliMeasure::uniform()(p.covered));
  EXPECT_TRUE(partition_ok(q, 6));
  EXPECT_THROW(refine_column(p, 0, {ClopenSet::cylinder("000")}), Error);
}

TEST(AddOnTop, GrowsColumnAndKeepsDisjointness) {
  auto p = single_column(1, ClopenSet::cylinder("000"), {swap_map("000", "001")});
  GeneratorRegistry& reg = p.generators;
  auto g = reg.letter(reg.intern(swap_map("000", "010")));
  auto q = add_on_top(p, 0, 0, ClopenSet::cylinder("010"), g);
  EXPECT_EQ(q.columns[0].witnesses.size(), 2u);
  EXPECT_TRUE(partition_ok(q, 6));
  auto h = reg.letter(reg.intern(swap_map("000", "001")));
  EXPECT_THROW(add_on_top(p, 0, 0, ClopenSet::cylinder("001"), h), Error);
  EXPECT_THROW(add_on_top(p, 0, 0, ClopenSet::cylinder("011"), g), Error);
}

TEST(MergeSingleColumn, DisjointColumnLeavesPartitionAlone) {
  auto p = single_column(1, ClopenSet::cylinder("00"), {swap_map("00", "01")});
  auto h = p.generators.letter(p.generators.intern(swap_map("10", "11")));
  auto res = merge_single_column(p, ColumnSpec{ClopenSet::cylinder("10"), {h}});
  EXPECT_EQ(res.residual, ClopenSet::cylinder("10"));
  EXPECT_EQ(res.partition.columns.size(), 1u);
  EXPECT_EQ(res.partition.covered, p.covered);
}

TEST(MergeSingleColumn, ContainedColumnLeavesNoResidual) {
  auto p = single_column(1, ClopenSet::cylinder("00"), {swap_map("00", "01")});
  auto h = p.generators.letter(p.generators.intern(swap_map("000", "001")));
  auto res = merge_single_column(p, ColumnSpec{ClopenSet::cylinder("000"), {h}});
  EXPECT_TRUE(res.residual.is_empty());
  EXPECT_EQ(res.partition.covered, ClopenSet::cylinder("0"));
  EXPECT_TRUE(partition_ok(res.partition, 6));
}

TEST(MergeSingleColumn, MixedCaseSplitsAtGeneratedPartition) {
  // A = [00] u [01] with one column; the incoming column on [000] has one
  // map landing half inside A and half outside.
  auto p = single_column(1, ClopenSet::cylinder("00"), {swap_map("00", "01")});
  auto h = p.generators.letter(p.generators.intern(swap_map("00", "10")));
  auto h2 = p.generators.letter(p.generators.intern(swap_map("000", "011")));
  auto res = merge_single_column(p, ColumnSpec{ClopenSet::cylinder("000"), {h, h2}});
  EXPECT_TRUE(res.residual.is_empty());
  EXPECT_TRUE(partition_ok(res.partition, 6));
  EXPECT_TRUE(subset_of(ClopenSet::cylinder("100"), res.partition.covered));
}

TEST(MergePartitions, Examples) {
  auto pa = single_column(1, ClopenSet::cylinder("00"), {swap_map("00", "01")});
  auto sub = single_column(1, ClopenSet::cylinder("000"), {swap_map("000", "011")});
  auto m1 = merge_partitions(pa, sub);
  EXPECT_EQ(m1.covered, ClopenSet::cylinder("0"));
  EXPECT_TRUE(partition_ok(m1, 6));

  auto pb = single_column(1, ClopenSet::cylinder("10"), {swap_map("10", "11")});
  auto m2 = merge_partitions(pa, pb);
  EXPECT_EQ(m2.columns.size(), 2u);
  EXPECT_TRUE(m2.covered.is_full());
  EXPECT_TRUE(partition_ok(m2, 6));

  auto m3 = merge_partitions(pa, pa);
  EXPECT_EQ(m3.covered, pa.covered);
  EXPECT_TRUE(partition_ok(m3, 6));

  auto other_n = single_column(2, ClopenSet::cylinder("10"), {swap_map("10", "11"), swap_map("10", "01")});
  EXPECT_THROW(merge_partitions(pa, other_n), Error);
}

TEST(CoverClopen, Examples) {
  auto p = cover_clopen(ClopenSet::cylinder("0"), 2, GeneratorFamily::AllSwaps, 24);
  ASSERT_EQ(p.columns.size(), 1u);
  auto lv = p.levels(0);
  ASSERT_EQ(lv.size(), 4u);
  EXPECT_EQ(lv[0], ClopenSet::cylinder("000"));
  EXPECT_EQ(lv[1], ClopenSet::cylinder("001"));
  EXPECT_EQ(lv[2], ClopenSet::cylinder("010"));
  EXPECT_EQ(lv[3], ClopenSet::cylinder("011"));

  auto full = cover_clopen(ClopenSet::full(), 7, GeneratorFamily::AllSwaps, 24);
  ASSERT_EQ(full.columns.size(), 1u);
  EXPECT_EQ(full.levels(0).size(), 8u);
  EXPECT_TRUE(partition_ok(full, 6));

  auto one = cover_clopen(ClopenSet::cylinder("0"), 1, GeneratorFamily::AllSwaps, 24);
  ASSERT_EQ(one.columns.size(), 1u);
  EXPECT_EQ(one.levels(0), (std::vector<ClopenSet>{ClopenSet::cylinder("00"), ClopenSet::cylinder("01")}));
}

TEST(CoverClopen, WeightModeBudget) {
  // The points 0000... have no weight-preserving partner, so covering [0]
  // never finishes.
  try {
    cover_clopen(ClopenSet::cylinder("0"), 2, GeneratorFamily::WeightPreservingSwaps, 10);
    FAIL() << "expected a budget error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Budget);
  }
  auto band = cover_clopen(set({"0011", "0101", "0110", "1001", "1010", "1100"}), 2,
                           GeneratorFamily::WeightPreservingSwaps, 10);
  EXPECT_TRUE(band.generators.all_weight_preserving());
  EXPECT_TRUE(partition_ok(band, 6));
  EXPECT_TRUE(validate(band, {BernoulliMeasure(r("1/3")), BernoulliMeasure(r("2/5"))}).valid);
}

TEST(CoverClopen, RandomSetsAllSwaps) {
  std::mt19937_64 rng(45);
  for (int t = 0; t < 60; ++t) {
    auto a = set(oracle::random_words(rng, 4, 4));
    const std::size_t N = 1 + t % 3;
    auto p = cover_clopen(a, N, GeneratorFamily::AllSwaps, 24);
    EXPECT_EQ(p.covered, a);
    EXPECT_TRUE(partition_ok(p, 8));
  }
}

TEST(ApproxDivide, WorkedExample) {
  auto cert = approx_divide(ClopenSet::full(), 3, r("1/2"), GeneratorFamily::AllSwaps, {BernoulliMeasure::uniform()});
  EXPECT_EQ(cert.N, 7u);
  ASSERT_EQ(cert.p_i.size(), 1u);
  EXPECT_EQ(cert.p_i[0], 2u);
  EXPECT_EQ(cert.q_i[0], 2u);
  EXPECT_EQ(cert.b[0], set({"000", "011"}));
  const auto& m = cert.checks.at(0);
  EXPECT_EQ(m.mu_b[0], r("1/4"));
  EXPECT_EQ(m.gap, r("1/4"));
  EXPECT_EQ(m.internal_bound, r("2/7"));
  EXPECT_TRUE(cert.all_ok());
}

TEST(ApproxDivide, OneWayDivisionHasNoGap) {
  auto cert = approx_divide(ClopenSet::cylinder("1"), 1, r("1/3"), GeneratorFamily::AllSwaps, {BernoulliMeasure::uniform()});
  EXPECT_EQ(cert.checks.at(0).gap, r("0"));
  EXPECT_TRUE(cert.all_ok());
}

TEST(ApproxDivide, RejectsBadArguments) {
  auto a = ClopenSet::cylinder("0");
  EXPECT_THROW(approx_divide(a, 2, r("0"), GeneratorFamily::AllSwaps, {}), Error);
  EXPECT_THROW(approx_divide(a, 0, r("1/4"), GeneratorFamily::AllSwaps, {}), Error);
  EXPECT_THROW(approx_divide(a, 2, r("1/4"), GeneratorFamily::AllSwaps, {BernoulliMeasure(r("1/3"))}), Error);
  EXPECT_THROW(approx_divide(ClopenSet::empty(), 2, r("1/4"), GeneratorFamily::AllSwaps, {}), Error);
}

TEST(ApproxDivide, EqualPartsUnderEveryMeasure) {
  auto band = set({"000111", "001011", "001101", "001110", "010011", "010101", "010110", "011001", "011010", "011100",
                   "100011", "100101", "100110", "101001", "101010", "101100", "110001", "110010", "110100", "111000"});
  std::vector<BernoulliMeasure> ms{BernoulliMeasure::uniform(), BernoulliMeasure(r("1/3")), BernoulliMeasure(r("2/5"))};
  auto cert = approx_divide(band, 2, r("1/4"), GeneratorFamily::WeightPreservingSwaps, ms);
  EXPECT_TRUE(cert.all_ok());
  for (std::size_t k = 0; k < cert.b.size(); ++k)
    for (const auto& m : ms)
      EXPECT_EQ(oracle::measure(oracle::points(cert.b[k], 8), m.p()), oracle::measure(oracle::points(cert.b[0], 8), m.p()));
}
