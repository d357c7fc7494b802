#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "cantor_simplex/limit_chain.hpp"
#include "oracles.hpp"

using namespace cantor_simplex;
using oracle::r;
using oracle::vec;

namespace {

LimitChain split_unit(std::size_t k, std::vector<MeasureVector> pieces) {
  LimitChain c(k);
  return one_point_extension(c, make_split_task(c, c.unit(), pieces));
}

// Every algebra of dimension k whose values have denominators <= d, as a
// list of atom vectors in nondecreasing order.
void all_algebras(std::size_t k, std::uint64_t d, std::vector<std::vector<MeasureVector>>& out) {
  std::vector<Rational> values;
  for (std::uint64_t q = 1; q <= d; ++q)
    for (std::uint64_t p = 1; p <= q; ++p) {
      Rational x(p, q);
      x.canonicalize();
      if (std::find(values.begin(), values.end(), x) == values.end()) values.push_back(x);
    }
  std::vector<MeasureVector> vecs;
  std::vector<std::size_t> idx(k, 0);
  while (true) {
    std::vector<Rational> v;
    for (auto i : idx) v.push_back(values[i]);
    vecs.emplace_back(v);
    std::size_t q = 0;
    while (q < k && ++idx[q] == values.size()) idx[q++] = 0;
    if (q == k) break;
  }
  std::vector<MeasureVector> cur;
  std::function<void(std::size_t, std::vector<Rational>)> rec = [&](std::size_t from, std::vector<Rational> room) {
    if (std::all_of(room.begin(), room.end(), [](const Rational& x) { return x == 0; })) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = from; i < vecs.size(); ++i) {
      bool fits = true;
      for (std::size_t q = 0; q < k && fits; ++q) fits = vecs[i][q] <= room[q];
      if (!fits) continue;
      auto next = room;
      for (std::size_t q = 0; q < k; ++q) next[q] -= vecs[i][q];
      cur.push_back(vecs[i]);
      rec(i, next);
      cur.pop_back();
    }
  };
  rec(0, std::vector<Rational>(k, Rational(1)));
}

bool embeds_somewhere(const LimitChain& chain, const std::vector<MeasureVector>& algebra) {
  std::vector<std::size_t> order(algebra.size());
  std::iota(order.begin(), order.end(), 0);
  for (const auto& stage : chain.stages()) {
    if (stage.size() < algebra.size()) continue;
    std::vector<MeasureVector> items;
    for (const auto& x : stage.atoms()) items.push_back(x.mu);
    if (oracle::group_items(items, algebra, order)) return true;
  }
  return false;
}

// Oracle check of a partial isomorphism: both sides partition the unit in
// the final stage and paired sets carry equal recomputed vectors.
void expect_partial_iso(const LimitChain& m, const LimitChain& n, const PartialIso& iso) {
  std::set<std::string> cov_m, cov_n;
  for (const auto& p : iso.pairs) {
    auto lm = oracle::lift_ids(m, p.m.ids, p.m.stage, m.last_stage());
    auto ln = oracle::lift_ids(n, p.n.ids, p.n.stage, n.last_stage());
    for (const auto& id : lm) EXPECT_TRUE(cov_m.insert(id).second) << id;
    for (const auto& id : ln) EXPECT_TRUE(cov_n.insert(id).second) << id;
    EXPECT_EQ(oracle::sum_ids(m.final_stage(), lm), oracle::sum_ids(n.final_stage(), ln));
  }
  EXPECT_EQ(cov_m.size(), m.final_stage().size());
  EXPECT_EQ(cov_n.size(), n.final_stage().size());
}

}  // namespace

TEST(OnePointExtension, FirstSplit) {
  auto c = split_unit(2, {vec({"1/2", "1/2"}), vec({"1/2", "1/2"})});
  ASSERT_EQ(c.stage_count(), 2u);
  ASSERT_EQ(c.final_stage().size(), 2u);
  for (const auto& x : c.final_stage().atoms()) EXPECT_EQ(x.mu, vec({"1/2", "1/2"}));
  EXPECT_TRUE(validate_chain(c).valid);
  EXPECT_EQ(c.task_log().size(), 1u);
}

TEST(OnePointExtension, IdentityTaskRepeatsStage) {
  auto c = split_unit(2, {vec({"1/2", "1/3"}), vec({"1/2", "2/3"})});
  auto next = one_point_extension(c, make_split_task(c, make_atom_set(1, {c.final_stage().ids()[0]}),
                                                     {c.final_stage().atom(0).mu}));
  ASSERT_EQ(next.stage_count(), 3u);
  EXPECT_TRUE(isomorphic(next.stage(1), next.stage(2)));
}

TEST(OnePointExtension, ChildrenSumToParent) {
  auto c = split_unit(2, {vec({"1/2", "1/3"}), vec({"1/2", "2/3"})});
  std::string target;
  for (const auto& x : c.final_stage().atoms())
    if (x.mu == vec({"1/2", "1/3"})) target = x.id;
  ASSERT_FALSE(target.empty());
  auto next = one_point_extension(
      c, make_split_task(c, make_atom_set(1, {target}), {vec({"1/4", "1/6"}), vec({"1/4", "1/6"})}));
  auto kids = oracle::lift_ids(next, {target}, 1, 2);
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_EQ(oracle::sum_ids(next.final_stage(), kids), vec({"1/2", "1/3"}).values());
  EXPECT_TRUE(validate_chain(next).valid);
}

TEST(OnePointExtension, RejectsBadTasks) {
  LimitChain c(1);
  EXPECT_THROW(one_point_extension(c, make_split_task(c, c.unit(), {vec({"1/2"}), vec({"1/3"})})), Error);
  EXPECT_THROW(one_point_extension(c, make_split_task(c, c.unit(), {vec({"1"}), vec({"0"})})), Error);
  EXPECT_THROW(make_split_task(c, make_atom_set(0, {"nope"}), {vec({"1"})}), Error);
}

TEST(BuildLimit, OneVertexDenominatorTwo) {
  auto c = build_limit(1, 2, 2, 1);
  ASSERT_EQ(c.stage_count(), 2u);
  ASSERT_EQ(c.stage(1).size(), 2u);
  for (const auto& x : c.stage(1).atoms()) EXPECT_EQ(x.mu, vec({"1/2"}));
}

TEST(BuildLimit, StagesSumToOneForAnySeed) {
  for (std::uint64_t seed : {1, 2, 3, 17, 99}) {
    auto c = build_limit(2, 6, 3, seed);
    EXPECT_TRUE(validate_chain(c).valid);
    for (const auto& s : c.stages()) EXPECT_TRUE(oracle::sums_to_one(s));
    for (std::size_t s = 0; s + 1 < c.stage_count(); ++s)
      for (const auto& x : c.stage(s).atoms())
        EXPECT_EQ(oracle::sum_ids(c.stage(s + 1), oracle::lift_ids(c, {x.id}, s, s + 1)), x.mu.values());
  }
}

TEST(BuildLimit, DeterministicGivenSeed) {
  auto a = build_limit(2, 6, 3, 5), b = build_limit(2, 6, 3, 5);
  ASSERT_EQ(a.stage_count(), b.stage_count());
  for (std::size_t s = 0; s < a.stage_count(); ++s) EXPECT_EQ(a.stage(s).ids(), b.stage(s).ids());
}

TEST(BuildLimit, AgeClosureAtSmallBudgets) {
  for (std::size_t k : {1, 2})
    for (std::uint64_t d : {1, 2, 3}) {
      auto chain = build_limit(k, 12, d, 1);
      std::vector<std::vector<MeasureVector>> algebras;
      all_algebras(k, d, algebras);
      ASSERT_FALSE(algebras.empty());
      for (const auto& alg : algebras) {
        std::string desc;
        for (const auto& v : alg) desc += to_string(v) + " ";
        EXPECT_TRUE(embeds_somewhere(chain, alg)) << "k=" << k << " d=" << d << " algebra " << desc;
      }
    }
}

TEST(BuildLimit, EveryNonFinalAtomIsEventuallySplit) {
  auto c = build_limit(2, 10, 2, 3);
  for (std::size_t s = 0; s + 1 < c.stage_count(); ++s)
    for (const auto& x : c.stage(s).atoms())
      EXPECT_GE(oracle::lift_ids(c, {x.id}, s, c.last_stage()).size(), 2u) << "stage " << s << " atom " << x.id;
}

TEST(BackAndForth, SelfMatchIsIdentity) {
  auto m = build_limit(2, 6, 3, 4);
  auto atoms = enumerate_atoms(m);
  BackAndForthState st{m, m, {}, 0, 0};
  st = back_and_forth_extend(std::move(st), Side::M, AtomSet{atoms[3].first, {atoms[3].second}});
  EXPECT_EQ(st.m.stage_count(), m.stage_count());
  EXPECT_EQ(st.n.stage_count(), m.stage_count());
  for (const auto& p : st.iso.pairs) EXPECT_EQ(oracle::lift_ids(st.m, p.m.ids, p.m.stage, m.last_stage()),
                                               oracle::lift_ids(st.n, p.n.ids, p.n.stage, m.last_stage()));
  expect_partial_iso(st.m, st.n, st.iso);
}

TEST(BackAndForth, MatchesSymmetricHalves) {
  auto m = split_unit(2, {vec({"1/2", "1/2"}), vec({"1/2", "1/2"})});
  auto n = split_unit(2, {vec({"1/2", "1/2"}), vec({"1/2", "1/2"})});
  auto st = back_and_forth(m, n, 3);
  expect_partial_iso(st.m, st.n, st.iso);
  EXPECT_EQ(st.iso.pairs.size(), 2u);
}

TEST(BackAndForth, DifferentSeedsAgreeOnSixteenAtoms) {
  auto m = build_limit(2, 8, 4, 1), n = build_limit(2, 8, 4, 2);
  auto st = back_and_forth(m, n, 16);
  auto chk = check_partial_iso(st.m, st.n, st.iso);
  EXPECT_TRUE(chk.ok) << chk.violation;
  expect_partial_iso(st.m, st.n, st.iso);
  auto em = enumerate_atoms(m), en = enumerate_atoms(n);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_TRUE(generated_by(st.m, st.iso, Side::M, AtomSet{em[i].first, {em[i].second}}));
    EXPECT_TRUE(generated_by(st.n, st.iso, Side::N, AtomSet{en[i].first, {en[i].second}}));
  }
}

TEST(BackAndForth, StageBudgetIsReported) {
  auto m = build_limit(2, 8, 4, 1), n = build_limit(2, 3, 2, 2);
  BackAndForthOptions opt;
  opt.max_stages = 3;
  try {
    back_and_forth(m, n, 16, opt);
    FAIL() << "expected a budget error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Budget);
  }
}

TEST(Homogeneity, EqualPartitionsGiveIdentity) {
  auto c = build_limit(2, 6, 3, 1);
  std::vector<AtomSet> part;
  for (const auto& id : c.stage(2).ids()) part.push_back(make_atom_set(2, {id}));
  auto germ = homogeneity_automorphism(c, part, part);
  ASSERT_EQ(germ.pairs.size(), part.size());
  for (const auto& p : germ.pairs) EXPECT_EQ(p.m, p.n);
}

TEST(Homogeneity, SwapsUniformHalves) {
  auto c = split_unit(3, {vec({"1/2", "1/2", "1/2"}), vec({"1/2", "1/2", "1/2"})});
  auto ids = c.final_stage().ids();
  std::vector<AtomSet> a{make_atom_set(1, {ids[0]}), make_atom_set(1, {ids[1]})};
  std::vector<AtomSet> b{make_atom_set(1, {ids[1]}), make_atom_set(1, {ids[0]})};
  auto germ = homogeneity_automorphism(c, a, b);
  ASSERT_EQ(germ.pairs.size(), 2u);
  EXPECT_EQ(germ.pairs[0].n, b[0]);
  expect_partial_iso(c, c, germ);
}

TEST(Homogeneity, MismatchNamesTheIndex) {
  auto c = split_unit(2, {vec({"1/2", "1/3"}), vec({"1/2", "2/3"})});
  auto ids = c.final_stage().ids();
  std::vector<AtomSet> a{make_atom_set(1, {ids[0]}), make_atom_set(1, {ids[1]})};
  std::vector<AtomSet> b{make_atom_set(1, {ids[1]}), make_atom_set(1, {ids[0]})};
  try {
    homogeneity_automorphism(c, a, b);
    FAIL() << "expected a precondition error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Precondition);
    EXPECT_NE(std::string(e.what()).find("index 0"), std::string::npos) << e.what();
  }
}
