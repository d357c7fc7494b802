#pragma once

/**
 * @file limit_chain.hpp
 * @brief Finite initial segments of the Fraisse limit of the class of finite
 * algebras with rational vertex measures, grown by one-point extensions.
 *
 * A LimitChain is a refinement tree: stage 0 is the trivial algebra and each
 * later stage refines the previous one. An atom that is not split keeps its
 * id in the next stage; the pieces of a split atom `x` are `x.0`, `x.1`, ...
 * A clopen set of the (approximated) limit is an AtomSet: a set of atoms of
 * one stage. Lifting an AtomSet to a later stage replaces each atom by its
 * descendants.
 */

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cantor_simplex/amalgamation.hpp"
#include "cantor_simplex/error.hpp"
#include "cantor_simplex/measured_algebra.hpp"
#include "cantor_simplex/subset_search.hpp"

namespace cantor_simplex {

struct AtomSet {
  std::size_t stage = 0;
  std::vector<std::string> ids;  // canonical order

  friend bool operator==(const AtomSet&, const AtomSet&) = default;
};

inline AtomSet make_atom_set(std::size_t stage, std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end(), AtomIdLess{});
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return AtomSet{stage, std::move(ids)};
}

/// A Fraisse task: a subalgebra `sub` of stage `source_stage` (a partition of
/// its atoms) and an embedding `ext` of that subalgebra into some B in the
/// class. Discharging it realizes B inside a new stage over `sub`.
struct FraisseTask {
  std::size_t source_stage = 0;
  Parts sub;
  Embedding ext;  // ext.source == present(stage, sub)
  std::string label;
};

struct TaskRecord {
  std::string label;
  std::size_t source_stage = 0;
  std::size_t produced_stage = 0;
  Parts sub;
  FiniteMeasuredAlgebra extension;  // B
  BlockMap ext_blocks;              // sub atom -> B atoms
  BlockMap witness;                 // beta: B atom -> atoms of the produced stage
};

class LimitChain {
 public:
  LimitChain() = default;
  explicit LimitChain(std::size_t k) : k_(k) { stages_.push_back(FiniteMeasuredAlgebra::trivial(k)); }

  std::size_t k() const { return k_; }
  std::size_t stage_count() const { return stages_.size(); }
  std::size_t last_stage() const { return stages_.size() - 1; }
  const FiniteMeasuredAlgebra& stage(std::size_t s) const { return stages_.at(s); }
  const FiniteMeasuredAlgebra& final_stage() const { return stages_.back(); }
  const std::vector<FiniteMeasuredAlgebra>& stages() const { return stages_; }
  /// Blocks of the refinement stage s -> stage s+1.
  const BlockMap& refinement(std::size_t s) const { return refinements_.at(s); }
  const std::vector<BlockMap>& refinements() const { return refinements_; }
  Embedding refinement_embedding(std::size_t s) const {
    return Embedding{stages_.at(s), stages_.at(s + 1), refinements_.at(s)};
  }
  const std::vector<TaskRecord>& task_log() const { return task_log_; }

  bool truncated() const { return truncated_; }
  void set_truncated(bool t) { truncated_ = t; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t denom_budget() const { return denom_budget_; }
  std::size_t depth_budget() const { return depth_budget_; }
  void set_build_parameters(std::uint64_t seed, std::uint64_t denom_budget, std::size_t depth_budget) {
    seed_ = seed;
    denom_budget_ = denom_budget;
    depth_budget_ = depth_budget;
  }

  void append_stage(FiniteMeasuredAlgebra next, BlockMap refinement, TaskRecord record) {
    stages_.push_back(std::move(next));
    refinements_.push_back(std::move(refinement));
    task_log_.push_back(std::move(record));
  }

  /// Reassembles a chain from serialized parts; call validate_chain() afterwards.
  static LimitChain from_parts(std::size_t k, std::vector<FiniteMeasuredAlgebra> stages,
                               std::vector<BlockMap> refinements, std::vector<TaskRecord> log) {
    LimitChain c;
    c.k_ = k;
    c.stages_ = std::move(stages);
    c.refinements_ = std::move(refinements);
    c.task_log_ = std::move(log);
    return c;
  }

  /// Descendants at stage `to` of the atoms of `set`.
  AtomSet lift(const AtomSet& set, std::size_t to) const {
    if (to < set.stage) throw Error(ErrorKind::Precondition, "cannot lift an atom set to an earlier stage");
    if (to >= stages_.size()) throw Error(ErrorKind::Precondition, "stage " + std::to_string(to) + " is not built");
    std::vector<std::string> cur = set.ids;
    for (std::size_t s = set.stage; s < to; ++s) {
      std::vector<std::string> next;
      for (const auto& id : cur) {
        const auto& block = refinements_[s].at(id);
        next.insert(next.end(), block.begin(), block.end());
      }
      cur = std::move(next);
    }
    return make_atom_set(to, std::move(cur));
  }

  MeasureVector measure(const AtomSet& set) const { return stages_.at(set.stage).measure_of(set.ids); }

  AtomSet unit() const { return AtomSet{0, {stages_.front().atom(0).id}}; }

  /// Complement at the set's own stage.
  AtomSet complement(const AtomSet& set) const {
    std::set<std::string> in(set.ids.begin(), set.ids.end());
    std::vector<std::string> out;
    for (const auto& a : stages_.at(set.stage).atoms())
      if (!in.count(a.id)) out.push_back(a.id);
    return AtomSet{set.stage, std::move(out)};
  }

 private:
  std::size_t k_ = 0;
  std::vector<FiniteMeasuredAlgebra> stages_;
  std::vector<BlockMap> refinements_;
  std::vector<TaskRecord> task_log_;
  bool truncated_ = false;
  std::uint64_t seed_ = 0;
  std::uint64_t denom_budget_ = 0;
  std::size_t depth_budget_ = 0;
};

/// Structural check: trivial stage 0, valid stages, valid refinements.
inline ValidityReport validate_chain(const LimitChain& chain) {
  ValidityReport r;
  auto fail = [&](std::string m) {
    r.valid = false;
    r.violations.push_back(std::move(m));
  };
  if (chain.stage_count() == 0) {
    fail("chain has no stages");
    return r;
  }
  if (chain.stage(0).size() != 1) fail("stage 0 is not the trivial algebra");
  for (std::size_t s = 0; s < chain.stage_count(); ++s) {
    if (chain.stage(s).k() != chain.k()) fail("stage " + std::to_string(s) + " has the wrong vertex count");
    auto v = validate(chain.stage(s));
    for (const auto& msg : v.violations) fail("stage " + std::to_string(s) + ": " + msg);
  }
  if (chain.refinements().size() + 1 != chain.stage_count()) {
    fail("refinement count does not match stage count");
    return r;
  }
  for (std::size_t s = 0; s + 1 < chain.stage_count(); ++s) {
    auto check = is_embedding(chain.refinement_embedding(s));
    if (!check.ok) fail("refinement " + std::to_string(s) + ": " + check.violation);
  }
  return r;
}

/// Distinct atoms of the chain in order of first appearance (stage, then id).
inline std::vector<std::pair<std::size_t, std::string>> enumerate_atoms(const LimitChain& chain) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::set<std::string> seen;
  for (std::size_t s = 0; s < chain.stage_count(); ++s)
    for (const auto& a : chain.stage(s).atoms())
      if (seen.insert(a.id).second) out.emplace_back(s, a.id);
  return out;
}

inline void check_task(const LimitChain& chain, const FraisseTask& task) {
  if (task.source_stage >= chain.stage_count())
    throw Error(ErrorKind::Precondition, "task references unbuilt stage " + std::to_string(task.source_stage));
  auto presented = present(chain.stage(task.source_stage), task.sub);
  if (!(presented == task.ext.source))
    throw Error(ErrorKind::Precondition, "task extension source does not match its presented subalgebra");
  for (const auto& b : task.ext.target.atoms())
    if (b.mu.size() != chain.k() || !b.mu.all_positive())
      throw Error(ErrorKind::Precondition, "task target atom '" + b.id + "' is not coordinatewise positive");
  auto check = is_embedding(task.ext);
  if (!check.ok) throw Error(ErrorKind::Precondition, "task extension: " + check.violation);
}

/// Discharges `task` in a new final stage: each atom of the current final
/// stage lying under a sub-atom a is split by the product coupling against
/// ext(a). Pieces of a sub-atom whose block is a single B-atom pass through.
inline LimitChain one_point_extension(const LimitChain& chain, const FraisseTask& task) {
  check_task(chain, task);
  const auto last = chain.last_stage();
  const auto& sub_alg = task.ext.source;

  // alpha: sub -> final stage, via descendants of each part.
  Embedding alpha{sub_alg, chain.final_stage(), {}};
  for (const auto& part : task.sub) {
    auto lifted = chain.lift(make_atom_set(task.source_stage, part), last);
    auto least = *std::min_element(part.begin(), part.end(), AtomIdLess{});
    alpha.blocks[least] = lifted.ids;
  }
  auto m = amalgamate(alpha, task.ext, CouplingStrategy::Product);

  // Rename b(x)c atoms to chain-style ids.
  std::map<std::string, std::string> rename;
  for (const auto& [a_id, js] : alpha.blocks) {
    const auto& ks = task.ext.blocks.at(a_id);
    for (const auto& j : js)
      for (std::size_t c = 0; c < ks.size(); ++c)
        rename[pair_atom_id(j, ks[c])] = ks.size() == 1 ? j : j + "." + std::to_string(c);
  }
  std::vector<Atom> atoms;
  for (const auto& a : m.d.atoms()) atoms.push_back(Atom{rename.at(a.id), a.mu});
  FiniteMeasuredAlgebra next(chain.k(), std::move(atoms));
  auto relabel = [&](const BlockMap& blocks) {
    BlockMap out;
    for (const auto& [src, block] : blocks) {
      auto& dst = out[src];
      for (const auto& id : block) dst.push_back(rename.at(id));
      std::sort(dst.begin(), dst.end(), AtomIdLess{});
    }
    return out;
  };
  TaskRecord rec;
  rec.label = task.label;
  rec.source_stage = task.source_stage;
  rec.produced_stage = last + 1;
  rec.sub = task.sub;
  rec.extension = task.ext.target;
  rec.ext_blocks = task.ext.blocks;
  rec.witness = relabel(m.beta_prime.blocks);
  LimitChain out = chain;
  out.append_stage(std::move(next), relabel(m.alpha_prime.blocks), std::move(rec));
  return out;
}

/// Task splitting the clopen `target` into pieces with the given vectors
/// (which must sum to its measure); the rest of the space is untouched.
/// Piece i of the extension is the B-atom "p<i>".
inline FraisseTask make_split_task(const LimitChain& chain, const AtomSet& target,
                                   const std::vector<MeasureVector>& pieces, std::string label = "split") {
  const auto& stage = chain.stage(target.stage);
  auto rest = chain.complement(target);
  Parts sub{target.ids};
  if (!rest.ids.empty()) sub.push_back(rest.ids);
  auto presented = present(stage, sub);
  std::vector<Atom> b_atoms;
  BlockMap blocks;
  const auto target_least = *std::min_element(target.ids.begin(), target.ids.end(), AtomIdLess{});
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    b_atoms.push_back(Atom{"p" + std::to_string(i), pieces[i]});
    blocks[target_least].push_back("p" + std::to_string(i));
  }
  if (!rest.ids.empty()) {
    b_atoms.push_back(Atom{"rest", stage.measure_of(rest.ids)});
    blocks[*std::min_element(rest.ids.begin(), rest.ids.end(), AtomIdLess{})] = {"rest"};
  }
  FiniteMeasuredAlgebra b(chain.k(), std::move(b_atoms));
  std::sort(blocks[target_least].begin(), blocks[target_least].end(), AtomIdLess{});
  return FraisseTask{target.stage, std::move(sub), Embedding{std::move(presented), std::move(b), std::move(blocks)},
                     std::move(label)};
}

/// Image in the newest stage of B-atom `b_atom` of the most recent task.
inline AtomSet witness_image(const LimitChain& chain, const std::string& b_atom) {
  const auto& rec = chain.task_log().back();
  return make_atom_set(rec.produced_stage, rec.witness.at(b_atom));
}

// ---------------------------------------------------------------------------
// build_limit

namespace detail {

/// Rationals in (0, bound) with denominator at most `d`.
inline std::vector<Rational> values_below(const Rational& bound, std::uint64_t d) {
  std::set<Rational> vals;
  for (std::uint64_t q = 1; q <= d; ++q)
    for (std::uint64_t p = 1; p < q * 2 + 1; ++p) {
      Rational r(p, q);
      r.canonicalize();
      if (r < bound) vals.insert(r);
    }
  return {vals.begin(), vals.end()};
}

inline void enumerate_splits_rec(const std::vector<MeasureVector>& candidates, std::size_t from,
                                 const MeasureVector& remaining, std::vector<MeasureVector>& current,
                                 std::vector<std::vector<MeasureVector>>& out, std::size_t limit) {
  if (out.size() >= limit) return;
  for (std::size_t i = from; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (!c.le(remaining)) continue;
    MeasureVector rest = remaining - c;
    if (rest.all_zero()) {
      if (!current.empty()) {
        current.push_back(c);
        out.push_back(current);
        current.pop_back();
      }
      continue;
    }
    if (!rest.all_positive()) continue;
    current.push_back(c);
    enumerate_splits_rec(candidates, i, rest, current, out, limit);
    current.pop_back();
  }
}

}  // namespace detail

/// All ways (as multisets, pieces in non-decreasing lexicographic order) to
/// write `v` as a sum of at least two coordinatewise positive vectors whose
/// entries have denominators at most `d`.
inline std::vector<std::vector<MeasureVector>> enumerate_splits(const MeasureVector& v, std::uint64_t d,
                                                                std::size_t limit = 100000) {
  std::vector<std::vector<Rational>> per_coord;
  for (std::size_t e = 0; e < v.size(); ++e) {
    per_coord.push_back(detail::values_below(v[e], d));
    if (per_coord.back().empty()) return {};
  }
  std::vector<MeasureVector> candidates{MeasureVector()};
  for (const auto& vals : per_coord) {
    std::vector<MeasureVector> next;
    for (const auto& c : candidates)
      for (const auto& x : vals) {
        auto vs = c.values();
        vs.push_back(x);
        next.emplace_back(std::move(vs));
      }
    candidates = std::move(next);
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<std::vector<MeasureVector>> out;
  std::vector<MeasureVector> current;
  detail::enumerate_splits_rec(candidates, 0, v, current, out, limit);
  return out;
}

inline bool split_within_denominator(const std::vector<MeasureVector>& pieces, std::uint64_t d) {
  return std::all_of(pieces.begin(), pieces.end(), [d](const MeasureVector& p) { return p.denominators_at_most(d); });
}

/// Fair deterministic construction of an initial segment of the limit.
///
/// Tasks are "split atom a of stage s into pieces with denominators <= d",
/// scheduled by increasing d, then stage, then atom id; the seed shuffles
/// the splits of one atom among themselves. Splits already available at a
/// smaller d are not repeated. Stages created while a level is running are
/// visited in the same level. Once every bounded task is discharged, the
/// remaining stages halve every atom of the final stage. If the depth budget
/// runs out first, the chain is marked truncated.
inline LimitChain build_limit(std::size_t k, std::size_t depth_budget, std::uint64_t denom_budget,
                              std::uint64_t seed) {
  if (k == 0) throw Error(ErrorKind::Precondition, "vertex count must be at least 1");
  if (depth_budget == 0 || denom_budget == 0) throw Error(ErrorKind::Precondition, "budgets must be at least 1");
  LimitChain chain(k);
  chain.set_build_parameters(seed, denom_budget, depth_budget);
  for (std::uint64_t d = 1; d <= denom_budget; ++d) {
    for (std::size_t s = 0; s < chain.stage_count(); ++s) {
      const auto atoms = chain.stage(s).atoms();
      for (const auto& a : atoms) {
        auto splits = enumerate_splits(a.mu, d);
        std::erase_if(splits, [d](const auto& p) { return d > 1 && split_within_denominator(p, d - 1); });
        if (splits.empty()) continue;
        std::seed_seq seq{seed, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(s),
                          static_cast<std::uint64_t>(std::hash<std::string>{}(a.id))};
        std::mt19937_64 rng(seq);
        std::shuffle(splits.begin(), splits.end(), rng);
        for (std::size_t t = 0; t < splits.size(); ++t) {
          if (chain.stage_count() >= depth_budget) {
            chain.set_truncated(true);
            return chain;
          }
          auto label = "d" + std::to_string(d) + ":s" + std::to_string(s) + ":" + a.id + "#" + std::to_string(t);
          chain = one_point_extension(chain, make_split_task(chain, make_atom_set(s, {a.id}), splits[t], label));
        }
      }
    }
  }
  while (chain.stage_count() < depth_budget) {
    const auto& fin = chain.final_stage();
    Parts sub;
    std::vector<Atom> b_atoms;
    BlockMap blocks;
    for (const auto& a : fin.atoms()) {
      sub.push_back({a.id});
      auto half = a.mu / Rational(2);
      b_atoms.push_back(Atom{a.id + "/0", half});
      b_atoms.push_back(Atom{a.id + "/1", half});
      blocks[a.id] = {a.id + "/0", a.id + "/1"};
    }
    FiniteMeasuredAlgebra b(k, std::move(b_atoms));
    FraisseTask task{chain.last_stage(), std::move(sub), Embedding{fin, std::move(b), std::move(blocks)},
                     "diffuse:s" + std::to_string(chain.last_stage())};
    chain = one_point_extension(chain, task);
  }
  return chain;
}

// ---------------------------------------------------------------------------
// Back-and-forth

struct IsoPair {
  AtomSet m;
  AtomSet n;
};

/// Finitely generated partial isomorphism: the pairs partition both units
/// and matched sets carry equal measure vectors. No pairs means the trivial
/// map unit -> unit.
struct PartialIso {
  std::vector<IsoPair> pairs;
};

enum class Side { M, N };

struct BackAndForthState {
  LimitChain m;
  LimitChain n;
  PartialIso iso;
  std::size_t searched = 0;    // splits matched inside existing stages
  std::size_t discharged = 0;  // splits realized by discharging a task
};

struct BackAndForthOptions {
  std::size_t max_stages = 64;     // per chain, including stages already built
  std::size_t search_nodes = 20000;
};

inline std::vector<IsoPair> effective_pairs(const LimitChain& m, const LimitChain& n, const PartialIso& p) {
  if (!p.pairs.empty()) return p.pairs;
  return {IsoPair{m.unit(), n.unit()}};
}

/// Extends `state.iso` so that its domain (Side::M) or range (Side::N)
/// generates the atom `target`. Each split that the target forces on a
/// matched set is first searched for in the other chain's final stage
/// (lowest-index subset); splits not found are discharged together as one
/// Fraisse task in the other chain.
inline BackAndForthState back_and_forth_extend(BackAndForthState state, Side side, const AtomSet& target,
                                               const BackAndForthOptions& opt = {}) {
  LimitChain& here = side == Side::M ? state.m : state.n;
  LimitChain& there = side == Side::M ? state.n : state.m;
  if (target.stage >= here.stage_count())
    throw Error(ErrorKind::Precondition, "target atom lies in an unbuilt stage");
  auto pairs = effective_pairs(state.m, state.n, state.iso);
  auto own = [&](IsoPair& pr) -> AtomSet& { return side == Side::M ? pr.m : pr.n; };
  auto other = [&](IsoPair& pr) -> AtomSet& { return side == Side::M ? pr.n : pr.m; };

  struct Pending {
    std::size_t pair;
    AtomSet inside, outside;
    MeasureVector mu_inside, mu_outside;
  };
  std::vector<IsoPair> out;
  std::vector<Pending> pending;
  std::vector<std::pair<std::size_t, AtomSet>> found_inside;  // pair index -> other-side set
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const AtomSet& p = own(pairs[i]);
    const std::size_t t = std::max(p.stage, target.stage);
    auto pl = here.lift(p, t);
    auto tl = here.lift(target, t);
    std::set<std::string> tset(tl.ids.begin(), tl.ids.end());
    std::vector<std::string> in, outside;
    for (const auto& id : pl.ids) (tset.count(id) ? in : outside).push_back(id);
    if (in.empty() || outside.empty()) continue;
    pending.push_back(Pending{i, make_atom_set(t, in), make_atom_set(t, outside), here.measure(make_atom_set(t, in)),
                              here.measure(make_atom_set(t, outside))});
  }

  std::vector<std::optional<std::pair<AtomSet, AtomSet>>> images(pending.size());
  std::vector<std::size_t> unresolved;
  for (std::size_t q = 0; q < pending.size(); ++q) {
    const AtomSet& img = other(pairs[pending[q].pair]);
    auto lifted = there.lift(img, there.last_stage());
    std::vector<MeasureVector> items;
    for (const auto& id : lifted.ids) items.push_back(there.final_stage().mu(id));
    SearchBudget budget{opt.search_nodes, 0};
    auto hit = find_subset_sum(items, pending[q].mu_inside, budget);
    if (hit) {
      std::vector<std::string> a, b;
      std::size_t h = 0;
      for (std::size_t j = 0; j < lifted.ids.size(); ++j) {
        if (h < hit->size() && (*hit)[h] == j) {
          a.push_back(lifted.ids[j]);
          ++h;
        } else {
          b.push_back(lifted.ids[j]);
        }
      }
      images[q] = std::make_pair(make_atom_set(lifted.stage, a), make_atom_set(lifted.stage, b));
      ++state.searched;
    } else {
      unresolved.push_back(q);
    }
  }
  if (!unresolved.empty()) {
    if (there.stage_count() >= opt.max_stages)
      throw Error(ErrorKind::Budget, "back-and-forth: stage budget prevents discharging a required task");
    // One task splitting every unresolved image in two.
    const auto last = there.last_stage();
    Parts sub;
    std::vector<Atom> b_atoms;
    BlockMap blocks;
    std::set<std::string> used;
    std::vector<std::string> keys;
    for (auto q : unresolved) {
      auto lifted = there.lift(other(pairs[pending[q].pair]), last);
      sub.push_back(lifted.ids);
      used.insert(lifted.ids.begin(), lifted.ids.end());
      auto key = *std::min_element(lifted.ids.begin(), lifted.ids.end(), AtomIdLess{});
      keys.push_back(key);
      b_atoms.push_back(Atom{"q" + std::to_string(q) + "a", pending[q].mu_inside});
      b_atoms.push_back(Atom{"q" + std::to_string(q) + "b", pending[q].mu_outside});
      blocks[key] = {"q" + std::to_string(q) + "a", "q" + std::to_string(q) + "b"};
    }
    for (const auto& a : there.final_stage().atoms()) {
      if (used.count(a.id)) continue;
      sub.push_back({a.id});
      b_atoms.push_back(Atom{"id:" + a.id, a.mu});
      blocks[a.id] = {"id:" + a.id};
    }
    auto presented = present(there.final_stage(), sub);
    FraisseTask task{last, std::move(sub),
                     Embedding{std::move(presented), FiniteMeasuredAlgebra(there.k(), std::move(b_atoms)),
                               std::move(blocks)},
                     "back-and-forth"};
    there = one_point_extension(there, task);
    for (auto q : unresolved) {
      images[q] = std::make_pair(witness_image(there, "q" + std::to_string(q) + "a"),
                                 witness_image(there, "q" + std::to_string(q) + "b"));
      ++state.discharged;
    }
  }

  std::vector<bool> split(pairs.size(), false);
  for (std::size_t q = 0; q < pending.size(); ++q) {
    split[pending[q].pair] = true;
  }
  std::size_t q = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!split[i]) {
      out.push_back(pairs[i]);
      continue;
    }
    const auto& pd = pending[q];
    const auto& [img_in, img_out] = *images[q];
    ++q;
    if (side == Side::M) {
      out.push_back(IsoPair{pd.inside, img_in});
      out.push_back(IsoPair{pd.outside, img_out});
    } else {
      out.push_back(IsoPair{img_in, pd.inside});
      out.push_back(IsoPair{img_out, pd.outside});
    }
  }
  state.iso.pairs = std::move(out);
  return state;
}

struct IsoCheck {
  bool ok = true;
  std::string violation;
};

/// Independent check that the pairs induce an isomorphism of the finite
/// subalgebras they generate: both sides partition the unit (checked at the
/// final stage) and every matched pair has equal vectors.
inline IsoCheck check_partial_iso(const LimitChain& m, const LimitChain& n, const PartialIso& p) {
  auto pairs = effective_pairs(m, n, p);
  auto covers = [](const LimitChain& c, const std::vector<AtomSet>& sets) -> std::string {
    std::set<std::string> seen;
    for (const auto& s : sets) {
      auto l = c.lift(s, c.last_stage());
      if (l.ids.empty()) return "empty matched set";
      for (const auto& id : l.ids)
        if (!seen.insert(id).second) return "matched sets overlap at atom '" + id + "'";
    }
    if (seen.size() != c.final_stage().size()) return "matched sets do not cover the unit";
    return {};
  };
  std::vector<AtomSet> ms, ns;
  for (const auto& pr : pairs) {
    ms.push_back(pr.m);
    ns.push_back(pr.n);
    if (!(m.measure(pr.m) == n.measure(pr.n)))
      return {false, "pair has unequal vectors " + to_string(m.measure(pr.m)) + " vs " + to_string(n.measure(pr.n))};
  }
  if (auto msg = covers(m, ms); !msg.empty()) return {false, "domain: " + msg};
  if (auto msg = covers(n, ns); !msg.empty()) return {false, "range: " + msg};
  return {};
}

/// True iff `set` is a union of the domain (Side::M) or range pieces of `p`.
inline bool generated_by(const LimitChain& chain, const PartialIso& p, Side side, const AtomSet& set) {
  std::size_t t = set.stage;
  for (const auto& pr : p.pairs) t = std::max(t, (side == Side::M ? pr.m : pr.n).stage);
  auto target = chain.lift(set, t);
  std::set<std::string> tset(target.ids.begin(), target.ids.end());
  for (const auto& pr : p.pairs) {
    auto piece = chain.lift(side == Side::M ? pr.m : pr.n, t);
    std::size_t inside = 0;
    for (const auto& id : piece.ids) inside += tset.count(id);
    if (inside != 0 && inside != piece.ids.size()) return false;
  }
  return true;
}

/// Alternating back-and-forth over the first `count` enumerated atoms of
/// each chain: forth on the i-th atom of M, then back on the i-th atom of N.
inline BackAndForthState back_and_forth(LimitChain m, LimitChain n, std::size_t count,
                                        const BackAndForthOptions& opt = {}) {
  if (m.k() != n.k()) throw Error(ErrorKind::Precondition, "chains have different vertex counts");
  auto em = enumerate_atoms(m);
  auto en = enumerate_atoms(n);
  BackAndForthState st{std::move(m), std::move(n), {}, 0, 0};
  for (std::size_t i = 0; i < count; ++i) {
    if (i < em.size()) st = back_and_forth_extend(std::move(st), Side::M, AtomSet{em[i].first, {em[i].second}}, opt);
    if (i < en.size()) st = back_and_forth_extend(std::move(st), Side::N, AtomSet{en[i].first, {en[i].second}}, opt);
  }
  return st;
}

/// Homogeneity germ: pairs A_i -> B_i for two clopen partitions of the
/// unit with pairwise equal vectors. Throws Precondition naming the first
/// offending index.
inline PartialIso homogeneity_automorphism(const LimitChain& chain, const std::vector<AtomSet>& part_a,
                                           const std::vector<AtomSet>& part_b) {
  if (part_a.size() != part_b.size())
    throw Error(ErrorKind::Precondition, "partitions have different numbers of pieces");
  PartialIso germ;
  for (std::size_t i = 0; i < part_a.size(); ++i) {
    if (!(chain.measure(part_a[i]) == chain.measure(part_b[i])))
      throw Error(ErrorKind::Precondition, "measure vectors disagree at index " + std::to_string(i) + ": " +
                                               to_string(chain.measure(part_a[i])) + " vs " +
                                               to_string(chain.measure(part_b[i])));
    germ.pairs.push_back(IsoPair{part_a[i], part_b[i]});
  }
  auto check = check_partial_iso(chain, chain, germ);
  if (!check.ok) throw Error(ErrorKind::Precondition, "not a pair of clopen partitions: " + check.violation);
  return germ;
}

}  // namespace cantor_simplex
