#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library's canonicalization or measure code; sets are handled as
// explicit lists of depth-D points.

#include <cstdint>
#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cantor_simplex/clopen.hpp"
#include "cantor_simplex/limit_chain.hpp"
#include "cantor_simplex/measured_algebra.hpp"
#include "cantor_simplex/prefix_map.hpp"
#include "cantor_simplex/rational.hpp"

namespace oracle {

using cantor_simplex::Rational;
using cantor_simplex::Word;

/// Every length-`depth` word extending one of `words`.
inline std::set<std::string> points(const std::vector<Word>& words, std::size_t depth) {
  std::set<std::string> out;
  for (const auto& w : words) {
    if (w.size() > depth) throw std::logic_error("oracle depth too small");
    const std::size_t free = depth - w.size();
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << free); ++bits) {
      std::string s = w;
      for (std::size_t i = 0; i < free; ++i) s.push_back(((bits >> (free - 1 - i)) & 1) ? '1' : '0');
      out.insert(s);
    }
  }
  return out;
}

inline std::set<std::string> points(const cantor_simplex::ClopenSet& s, std::size_t depth) {
  return points(s.words(), depth);
}

/// p^#1 (1-p)^#0 summed over the points.
inline Rational measure(const std::set<std::string>& pts, const Rational& p) {
  Rational total(0);
  for (const auto& x : pts) {
    Rational m(1);
    for (char c : x) m *= (c == '1') ? p : Rational(1) - p;
    total += m;
  }
  return total;
}

/// Image of a depth-D point under a length-preserving prefix map.
inline std::string apply_point(const cantor_simplex::PrefixMapHomeo& g, const std::string& x) {
  for (const auto& [u, v] : g.rules())
    if (x.compare(0, u.size(), u) == 0) return v + x.substr(u.size());
  throw std::logic_error("oracle point shorter than a rule");
}

inline std::set<std::string> apply_points(const cantor_simplex::GeneratorRegistry& reg,
                                          const cantor_simplex::GroupWord& w, std::set<std::string> pts) {
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) {
    const auto g = it->exponent > 0 ? reg.at(it->generator) : reg.at(it->generator).inverse();
    std::set<std::string> next;
    for (const auto& x : pts) next.insert(apply_point(g, x));
    pts = std::move(next);
  }
  return pts;
}

inline bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a)
    if (b.count(x)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Random instances

/// Random clopen set made of cylinders of length 1..max_depth.
inline std::vector<Word> random_words(std::mt19937_64& rng, std::size_t max_depth, std::size_t max_words) {
  std::uniform_int_distribution<std::size_t> count(1, max_words), len(1, max_depth);
  std::vector<Word> ws;
  const std::size_t c = count(rng);
  for (std::size_t i = 0; i < c; ++i) {
    const std::size_t l = len(rng);
    Word w;
    for (std::size_t j = 0; j < l; ++j) w.push_back((rng() & 1) ? '1' : '0');
    ws.push_back(w);
  }
  return ws;
}

/// A strictly positive vector in (0, 1] with small denominators.
inline std::vector<Rational> random_weights(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> w(1, 6);
  std::vector<Rational> out;
  Rational total(0);
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(w(rng));
    total += out.back();
  }
  for (auto& x : out) x /= total;
  return out;
}

/// A valid random algebra: each vertex gets an independent random
/// probability vector over `atoms` atoms.
inline cantor_simplex::FiniteMeasuredAlgebra random_algebra(std::mt19937_64& rng, std::size_t k, std::size_t atoms,
                                                            const std::string& prefix) {
  std::vector<std::vector<Rational>> cols;
  for (std::size_t e = 0; e < k; ++e) cols.push_back(random_weights(rng, atoms));
  std::vector<cantor_simplex::Atom> out;
  for (std::size_t i = 0; i < atoms; ++i) {
    std::vector<Rational> v;
    for (std::size_t e = 0; e < k; ++e) v.push_back(cols[e][i]);
    out.push_back({prefix + std::to_string(i), cantor_simplex::MeasureVector(v)});
  }
  return cantor_simplex::FiniteMeasuredAlgebra(k, std::move(out));
}

/// Splits the atoms of `a` into random child atoms, giving an embedding
/// a -> b. Child vectors are random positive fractions of the parent.
inline cantor_simplex::Embedding random_refinement(std::mt19937_64& rng, const cantor_simplex::FiniteMeasuredAlgebra& a,
                                                   std::size_t max_children, const std::string& prefix) {
  std::uniform_int_distribution<std::size_t> children(1, max_children);
  std::vector<cantor_simplex::Atom> atoms;
  cantor_simplex::BlockMap blocks;
  std::size_t next = 0;
  for (const auto& x : a.atoms()) {
    const std::size_t c = children(rng);
    std::vector<std::vector<Rational>> per_vertex;
    for (std::size_t e = 0; e < a.k(); ++e) per_vertex.push_back(random_weights(rng, c));
    for (std::size_t i = 0; i < c; ++i) {
      std::vector<Rational> v;
      for (std::size_t e = 0; e < a.k(); ++e) v.push_back(x.mu[e] * per_vertex[e][i]);
      const std::string id = prefix + std::to_string(next++);
      atoms.push_back({id, cantor_simplex::MeasureVector(v)});
      blocks[x.id].push_back(id);
    }
  }
  return cantor_simplex::Embedding{a, cantor_simplex::FiniteMeasuredAlgebra(a.k(), std::move(atoms)), blocks};
}

/// Sum over target atoms of each block, compared with the source vector.
inline bool block_sums_match(const cantor_simplex::Embedding& e) {
  std::set<std::string> seen;
  for (const auto& x : e.source.atoms()) {
    auto it = e.blocks.find(x.id);
    if (it == e.blocks.end() || it->second.empty()) return false;
    std::vector<Rational> sum(e.source.k(), Rational(0));
    for (const auto& id : it->second) {
      if (!seen.insert(id).second) return false;
      bool found = false;
      for (const auto& y : e.target.atoms())
        if (y.id == id) {
          found = true;
          for (std::size_t q = 0; q < sum.size(); ++q) sum[q] += y.mu[q];
        }
      if (!found) return false;
    }
    for (std::size_t q = 0; q < sum.size(); ++q)
      if (sum[q] != x.mu[q]) return false;
  }
  return seen.size() == e.target.size();
}

/// Coordinate sums of every atom, which must all equal 1.
inline bool sums_to_one(const cantor_simplex::FiniteMeasuredAlgebra& a) {
  for (std::size_t q = 0; q < a.k(); ++q) {
    Rational s(0);
    for (const auto& x : a.atoms()) s += x.mu[q];
    if (s != 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Chains

/// Descendants of `ids` (atoms of stage `from`) in stage `to`, following the
/// refinement block maps one stage at a time.
inline std::vector<std::string> lift_ids(const cantor_simplex::LimitChain& chain, std::vector<std::string> ids,
                                         std::size_t from, std::size_t to) {
  for (std::size_t s = from; s < to; ++s) {
    std::vector<std::string> next;
    for (const auto& id : ids)
      for (const auto& c : chain.refinement(s).at(id)) next.push_back(c);
    ids = std::move(next);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline std::vector<Rational> sum_ids(const cantor_simplex::FiniteMeasuredAlgebra& stage,
                                     const std::vector<std::string>& ids) {
  std::vector<Rational> s(stage.k(), Rational(0));
  for (const auto& id : ids)
    for (std::size_t q = 0; q < s.size(); ++q) s[q] += stage.mu(id)[q];
  return s;
}

/// Depth-first assignment of every item to one of the targets so that
/// each target is hit exactly. Items are visited in the given order and
/// targets tried in `target_order`; gives up after `node_cap` nodes.
inline std::optional<std::vector<std::size_t>> group_items(const std::vector<cantor_simplex::MeasureVector>& items,
                                                           const std::vector<cantor_simplex::MeasureVector>& targets,
                                                           const std::vector<std::size_t>& target_order,
                                                           std::size_t node_cap = 200000) {
  std::vector<std::vector<Rational>> room;
  for (const auto& t : targets) room.push_back(t.values());
  std::vector<std::size_t> assign(items.size());
  std::size_t nodes = 0;
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (++nodes > node_cap) return false;
    if (i == items.size()) {
      for (const auto& r : room)
        for (const auto& x : r)
          if (x != 0) return false;
      return true;
    }
    for (auto t : target_order) {
      bool fits = true;
      for (std::size_t q = 0; q < room[t].size() && fits; ++q) fits = items[i][q] <= room[t][q];
      if (!fits) continue;
      for (std::size_t q = 0; q < room[t].size(); ++q) room[t][q] -= items[i][q];
      assign[i] = t;
      if (go(i + 1)) return true;
      for (std::size_t q = 0; q < room[t].size(); ++q) room[t][q] += items[i][q];
    }
    return false;
  };
  if (go(0)) return assign;
  return std::nullopt;
}

inline Rational r(const char* text) { return cantor_simplex::parse_rational(text); }

inline cantor_simplex::MeasureVector vec(std::initializer_list<const char*> xs) {
  std::vector<Rational> v;
  for (const char* x : xs) v.push_back(r(x));
  return cantor_simplex::MeasureVector(std::move(v));
}

}  // namespace oracle
