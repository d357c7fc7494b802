#pragma once

/**
 * @file dividing_partition.hpp
 * @brief N-dividing partitions: clopen partitions arranged in columns
 * U_0, w_1(U_0), ..., w_n(U_0) with n >= N, their refinement and merging,
 * existence by swap covers, and approximate division of a clopen set.
 */

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cantor_simplex/clopen.hpp"
#include "cantor_simplex/error.hpp"
#include "cantor_simplex/prefix_map.hpp"
#include "cantor_simplex/rational.hpp"

namespace cantor_simplex {

struct Column {
  ClopenSet base;
  std::vector<GroupWord> witnesses;  // w_1..w_n; level j is w_j(base)
};

struct DividingPartition {
  std::size_t N = 0;
  ClopenSet covered;
  std::vector<Column> columns;
  GeneratorRegistry generators;

  /// Level j of column i (j = 0 is the base).
  ClopenSet level(std::size_t i, std::size_t j) const {
    const auto& c = columns.at(i);
    if (j == 0) return c.base;
    return generators.apply(c.witnesses.at(j - 1), c.base);
  }
  std::vector<ClopenSet> levels(std::size_t i) const {
    std::vector<ClopenSet> out;
    for (std::size_t j = 0; j <= columns.at(i).witnesses.size(); ++j) out.push_back(level(i, j));
    return out;
  }
  /// Witness of level j, with the identity for the base.
  GroupWord witness(std::size_t i, std::size_t j) const {
    return j == 0 ? GroupWord{} : columns.at(i).witnesses.at(j - 1);
  }
};

struct PartitionReport {
  bool valid = true;
  std::vector<std::string> violations;
};

/// Checks column lengths, pairwise disjointness of all sets, that they
/// cover exactly `covered`, and, for each given measure, that every level
/// has the measure of its base.
inline PartitionReport validate(const DividingPartition& p, const std::vector<BernoulliMeasure>& measures = {}) {
  PartitionReport r;
  auto fail = [&](std::string m) {
    r.valid = false;
    r.violations.push_back(std::move(m));
  };
  ClopenSet seen;
  for (std::size_t i = 0; i < p.columns.size(); ++i) {
    const auto& c = p.columns[i];
    const auto tag = "column " + std::to_string(i);
    if (c.witnesses.size() < p.N)
      fail(tag + " has " + std::to_string(c.witnesses.size()) + " witnesses, fewer than N=" + std::to_string(p.N));
    if (c.base.is_empty()) fail(tag + " has an empty base");
    std::vector<ClopenSet> lv;
    try {
      lv = p.levels(i);
    } catch (const Error& e) {
      fail(tag + ": " + e.what());
      continue;
    }
    for (std::size_t j = 0; j < lv.size(); ++j) {
      if (!disjoint(seen, lv[j])) fail(tag + " level " + std::to_string(j) + " overlaps an earlier set");
      seen = set_union(seen, lv[j]);
      for (const auto& m : measures)
        if (m(lv[j]) != m(c.base))
          fail(tag + " level " + std::to_string(j) + " changes the Bernoulli(" + to_string(m.p()) + ") measure");
    }
  }
  if (!(seen == p.covered)) fail("union of the sets is " + to_string(seen) + ", not " + to_string(p.covered));
  return r;
}

inline void require_valid(const DividingPartition& p, const char* what) {
  auto r = validate(p);
  if (!r.valid) throw Error(ErrorKind::Precondition, std::string(what) + ": " + r.violations.front());
}

/// Single-column partition over a registry of its own.
inline DividingPartition single_column(std::size_t N, const ClopenSet& base, const std::vector<PrefixMapHomeo>& maps) {
  DividingPartition p;
  p.N = N;
  Column c{base, {}};
  for (const auto& g : maps) c.witnesses.push_back(p.generators.letter(p.generators.intern(g)));
  p.columns.push_back(std::move(c));
  ClopenSet cov;
  for (const auto& s : p.levels(0)) cov = set_union(cov, s);
  p.covered = cov;
  return p;
}

// ---------------------------------------------------------------------------
// The two operations

/// Replaces column i by one column per piece of `pieces`, all with the
/// witnesses of column i.
inline DividingPartition refine_column(DividingPartition p, std::size_t i, const std::vector<ClopenSet>& pieces) {
  if (i >= p.columns.size()) throw Error(ErrorKind::Precondition, "no column " + std::to_string(i));
  ClopenSet u;
  for (const auto& s : pieces) {
    if (s.is_empty()) throw Error(ErrorKind::Precondition, "empty piece in base partition");
    if (!disjoint(u, s)) throw Error(ErrorKind::Precondition, "base pieces overlap");
    u = set_union(u, s);
  }
  if (!(u == p.columns[i].base)) throw Error(ErrorKind::Precondition, "pieces do not partition the base");
  const auto witnesses = p.columns[i].witnesses;
  std::vector<Column> replacement;
  for (const auto& s : pieces) replacement.push_back(Column{s, witnesses});
  p.columns.erase(p.columns.begin() + static_cast<std::ptrdiff_t>(i));
  p.columns.insert(p.columns.begin() + static_cast<std::ptrdiff_t>(i), replacement.begin(), replacement.end());
  return p;
}

/// Adds V = g(U_{i,j}) on top of column i, with witness g w_j.
inline DividingPartition add_on_top(DividingPartition p, std::size_t i, std::size_t j, const ClopenSet& v,
                                    const GroupWord& g) {
  if (i >= p.columns.size()) throw Error(ErrorKind::Precondition, "no column " + std::to_string(i));
  if (j > p.columns[i].witnesses.size()) throw Error(ErrorKind::Precondition, "no level " + std::to_string(j));
  if (v.is_empty()) throw Error(ErrorKind::Precondition, "cannot add an empty set");
  if (!disjoint(v, p.covered)) throw Error(ErrorKind::Precondition, "V meets the covered set");
  if (!(p.generators.apply(g, p.level(i, j)) == v))
    throw Error(ErrorKind::Precondition, "g does not map the chosen atom onto V");
  p.columns[i].witnesses.push_back(p.generators.compose(g, p.witness(i, j)));
  p.covered = set_union(p.covered, v);
  return p;
}

// ---------------------------------------------------------------------------
// Merging

/// A column (V0; h_1..h_m) given over `registry`.
struct ColumnSpec {
  ClopenSet base;
  std::vector<GroupWord> maps;
};

struct SingleMergeResult {
  DividingPartition partition;  // refines the input, covers A u V u h_1(V) u ... u h_m(V)
  ClopenSet residual;           // W0 = V0 \ A
};

namespace detail {

/// Common refinement of `pieces` by `cut`: each piece splits into its parts
/// inside and outside `cut` (empty parts dropped).
inline std::vector<ClopenSet> split_by(const std::vector<ClopenSet>& pieces, const ClopenSet& cut) {
  std::vector<ClopenSet> out;
  for (const auto& s : pieces) {
    auto in = set_intersection(s, cut);
    auto outside = set_difference(s, cut);
    if (!in.is_empty()) out.push_back(std::move(in));
    if (!outside.is_empty()) out.push_back(std::move(outside));
  }
  return out;
}

}  // namespace detail

/// One step of the merge: `col` is expressed over p.generators. Let
/// V = V0 n A. The partition is refined until every atom lies in one atom
/// of the partition of V generated by the sets V n h_j^-1(A), or in A \ V;
/// then each h_j(C) disjoint from A, for atoms C inside V, is added on top
/// of C's column.
inline SingleMergeResult merge_single_column(DividingPartition p, const ColumnSpec& col) {
  const ClopenSet a = p.covered;
  const ClopenSet v = set_intersection(col.base, a);
  if (v.is_empty()) return {std::move(p), col.base};
  const ClopenSet w0 = set_difference(col.base, v);

  std::vector<ClopenSet> generated{v};
  for (const auto& h : col.maps) generated = detail::split_by(generated, p.generators.apply(p.generators.inverse(h), a));
  std::vector<ClopenSet> target = generated;
  if (auto rest = set_difference(a, v); !rest.is_empty()) target.push_back(rest);

  // Refine each column so each of its atoms lies in one target piece.
  for (std::size_t i = 0; i < p.columns.size();) {
    std::vector<ClopenSet> pieces{p.columns[i].base};
    const std::size_t n = p.columns[i].witnesses.size();
    for (std::size_t j = 0; j <= n; ++j) {
      const auto lv = p.level(i, j);
      const auto back = p.generators.inverse(p.witness(i, j));
      for (const auto& t : target) {
        auto part = set_intersection(lv, t);
        if (part.is_empty() || part == lv) continue;
        pieces = detail::split_by(pieces, p.generators.apply(back, part));
      }
    }
    if (pieces.size() > 1) p = refine_column(std::move(p), i, pieces);
    i += pieces.size();
  }

  // Add images on top; the levels of a column are inspected before adding.
  for (std::size_t i = 0; i < p.columns.size(); ++i) {
    const auto lv = p.levels(i);
    for (std::size_t j = 0; j < lv.size(); ++j) {
      if (!subset_of(lv[j], v)) continue;
      for (const auto& h : col.maps) {
        auto img = p.generators.apply(h, lv[j]);
        if (disjoint(img, a)) p = add_on_top(std::move(p), i, j, img, h);
      }
    }
  }
  return {std::move(p), w0};
}

/// Partition of A u B from partitions of A and of B (same N).
inline DividingPartition merge_partitions(const DividingPartition& pa, const DividingPartition& pb) {
  if (pa.N != pb.N) throw Error(ErrorKind::Precondition, "partitions have different N");
  DividingPartition p = pa;
  for (std::size_t c = 0; c < pb.columns.size(); ++c) {
    std::vector<GroupWord> h;
    for (const auto& w : pb.columns[c].witnesses) h.push_back(p.generators.import(pb.generators, w));
    const std::size_t m = h.size();
    ClopenSet w = pb.columns[c].base;
    // Clear each level of the residual column in turn.
    for (std::size_t i = 0; i <= m && !w.is_empty(); ++i) {
      ColumnSpec spec;
      if (i == 0) {
        spec.base = w;
        spec.maps = h;
      } else {
        const auto hi_inv = p.generators.inverse(h[i - 1]);
        spec.base = p.generators.apply(h[i - 1], w);
        spec.maps.push_back(hi_inv);
        for (std::size_t j = 0; j < m; ++j)
          if (j != i - 1) spec.maps.push_back(p.generators.compose(h[j], hi_inv));
      }
      auto step = merge_single_column(std::move(p), spec);
      p = std::move(step.partition);
      w = i == 0 ? step.residual : p.generators.apply(p.generators.inverse(h[i - 1]), step.residual);
    }
    if (!w.is_empty()) {
      p.columns.push_back(Column{w, h});
      for (const auto& s : p.levels(p.columns.size() - 1)) p.covered = set_union(p.covered, s);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Existence

enum class GeneratorFamily { AllSwaps, WeightPreservingSwaps };

inline std::string to_string(GeneratorFamily f) { return f == GeneratorFamily::AllSwaps ? "all" : "weight"; }

inline GeneratorFamily parse_family(const std::string& s) {
  if (s == "all") return GeneratorFamily::AllSwaps;
  if (s == "weight") return GeneratorFamily::WeightPreservingSwaps;
  throw Error(ErrorKind::MalformedInput, "unknown generator family '" + s + "' (expected all or weight)");
}

namespace detail {

/// Column on the words `ws` (equal length, disjoint): base ws[0], and the
/// swap of ws[0] with each other word.
inline DividingPartition swap_column(std::size_t N, const std::vector<Word>& ws) {
  std::vector<PrefixMapHomeo> maps;
  for (std::size_t i = 1; i < ws.size(); ++i) maps.push_back(PrefixMapHomeo::swap(ws[0], ws[i]));
  return single_column(N, ClopenSet::cylinder(ws[0]), maps);
}

inline std::vector<Word> extensions(const Word& w, std::size_t r) {
  std::vector<Word> out;
  for (std::size_t bits = 0; bits < (std::size_t{1} << r); ++bits) {
    Word x = w;
    for (std::size_t i = r; i-- > 0;) x.push_back(((bits >> i) & 1U) ? '1' : '0');
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace detail

/// An N-dividing partition of A built from swap columns, merged together.
/// All swaps: each canonical word w of A is cut into the 2^r words w s
/// with 2^r >= N + 1, forming one column. Weight-preserving swaps: pending
/// words are grouped by (length, weight); a group of at least N + 1 words
/// becomes a column, the others are cut in two and retried. Words never
/// exceed `word_budget` letters; running out is a Budget error.
inline DividingPartition cover_clopen(const ClopenSet& a, std::size_t N, GeneratorFamily family,
                                      std::size_t word_budget) {
  if (a.is_empty()) throw Error(ErrorKind::Precondition, "cannot cover the empty set");
  if (N == 0) throw Error(ErrorKind::Precondition, "N must be at least 1");
  std::vector<DividingPartition> parts;
  if (family == GeneratorFamily::AllSwaps) {
    std::size_t r = 0;
    while ((std::size_t{1} << r) < N + 1) ++r;
    for (const auto& w : a.words()) {
      if (w.size() + r > word_budget)
        throw Error(ErrorKind::Budget, "word budget " + std::to_string(word_budget) + " too small to cut [" + w + "]");
      parts.push_back(detail::swap_column(N, detail::extensions(w, r)));
    }
  } else {
    std::vector<Word> pending = a.words();
    while (!pending.empty()) {
      std::map<std::pair<std::size_t, std::size_t>, std::vector<Word>> groups;
      for (const auto& w : pending) groups[{w.size(), weight(w)}].push_back(w);
      std::vector<Word> next;
      for (auto& [key, ws] : groups) {
        if (ws.size() >= N + 1) {
          std::sort(ws.begin(), ws.end());
          parts.push_back(detail::swap_column(N, ws));
          continue;
        }
        for (const auto& w : ws) {
          if (w.size() + 1 > word_budget)
            throw Error(ErrorKind::Budget, "no weight-preserving column for [" + w + "] within word budget " +
                                               std::to_string(word_budget));
          next.push_back(w + '0');
          next.push_back(w + '1');
        }
      }
      pending = std::move(next);
    }
  }
  DividingPartition out;
  out.N = N;
  for (const auto& p : parts) out = merge_partitions(out, p);
  return out;
}

// ---------------------------------------------------------------------------
// Approximate division

struct MeasureCheck {
  Rational p;              // Bernoulli parameter
  Rational mu_a;           // mu(A)
  std::vector<Rational> mu_b;  // mu(B_k), k = 0..n-1
  Rational n_mu_b0;        // n mu(B_0)
  Rational gap;            // mu(A) - n mu(B_0)
  Rational leftover;       // sum_i q_i mu(U_{i,0})
  Rational internal_bound; // (n-1)/N mu(A)
  Rational base_mass;      // sum_i mu(U_{i,0})
  bool lower_ok = false;     // mu(A) - eps <= n mu(B_0)
  bool upper_ok = false;     // n mu(B_0) <= mu(A)
  bool internal_ok = false;  // gap <= (n-1)/N mu(A)
  bool leftover_ok = false;  // gap == leftover
  bool base_ok = false;      // base_mass < mu(A)/N
  bool equal_ok = false;     // all mu(B_k) equal
  bool invariant_ok = false; // every level has its base's measure
  bool all_ok() const {
    return lower_ok && upper_ok && internal_ok && leftover_ok && base_ok && equal_ok && invariant_ok;
  }
};

struct DivisionCertificate {
  std::size_t n = 0;
  Rational eps;
  std::size_t N = 0;
  GeneratorFamily family = GeneratorFamily::AllSwaps;
  ClopenSet a;
  DividingPartition partition;
  std::vector<std::size_t> p_i, q_i;  // n_i + 1 = n p_i + q_i
  std::vector<ClopenSet> b;           // B_0..B_{n-1}
  bool partition_ok = false;
  bool b_disjoint_ok = false;  // B_k pairwise disjoint, inside A
  std::vector<MeasureCheck> checks;
  bool all_ok() const {
    return partition_ok && b_disjoint_ok &&
           std::all_of(checks.begin(), checks.end(), [](const MeasureCheck& c) { return c.all_ok(); });
  }
};

/// Smallest integer N with N > n / eps.
inline std::size_t dividing_level(std::size_t n, const Rational& eps) {
  mpz_class f = floor_to_integer(Rational(static_cast<unsigned long>(n)) / eps) + 1;
  if (!f.fits_ulong_p()) throw Error(ErrorKind::Budget, "N too large");
  return f.get_ui();
}

/// B_k = union over columns i and l < p_i of U_{i, k + n l}, with the
/// exact bound checks for each measure.
inline DivisionCertificate divide_with_partition(const ClopenSet& a, const DividingPartition& part, std::size_t n,
                                                 const Rational& eps, GeneratorFamily family,
                                                 const std::vector<BernoulliMeasure>& measures) {
  if (n == 0) throw Error(ErrorKind::Precondition, "n must be at least 1");
  if (sgn(eps) <= 0) throw Error(ErrorKind::Precondition, "eps must be positive");
  DivisionCertificate cert;
  cert.n = n;
  cert.eps = eps;
  cert.N = part.N;
  cert.family = family;
  cert.a = a;
  cert.partition = part;
  auto report = validate(part, measures);
  cert.partition_ok = report.valid && part.covered == a;

  std::vector<std::vector<ClopenSet>> levels;
  for (std::size_t i = 0; i < part.columns.size(); ++i) levels.push_back(part.levels(i));
  cert.b.assign(n, ClopenSet());
  for (const auto& lv : levels) {
    const std::size_t size = lv.size();
    cert.p_i.push_back(size / n);
    cert.q_i.push_back(size % n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = 0; l < size / n; ++l) cert.b[k] = set_union(cert.b[k], lv[k + n * l]);
  }
  cert.b_disjoint_ok = true;
  for (std::size_t k = 0; k < n; ++k) {
    if (!subset_of(cert.b[k], a)) cert.b_disjoint_ok = false;
    for (std::size_t l = k + 1; l < n; ++l)
      if (!disjoint(cert.b[k], cert.b[l])) cert.b_disjoint_ok = false;
  }

  const Rational nn(static_cast<unsigned long>(n));
  const Rational NN(static_cast<unsigned long>(part.N));
  for (const auto& m : measures) {
    MeasureCheck c;
    c.p = m.p();
    c.mu_a = m(a);
    for (const auto& bk : cert.b) c.mu_b.push_back(m(bk));
    c.n_mu_b0 = nn * c.mu_b.front();
    c.gap = c.mu_a - c.n_mu_b0;
    c.leftover = 0;
    c.base_mass = 0;
    c.invariant_ok = true;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const Rational base = m(levels[i].front());
      c.base_mass += base;
      c.leftover += Rational(static_cast<unsigned long>(cert.q_i[i])) * base;
      for (const auto& s : levels[i])
        if (m(s) != base) c.invariant_ok = false;
    }
    c.internal_bound = (nn - 1) / NN * c.mu_a;
    c.lower_ok = c.mu_a - eps <= c.n_mu_b0;
    c.upper_ok = c.n_mu_b0 <= c.mu_a;
    c.internal_ok = c.gap <= c.internal_bound;
    c.leftover_ok = c.gap == c.leftover;
    c.base_ok = c.base_mass < c.mu_a / NN;
    c.equal_ok = std::all_of(c.mu_b.begin(), c.mu_b.end(), [&](const Rational& x) { return x == c.mu_b.front(); });
    cert.checks.push_back(std::move(c));
  }
  return cert;
}

/// Approximate division of A into n equal parts up to eps, for every
/// measure invariant under the chosen swap family.
inline DivisionCertificate approx_divide(const ClopenSet& a, std::size_t n, const Rational& eps, GeneratorFamily family,
                                         const std::vector<BernoulliMeasure>& measures, std::size_t word_budget = 24) {
  if (n == 0) throw Error(ErrorKind::Precondition, "n must be at least 1");
  if (sgn(eps) <= 0) throw Error(ErrorKind::Precondition, "eps must be positive, got " + to_string(eps));
  if (a.is_empty()) throw Error(ErrorKind::Precondition, "A must be nonempty");
  if (family == GeneratorFamily::AllSwaps)
    for (const auto& m : measures)
      if (!m.is_uniform())
        throw Error(ErrorKind::Precondition,
                    "Bernoulli(" + to_string(m.p()) + ") is not invariant under all swaps; use weight mode");
  const std::size_t N = dividing_level(n, eps);
  auto part = cover_clopen(a, N, family, word_budget);
  return divide_with_partition(a, part, n, eps, family, measures);
}

}  // namespace cantor_simplex
