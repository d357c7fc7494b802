#pragma once

/**
 * @file amalgamation.hpp
 * @brief Amalgamation of finite measured algebras over a common subalgebra.
 *
 * The atoms of the amalgam D of alpha: A -> B and beta: A -> C are the pairs
 * b_j (x) c_k with b_j, c_k lying over the same atom a_i of A. Their measure
 * vectors form, for each a_i, a matrix with row sums mu(b_j) and column sums
 * mu(c_k): a point of a transportation polytope, chosen here coordinatewise.
 */

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cantor_simplex/error.hpp"
#include "cantor_simplex/measured_algebra.hpp"

namespace cantor_simplex {

enum class CouplingStrategy {
  Product,    // h_jk(e) = rows_j(e) * cols_k(e) / f(e); always strictly positive
  Northwest,  // corner rule, run independently per coordinate; entries may vanish
};

inline std::string to_string(CouplingStrategy s) {
  return s == CouplingStrategy::Product ? "product" : "northwest";
}

inline CouplingStrategy parse_strategy(const std::string& s) {
  if (s == "product") return CouplingStrategy::Product;
  if (s == "northwest") return CouplingStrategy::Northwest;
  throw Error(ErrorKind::MalformedInput, "unknown coupling strategy '" + s + "'");
}

using CouplingMatrix = std::vector<std::vector<MeasureVector>>;

/// Finite sum property: a matrix h with row sums `rows` and column sums
/// `cols`, both decompositions of `f`.
inline CouplingMatrix riesz_decompose(const MeasureVector& f, const std::vector<MeasureVector>& rows,
                                      const std::vector<MeasureVector>& cols, CouplingStrategy strategy) {
  const std::size_t k = f.size();
  if (rows.empty() || cols.empty()) throw Error(ErrorKind::Precondition, "riesz_decompose needs rows and columns");
  if (!f.all_positive()) throw Error(ErrorKind::Precondition, "total " + to_string(f) + " is not positive");
  MeasureVector row_sum = MeasureVector::zeros(k), col_sum = MeasureVector::zeros(k);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].size() != k || !rows[j].all_positive())
      throw Error(ErrorKind::Precondition, "row " + std::to_string(j) + " is not a positive vector");
    row_sum += rows[j];
  }
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c].size() != k || !cols[c].all_positive())
      throw Error(ErrorKind::Precondition, "column " + std::to_string(c) + " is not a positive vector");
    col_sum += cols[c];
  }
  if (!(row_sum == f)) throw Error(ErrorKind::Precondition, "rows sum to " + to_string(row_sum) + ", not " + to_string(f));
  if (!(col_sum == f))
    throw Error(ErrorKind::Precondition, "columns sum to " + to_string(col_sum) + ", not " + to_string(f));

  CouplingMatrix h(rows.size(), std::vector<MeasureVector>(cols.size(), MeasureVector::zeros(k)));
  if (strategy == CouplingStrategy::Product) {
    for (std::size_t j = 0; j < rows.size(); ++j)
      for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t e = 0; e < k; ++e) h[j][c][e] = rows[j][e] * cols[c][e] / f[e];
    return h;
  }
  for (std::size_t e = 0; e < k; ++e) {
    std::vector<Rational> supply, demand;
    for (const auto& r : rows) supply.push_back(r[e]);
    for (const auto& c : cols) demand.push_back(c[e]);
    std::size_t j = 0, c = 0;
    while (j < rows.size() && c < cols.size()) {
      Rational x = supply[j] < demand[c] ? supply[j] : demand[c];
      h[j][c][e] = x;
      supply[j] -= x;
      demand[c] -= x;
      // Advance exactly one index per step so ties do not skip a cell.
      if (sgn(supply[j]) == 0 && j + 1 < rows.size())
        ++j;
      else if (sgn(demand[c]) == 0)
        ++c;
      else
        ++j;
    }
  }
  return h;
}

/// Per-atom record of the marginal identities behind an amalgam.
struct MarginalCheck {
  std::string source_atom;
  std::string kind;  // "row" or "column"
  std::string atom;  // the B- or C-atom whose measure is reproduced
  MeasureVector expected;
  MeasureVector actual;
  bool holds = false;
};

struct Amalgam {
  FiniteMeasuredAlgebra d;
  Embedding alpha_prime;  // B -> D
  Embedding beta_prime;   // C -> D
  CouplingStrategy strategy = CouplingStrategy::Product;
  std::vector<MarginalCheck> marginals;
};

inline std::string pair_atom_id(const std::string& b, const std::string& c) { return b + "⊗" + c; }

/// Amalgamates alpha: A -> B and beta: A -> C. Under the product strategy the
/// result is always in the class; under northwest an atom that vanishes at
/// some but not all vertices makes the call fail.
inline Amalgam amalgamate(const Embedding& alpha, const Embedding& beta,
                          CouplingStrategy strategy = CouplingStrategy::Product) {
  if (!(alpha.source == beta.source))
    throw Error(ErrorKind::Precondition, "amalgamate: embeddings have different sources");
  for (const auto* e : {&alpha, &beta}) {
    auto check = is_embedding(*e);
    if (!check.ok) throw Error(ErrorKind::Precondition, "amalgamate: " + check.violation);
  }
  const auto& a = alpha.source;
  const std::size_t k = a.k();
  std::vector<Atom> atoms;
  Amalgam out;
  out.strategy = strategy;
  BlockMap alpha_blocks, beta_blocks;
  for (const auto& ai : a.atoms()) {
    const auto& js = alpha.blocks.at(ai.id);
    const auto& ks = beta.blocks.at(ai.id);
    std::vector<MeasureVector> rows, cols;
    for (const auto& j : js) rows.push_back(alpha.target.mu(j));
    for (const auto& c : ks) cols.push_back(beta.target.mu(c));
    auto h = riesz_decompose(ai.mu, rows, cols, strategy);
    for (std::size_t j = 0; j < js.size(); ++j) {
      for (std::size_t c = 0; c < ks.size(); ++c) {
        const auto& cell = h[j][c];
        if (cell.all_zero()) continue;
        if (cell.any_zero())
          throw Error(ErrorKind::Precondition, "coupling of '" + js[j] + "' and '" + ks[c] +
                                                   "' vanishes at some vertices but not all: " + to_string(cell));
        auto id = pair_atom_id(js[j], ks[c]);
        atoms.push_back(Atom{id, cell});
        alpha_blocks[js[j]].push_back(id);
        beta_blocks[ks[c]].push_back(id);
      }
    }
    for (std::size_t j = 0; j < js.size(); ++j) {
      MeasureVector s = MeasureVector::zeros(k);
      for (std::size_t c = 0; c < ks.size(); ++c) s += h[j][c];
      out.marginals.push_back({ai.id, "row", js[j], rows[j], s, s == rows[j]});
    }
    for (std::size_t c = 0; c < ks.size(); ++c) {
      MeasureVector s = MeasureVector::zeros(k);
      for (std::size_t j = 0; j < js.size(); ++j) s += h[j][c];
      out.marginals.push_back({ai.id, "column", ks[c], cols[c], s, s == cols[c]});
    }
  }
  out.d = FiniteMeasuredAlgebra(k, std::move(atoms));
  for (auto& [id, block] : alpha_blocks) std::sort(block.begin(), block.end(), AtomIdLess{});
  for (auto& [id, block] : beta_blocks) std::sort(block.begin(), block.end(), AtomIdLess{});
  out.alpha_prime = Embedding{alpha.target, out.d, std::move(alpha_blocks)};
  out.beta_prime = Embedding{beta.target, out.d, std::move(beta_blocks)};
  return out;
}

/// Joint embedding: amalgamation over the trivial algebra.
inline Amalgam joint_embed(const FiniteMeasuredAlgebra& b, const FiniteMeasuredAlgebra& c) {
  auto unit = FiniteMeasuredAlgebra::trivial(b.k());
  Embedding alpha{unit, b, {{"u", b.ids()}}};
  Embedding beta{unit, c, {{"u", c.ids()}}};
  return amalgamate(alpha, beta);
}

/// alpha' o alpha == beta' o beta, compared as block maps.
inline bool square_commutes(const Embedding& alpha, const Embedding& beta, const Amalgam& m) {
  auto left = compose(alpha, m.alpha_prime);
  auto right = compose(beta, m.beta_prime);
  return left.blocks == right.blocks;
}

}  // namespace cantor_simplex
