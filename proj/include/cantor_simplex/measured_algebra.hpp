#pragma once

/**
 * @file measured_algebra.hpp
 * @brief Finite Boolean algebras carrying one probability measure per vertex
 * of a finite-dimensional simplex, and block embeddings between them.
 *
 * An affine function on the simplex is stored as its vertex values, so a
 * MeasureVector of length k is the map q -> mu_q(a) read at the k vertices.
 * A finite algebra is determined by its atoms; every other element is a join
 * of atoms, so only atoms are materialized.
 */

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cantor_simplex/error.hpp"
#include "cantor_simplex/rational.hpp"

namespace cantor_simplex {

class MeasureVector {
 public:
  MeasureVector() = default;
  explicit MeasureVector(std::vector<Rational> values) : values_(std::move(values)) {}
  MeasureVector(std::size_t k, const Rational& fill) : values_(k, fill) {}

  static MeasureVector ones(std::size_t k) { return MeasureVector(k, Rational(1)); }
  static MeasureVector zeros(std::size_t k) { return MeasureVector(k, Rational(0)); }

  std::size_t size() const { return values_.size(); }
  const Rational& operator[](std::size_t i) const { return values_[i]; }
  Rational& operator[](std::size_t i) { return values_[i]; }
  const std::vector<Rational>& values() const { return values_; }

  MeasureVector& operator+=(const MeasureVector& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  MeasureVector& operator-=(const MeasureVector& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  MeasureVector& operator*=(const Rational& s) {
    for (auto& v : values_) v *= s;
    return *this;
  }
  MeasureVector& operator/=(const Rational& s) {
    for (auto& v : values_) v /= s;
    return *this;
  }

  friend MeasureVector operator+(MeasureVector a, const MeasureVector& b) { return a += b; }
  friend MeasureVector operator-(MeasureVector a, const MeasureVector& b) { return a -= b; }
  friend MeasureVector operator*(MeasureVector a, const Rational& s) { return a *= s; }
  friend MeasureVector operator/(MeasureVector a, const Rational& s) { return a /= s; }
  friend bool operator==(const MeasureVector& a, const MeasureVector& b) {
    return a.values_ == b.values_;
  }
  /// Lexicographic; used only for canonical ordering, not for the measure order.
  friend bool operator<(const MeasureVector& a, const MeasureVector& b) {
    return a.values_ < b.values_;
  }

  bool all_positive() const {
    return std::all_of(values_.begin(), values_.end(), [](const Rational& v) { return sgn(v) > 0; });
  }
  bool all_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](const Rational& v) { return sgn(v) == 0; });
  }
  bool any_zero() const {
    return std::any_of(values_.begin(), values_.end(), [](const Rational& v) { return sgn(v) == 0; });
  }
  /// Coordinatewise <=.
  bool le(const MeasureVector& o) const {
    check_same_size(o);
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (values_[i] > o.values_[i]) return false;
    return true;
  }
  /// Coordinatewise strict <.
  bool lt(const MeasureVector& o) const {
    check_same_size(o);
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (values_[i] >= o.values_[i]) return false;
    return true;
  }
  Rational min() const { return *std::min_element(values_.begin(), values_.end()); }
  Rational max() const { return *std::max_element(values_.begin(), values_.end()); }
  bool denominators_at_most(std::uint64_t bound) const {
    return std::all_of(values_.begin(), values_.end(),
                       [bound](const Rational& v) { return denominator_at_most(v, bound); });
  }

 private:
  void check_same_size(const MeasureVector& o) const {
    if (o.values_.size() != values_.size())
      throw Error(ErrorKind::Precondition, "measure vectors of different lengths");
  }

  std::vector<Rational> values_;
};

inline std::string to_string(const MeasureVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += to_string(v[i]);
  }
  return s + ")";
}

/// Natural order on atom ids: digit runs compare numerically, so "u.10"
/// sorts after "u.9".
struct AtomIdLess {
  bool operator()(const std::string& a, const std::string& b) const {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
      const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
      if (da && db) {
        std::size_t ie = i, je = j;
        while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
        while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
        std::string_view ra(a.data() + i, ie - i), rb(b.data() + j, je - j);
        while (ra.size() > 1 && ra.front() == '0') ra.remove_prefix(1);
        while (rb.size() > 1 && rb.front() == '0') rb.remove_prefix(1);
        if (ra.size() != rb.size()) return ra.size() < rb.size();
        if (ra != rb) return ra < rb;
        if (ie - i != je - j) return ie - i < je - j;
        i = ie;
        j = je;
      } else {
        if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
        ++i;
        ++j;
      }
    }
    return a.size() - i < b.size() - j;
  }
};

using AtomIdSet = std::set<std::string, AtomIdLess>;

struct Atom {
  std::string id;
  MeasureVector mu;
};

/// A finite E-structure: atoms in canonical (natural id) order.
class FiniteMeasuredAlgebra {
 public:
  FiniteMeasuredAlgebra() = default;
  FiniteMeasuredAlgebra(std::size_t k, std::vector<Atom> atoms) : k_(k), atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return AtomIdLess{}(a.id, b.id); });
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!index_.emplace(atoms_[i].id, i).second)
        throw Error(ErrorKind::MalformedInput, "duplicate atom id '" + atoms_[i].id + "'");
    }
  }

  /// The two-element algebra {0,1}; its unit carries measure 1 at every vertex.
  static FiniteMeasuredAlgebra trivial(std::size_t k, const std::string& unit_id = "u") {
    return FiniteMeasuredAlgebra(k, {Atom{unit_id, MeasureVector::ones(k)}});
  }

  std::size_t k() const { return k_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& atom(std::size_t i) const { return atoms_[i]; }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  std::size_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error(ErrorKind::Precondition, "unknown atom '" + id + "'");
    return it->second;
  }
  const MeasureVector& mu(const std::string& id) const { return atoms_[index_of(id)].mu; }

  template <class Ids>
  MeasureVector measure_of(const Ids& ids) const {
    MeasureVector total = MeasureVector::zeros(k_);
    for (const auto& id : ids) total += mu(id);
    return total;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(atoms_.size());
    for (const auto& a : atoms_) out.push_back(a.id);
    return out;
  }

  friend bool operator==(const FiniteMeasuredAlgebra& a, const FiniteMeasuredAlgebra& b) {
    if (a.k_ != b.k_ || a.atoms_.size() != b.atoms_.size()) return false;
    for (std::size_t i = 0; i < a.atoms_.size(); ++i)
      if (a.atoms_[i].id != b.atoms_[i].id || !(a.atoms_[i].mu == b.atoms_[i].mu)) return false;
    return true;
  }

 private:
  std::size_t k_ = 0;
  std::vector<Atom> atoms_;
  std::map<std::string, std::size_t> index_;
};

struct ValidityReport {
  bool valid = true;
  std::vector<std::string> violations;
};

/// Checks membership in the class: at least one atom, every atom vector of
/// length k with entries in (0,1], and exact column sums of 1.
inline ValidityReport validate(const FiniteMeasuredAlgebra& algebra) {
  ValidityReport report;
  auto fail = [&](std::string msg) {
    report.valid = false;
    report.violations.push_back(std::move(msg));
  };
  if (algebra.k() == 0) fail("vertex count k must be at least 1");
  if (algebra.size() == 0) fail("algebra has no atoms");
  std::vector<Rational> sums(algebra.k(), Rational(0));
  for (const auto& a : algebra.atoms()) {
    if (a.mu.size() != algebra.k()) {
      fail("atom '" + a.id + "' has " + std::to_string(a.mu.size()) + " coordinates, expected " +
           std::to_string(algebra.k()));
      continue;
    }
    for (std::size_t e = 0; e < algebra.k(); ++e) {
      if (sgn(a.mu[e]) <= 0)
        fail("atom '" + a.id + "' coordinate " + std::to_string(e + 1) + " is not positive: " +
             to_string(a.mu[e]));
      if (a.mu[e] > 1)
        fail("atom '" + a.id + "' coordinate " + std::to_string(e + 1) + " exceeds 1: " + to_string(a.mu[e]));
      sums[e] += a.mu[e];
    }
  }
  for (std::size_t e = 0; e < algebra.k(); ++e)
    if (sums[e] != 1) fail("coordinate " + std::to_string(e + 1) + " sums to " + to_string(sums[e]));
  return report;
}

inline void require_valid(const FiniteMeasuredAlgebra& algebra, const std::string& what) {
  auto report = validate(algebra);
  if (!report.valid)
    throw Error(ErrorKind::Precondition, what + " is not a valid algebra: " + report.violations.front());
}

using BlockMap = std::map<std::string, std::vector<std::string>, AtomIdLess>;

/// alpha: source -> target, each source atom sent to the join of its block.
struct Embedding {
  FiniteMeasuredAlgebra source;
  FiniteMeasuredAlgebra target;
  BlockMap blocks;
};

struct EmbeddingCheck {
  bool ok = true;
  std::string violation;
};

inline EmbeddingCheck is_embedding(const Embedding& e) {
  auto fail = [](std::string msg) { return EmbeddingCheck{false, std::move(msg)}; };
  if (e.source.k() != e.target.k()) return fail("source and target have different vertex counts");
  std::set<std::string> seen;
  for (const auto& a : e.source.atoms()) {
    auto it = e.blocks.find(a.id);
    if (it == e.blocks.end() || it->second.empty()) return fail("source atom '" + a.id + "' has an empty block");
    MeasureVector sum = MeasureVector::zeros(e.source.k());
    for (const auto& t : it->second) {
      if (!e.target.contains(t)) return fail("block of '" + a.id + "' names unknown target atom '" + t + "'");
      if (!seen.insert(t).second) return fail("target atom '" + t + "' appears in two blocks");
      sum += e.target.mu(t);
    }
    if (!(sum == a.mu))
      return fail("block of '" + a.id + "' sums to " + to_string(sum) + " but the atom has " + to_string(a.mu));
  }
  for (const auto& [src, block] : e.blocks)
    if (!e.source.contains(src)) return fail("block keyed by unknown source atom '" + src + "'");
  if (seen.size() != e.target.size()) return fail("blocks do not exhaust the target atoms");
  return {};
}

inline Embedding identity_embedding(const FiniteMeasuredAlgebra& a) {
  Embedding e{a, a, {}};
  for (const auto& atom : a.atoms()) e.blocks[atom.id] = {atom.id};
  return e;
}

/// Block composition second o first (first: A->B, second: B->C).
inline Embedding compose(const Embedding& first, const Embedding& second) {
  Embedding out{first.source, second.target, {}};
  for (const auto& [src, mid] : first.blocks) {
    auto& block = out.blocks[src];
    for (const auto& b : mid) {
      auto it = second.blocks.find(b);
      if (it == second.blocks.end())
        throw Error(ErrorKind::Precondition, "composition: '" + b + "' missing from second embedding");
      block.insert(block.end(), it->second.begin(), it->second.end());
    }
    std::sort(block.begin(), block.end(), AtomIdLess{});
  }
  return out;
}

/// Same multiset of atom vectors, i.e. isomorphic up to atom permutation.
inline bool isomorphic(const FiniteMeasuredAlgebra& a, const FiniteMeasuredAlgebra& b) {
  if (a.k() != b.k() || a.size() != b.size()) return false;
  std::vector<MeasureVector> va, vb;
  for (const auto& x : a.atoms()) va.push_back(x.mu);
  for (const auto& x : b.atoms()) vb.push_back(x.mu);
  std::sort(va.begin(), va.end());
  std::sort(vb.begin(), vb.end());
  return va == vb;
}

using Parts = std::vector<std::vector<std::string>>;

/// A subalgebra of `ambient` given by a partition of its atoms. The
/// resulting atoms are named after the least ambient atom they contain.
inline FiniteMeasuredAlgebra present(const FiniteMeasuredAlgebra& ambient, const Parts& parts) {
  std::set<std::string> seen;
  std::vector<Atom> atoms;
  for (const auto& part : parts) {
    if (part.empty()) throw Error(ErrorKind::Precondition, "presentation has an empty part");
    for (const auto& id : part) {
      if (!ambient.contains(id))
        throw Error(ErrorKind::Precondition, "atom '" + id + "' is not in the ambient stage");
      if (!seen.insert(id).second)
        throw Error(ErrorKind::Precondition, "atom '" + id + "' appears in two parts");
    }
    auto least = *std::min_element(part.begin(), part.end(), AtomIdLess{});
    atoms.push_back(Atom{least, ambient.measure_of(part)});
  }
  if (seen.size() != ambient.size())
    throw Error(ErrorKind::Precondition, "presentation does not cover the ambient stage");
  return FiniteMeasuredAlgebra(ambient.k(), std::move(atoms));
}

struct Refinement {
  Parts parts;
  FiniteMeasuredAlgebra algebra;
};

/// Coarsest common refinement of two subalgebras of one ambient algebra.
inline Refinement common_refinement(const FiniteMeasuredAlgebra& ambient, const Parts& a, const Parts& b) {
  // Presenting both first validates that each is a partition of `ambient`.
  (void)present(ambient, a);
  (void)present(ambient, b);
  std::map<std::string, std::size_t> part_of_b;
  for (std::size_t j = 0; j < b.size(); ++j)
    for (const auto& id : b[j]) part_of_b[id] = j;
  Parts out;
  for (const auto& pa : a) {
    std::map<std::size_t, std::vector<std::string>> by_b;
    for (const auto& id : pa) by_b[part_of_b.at(id)].push_back(id);
    for (auto& [j, ids] : by_b) {
      std::sort(ids.begin(), ids.end(), AtomIdLess{});
      out.push_back(std::move(ids));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return AtomIdLess{}(x.front(), y.front()); });
  auto algebra = present(ambient, out);
  return {std::move(out), std::move(algebra)};
}

/// Sorted, de-duplicated vertex subset; rejects empty or out-of-range sets.
inline std::vector<std::size_t> normalize_face(std::span<const std::size_t> vertices, std::size_t k) {
  std::vector<std::size_t> face(vertices.begin(), vertices.end());
  std::sort(face.begin(), face.end());
  face.erase(std::unique(face.begin(), face.end()), face.end());
  if (face.empty()) throw Error(ErrorKind::Precondition, "face must contain at least one vertex");
  if (face.back() >= k)
    throw Error(ErrorKind::Precondition, "vertex index " + std::to_string(face.back()) + " out of range");
  return face;
}

inline MeasureVector restrict_vector(const MeasureVector& v, std::span<const std::size_t> face) {
  std::vector<Rational> out;
  out.reserve(face.size());
  for (auto e : face) out.push_back(v[e]);
  return MeasureVector(std::move(out));
}

/// Same atoms, vectors projected to the vertices of a face.
inline FiniteMeasuredAlgebra restrict_to_face(const FiniteMeasuredAlgebra& algebra,
                                              std::span<const std::size_t> vertices) {
  auto face = normalize_face(vertices, algebra.k());
  std::vector<Atom> atoms;
  atoms.reserve(algebra.size());
  for (const auto& a : algebra.atoms()) atoms.push_back(Atom{a.id, restrict_vector(a.mu, face)});
  return FiniteMeasuredAlgebra(face.size(), std::move(atoms));
}

inline Embedding restrict_to_face(const Embedding& e, std::span<const std::size_t> vertices) {
  return Embedding{restrict_to_face(e.source, vertices), restrict_to_face(e.target, vertices), e.blocks};
}

}  // namespace cantor_simplex
