#pragma once

/**
 * @file simplex_verify.hpp
 * @brief Checks of the three conditions characterizing dynamical simplices,
 * evaluated on a finite chain, plus separation of the vertex measures.
 *
 * Verification only searches the given chain; it never extends it. A witness
 * that is not found inside the built stages makes the certificate
 * INCOMPLETE. FAILED is reserved for a found object that violates a check.
 */

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cantor_simplex/error.hpp"
#include "cantor_simplex/limit_chain.hpp"
#include "cantor_simplex/measured_algebra.hpp"
#include "cantor_simplex/parallel.hpp"
#include "cantor_simplex/subset_search.hpp"

namespace cantor_simplex {

enum class Status { Verified, Failed, Incomplete };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::Verified:
      return "VERIFIED";
    case Status::Failed:
      return "FAILED";
    case Status::Incomplete:
      return "INCOMPLETE";
  }
  return "?";
}

/// FAILED dominates INCOMPLETE, which dominates VERIFIED.
inline Status combine(Status a, Status b) {
  if (a == Status::Failed || b == Status::Failed) return Status::Failed;
  if (a == Status::Incomplete || b == Status::Incomplete) return Status::Incomplete;
  return Status::Verified;
}

// ---------------------------------------------------------------------------
// Condition (1)

struct PositivityEntry {
  std::string id;
  Rational min;
};

struct PositivityReport {
  std::vector<PositivityEntry> atoms;
  Rational overall_min;
  bool positive = true;
};

inline PositivityReport check_positivity(const FiniteMeasuredAlgebra& algebra) {
  PositivityReport r;
  bool first = true;
  for (const auto& a : algebra.atoms()) {
    Rational m = a.mu.min();
    r.atoms.push_back({a.id, m});
    if (first || m < r.overall_min) r.overall_min = m;
    first = false;
    if (sgn(m) <= 0) r.positive = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Condition (2)

/// ceil(max_e a(e) / eps) equal pieces of `a`.
inline std::vector<MeasureVector> epsilon_subdivide(const MeasureVector& a, const Rational& eps) {
  if (sgn(eps) <= 0) throw Error(ErrorKind::Precondition, "eps must be positive, got " + to_string(eps));
  if (!a.all_positive() || a.max() > 1)
    throw Error(ErrorKind::Precondition, "vector " + to_string(a) + " is not in (0,1]");
  mpz_class n = ceil_to_integer(a.max() / eps);
  if (n < 1) n = 1;
  if (!n.fits_ulong_p()) throw Error(ErrorKind::Budget, "subdivision count too large");
  const unsigned long count = n.get_ui();
  return std::vector<MeasureVector>(count, a / Rational(n));
}

// ---------------------------------------------------------------------------
// Condition (3)

struct GlasnerWeissAlgebra {
  FiniteMeasuredAlgebra algebra;
  std::string inner;       // a'
  std::string difference;  // b' \ a'
  std::optional<std::string> complement;
};

/// Algebra with atoms a' = a, b' \ a' = b - a and, unless b is the unit,
/// the complement 1 - b. Requires a < b at every vertex.
inline GlasnerWeissAlgebra glasner_weiss_witness(const MeasureVector& a, const MeasureVector& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::Precondition, "vectors have different lengths");
  for (std::size_t e = 0; e < a.size(); ++e)
    if (!(a[e] < b[e]))
      throw Error(ErrorKind::Precondition, "gap fails at vertex " + std::to_string(e + 1) + ": " + to_string(a[e]) +
                                               " is not below " + to_string(b[e]));
  if (!a.all_positive()) throw Error(ErrorKind::Precondition, "a is not coordinatewise positive");
  const auto k = a.size();
  auto rest = MeasureVector::ones(k) - b;
  std::vector<Atom> atoms{{"a'", a}, {"b'\\a'", b - a}};
  GlasnerWeissAlgebra out{{}, "a'", "b'\\a'", std::nullopt};
  if (!rest.all_zero()) {
    if (!rest.all_positive())
      throw Error(ErrorKind::Precondition, "b equals 1 at some vertices but not all: " + to_string(b));
    atoms.push_back({"c", rest});
    out.complement = "c";
  }
  out.algebra = FiniteMeasuredAlgebra(k, std::move(atoms));
  return out;
}

// ---------------------------------------------------------------------------
// exact_divide

struct DivideResult {
  LimitChain chain;
  AtomSet piece;                // B
  std::vector<AtomSet> pieces;  // all n parts, piece == pieces[0]
};

/// Splits U into n parts of equal measure by discharging one task.
inline DivideResult exact_divide(const LimitChain& chain, const AtomSet& u, std::size_t n,
                                 std::size_t max_stages = 1024) {
  if (n == 0) throw Error(ErrorKind::Precondition, "n must be at least 1");
  if (u.ids.empty()) throw Error(ErrorKind::Precondition, "cannot divide the empty set");
  if (u.stage >= chain.stage_count()) throw Error(ErrorKind::Precondition, "U lies in an unbuilt stage");
  for (const auto& id : u.ids)
    if (!chain.stage(u.stage).contains(id))
      throw Error(ErrorKind::Precondition, "unknown atom '" + id + "' in stage " + std::to_string(u.stage));
  if (n == 1) return {chain, u, {u}};
  if (chain.stage_count() >= max_stages) throw Error(ErrorKind::Budget, "no stage left to discharge the division");
  const auto piece = chain.measure(u) / Rational(static_cast<unsigned long>(n));
  auto next = one_point_extension(
      chain, make_split_task(chain, u, std::vector<MeasureVector>(n, piece), "divide:" + std::to_string(n)));
  std::vector<AtomSet> parts;
  for (std::size_t i = 0; i < n; ++i) parts.push_back(witness_image(next, "p" + std::to_string(i)));
  auto b = parts.front();
  return {std::move(next), std::move(b), std::move(parts)};
}

// ---------------------------------------------------------------------------
// verify_dynamical_simplex

struct VerifyOptions {
  std::size_t search_nodes = 20000;  // per subset search
  /// When a witness is not inside the built stages, place it by one task
  /// discharged in a scratch copy of the chain.
  bool place_by_extension = true;
};

/// A clopen realized in the chain: a tree node or the image of an atom of
/// a discharged task's extension.
struct ChainClopen {
  std::string label;
  AtomSet set;
  MeasureVector mu;
};

/// Tree nodes in enumeration order, then task witness images in log order,
/// keeping the first occurrence of each clopen.
inline std::vector<ChainClopen> realized_clopens(const LimitChain& chain) {
  std::vector<ChainClopen> out;
  std::set<std::vector<std::string>> seen;
  auto add = [&](std::string label, AtomSet set) {
    auto key = chain.lift(set, chain.last_stage()).ids;
    if (!seen.insert(key).second) return;
    auto mu = chain.measure(set);
    out.push_back({std::move(label), std::move(set), std::move(mu)});
  };
  for (const auto& [s, id] : enumerate_atoms(chain)) add(id, AtomSet{s, {id}});
  const auto& log = chain.task_log();
  for (std::size_t t = 0; t < log.size(); ++t)
    for (const auto& [b, ids] : log[t].witness)
      add("task" + std::to_string(t) + ":" + b, make_atom_set(log[t].produced_stage, ids));
  return out;
}

struct SubdivisionWitness {
  ChainClopen atom;
  Rational eps;
  std::size_t pieces = 0;
  bool equal_division = false;
  std::vector<std::vector<std::string>> groups;  // final-stage ids per piece
  std::vector<MeasureVector> piece_measures;
  std::string placement;  // "search" or "extension"
  std::size_t witness_stage = 0;
  Status status = Status::Incomplete;
  std::string detail;
};

struct ContainmentWitness {
  ChainClopen a;
  ChainClopen b;
  std::vector<std::string> inner;  // W: final-stage ids inside b with mu(W) = mu(a)
  std::vector<MeasureVector> algebra;  // the glasner_weiss_witness atom vectors
  std::string placement;
  std::size_t witness_stage = 0;
  Status status = Status::Incomplete;
  std::string detail;
};

struct SeparationWitness {
  std::size_t e = 0;
  std::size_t f = 0;
  std::optional<ChainClopen> atom;
  Status status = Status::Incomplete;
};

struct SimplexCertificate {
  std::size_t k = 0;
  std::uint64_t denom_bound = 0;
  std::size_t stages = 0;
  Status status = Status::Verified;
  Status positivity = Status::Verified;
  Status subdivision = Status::Verified;
  Status containment = Status::Verified;
  Status separation = Status::Verified;
  std::vector<PositivityEntry> positivity_entries;
  std::vector<SubdivisionWitness> subdivisions;
  std::vector<ContainmentWitness> containments;
  std::vector<SeparationWitness> separations;
  std::vector<std::string> notes;
};

namespace detail {

inline std::vector<MeasureVector> final_measures(const LimitChain& chain, const AtomSet& lifted) {
  std::vector<MeasureVector> items;
  for (const auto& id : lifted.ids) items.push_back(chain.final_stage().mu(id));
  return items;
}

inline SubdivisionWitness subdivide_witness(const LimitChain& chain, const ChainClopen& a, const Rational& eps,
                                            const VerifyOptions& opt) {
  SubdivisionWitness w;
  w.atom = a;
  w.eps = eps;
  auto pieces = epsilon_subdivide(a.mu, eps);
  // Rechecks a partition of a, given as atom sets of `host`.
  auto accept = [&](const LimitChain& host, std::vector<AtomSet> groups) {
    MeasureVector total = MeasureVector::zeros(chain.k());
    std::set<std::string> seen;
    auto target = host.lift(a.set, host.last_stage());
    w.piece_measures.clear();
    w.status = Status::Verified;
    for (const auto& g : groups) {
      auto m = host.measure(g);
      w.piece_measures.push_back(m);
      total += m;
      if (!m.all_positive() || m.max() > eps) {
        w.status = Status::Failed;
        w.detail = "piece " + to_string(m) + " is not in (0, eps]";
      }
      for (const auto& id : host.lift(g, host.last_stage()).ids) seen.insert(id);
    }
    if (!(total == a.mu) || seen != std::set<std::string>(target.ids.begin(), target.ids.end())) {
      w.status = Status::Failed;
      w.detail = "pieces do not partition the set";
    }
    w.witness_stage = groups.empty() ? 0 : groups.front().stage;
    w.groups.clear();
    for (auto& g : groups) w.groups.push_back(std::move(g.ids));
    w.pieces = w.groups.size();
  };
  auto lifted = chain.lift(a.set, chain.last_stage());
  if (pieces.size() == 1) {
    w.equal_division = true;
    w.placement = "search";
    accept(chain, {lifted});
    return w;
  }
  auto items = final_measures(chain, lifted);
  SearchBudget budget{opt.search_nodes, 0};
  if (auto hit = find_partition(items, pieces, budget)) {
    std::vector<AtomSet> groups;
    for (const auto& g : *hit) {
      std::vector<std::string> ids;
      for (auto i : g) ids.push_back(lifted.ids[i]);
      groups.push_back(make_atom_set(lifted.stage, std::move(ids)));
    }
    w.equal_division = true;
    w.placement = "search";
    accept(chain, std::move(groups));
    return w;
  }
  if (opt.place_by_extension) {
    auto divided = exact_divide(chain, a.set, pieces.size());
    w.equal_division = true;
    w.placement = "extension";
    accept(divided.chain, divided.pieces);
    return w;
  }
  // Without extension: the final-stage atoms themselves, when each is small enough.
  bool small = std::all_of(items.begin(), items.end(), [&](const MeasureVector& m) { return m.max() <= eps; });
  if (small) {
    std::vector<AtomSet> groups;
    for (const auto& id : lifted.ids) groups.push_back(AtomSet{lifted.stage, {id}});
    w.placement = "search";
    accept(chain, std::move(groups));
    return w;
  }
  w.status = Status::Incomplete;
  w.detail = "no partition into pieces of size at most eps inside the built stages";
  return w;
}

inline ContainmentWitness containment_witness(const LimitChain& chain, const ChainClopen& a, const ChainClopen& b,
                                              const VerifyOptions& opt) {
  ContainmentWitness w;
  w.a = a;
  w.b = b;
  auto gw = glasner_weiss_witness(a.mu, b.mu);
  for (const auto& atom : gw.algebra.atoms()) w.algebra.push_back(atom.mu);

  auto lifted = chain.lift(b.set, chain.last_stage());
  auto items = final_measures(chain, lifted);
  SearchBudget budget{opt.search_nodes, 0};
  std::optional<LimitChain> extended;
  AtomSet wset;
  if (auto hit = find_subset_sum(items, a.mu, budget)) {
    std::vector<std::string> ids;
    for (auto i : *hit) ids.push_back(lifted.ids[i]);
    wset = make_atom_set(lifted.stage, std::move(ids));
    w.placement = "search";
  } else if (opt.place_by_extension) {
    // Realize the extension {b} -> {a', b' \ a'} over the chain.
    extended = one_point_extension(chain, make_split_task(chain, b.set, {gw.algebra.mu(gw.inner),
                                                                         gw.algebra.mu(gw.difference)},
                                                          "place"));
    wset = witness_image(*extended, "p0");
    w.placement = "extension";
  } else {
    w.status = Status::Incomplete;
    w.detail = budget.exhausted() ? "search budget exhausted" : "no subset of b with the measure of a";
    return w;
  }
  const LimitChain& host = extended ? *extended : chain;
  w.witness_stage = wset.stage;
  w.inner = wset.ids;

  // Recheck: W inside b, mu(W) = mu(a), and {a, a^c} -> {W, W^c} is a germ.
  auto b_final = host.lift(b.set, host.last_stage());
  std::set<std::string> in_b(b_final.ids.begin(), b_final.ids.end());
  for (const auto& id : host.lift(wset, host.last_stage()).ids)
    if (!in_b.count(id)) {
      w.status = Status::Failed;
      w.detail = "witness leaves b";
      return w;
    }
  if (!(host.measure(wset) == a.mu)) {
    w.status = Status::Failed;
    w.detail = "witness measure mismatch";
    return w;
  }
  try {
    homogeneity_automorphism(host, {a.set, host.complement(a.set)}, {wset, host.complement(wset)});
  } catch (const Error& err) {
    w.status = Status::Failed;
    w.detail = err.what();
    return w;
  }
  w.status = Status::Verified;
  return w;
}

}  // namespace detail

/// Checks, for the atoms of the chain whose measures have denominators at
/// most `denom_bound`: (1) strict positivity; (2) a partition into pieces
/// of measure at most 1/denom_bound (equal division preferred); (3) for
/// each such a, b with mu(a) < mu(b), a clopen W inside b with mu(W) = mu(a);
/// and for each vertex pair a clopen telling the two measures apart.
inline SimplexCertificate verify_dynamical_simplex(const LimitChain& chain, std::uint64_t denom_bound,
                                                   const VerifyOptions& opt = {}) {
  if (denom_bound == 0) throw Error(ErrorKind::Precondition, "denominator bound must be at least 1");
  auto structure = validate_chain(chain);
  if (!structure.valid) throw Error(ErrorKind::Precondition, "invalid chain: " + structure.violations.front());
  SimplexCertificate cert;
  cert.k = chain.k();
  cert.denom_bound = denom_bound;
  cert.stages = chain.stage_count();

  std::vector<ChainClopen> all = realized_clopens(chain), qualifying;
  for (const auto& a : all)
    if (a.mu.denominators_at_most(denom_bound)) qualifying.push_back(a);

  for (const auto& a : all) {
    Rational m = a.mu.min();
    const bool bad = sgn(m) <= 0;
    if (bad) cert.positivity = Status::Failed;
    if (bad || a.mu.denominators_at_most(denom_bound)) cert.positivity_entries.push_back({a.label, m});
  }

  const Rational eps(1, static_cast<unsigned long>(denom_bound));
  cert.subdivisions.resize(qualifying.size());
  parallel_for(qualifying.size(),
               [&](std::size_t i) { cert.subdivisions[i] = detail::subdivide_witness(chain, qualifying[i], eps, opt); });
  for (const auto& w : cert.subdivisions) cert.subdivision = combine(cert.subdivision, w.status);

  // One representative a per distinct vector.
  std::vector<ChainClopen> reps;
  {
    std::set<MeasureVector> seen;
    for (const auto& a : qualifying)
      if (seen.insert(a.mu).second) reps.push_back(a);
  }
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (std::size_t j = 0; j < qualifying.size(); ++j)
      if (reps[i].mu.lt(qualifying[j].mu)) jobs.emplace_back(i, j);
  cert.containments.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t t) {
    cert.containments[t] = detail::containment_witness(chain, reps[jobs[t].first], qualifying[jobs[t].second], opt);
  });
  for (const auto& w : cert.containments) cert.containment = combine(cert.containment, w.status);

  for (std::size_t e = 0; e < chain.k(); ++e)
    for (std::size_t f = e + 1; f < chain.k(); ++f) {
      SeparationWitness w{e, f, std::nullopt, Status::Incomplete};
      for (const auto* pool : {&qualifying, &all}) {
        for (const auto& a : *pool)
          if (a.mu[e] != a.mu[f]) {
            w.atom = a;
            w.status = Status::Verified;
            break;
          }
        if (w.atom) break;
      }
      cert.separation = combine(cert.separation, w.status);
      cert.separations.push_back(std::move(w));
    }

  if (chain.stage_count() < 2) {
    cert.notes.push_back("chain has no refinement stage; no witness can be placed");
    cert.subdivision = combine(cert.subdivision, Status::Incomplete);
  }
  if (qualifying.empty()) cert.notes.push_back("no atom has denominators within the bound");
  cert.status = combine(combine(cert.positivity, cert.subdivision), combine(cert.containment, cert.separation));
  return cert;
}

}  // namespace cantor_simplex
