#pragma once

/**
 * @file face_embedding.hpp
 * @brief Faces of a finite simplex (vertex subsets R): bounded extension of
 * functions given on R, decompositions with prescribed values on R,
 * restriction of chains to a face, and the back-and-forth isomorphism
 * between a chain and its reindexing along a vertex bijection.
 */

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cantor_simplex/error.hpp"
#include "cantor_simplex/limit_chain.hpp"
#include "cantor_simplex/measured_algebra.hpp"

namespace cantor_simplex {

/// Values on a face: `vertices` (sorted, distinct) and one value per vertex.
struct FaceValues {
  std::vector<std::size_t> vertices;
  std::vector<Rational> values;
};

namespace detail {

inline std::vector<std::size_t> checked_face(const std::vector<std::size_t>& r, std::size_t k) {
  auto face = normalize_face(r, k);
  if (face.size() != r.size()) throw Error(ErrorKind::Precondition, "face vertices must be distinct");
  return face;
}

inline std::vector<int> face_position(const std::vector<std::size_t>& face, std::size_t k) {
  std::vector<int> pos(k, -1);
  for (std::size_t i = 0; i < face.size(); ++i) pos[face[i]] = static_cast<int>(i);
  return pos;
}

}  // namespace detail

/// Agrees with the given values on R and takes the midpoint (f1+f2)/2
/// elsewhere. Requires f1 <= f2 everywhere and f1 <= values <= f2 on R.
inline MeasureVector extend_with_bounds(const FaceValues& on_r, const MeasureVector& f1, const MeasureVector& f2) {
  const std::size_t k = f1.size();
  if (f2.size() != k) throw Error(ErrorKind::Precondition, "bounds have different lengths");
  if (on_r.vertices.size() != on_r.values.size())
    throw Error(ErrorKind::Precondition, "face values do not match face vertices");
  auto face = detail::checked_face(on_r.vertices, k);
  auto pos = detail::face_position(on_r.vertices, k);
  for (std::size_t e = 0; e < k; ++e)
    if (f1[e] > f2[e]) throw Error(ErrorKind::Precondition, "lower bound exceeds upper bound at vertex " + std::to_string(e + 1));
  std::vector<Rational> out(k);
  for (std::size_t e = 0; e < k; ++e) {
    if (pos[e] >= 0) {
      const auto& x = on_r.values[static_cast<std::size_t>(pos[e])];
      if (x < f1[e] || x > f2[e])
        throw Error(ErrorKind::Precondition, "value " + to_string(x) + " at vertex " + std::to_string(e + 1) +
                                                 " lies outside [" + to_string(f1[e]) + ", " + to_string(f2[e]) + "]");
      out[e] = x;
    } else {
      out[e] = (f1[e] + f2[e]) / 2;
    }
  }
  return MeasureVector(std::move(out));
}

/// g_1..g_n, strictly positive, equal to the given parts on R, summing to f.
/// Inductively g_1 extends parts[0] within [eps, f - eps], where eps is the
/// least of parts[0], f - parts[0] on R and f/2 everywhere.
inline std::vector<MeasureVector> face_extension_decompose(const MeasureVector& f, const std::vector<std::size_t>& r,
                                                           const std::vector<std::vector<Rational>>& parts) {
  const std::size_t k = f.size();
  auto face = detail::checked_face(r, k);
  if (parts.empty()) throw Error(ErrorKind::Precondition, "need at least one part");
  if (!f.all_positive()) throw Error(ErrorKind::Precondition, "f must be strictly positive");
  for (const auto& p : parts) {
    if (p.size() != r.size()) throw Error(ErrorKind::Precondition, "part has the wrong number of face values");
    for (const auto& x : p)
      if (sgn(x) <= 0) throw Error(ErrorKind::Precondition, "parts must be strictly positive on the face");
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    Rational s(0);
    for (const auto& p : parts) s += p[i];
    if (s != f[r[i]])
      throw Error(ErrorKind::Precondition, "parts sum to " + to_string(s) + " at vertex " + std::to_string(r[i] + 1) +
                                               ", not " + to_string(f[r[i]]));
  }
  std::vector<MeasureVector> out;
  MeasureVector rest = f;
  for (std::size_t n = 0; n + 1 < parts.size(); ++n) {
    Rational eps = rest.min() / 2;
    for (std::size_t i = 0; i < r.size(); ++i) {
      eps = std::min(eps, parts[n][i]);
      eps = std::min(eps, Rational(rest[r[i]] - parts[n][i]));
    }
    MeasureVector lo(k, eps), hi = rest - MeasureVector(k, eps);
    auto g = extend_with_bounds(FaceValues{r, parts[n]}, lo, hi);
    rest -= g;
    out.push_back(std::move(g));
  }
  out.push_back(rest);
  return out;
}

/// The same refinement tree with every vector restricted to the face R.
inline LimitChain restricted_limit(const LimitChain& chain, const std::vector<std::size_t>& r) {
  auto face = detail::checked_face(r, chain.k());
  std::vector<FiniteMeasuredAlgebra> stages;
  for (const auto& s : chain.stages()) stages.push_back(restrict_to_face(s, face));
  std::vector<TaskRecord> log = chain.task_log();
  for (auto& rec : log) rec.extension = restrict_to_face(rec.extension, face);
  auto out = LimitChain::from_parts(face.size(), std::move(stages), chain.refinements(), std::move(log));
  out.set_truncated(chain.truncated());
  out.set_build_parameters(chain.seed(), chain.denom_budget(), chain.depth_budget());
  return out;
}

/// A task against the restricted chain, lifted to the parent chain: each
/// block's face values are extended by face_extension_decompose.
inline FraisseTask lift_restricted_task(const LimitChain& parent, const std::vector<std::size_t>& r,
                                        const FraisseTask& task) {
  auto face = detail::checked_face(r, parent.k());
  const auto& stage = parent.stage(task.source_stage);
  auto presented = present(stage, task.sub);
  std::vector<Atom> b_atoms;
  for (const auto& a : presented.atoms()) {
    const auto& block = task.ext.blocks.at(a.id);
    std::vector<std::vector<Rational>> parts;
    for (const auto& b : block) parts.push_back(task.ext.target.mu(b).values());
    auto lifted = face_extension_decompose(a.mu, face, parts);
    for (std::size_t i = 0; i < block.size(); ++i) b_atoms.push_back(Atom{block[i], lifted[i]});
  }
  FiniteMeasuredAlgebra b(parent.k(), std::move(b_atoms));
  return FraisseTask{task.source_stage, task.sub, Embedding{std::move(presented), std::move(b), task.ext.blocks},
                     task.label.empty() ? "lifted" : task.label + ":lifted"};
}

/// Vectors reindexed along g: the new vector at q is the old one at g(q).
inline LimitChain reindex_chain(const LimitChain& chain, const std::vector<std::size_t>& g) {
  const std::size_t k = chain.k();
  if (g.size() != k) throw Error(ErrorKind::Precondition, "vertex map must have one entry per vertex");
  std::set<std::size_t> image;
  for (auto x : g) {
    if (x >= k) throw Error(ErrorKind::Precondition, "vertex map leaves the vertex set");
    image.insert(x);
  }
  if (image.size() != k) throw Error(ErrorKind::Precondition, "vertex map is not injective");
  auto re = [&](const MeasureVector& v) {
    std::vector<Rational> out(k);
    for (std::size_t q = 0; q < k; ++q) out[q] = v[g[q]];
    return MeasureVector(std::move(out));
  };
  auto re_alg = [&](const FiniteMeasuredAlgebra& a) {
    std::vector<Atom> atoms;
    for (const auto& x : a.atoms()) atoms.push_back(Atom{x.id, re(x.mu)});
    return FiniteMeasuredAlgebra(k, std::move(atoms));
  };
  std::vector<FiniteMeasuredAlgebra> stages;
  for (const auto& s : chain.stages()) stages.push_back(re_alg(s));
  auto log = chain.task_log();
  for (auto& rec : log) rec.extension = re_alg(rec.extension);
  auto out = LimitChain::from_parts(k, std::move(stages), chain.refinements(), std::move(log));
  out.set_truncated(chain.truncated());
  out.set_build_parameters(chain.seed(), chain.denom_budget(), chain.depth_budget());
  return out;
}

struct PushforwardEntry {
  IsoPair pair;
  MeasureVector source;  // mu(U)
  MeasureVector image;   // q -> mu_{g(q)}(h(U))
  bool holds = false;
};

struct LimitIsomorphism {
  BackAndForthState state;  // state.m = M, state.n = N (reindexed)
  std::vector<std::size_t> g;
  std::vector<PushforwardEntry> pushforward;
  bool all_hold() const {
    return std::all_of(pushforward.begin(), pushforward.end(), [](const PushforwardEntry& e) { return e.holds; });
  }
};

/// Back-and-forth isomorphism germ h between M and its reindexing N along
/// the vertex bijection g, over the first `count` enumerated atoms, with
/// the per-pair identity mu_{g(q)}(h(U)) = mu_q(U).
inline LimitIsomorphism limit_isomorphism_h(const LimitChain& m, const std::vector<std::size_t>& g, std::size_t count,
                                            const BackAndForthOptions& opt = {}) {
  auto n = reindex_chain(m, g);
  LimitIsomorphism out{back_and_forth(m, std::move(n), count, opt), g, {}};
  const auto& st = out.state;
  const std::size_t k = m.k();
  for (const auto& pr : st.iso.pairs) {
    PushforwardEntry e{pr, st.m.measure(pr.m), {}, false};
    // N's vector at q is the underlying value at g(q); read it back there.
    auto nv = st.n.measure(pr.n);
    std::vector<Rational> underlying(k);
    for (std::size_t q = 0; q < k; ++q) underlying[g[q]] = nv[q];
    std::vector<Rational> img(k);
    for (std::size_t q = 0; q < k; ++q) img[q] = underlying[g[q]];
    e.image = MeasureVector(std::move(img));
    e.holds = e.image == e.source;
    out.pushforward.push_back(std::move(e));
  }
  return out;
}

}  // namespace cantor_simplex
