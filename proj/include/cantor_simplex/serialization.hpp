#pragma once

/**
 * @file serialization.hpp
 * @brief JSON wire formats. Rationals are always "p/q" strings; object keys
 * are emitted sorted, so equal values serialize to equal bytes.
 */

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cantor_simplex/clopen.hpp"
#include "cantor_simplex/dividing_partition.hpp"
#include "cantor_simplex/error.hpp"
#include "cantor_simplex/limit_chain.hpp"
#include "cantor_simplex/measured_algebra.hpp"
#include "cantor_simplex/prefix_map.hpp"
#include "cantor_simplex/rational.hpp"

namespace cantor_simplex::io {

using Json = nlohmann::json;

namespace detail {

[[noreturn]] inline void malformed(const std::string& what) { throw Error(ErrorKind::MalformedInput, what); }

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) malformed(std::string("expected an object with key '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) malformed(std::string("missing key '") + key + "'");
  return *it;
}

inline std::string as_string(const Json& j, const char* what) {
  if (!j.is_string()) malformed(std::string(what) + " must be a string");
  return j.get<std::string>();
}

inline std::size_t as_size(const Json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) malformed(std::string(what) + " must be a non-negative integer");
  return j.get<std::size_t>();
}

inline const Json& as_array(const Json& j, const char* what) {
  if (!j.is_array()) malformed(std::string(what) + " must be an array");
  return j;
}

inline void check_schema(const Json& j, const char* schema) {
  if (j.is_object() && j.contains("schema") && j["schema"] != schema)
    malformed("expected schema " + std::string(schema) + ", got " + j["schema"].dump());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rationals and vectors

inline Json to_json(const Rational& r) { return to_string(r); }

inline Rational rational_from_json(const Json& j) {
  if (!j.is_string()) detail::malformed("rational must be a \"p/q\" string, got " + j.dump());
  return parse_rational(j.get<std::string>());
}

inline Json to_json(const MeasureVector& v) {
  Json a = Json::array();
  for (const auto& x : v.values()) a.push_back(to_json(x));
  return a;
}

inline MeasureVector vector_from_json(const Json& j) {
  detail::as_array(j, "measure vector");
  std::vector<Rational> vs;
  for (const auto& x : j) vs.push_back(rational_from_json(x));
  return MeasureVector(std::move(vs));
}

inline Json ids_to_json(const std::vector<std::string>& ids) { return Json(ids); }

inline std::vector<std::string> ids_from_json(const Json& j) {
  detail::as_array(j, "id list");
  std::vector<std::string> out;
  for (const auto& x : j) out.push_back(detail::as_string(x, "atom id"));
  return out;
}

// ---------------------------------------------------------------------------
// algebra.v1, embedding.v1

inline Json to_json(const FiniteMeasuredAlgebra& a, bool with_schema = true) {
  Json atoms = Json::array();
  for (const auto& x : a.atoms()) atoms.push_back({{"id", x.id}, {"mu", to_json(x.mu)}});
  Json j{{"k", a.k()}, {"atoms", std::move(atoms)}};
  if (with_schema) j["schema"] = "algebra.v1";
  return j;
}

/// Parses without validating measure sums; callers run validate().
inline FiniteMeasuredAlgebra algebra_from_json(const Json& j) {
  detail::check_schema(j, "algebra.v1");
  const std::size_t k = detail::as_size(detail::field(j, "k"), "k");
  if (k == 0) detail::malformed("k must be at least 1");
  std::vector<Atom> atoms;
  std::set<std::string> seen;
  for (const auto& x : detail::as_array(detail::field(j, "atoms"), "atoms")) {
    auto id = detail::as_string(detail::field(x, "id"), "atom id");
    auto mu = vector_from_json(detail::field(x, "mu"));
    if (mu.size() != k) detail::malformed("atom '" + id + "' has " + std::to_string(mu.size()) + " values, expected " + std::to_string(k));
    if (!seen.insert(id).second) detail::malformed("duplicate atom id '" + id + "'");
    atoms.push_back(Atom{std::move(id), std::move(mu)});
  }
  if (atoms.empty()) detail::malformed("an algebra needs at least one atom");
  return FiniteMeasuredAlgebra(k, std::move(atoms));
}

inline Json blocks_to_json(const BlockMap& blocks) {
  Json j = Json::object();
  for (const auto& [k, v] : blocks) j[k] = ids_to_json(v);
  return j;
}

inline BlockMap blocks_from_json(const Json& j) {
  if (!j.is_object()) detail::malformed("blocks must be an object keyed by source atom id");
  BlockMap out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = ids_from_json(it.value());
  return out;
}

inline Json to_json(const Embedding& e) {
  return Json{{"schema", "embedding.v1"},
              {"source", to_json(e.source, false)},
              {"target", to_json(e.target, false)},
              {"blocks", blocks_to_json(e.blocks)}};
}

/// Source and target may be omitted in the file and supplied by the caller.
inline Embedding embedding_from_json(const Json& j, const FiniteMeasuredAlgebra* source = nullptr,
                                     const FiniteMeasuredAlgebra* target = nullptr) {
  detail::check_schema(j, "embedding.v1");
  Embedding e;
  if (j.contains("source"))
    e.source = algebra_from_json(j["source"]);
  else if (source)
    e.source = *source;
  else
    detail::malformed("embedding has no source algebra");
  if (j.contains("target"))
    e.target = algebra_from_json(j["target"]);
  else if (target)
    e.target = *target;
  else
    detail::malformed("embedding has no target algebra");
  e.blocks = blocks_from_json(detail::field(j, "blocks"));
  return e;
}

// ---------------------------------------------------------------------------
// chain.v1

inline Json parts_to_json(const Parts& p) {
  Json j = Json::array();
  for (const auto& part : p) j.push_back(ids_to_json(part));
  return j;
}

inline Parts parts_from_json(const Json& j) {
  Parts p;
  for (const auto& x : detail::as_array(j, "parts")) p.push_back(ids_from_json(x));
  return p;
}

inline Json to_json(const LimitChain& c) {
  Json stages = Json::array(), refinements = Json::array(), tasks = Json::array();
  for (const auto& s : c.stages()) stages.push_back(to_json(s, false));
  for (const auto& r : c.refinements()) refinements.push_back(blocks_to_json(r));
  for (const auto& t : c.task_log())
    tasks.push_back({{"label", t.label},
                     {"source_stage", t.source_stage},
                     {"produced_stage", t.produced_stage},
                     {"sub", parts_to_json(t.sub)},
                     {"extension", to_json(t.extension, false)},
                     {"ext_blocks", blocks_to_json(t.ext_blocks)},
                     {"witness", blocks_to_json(t.witness)}});
  return Json{{"schema", "chain.v1"},
              {"k", c.k()},
              {"seed", c.seed()},
              {"denom_budget", c.denom_budget()},
              {"depth_budget", c.depth_budget()},
              {"truncated", c.truncated()},
              {"stages", std::move(stages)},
              {"refinements", std::move(refinements)},
              {"tasks", std::move(tasks)}};
}

/// Parses and structurally validates a chain.
inline LimitChain chain_from_json(const Json& j) {
  detail::check_schema(j, "chain.v1");
  const std::size_t k = detail::as_size(detail::field(j, "k"), "k");
  std::vector<FiniteMeasuredAlgebra> stages;
  for (const auto& s : detail::as_array(detail::field(j, "stages"), "stages")) {
    Json copy = s;
    if (!copy.contains("k")) copy["k"] = k;
    stages.push_back(algebra_from_json(copy));
  }
  std::vector<BlockMap> refinements;
  for (const auto& r : detail::as_array(detail::field(j, "refinements"), "refinements"))
    refinements.push_back(blocks_from_json(r));
  std::vector<TaskRecord> log;
  if (j.contains("tasks"))
    for (const auto& t : detail::as_array(j["tasks"], "tasks")) {
      TaskRecord rec;
      rec.label = t.value("label", "");
      rec.source_stage = detail::as_size(detail::field(t, "source_stage"), "source_stage");
      rec.produced_stage = detail::as_size(detail::field(t, "produced_stage"), "produced_stage");
      rec.sub = parts_from_json(detail::field(t, "sub"));
      Json ext = detail::field(t, "extension");
      if (!ext.contains("k")) ext["k"] = k;
      rec.extension = algebra_from_json(ext);
      rec.ext_blocks = blocks_from_json(detail::field(t, "ext_blocks"));
      rec.witness = blocks_from_json(detail::field(t, "witness"));
      log.push_back(std::move(rec));
    }
  auto c = LimitChain::from_parts(k, std::move(stages), std::move(refinements), std::move(log));
  c.set_truncated(j.value("truncated", false));
  c.set_build_parameters(j.value("seed", std::uint64_t{0}), j.value("denom_budget", std::uint64_t{0}),
                         j.value("depth_budget", std::size_t{0}));
  auto report = validate_chain(c);
  if (!report.valid) detail::malformed("invalid chain: " + report.violations.front());
  return c;
}

inline Json to_json(const AtomSet& s) { return Json{{"stage", s.stage}, {"ids", ids_to_json(s.ids)}}; }

inline AtomSet atom_set_from_json(const Json& j) {
  return make_atom_set(detail::as_size(detail::field(j, "stage"), "stage"), ids_from_json(detail::field(j, "ids")));
}

inline Json to_json(const PartialIso& p) {
  Json pairs = Json::array();
  for (const auto& pr : p.pairs) pairs.push_back({{"m", to_json(pr.m)}, {"n", to_json(pr.n)}});
  return pairs;
}

// ---------------------------------------------------------------------------
// clopen.v1, prefixmap.v1, partition.v1

inline Json to_json(const ClopenSet& s) { return Json{{"schema", "clopen.v1"}, {"words", Json(s.words())}}; }

/// Accepts {"words": [...]} or a bare array of words.
inline ClopenSet clopen_from_json(const Json& j) {
  detail::check_schema(j, "clopen.v1");
  const Json& words = j.is_array() ? j : detail::field(j, "words");
  std::vector<Word> ws;
  for (const auto& w : detail::as_array(words, "words")) ws.push_back(detail::as_string(w, "word"));
  return ClopenSet(std::move(ws));
}

inline Json to_json(const PrefixMapHomeo& g) {
  Json rules = Json::array();
  for (const auto& [u, v] : g.rules()) rules.push_back(Json::array({u, v}));
  return Json{{"schema", "prefixmap.v1"}, {"rules", std::move(rules)}};
}

inline PrefixMapHomeo prefix_map_from_json(const Json& j) {
  detail::check_schema(j, "prefixmap.v1");
  std::vector<PrefixMapHomeo::Rule> rules;
  for (const auto& r : detail::as_array(detail::field(j, "rules"), "rules")) {
    if (!r.is_array() || r.size() != 2) detail::malformed("a rule is a [source, target] pair");
    rules.emplace_back(detail::as_string(r[0], "rule source"), detail::as_string(r[1], "rule target"));
  }
  return PrefixMapHomeo(std::move(rules));
}

inline Json to_json(const GroupWord& w) {
  Json j = Json::array();
  for (const auto& l : w.letters) j.push_back(Json::array({l.generator, l.exponent}));
  return j;
}

inline GroupWord group_word_from_json(const Json& j) {
  GroupWord w;
  for (const auto& l : detail::as_array(j, "group word")) {
    if (!l.is_array() || l.size() != 2 || !l[1].is_number_integer()) detail::malformed("a letter is [generator, +1|-1]");
    const int e = l[1].get<int>();
    if (e != 1 && e != -1) detail::malformed("letter exponent must be +1 or -1");
    w.letters.push_back({detail::as_size(l[0], "generator index"), e});
  }
  return w;
}

inline Json to_json(const DividingPartition& p) {
  Json gens = Json::array(), cols = Json::array();
  for (const auto& g : p.generators.generators()) gens.push_back(Json{{"rules", to_json(g)["rules"]}});
  for (const auto& c : p.columns) {
    Json ws = Json::array();
    for (const auto& w : c.witnesses) ws.push_back(to_json(w));
    cols.push_back({{"base", Json(c.base.words())}, {"witnesses", std::move(ws)}});
  }
  return Json{{"schema", "partition.v1"},
              {"N", p.N},
              {"covered", Json(p.covered.words())},
              {"generators", std::move(gens)},
              {"columns", std::move(cols)}};
}

inline DividingPartition partition_from_json(const Json& j) {
  detail::check_schema(j, "partition.v1");
  DividingPartition p;
  p.N = detail::as_size(detail::field(j, "N"), "N");
  p.covered = clopen_from_json(detail::field(j, "covered"));
  for (const auto& g : detail::as_array(detail::field(j, "generators"), "generators"))
    if (p.generators.intern(prefix_map_from_json(g)) + 1 != p.generators.size())
      detail::malformed("duplicate generator");
  for (const auto& c : detail::as_array(detail::field(j, "columns"), "columns")) {
    Column col{clopen_from_json(detail::field(c, "base")), {}};
    for (const auto& w : detail::as_array(detail::field(c, "witnesses"), "witnesses")) {
      auto gw = group_word_from_json(w);
      for (const auto& l : gw.letters)
        if (l.generator >= p.generators.size()) detail::malformed("witness uses an unregistered generator");
      col.witnesses.push_back(std::move(gw));
    }
    p.columns.push_back(std::move(col));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::malformed("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    detail::malformed(origin + ": " + e.what());
  }
}

inline Json read_json(const std::string& path) { return parse_json(read_file(path), path); }

/// Canonical bytes: two-space indent, sorted keys, trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::MalformedInput, "cannot write '" + path + "'");
  out << bytes;
}

}  // namespace cantor_simplex::io
