#pragma once

/**
 * @file cli.hpp
 * @brief The cantor-simplex command line: subcommands amalgamate,
 * limit-build, check, divide, backforth, speedup-demo and replay.
 *
 * Exit codes: 0 VERIFIED, 1 FAILED, 2 malformed input, 3 INCOMPLETE.
 * Certificates (cert.v1) echo the arguments and the seed and record a
 * SHA-256 digest of every input file; `replay` re-runs the recorded command
 * and compares the regenerated certificate byte for byte.
 */

#include <openssl/evp.h>

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "cantor_simplex/amalgamation.hpp"
#include "cantor_simplex/clopen.hpp"
#include "cantor_simplex/dividing_partition.hpp"
#include "cantor_simplex/error.hpp"
#include "cantor_simplex/face_embedding.hpp"
#include "cantor_simplex/limit_chain.hpp"
#include "cantor_simplex/measured_algebra.hpp"
#include "cantor_simplex/serialization.hpp"
#include "cantor_simplex/simplex_verify.hpp"

namespace cantor_simplex::cli {

using io::Json;

enum ExitCode : int { kVerified = 0, kFailed = 1, kMalformed = 2, kIncomplete = 3 };

inline int exit_code(Status s) {
  switch (s) {
    case Status::Verified:
      return kVerified;
    case Status::Failed:
      return kFailed;
    case Status::Incomplete:
      return kIncomplete;
  }
  return kFailed;
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

/// One invocation: arguments, inputs read so far, and whether outputs are
/// written (they are not during replay).
class Context {
 public:
  Context(std::vector<std::string> args, bool replay) : args_(std::move(args)), replay_(replay) {}

  Json read_json(const std::string& path) {
    auto bytes = io::read_file(path);
    inputs_.push_back({{"path", path}, {"sha256", sha256_hex(bytes)}});
    return io::parse_json(bytes, path);
  }

  Json certificate(const std::string& command, std::uint64_t seed) const {
    return Json{{"schema", "cert.v1"}, {"command", command}, {"argv", args_}, {"seed", seed}, {"inputs", inputs_}};
  }

  bool replay() const { return replay_; }
  void write(const std::string& path, const std::string& bytes, std::ostream& out) const {
    if (replay_) return;
    if (path.empty())
      out << bytes;
    else
      io::write_file(path, bytes);
  }

  std::string produced;  // certificate bytes of this run

 private:
  std::vector<std::string> args_;
  bool replay_;
  Json inputs_ = Json::array();
};

namespace detail {

inline Json check_entry(const std::string& id, bool ok, const std::string& detail = {}) {
  Json j{{"id", id}, {"status", ok ? "VERIFIED" : "FAILED"}};
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

inline Status status_of_checks(const Json& checks) {
  Status s = Status::Verified;
  for (const auto& c : checks) {
    const auto v = c["status"].get<std::string>();
    s = combine(s, v == "VERIFIED" ? Status::Verified : v == "FAILED" ? Status::Failed : Status::Incomplete);
  }
  return s;
}

inline Json sorted_checks(Json checks) {
  std::vector<Json> v(checks.begin(), checks.end());
  std::stable_sort(v.begin(), v.end(), [](const Json& a, const Json& b) { return a["id"] < b["id"]; });
  return Json(v);
}

inline FiniteMeasuredAlgebra load_algebra(Context& ctx, const std::string& path) {
  auto a = io::algebra_from_json(ctx.read_json(path));
  auto r = validate(a);
  if (!r.valid) throw Error(ErrorKind::MalformedInput, path + ": " + r.violations.front());
  return a;
}

inline LimitChain load_chain(Context& ctx, const std::string& path) { return io::chain_from_json(ctx.read_json(path)); }

inline std::vector<std::size_t> parse_index_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || !std::all_of(item.begin(), item.end(), ::isdigit))
      throw Error(ErrorKind::MalformedInput, "'" + s + "' is not a comma-separated list of vertex indices");
    out.push_back(std::stoul(item));
  }
  if (out.empty()) throw Error(ErrorKind::MalformedInput, "empty vertex list");
  return out;
}

inline std::vector<BernoulliMeasure> parse_measures(const std::string& s) {
  std::vector<BernoulliMeasure> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto p = parse_rational(item);
    if (sgn(p) <= 0 || p >= 1) throw Error(ErrorKind::MalformedInput, "measure parameter " + item + " not in (0,1)");
    out.emplace_back(p);
  }
  if (out.empty()) throw Error(ErrorKind::MalformedInput, "no measures given");
  return out;
}

inline Json to_json(const ChainClopen& c) {
  return Json{{"label", c.label}, {"set", io::to_json(c.set)}, {"mu", io::to_json(c.mu)}};
}

inline Json to_json(const SimplexCertificate& c) {
  Json pos = Json::array(), sub = Json::array(), cont = Json::array(), sep = Json::array();
  for (const auto& p : c.positivity_entries) pos.push_back({{"label", p.id}, {"min", io::to_json(p.min)}});
  for (const auto& w : c.subdivisions) {
    Json pm = Json::array();
    for (const auto& m : w.piece_measures) pm.push_back(io::to_json(m));
    sub.push_back({{"clopen", to_json(w.atom)},
                   {"eps", io::to_json(w.eps)},
                   {"pieces", w.pieces},
                   {"equal_division", w.equal_division},
                   {"placement", w.placement},
                   {"witness_stage", w.witness_stage},
                   {"groups", w.groups},
                   {"piece_measures", pm},
                   {"status", to_string(w.status)},
                   {"detail", w.detail}});
  }
  for (const auto& w : c.containments) {
    Json alg = Json::array();
    for (const auto& m : w.algebra) alg.push_back(io::to_json(m));
    cont.push_back({{"a", to_json(w.a)},
                    {"b", to_json(w.b)},
                    {"inner", w.inner},
                    {"witness_stage", w.witness_stage},
                    {"placement", w.placement},
                    {"algebra", alg},
                    {"status", to_string(w.status)},
                    {"detail", w.detail}});
  }
  for (const auto& w : c.separations) {
    Json j{{"vertices", Json::array({w.e, w.f})}, {"status", to_string(w.status)}};
    j["clopen"] = w.atom ? to_json(*w.atom) : Json(nullptr);
    sep.push_back(std::move(j));
  }
  return Json{{"k", c.k},
              {"denom_bound", c.denom_bound},
              {"stages", c.stages},
              {"status", to_string(c.status)},
              {"conditions",
               {{"positivity", to_string(c.positivity)},
                {"subdivision", to_string(c.subdivision)},
                {"containment", to_string(c.containment)},
                {"separation", to_string(c.separation)}}},
              {"positivity", pos},
              {"subdivision", sub},
              {"containment", cont},
              {"separation", sep},
              {"notes", c.notes}};
}

inline Json to_json(const DivisionCertificate& c) {
  Json checks = Json::array();
  for (const auto& m : c.checks) {
    Json mub = Json::array();
    for (const auto& x : m.mu_b) mub.push_back(io::to_json(x));
    checks.push_back({{"p", io::to_json(m.p)},
                      {"mu_A", io::to_json(m.mu_a)},
                      {"mu_B", mub},
                      {"n_mu_B0", io::to_json(m.n_mu_b0)},
                      {"gap", io::to_json(m.gap)},
                      {"leftover", io::to_json(m.leftover)},
                      {"internal_bound", io::to_json(m.internal_bound)},
                      {"base_mass", io::to_json(m.base_mass)},
                      {"lower_ok", m.lower_ok},
                      {"upper_ok", m.upper_ok},
                      {"internal_ok", m.internal_ok},
                      {"leftover_ok", m.leftover_ok},
                      {"base_ok", m.base_ok},
                      {"equal_ok", m.equal_ok},
                      {"invariant_ok", m.invariant_ok}});
  }
  Json bs = Json::array();
  for (const auto& b : c.b) bs.push_back(b.words());
  return Json{{"n", c.n},
              {"eps", io::to_json(c.eps)},
              {"N", c.N},
              {"mode", to_string(c.family)},
              {"A", c.a.words()},
              {"partition", io::to_json(c.partition)},
              {"p_i", c.p_i},
              {"q_i", c.q_i},
              {"B", bs},
              {"partition_ok", c.partition_ok},
              {"B_disjoint_ok", c.b_disjoint_ok},
              {"measures", checks}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands. Each returns the certificate and its status.

struct Outcome {
  Json certificate;
  Status status = Status::Verified;
};

struct AmalgamateArgs {
  std::string a, b, c, alpha, beta, strategy = "product", out;
  std::uint64_t seed = 0;
};

inline Outcome cmd_amalgamate(Context& ctx, const AmalgamateArgs& args) {
  auto a = detail::load_algebra(ctx, args.a);
  auto b = detail::load_algebra(ctx, args.b);
  auto c = detail::load_algebra(ctx, args.c);
  auto alpha = io::embedding_from_json(ctx.read_json(args.alpha), &a, &b);
  auto beta = io::embedding_from_json(ctx.read_json(args.beta), &a, &c);
  for (const auto* e : {&alpha, &beta}) {
    auto chk = is_embedding(*e);
    if (!chk.ok) throw Error(ErrorKind::MalformedInput, "input embedding: " + chk.violation);
  }
  const auto strategy = parse_strategy(args.strategy);
  Json cert = ctx.certificate("amalgamate", args.seed);
  cert["strategy"] = to_string(strategy);
  Json checks = Json::array();
  try {
    auto m = amalgamate(alpha, beta, strategy);
    Json marg = Json::array();
    bool all = true;
    for (const auto& x : m.marginals) {
      all = all && x.holds;
      marg.push_back({{"source_atom", x.source_atom},
                      {"kind", x.kind},
                      {"atom", x.atom},
                      {"expected", io::to_json(x.expected)},
                      {"actual", io::to_json(x.actual)},
                      {"holds", x.holds}});
    }
    auto va = is_embedding(m.alpha_prime), vb = is_embedding(m.beta_prime);
    auto vd = validate(m.d);
    checks.push_back(detail::check_entry("marginals", all));
    checks.push_back(detail::check_entry("alpha_prime_embedding", va.ok, va.violation));
    checks.push_back(detail::check_entry("beta_prime_embedding", vb.ok, vb.violation));
    checks.push_back(detail::check_entry("square_commutes", square_commutes(alpha, beta, m)));
    checks.push_back(detail::check_entry("amalgam_valid", vd.valid, vd.valid ? "" : vd.violations.front()));
    checks.push_back(detail::check_entry("atom_count", m.d.size() <= [&] {
      std::size_t n = 0;
      for (const auto& x : a.atoms()) n += alpha.blocks.at(x.id).size() * beta.blocks.at(x.id).size();
      return n;
    }()));
    cert["outputs"] = {{"D", io::to_json(m.d)},
                       {"alpha_prime", io::to_json(m.alpha_prime)},
                       {"beta_prime", io::to_json(m.beta_prime)},
                       {"marginals", marg}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Precondition) throw;
    checks.push_back(detail::check_entry("amalgam_valid", false, e.what()));
  }
  cert["checks"] = detail::sorted_checks(checks);
  auto status = detail::status_of_checks(cert["checks"]);
  cert["status"] = to_string(status);
  return {cert, status};
}

struct LimitBuildArgs {
  std::size_t k = 2, stages = 8;
  std::uint64_t denoms = 3, seed = 1;
  std::string out, cert;
};

inline Outcome cmd_limit_build(Context& ctx, const LimitBuildArgs& args, std::string& chain_bytes) {
  auto chain = build_limit(args.k, args.stages, args.denoms, args.seed);
  chain_bytes = io::dump(io::to_json(chain));
  Json cert = ctx.certificate("limit-build", args.seed);
  auto report = validate_chain(chain);
  Json checks = Json::array();
  checks.push_back(detail::check_entry("chain_valid", report.valid, report.valid ? "" : report.violations.front()));
  cert["checks"] = checks;
  cert["outputs"] = {{"chain_sha256", sha256_hex(chain_bytes)},
                     {"stages", chain.stage_count()},
                     {"final_atoms", chain.final_stage().size()},
                     {"tasks", chain.task_log().size()},
                     {"truncated", chain.truncated()}};
  auto status = detail::status_of_checks(checks);
  cert["status"] = to_string(status);
  return {cert, status};
}

struct CheckArgs {
  std::string chain, out;
  std::uint64_t denoms = 4, seed = 0;
  std::size_t search_nodes = 20000;
  bool no_extension = false;
};

inline Outcome cmd_check(Context& ctx, const CheckArgs& args) {
  auto chain = detail::load_chain(ctx, args.chain);
  VerifyOptions opt;
  opt.search_nodes = args.search_nodes;
  opt.place_by_extension = !args.no_extension;
  auto sc = verify_dynamical_simplex(chain, args.denoms, opt);
  Json cert = ctx.certificate("check", args.seed);
  cert["simplex"] = detail::to_json(sc);
  cert["status"] = to_string(sc.status);
  return {cert, sc.status};
}

struct DivideArgs {
  std::string set, eps, mode = "all", measures, out;
  std::size_t n = 2, word_budget = 24;
  std::uint64_t seed = 0;
};

inline Outcome cmd_divide(Context& ctx, const DivideArgs& args) {
  const auto eps = parse_rational(args.eps);
  if (sgn(eps) <= 0) throw Error(ErrorKind::MalformedInput, "--eps must be positive, got " + args.eps);
  if (args.n == 0) throw Error(ErrorKind::MalformedInput, "--n must be at least 1");
  const auto family = parse_family(args.mode);
  const auto measures = detail::parse_measures(args.measures.empty() ? "1/2" : args.measures);
  auto a = io::clopen_from_json(ctx.read_json(args.set));
  if (a.is_empty()) throw Error(ErrorKind::MalformedInput, "the set to divide is empty");
  if (family == GeneratorFamily::AllSwaps)
    for (const auto& m : measures)
      if (!m.is_uniform())
        throw Error(ErrorKind::MalformedInput, "only the uniform measure is invariant under all swaps; use --mode weight");
  Json cert = ctx.certificate("divide", args.seed);
  try {
    auto dc = approx_divide(a, args.n, eps, family, measures, args.word_budget);
    cert["division"] = detail::to_json(dc);
    auto status = dc.all_ok() ? Status::Verified : Status::Failed;
    cert["status"] = to_string(status);
    return {cert, status};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Budget) throw;
    cert["status"] = to_string(Status::Incomplete);
    cert["detail"] = e.what();
    return {cert, Status::Incomplete};
  }
}

struct BackForthArgs {
  std::string m, n, out;
  std::size_t atoms = 16, max_stages = 64;
  std::uint64_t seed = 0;
};

inline Json pairs_json(const BackAndForthState& st) {
  Json pairs = Json::array();
  for (const auto& pr : st.iso.pairs)
    pairs.push_back({{"m", io::to_json(pr.m)},
                     {"n", io::to_json(pr.n)},
                     {"mu_m", io::to_json(st.m.measure(pr.m))},
                     {"mu_n", io::to_json(st.n.measure(pr.n))}});
  return pairs;
}

inline Outcome cmd_backforth(Context& ctx, const BackForthArgs& args) {
  auto m = detail::load_chain(ctx, args.m);
  auto n = detail::load_chain(ctx, args.n);
  if (m.k() != n.k()) throw Error(ErrorKind::MalformedInput, "chains have different vertex counts");
  Json cert = ctx.certificate("backforth", args.seed);
  BackAndForthOptions opt;
  opt.max_stages = args.max_stages;
  try {
    auto st = back_and_forth(m, n, args.atoms, opt);
    auto chk = check_partial_iso(st.m, st.n, st.iso);
    Json checks = Json::array();
    checks.push_back(detail::check_entry("partial_isomorphism", chk.ok, chk.violation));
    auto em = enumerate_atoms(m), en = enumerate_atoms(n);
    bool covered = true;
    for (std::size_t i = 0; i < args.atoms; ++i) {
      if (i < em.size()) covered = covered && generated_by(st.m, st.iso, Side::M, AtomSet{em[i].first, {em[i].second}});
      if (i < en.size()) covered = covered && generated_by(st.n, st.iso, Side::N, AtomSet{en[i].first, {en[i].second}});
    }
    checks.push_back(detail::check_entry("targets_generated", covered));
    cert["checks"] = detail::sorted_checks(checks);
    cert["outputs"] = {{"pairs", pairs_json(st)},
                       {"stages_m", st.m.stage_count()},
                       {"stages_n", st.n.stage_count()},
                       {"searched", st.searched},
                       {"discharged", st.discharged}};
    auto status = detail::status_of_checks(cert["checks"]);
    cert["status"] = to_string(status);
    return {cert, status};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Budget) throw;
    cert["status"] = to_string(Status::Incomplete);
    cert["detail"] = e.what();
    return {cert, Status::Incomplete};
  }
}

struct SpeedupArgs {
  std::string chain, perm, out;
  std::size_t atoms = 16, max_stages = 64;
  std::uint64_t seed = 0;
};

inline Outcome cmd_speedup(Context& ctx, const SpeedupArgs& args) {
  auto chain = detail::load_chain(ctx, args.chain);
  auto g = detail::parse_index_list(args.perm);
  Json cert = ctx.certificate("speedup-demo", args.seed);
  BackAndForthOptions opt;
  opt.max_stages = args.max_stages;
  try {
    auto h = limit_isomorphism_h(chain, g, args.atoms, opt);
    Json entries = Json::array();
    for (const auto& e : h.pushforward)
      entries.push_back({{"m", io::to_json(e.pair.m)},
                         {"h", io::to_json(e.pair.n)},
                         {"mu", io::to_json(e.source)},
                         {"mu_g_of_h", io::to_json(e.image)},
                         {"holds", e.holds}});
    auto chk = check_partial_iso(h.state.m, h.state.n, h.state.iso);
    Json checks = Json::array();
    checks.push_back(detail::check_entry("partial_isomorphism", chk.ok, chk.violation));
    checks.push_back(detail::check_entry("pushforward", h.all_hold()));
    cert["checks"] = detail::sorted_checks(checks);
    cert["perm"] = g;
    cert["outputs"] = {{"pushforward", entries}};
    auto status = detail::status_of_checks(cert["checks"]);
    cert["status"] = to_string(status);
    return {cert, status};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Budget) throw;
    cert["status"] = to_string(Status::Incomplete);
    cert["detail"] = e.what();
    return {cert, Status::Incomplete};
  }
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool replay = false);

namespace detail {

inline int replay_certificate(const std::string& path, std::ostream& out, std::ostream& err) {
  const auto bytes = io::read_file(path);
  const auto cert = io::parse_json(bytes, path);
  if (!cert.is_object() || cert.value("schema", "") != "cert.v1" || !cert.contains("argv") || !cert["argv"].is_array())
    throw Error(ErrorKind::MalformedInput, path + " is not a cert.v1 certificate");
  for (const auto& in : cert.value("inputs", Json::array())) {
    const auto p = in.at("path").get<std::string>();
    const auto now = sha256_hex(io::read_file(p));
    if (now != in.at("sha256").get<std::string>()) {
      err << "replay: input " << p << " changed since the certificate was written\n";
      return kFailed;
    }
  }
  std::vector<std::string> argv = cert["argv"].get<std::vector<std::string>>();
  std::ostringstream regenerated, sink;
  int code = run(argv, regenerated, sink, true);
  if (code == kMalformed) {
    err << sink.str();
    return kMalformed;
  }
  if (regenerated.str() != bytes) {
    err << "replay: regenerated certificate differs from " << path << "\n";
    return kFailed;
  }
  out << "replay: identical certificate, status " << cert.value("status", "?") << "\n";
  return kVerified;
}

}  // namespace detail

/// Runs one command. `args` excludes the program name. In replay mode no
/// files are written and the certificate is printed to `out`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool replay) {
  CLI::App app{"Exact constructions for dynamical simplices on Cantor space", "cantor-simplex"};
  app.require_subcommand(1);

  AmalgamateArgs am;
  auto* s_am = app.add_subcommand("amalgamate", "Amalgamate A->B and A->C into D");
  s_am->add_option("--a", am.a, "algebra A (algebra.v1)")->required();
  s_am->add_option("--b", am.b, "algebra B")->required();
  s_am->add_option("--c", am.c, "algebra C")->required();
  s_am->add_option("--alpha", am.alpha, "embedding A->B (embedding.v1)")->required();
  s_am->add_option("--beta", am.beta, "embedding A->C")->required();
  s_am->add_option("--strategy", am.strategy, "product or northwest");
  s_am->add_option("--out", am.out, "certificate path (default stdout)");
  s_am->add_option("--seed", am.seed, "recorded in the certificate");

  LimitBuildArgs lb;
  auto* s_lb = app.add_subcommand("limit-build", "Build an initial segment of the limit");
  s_lb->add_option("--k", lb.k, "number of vertices")->check(CLI::PositiveNumber);
  s_lb->add_option("--stages", lb.stages, "stage budget, counting the trivial stage")->check(CLI::PositiveNumber);
  s_lb->add_option("--denoms", lb.denoms, "denominator budget")->check(CLI::PositiveNumber);
  s_lb->add_option("--seed", lb.seed, "tie-break seed");
  s_lb->add_option("--out", lb.out, "chain path (chain.v1, default stdout)");
  s_lb->add_option("--cert", lb.cert, "certificate path");

  CheckArgs ck;
  auto* s_ck = app.add_subcommand("check", "Verify the dynamical-simplex conditions on a chain");
  s_ck->add_option("--chain", ck.chain, "chain.v1 file")->required();
  s_ck->add_option("--denoms", ck.denoms, "denominator bound")->check(CLI::PositiveNumber);
  s_ck->add_option("--search-nodes", ck.search_nodes, "node budget per witness search");
  s_ck->add_flag("--no-extension", ck.no_extension, "only search the built stages");
  s_ck->add_option("--out", ck.out, "certificate path");
  s_ck->add_option("--seed", ck.seed, "recorded in the certificate");

  DivideArgs dv;
  auto* s_dv = app.add_subcommand("divide", "Approximately divide a clopen set into n parts");
  s_dv->add_option("--set", dv.set, "clopen.v1 file")->required();
  s_dv->add_option("--n", dv.n, "number of parts")->required();
  s_dv->add_option("--eps", dv.eps, "tolerance p/q")->required();
  s_dv->add_option("--mode", dv.mode, "all or weight");
  s_dv->add_option("--measures", dv.measures, "Bernoulli parameters p1,p2,...");
  s_dv->add_option("--word-budget", dv.word_budget, "maximum cylinder word length");
  s_dv->add_option("--out", dv.out, "certificate path");
  s_dv->add_option("--seed", dv.seed, "recorded in the certificate");

  BackForthArgs bf;
  auto* s_bf = app.add_subcommand("backforth", "Back-and-forth between two chains");
  s_bf->add_option("--m", bf.m, "first chain")->required();
  s_bf->add_option("--n", bf.n, "second chain")->required();
  s_bf->add_option("--atoms", bf.atoms, "number of enumerated atoms to match on each side");
  s_bf->add_option("--max-stages", bf.max_stages, "stage budget per chain");
  s_bf->add_option("--out", bf.out, "certificate path");
  s_bf->add_option("--seed", bf.seed, "recorded in the certificate");

  SpeedupArgs sp;
  auto* s_sp = app.add_subcommand("speedup-demo", "Isomorphism between a chain and its vertex reindexing");
  s_sp->add_option("--chain", sp.chain, "chain.v1 file")->required();
  s_sp->add_option("--perm", sp.perm, "vertex map g as q0,q1,... (0-based)")->required();
  s_sp->add_option("--atoms", sp.atoms, "number of enumerated atoms to match");
  s_sp->add_option("--max-stages", sp.max_stages, "stage budget per chain");
  s_sp->add_option("--out", sp.out, "certificate path");
  s_sp->add_option("--seed", sp.seed, "recorded in the certificate");

  std::string replay_path;
  auto* s_rp = app.add_subcommand("replay", "Re-run a certificate and compare bytes");
  s_rp->add_option("certificate", replay_path, "cert.v1 file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kVerified;
  } catch (const CLI::ParseError& e) {
    err << "cantor-simplex: " << e.what() << "\n";
    return kMalformed;
  }

  Context ctx(args, replay);
  auto emit = [&](const Outcome& o, const std::string& path) {
    ctx.produced = io::dump(o.certificate);
    ctx.write(path, ctx.produced, out);
    if (replay) out << ctx.produced;
    return exit_code(o.status);
  };
  try {
    if (s_am->parsed()) return emit(cmd_amalgamate(ctx, am), am.out);
    if (s_lb->parsed()) {
      std::string chain_bytes;
      auto o = cmd_limit_build(ctx, lb, chain_bytes);
      ctx.write(lb.out, chain_bytes, out);
      ctx.produced = io::dump(o.certificate);
      if (replay)
        out << ctx.produced;
      else if (!lb.cert.empty())
        io::write_file(lb.cert, ctx.produced);
      return exit_code(o.status);
    }
    if (s_ck->parsed()) return emit(cmd_check(ctx, ck), ck.out);
    if (s_dv->parsed()) return emit(cmd_divide(ctx, dv), dv.out);
    if (s_bf->parsed()) return emit(cmd_backforth(ctx, bf), bf.out);
    if (s_sp->parsed()) return emit(cmd_speedup(ctx, sp), sp.out);
    if (s_rp->parsed()) {
      if (replay) throw Error(ErrorKind::MalformedInput, "a certificate cannot replay another replay");
      return detail::replay_certificate(replay_path, out, err);
    }
  } catch (const Error& e) {
    err << "cantor-simplex: " << e.what() << "\n";
    return e.kind() == ErrorKind::Budget ? kIncomplete : kMalformed;
  } catch (const nlohmann::json::exception& e) {
    err << "cantor-simplex: malformed JSON: " << e.what() << "\n";
    return kMalformed;
  }
  return kMalformed;
}

}  // namespace cantor_simplex::cli
