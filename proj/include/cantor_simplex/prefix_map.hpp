#pragma once

/**
 * @file prefix_map.hpp
 * @brief Prefix-substitution homeomorphisms of {0,1}^N and words over a
 * registry of them.
 */

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cantor_simplex/clopen.hpp"
#include "cantor_simplex/error.hpp"

namespace cantor_simplex {

/// x = u y  ->  v y for the rule (u, v) whose source u prefixes x.
class PrefixMapHomeo {
 public:
  using Rule = std::pair<Word, Word>;

  PrefixMapHomeo() { rules_.emplace_back("", ""); }
  explicit PrefixMapHomeo(std::vector<Rule> rules) : rules_(std::move(rules)) {
    std::sort(rules_.begin(), rules_.end());
    check();
  }

  static PrefixMapHomeo identity() { return PrefixMapHomeo(); }

  /// Exchange of [u] and [v] (|u| = |v|, u != v), identity elsewhere.
  static PrefixMapHomeo swap(const Word& u, const Word& v) {
    if (u.size() != v.size()) throw Error(ErrorKind::Precondition, "swapped cylinders must have equal length");
    if (u == v) throw Error(ErrorKind::Precondition, "cannot swap a cylinder with itself");
    std::vector<Rule> rules;
    rules.emplace_back(u, v);
    rules.emplace_back(v, u);
    const auto rest = complement(ClopenSet(std::vector<Word>{u, v}));
    for (const auto& w : rest.words()) rules.emplace_back(w, w);
    return PrefixMapHomeo(std::move(rules));
  }

  const std::vector<Rule>& rules() const { return rules_; }

  PrefixMapHomeo inverse() const {
    std::vector<Rule> inv;
    for (const auto& [u, v] : rules_) inv.emplace_back(v, u);
    return PrefixMapHomeo(std::move(inv));
  }

  bool is_involution() const {
    std::map<Word, Word> m(rules_.begin(), rules_.end());
    for (const auto& [u, v] : rules_) {
      auto it = m.find(v);
      if (it == m.end() || it->second != u) return false;
    }
    return true;
  }

  /// Every rule moves words to words of the same length and weight, so
  /// every Bernoulli measure is preserved.
  bool weight_preserving() const {
    return std::all_of(rules_.begin(), rules_.end(),
                       [](const Rule& r) { return r.first.size() == r.second.size() && weight(r.first) == weight(r.second); });
  }

  /// Every rule keeps word length, so the uniform measure is preserved.
  bool length_preserving() const {
    return std::all_of(rules_.begin(), rules_.end(), [](const Rule& r) { return r.first.size() == r.second.size(); });
  }

  ClopenSet image(const ClopenSet& s) const {
    std::vector<Word> out;
    for (const auto& w : s.words()) image_word(w, out);
    return ClopenSet(std::move(out));
  }

  friend bool operator==(const PrefixMapHomeo&, const PrefixMapHomeo&) = default;

 private:
  void image_word(const Word& w, std::vector<Word>& out) const {
    for (const auto& [u, v] : rules_) {
      if (is_prefix(u, w)) {
        out.push_back(v + w.substr(u.size()));
        return;
      }
    }
    // w is a proper prefix of some sources: split.
    image_word(w + '0', out);
    image_word(w + '1', out);
  }

  static void check_code(const std::vector<Word>& code, const char* side) {
    for (const auto& w : code)
      if (!is_binary_word(w)) throw Error(ErrorKind::MalformedInput, "'" + w + "' is not a binary word");
    std::vector<Word> sorted = code;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
      if (is_prefix(sorted[i], sorted[i + 1]))
        throw Error(ErrorKind::Precondition, std::string(side) + " words are not prefix-free: '" + sorted[i] +
                                                 "' and '" + sorted[i + 1] + "'");
    // Prefix-free and Kraft sum 1 means the code is complete.
    Rational kraft(0);
    for (const auto& w : sorted) {
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 2, w.size());
      kraft += Rational(1, den);
    }
    if (kraft != 1) throw Error(ErrorKind::Precondition, std::string(side) + " words do not cover the space");
  }

  void check() const {
    std::vector<Word> src, dst;
    for (const auto& [u, v] : rules_) {
      src.push_back(u);
      dst.push_back(v);
    }
    check_code(src, "source");
    check_code(dst, "target");
  }

  std::vector<Rule> rules_;
};

struct Letter {
  std::size_t generator = 0;
  int exponent = 1;  // +1 or -1
  friend bool operator==(const Letter&, const Letter&) = default;
  friend auto operator<=>(const Letter&, const Letter&) = default;
};

/// Product g_1^e_1 ... g_r^e_r, applied right to left. Empty = identity.
struct GroupWord {
  std::vector<Letter> letters;
  friend bool operator==(const GroupWord&, const GroupWord&) = default;
};

/// Generators referenced by GroupWords, deduplicated by their rules.
class GeneratorRegistry {
 public:
  std::size_t intern(const PrefixMapHomeo& g) {
    for (std::size_t i = 0; i < gens_.size(); ++i)
      if (gens_[i] == g) return i;
    gens_.push_back(g);
    involution_.push_back(g.is_involution());
    return gens_.size() - 1;
  }

  std::size_t size() const { return gens_.size(); }
  const PrefixMapHomeo& at(std::size_t i) const {
    if (i >= gens_.size()) throw Error(ErrorKind::Precondition, "unregistered generator " + std::to_string(i));
    return gens_[i];
  }
  const std::vector<PrefixMapHomeo>& generators() const { return gens_; }

  /// Free reduction, with g^-1 = g for involutions.
  GroupWord reduce(const GroupWord& w) const {
    std::vector<Letter> out;
    for (auto l : w.letters) {
      at(l.generator);
      if (involution_[l.generator]) l.exponent = 1;
      if (!out.empty() && out.back().generator == l.generator &&
          (out.back().exponent == -l.exponent || (involution_[l.generator]))) {
        out.pop_back();
        continue;
      }
      out.push_back(l);
    }
    return GroupWord{std::move(out)};
  }

  GroupWord letter(std::size_t g) const { return reduce(GroupWord{{Letter{g, 1}}}); }

  /// first o second, i.e. apply `second`, then `first`.
  GroupWord compose(const GroupWord& first, const GroupWord& second) const {
    GroupWord w = first;
    w.letters.insert(w.letters.end(), second.letters.begin(), second.letters.end());
    return reduce(w);
  }

  GroupWord inverse(const GroupWord& w) const {
    GroupWord inv;
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) inv.letters.push_back({it->generator, -it->exponent});
    return reduce(inv);
  }

  ClopenSet apply(const GroupWord& w, const ClopenSet& s) const {
    ClopenSet cur = s;
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) {
      const auto& g = at(it->generator);
      cur = it->exponent > 0 ? g.image(cur) : g.inverse().image(cur);
    }
    return cur;
  }

  /// Re-expresses a word of `other` over this registry, interning as needed.
  GroupWord import(const GeneratorRegistry& other, const GroupWord& w) {
    GroupWord out;
    for (const auto& l : w.letters) out.letters.push_back({intern(other.at(l.generator)), l.exponent});
    return reduce(out);
  }

  bool all_weight_preserving() const {
    return std::all_of(gens_.begin(), gens_.end(), [](const PrefixMapHomeo& g) { return g.weight_preserving(); });
  }
  bool all_length_preserving() const {
    return std::all_of(gens_.begin(), gens_.end(), [](const PrefixMapHomeo& g) { return g.length_preserving(); });
  }

 private:
  std::vector<PrefixMapHomeo> gens_;
  std::vector<bool> involution_;
};

inline ClopenSet apply_prefix_map(const PrefixMapHomeo& g, const ClopenSet& s) { return g.image(s); }

}  // namespace cantor_simplex
