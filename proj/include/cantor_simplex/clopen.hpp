#pragma once

/**
 * @file clopen.hpp
 * @brief Clopen subsets of {0,1}^N as finite unions of cylinders.
 *
 * A cylinder [w] is the set of sequences starting with the binary word w;
 * the empty word is the whole space. A ClopenSet keeps a canonical form:
 * prefix-free, with sibling pairs w0, w1 merged into w, sorted.
 */

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cantor_simplex/error.hpp"
#include "cantor_simplex/rational.hpp"

namespace cantor_simplex {

using Word = std::string;

inline bool is_binary_word(std::string_view w) {
  return std::all_of(w.begin(), w.end(), [](char c) { return c == '0' || c == '1'; });
}

inline bool is_prefix(std::string_view p, std::string_view w) {
  return p.size() <= w.size() && w.compare(0, p.size(), p) == 0;
}

inline std::size_t weight(std::string_view w) { return static_cast<std::size_t>(std::count(w.begin(), w.end(), '1')); }

class ClopenSet {
 public:
  ClopenSet() = default;
  explicit ClopenSet(std::vector<Word> words) : words_(std::move(words)) {
    for (const auto& w : words_)
      if (!is_binary_word(w)) throw Error(ErrorKind::MalformedInput, "'" + w + "' is not a binary word");
    canonicalize();
  }

  static ClopenSet empty() { return ClopenSet(); }
  static ClopenSet full() { return ClopenSet(std::vector<Word>{""}); }
  static ClopenSet cylinder(Word w) { return ClopenSet(std::vector<Word>{std::move(w)}); }

  const std::vector<Word>& words() const { return words_; }
  bool is_empty() const { return words_.empty(); }
  bool is_full() const { return words_.size() == 1 && words_.front().empty(); }
  std::size_t max_length() const {
    std::size_t m = 0;
    for (const auto& w : words_) m = std::max(m, w.size());
    return m;
  }

  /// Whether the cylinder [w] lies inside the set.
  bool contains_cylinder(std::string_view w) const {
    return std::any_of(words_.begin(), words_.end(), [&](const Word& u) { return is_prefix(u, w); });
  }

  friend bool operator==(const ClopenSet&, const ClopenSet&) = default;
  friend bool operator<(const ClopenSet& a, const ClopenSet& b) { return a.words_ < b.words_; }

 private:
  void canonicalize() {
    std::sort(words_.begin(), words_.end());
    words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
    // Drop words covered by a shorter word; in sorted order a prefix comes first.
    std::vector<Word> kept;
    for (auto& w : words_)
      if (kept.empty() || !is_prefix(kept.back(), w)) kept.push_back(std::move(w));
    // Merge siblings until stable; a stack pass handles cascades.
    std::set<Word> s(kept.begin(), kept.end());
    std::vector<Word> stack(kept.begin(), kept.end());
    while (!stack.empty()) {
      Word w = std::move(stack.back());
      stack.pop_back();
      if (w.empty() || !s.count(w)) continue;
      Word sib = w;
      sib.back() = sib.back() == '0' ? '1' : '0';
      if (s.count(sib)) {
        s.erase(w);
        s.erase(sib);
        Word parent = w.substr(0, w.size() - 1);
        s.insert(parent);
        stack.push_back(std::move(parent));
      }
    }
    words_.assign(s.begin(), s.end());
  }

  std::vector<Word> words_;
};

namespace detail {

/// [w] minus the union of `cuts` (cylinders), as a list of words.
inline void subtract_from_word(const Word& w, const std::vector<Word>& cuts, std::vector<Word>& out) {
  bool any_inside = false;
  for (const auto& c : cuts) {
    if (is_prefix(c, w)) return;  // [w] entirely removed
    if (is_prefix(w, c)) any_inside = true;
  }
  if (!any_inside) {
    out.push_back(w);
    return;
  }
  std::vector<Word> relevant;
  for (const auto& c : cuts)
    if (is_prefix(w, c)) relevant.push_back(c);
  subtract_from_word(w + '0', relevant, out);
  subtract_from_word(w + '1', relevant, out);
}

}  // namespace detail

inline ClopenSet set_union(const ClopenSet& a, const ClopenSet& b) {
  std::vector<Word> ws = a.words();
  ws.insert(ws.end(), b.words().begin(), b.words().end());
  return ClopenSet(std::move(ws));
}

inline ClopenSet set_intersection(const ClopenSet& a, const ClopenSet& b) {
  std::vector<Word> ws;
  for (const auto& u : a.words())
    for (const auto& v : b.words()) {
      if (is_prefix(u, v))
        ws.push_back(v);
      else if (is_prefix(v, u))
        ws.push_back(u);
    }
  return ClopenSet(std::move(ws));
}

inline ClopenSet set_difference(const ClopenSet& a, const ClopenSet& b) {
  std::vector<Word> ws;
  for (const auto& u : a.words()) detail::subtract_from_word(u, b.words(), ws);
  return ClopenSet(std::move(ws));
}

inline ClopenSet complement(const ClopenSet& a) { return set_difference(ClopenSet::full(), a); }

inline bool disjoint(const ClopenSet& a, const ClopenSet& b) { return set_intersection(a, b).is_empty(); }

inline bool subset_of(const ClopenSet& a, const ClopenSet& b) { return set_difference(a, b).is_empty(); }

/// Words of length exactly `depth` whose cylinders make up the set; every
/// canonical word must have length at most `depth`.
inline std::vector<Word> expand_to_depth(const ClopenSet& s, std::size_t depth) {
  std::vector<Word> out;
  for (const auto& w : s.words()) {
    if (w.size() > depth) throw Error(ErrorKind::Precondition, "word longer than expansion depth");
    const std::size_t free = depth - w.size();
    for (std::size_t bits = 0; bits < (std::size_t{1} << free); ++bits) {
      Word x = w;
      for (std::size_t i = free; i-- > 0;) x.push_back(((bits >> i) & 1U) ? '1' : '0');
      out.push_back(std::move(x));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string to_string(const ClopenSet& s) {
  if (s.is_empty()) return "{}";
  std::string out = "{";
  for (std::size_t i = 0; i < s.words().size(); ++i) {
    if (i) out += ",";
    out += "[" + s.words()[i] + "]";
  }
  return out + "}";
}

/// Bernoulli(p) product measure: each coordinate is 1 with probability p.
/// p = 1/2 is the uniform measure.
class BernoulliMeasure {
 public:
  explicit BernoulliMeasure(Rational p) : p_(std::move(p)) {
    if (sgn(p_) <= 0 || p_ >= 1)
      throw Error(ErrorKind::Precondition, "Bernoulli parameter must lie in (0,1), got " + cantor_simplex::to_string(p_));
  }
  static BernoulliMeasure uniform() { return BernoulliMeasure(Rational(1, 2)); }

  const Rational& p() const { return p_; }
  bool is_uniform() const { return p_ == Rational(1, 2); }

  Rational cylinder(std::string_view w) const {
    Rational r(1);
    const Rational q = 1 - p_;
    for (char c : w) r *= (c == '1' ? p_ : q);
    return r;
  }

  Rational operator()(const ClopenSet& s) const {
    Rational total(0);
    for (const auto& w : s.words()) total += cylinder(w);
    return total;
  }

 private:
  Rational p_;
};

inline Rational cylinder_measure(const ClopenSet& s, const BernoulliMeasure& m) { return m(s); }

}  // namespace cantor_simplex
