#pragma once

#include <string>
#include <vector>

#include "mtk/core/structure.hpp"
#include "mtk/core/enumerate.hpp"

namespace mtk {

/// Quantifier-free type of a tuple. Positions are grouped into blocks by
/// equality; `pattern[i]` is the block of position i, numbered by first
/// occurrence. Atoms are recorded over block numbers, so a type never
/// distinguishes positions that carry the same element.
struct QfType {
  std::size_t length = 0;
  std::vector<std::size_t> pattern;
  std::vector<std::vector<Tuple>> atoms;  // per symbol, sorted block tuples

  std::size_t blocks() const {
    std::size_t b = 0;
    for (auto p : pattern) b = std::max(b, p + 1);
    return b;
  }

  bool operator==(const QfType&) const = default;
  auto operator<=>(const QfType&) const = default;

  /// `n|0,0,1|E:0,1;1,0|...`
  std::string key() const {
    std::string out = std::to_string(length) + "|";
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(pattern[i]);
    }
    for (std::size_t sym = 0; sym < atoms.size(); ++sym) {
      out += "|" + std::to_string(sym) + ":";
      for (std::size_t t = 0; t < atoms[sym].size(); ++t) {
        if (t) out += ";";
        for (std::size_t i = 0; i < atoms[sym][t].size(); ++i) {
          if (i) out += ",";
          out += std::to_string(atoms[sym][t][i]);
        }
      }
    }
    return out;
  }
};

inline QfType qf_type(const Structure& s, const std::vector<Element>& tuple) {
  QfType out;
  out.length = tuple.size();
  std::vector<Element> distinct;
  for (auto e : tuple) {
    if (e >= s.size()) throw ValidationError("element index outside domain");
    std::size_t b = 0;
    while (b < distinct.size() && distinct[b] != e) ++b;
    if (b == distinct.size()) distinct.push_back(e);
    out.pattern.push_back(b);
  }
  const auto& v = s.vocabulary();
  out.atoms.resize(v.size());
  Tuple image;
  for (std::size_t sym = 0; sym < v.size(); ++sym) {
    for_each_tuple(distinct.size(), v[sym].arity, [&](const Tuple& t) {
      image.resize(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) image[i] = distinct[t[i]];
      if (s.holds(sym, image)) out.atoms[sym].push_back(t);
    });
  }
  return out;
}

inline QfType qf_type(const Structure& s, const std::vector<std::string>& names) {
  std::vector<Element> t;
  for (const auto& n : names) {
    auto e = s.find(n);
    if (!e) throw ValidationError("element outside domain: " + n);
    t.push_back(*e);
  }
  return qf_type(s, t);
}

}  // namespace mtk
