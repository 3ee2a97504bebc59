#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mtk/core/canonical.hpp"
#include "mtk/core/structure.hpp"

namespace mtk {

struct StructureEnumerationOptions {
  /// Upper bound on raw candidate structures examined.
  std::uint64_t max_candidates = std::uint64_t{1} << 22;
  /// Optional restriction (e.g. "symmetric and irreflexive" for simple graphs).
  std::function<bool(const Structure&)> filter;
};

/// Default element names e0, e1, ...
inline std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("e" + std::to_string(i));
  return out;
}

/// Calls `visit` with every tuple of length `arity` over 0..n-1 in lexicographic order.
inline void for_each_tuple(std::size_t n, std::size_t arity,
                           const std::function<void(const Tuple&)>& visit) {
  if (n == 0 && arity > 0) return;
  Tuple t(arity, 0);
  while (true) {
    visit(t);
    std::size_t i = arity;
    while (i > 0) {
      --i;
      if (++t[i] < n) break;
      t[i] = 0;
      if (i == 0) return;
    }
    if (arity == 0) return;
  }
}

/// One structure per isomorphism class of size `n` over `vocab`, by brute force
/// over every set of atoms, ordered by canonical key. Representatives are in
/// canonical element order with names e0..e(n-1).
inline std::vector<Structure> enumerate_structures(const Vocabulary& vocab, std::size_t n,
                                                   const StructureEnumerationOptions& opt = {}) {
  std::vector<std::pair<std::size_t, Tuple>> atoms;
  for (std::size_t sym = 0; sym < vocab.size(); ++sym) {
    for_each_tuple(n, vocab[sym].arity, [&](const Tuple& t) { atoms.emplace_back(sym, t); });
  }
  if (atoms.size() >= 63 || (std::uint64_t{1} << atoms.size()) > opt.max_candidates) {
    throw ResourceLimit("enumerate_structures: 2^" + std::to_string(atoms.size()) +
                        " candidates exceed the configured bound of " +
                        std::to_string(opt.max_candidates));
  }
  const auto names = default_names(n);
  std::map<std::string, Structure> classes;
  const std::uint64_t total = std::uint64_t{1} << atoms.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    StructureBuilder b(vocab);
    for (const auto& nm : names) b.add_element(nm);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (mask >> i & 1U) b.add(atoms[i].first, atoms[i].second);
    }
    Structure s = b.build_unchecked();
    if (vocab.has_annotations()) {
      try {
        StructureBuilder::validate(s);
      } catch (const ValidationError&) {
        continue;
      }
    }
    if (opt.filter && !opt.filter(s)) continue;
    auto lab = canonical_labeling(s);
    if (!classes.count(lab.key)) classes.emplace(lab.key, permuted(s, lab.order, &names));
  }
  std::vector<Structure> out;
  out.reserve(classes.size());
  for (auto& [k, s] : classes) out.push_back(std::move(s));
  return out;
}

}  // namespace mtk
