#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mtk/core/canonical.hpp"
#include "mtk/core/embedding.hpp"
#include "mtk/core/enumerate.hpp"
#include "mtk/core/structure.hpp"
#include "mtk/logic/sentence.hpp"

namespace mtk {

/// Result of amalgamating D1 and D2 over C: `g1`, `g2` embed D1, D2 into
/// `structure` and agree on C.
struct Amalgam {
  Structure structure;
  std::vector<Element> g1;
  std::vector<Element> g2;
};

/// (C, D1, f1: C -> D1, D2, f2: C -> D2) -> amalgam, or nothing if the
/// strategy has no answer. The checker re-verifies every result.
using AmalgamationStrategy = std::function<std::optional<Amalgam>(
    const Structure&, const Structure&, const std::vector<Element>&, const Structure&,
    const std::vector<Element>&)>;

/// Calls `visit` with each one-point extension of `base` (new element last)
/// that is worth testing for membership.
using ExtensionGenerator =
    std::function<void(const Structure&, const std::function<void(const Structure&)>&)>;

struct AgeClass {
  std::string name;
  Vocabulary vocab;
  std::function<bool(const Structure&)> member;
  ExtensionGenerator extensions;
  AmalgamationStrategy amalgamate;
  /// f(n): the declared bound on the number of members of size n.
  std::function<std::uint64_t(std::size_t)> bound = [](std::size_t) {
    return std::uint64_t{1} << 20;
  };
  /// When set, membership is decided by configurations of at most this many
  /// elements and the strategy is free over the forbidden configurations;
  /// property checks then only examine problems of this total size.
  std::optional<std::size_t> locality_radius;
  /// Declared universal laws (used by scheme (a) when set).
  std::vector<Sentence> universal_laws;
  /// Cap on candidate extensions examined while enumerating one level.
  std::uint64_t max_candidates = std::uint64_t{1} << 24;

  std::shared_ptr<std::map<std::size_t, std::vector<Structure>>> cache =
      std::make_shared<std::map<std::size_t, std::vector<Structure>>>();
};

// ---------------------------------------------------------------------------
// extension generators

/// Every tuple over n+1 elements that mentions element n, per symbol.
inline std::vector<std::pair<std::size_t, Tuple>> new_atoms(const Vocabulary& v, std::size_t n) {
  std::vector<std::pair<std::size_t, Tuple>> out;
  for (std::size_t sym = 0; sym < v.size(); ++sym) {
    for_each_tuple(n + 1, v[sym].arity, [&](const Tuple& t) {
      if (std::find(t.begin(), t.end(), static_cast<Element>(n)) != t.end()) {
        out.emplace_back(sym, t);
      }
    });
  }
  return out;
}

inline std::string fresh_name(const Structure& s) {
  std::size_t k = s.size();
  while (s.find("e" + std::to_string(k))) ++k;
  return "e" + std::to_string(k);
}

/// Calls `visit` with `base` plus a new last element carrying each subset of
/// `atoms` (tuples that mention the new element).
inline void for_each_atom_subset(const Structure& base,
                                 const std::vector<std::pair<std::size_t, Tuple>>& atoms,
                                 const std::function<void(const Structure&)>& visit,
                                 std::uint64_t cap = std::uint64_t{1} << 24) {
  if (atoms.size() >= 63 || (std::uint64_t{1} << atoms.size()) > cap) {
    throw ResourceLimit("one-point extension has 2^" + std::to_string(atoms.size()) +
                        " candidate atom sets");
  }
  StructureBuilder root(base);
  root.add_element(fresh_name(base));
  const Structure start = root.build_unchecked();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << atoms.size()); ++mask) {
    StructureBuilder b(start);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (mask >> i & 1U) b.add(atoms[i].first, atoms[i].second);
    }
    visit(b.build_unchecked());
  }
}

/// Unrestricted one-point extensions over the class vocabulary.
inline ExtensionGenerator all_atoms_generator(std::uint64_t cap = std::uint64_t{1} << 24) {
  return [cap](const Structure& base, const std::function<void(const Structure&)>& visit) {
    for_each_atom_subset(base, new_atoms(base.vocabulary(), base.size()), visit, cap);
  };
}

// ---------------------------------------------------------------------------
// amalgamation helpers

/// Disjoint union of D1 and D2 glued along C, with no new atoms. D1 keeps its
/// names and order; D2's new elements follow.
inline Amalgam free_amalgam(const Structure& /*c*/, const Structure& d1,
                            const std::vector<Element>& f1, const Structure& d2,
                            const std::vector<Element>& f2) {
  StructureBuilder b(d1);
  std::vector<Element> g2(d2.size());
  std::vector<bool> in_c(d2.size(), false);
  for (std::size_t i = 0; i < f2.size(); ++i) {
    g2[f2[i]] = f1[i];
    in_c[f2[i]] = true;
  }
  for (Element x = 0; x < d2.size(); ++x) {
    if (in_c[x]) continue;
    const auto& nm = d2.name(x);
    g2[x] = b.find(nm) ? b.add_fresh_element("e") : b.add_element(nm);
  }
  for (std::size_t sym = 0; sym < d2.vocabulary().size(); ++sym) {
    for (const auto& t : d2.relation(sym)) {
      Tuple u;
      for (auto x : t) u.push_back(g2[x]);
      b.add(sym, std::move(u));
    }
  }
  std::vector<Element> g1(d1.size());
  for (Element x = 0; x < d1.size(); ++x) g1[x] = x;
  return {b.build_unchecked(), std::move(g1), std::move(g2)};
}

inline AmalgamationStrategy free_strategy() {
  return [](const Structure& c, const Structure& d1, const std::vector<Element>& f1,
            const Structure& d2, const std::vector<Element>& f2) -> std::optional<Amalgam> {
    return free_amalgam(c, d1, f1, d2, f2);
  };
}

/// Checks that `a` solves the problem: member of K, both maps embeddings,
/// agreement on C.
inline bool verify_amalgam(const AgeClass& k, const Structure& c, const Structure& d1,
                           const std::vector<Element>& f1, const Structure& d2,
                           const std::vector<Element>& f2, const Amalgam& a) {
  if (!is_embedding(d1, a.structure, Embedding{a.g1})) return false;
  if (!is_embedding(d2, a.structure, Embedding{a.g2})) return false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (a.g1[f1[i]] != a.g2[f2[i]]) return false;
  }
  return k.member(a.structure);
}

// ---------------------------------------------------------------------------
// enumeration

/// Member isomorphism classes of size exactly `n`, canonical order, elements
/// named e0.. in canonical order. Built level by level from one-point
/// extensions of the previous level, which is complete for hereditary classes.
inline const std::vector<Structure>& enumerate_age(const AgeClass& k, std::size_t n) {
  auto& cache = *k.cache;
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  std::vector<Structure> level;
  if (n == 0) {
    Structure empty(k.vocab);
    if (k.member(empty)) level.push_back(empty);
  } else {
    const auto& prev = enumerate_age(k, n - 1);
    std::map<std::string, Structure> found;
    const auto names = default_names(n);
    std::uint64_t examined = 0;
    for (const auto& base : prev) {
      k.extensions(base, [&](const Structure& s) {
        if (++examined > k.max_candidates) {
          throw ResourceLimit("enumerate_age(" + k.name + ", " + std::to_string(n) +
                              "): more than " + std::to_string(k.max_candidates) +
                              " candidates");
        }
        if (!k.member(s)) return;
        auto lab = canonical_labeling(s);
        if (found.count(lab.key)) return;
        found.emplace(lab.key, permuted(s, lab.order, &names));
        if (found.size() > k.bound(n)) {
          throw ResourceLimit("enumerate_age(" + k.name + ", " + std::to_string(n) +
                              "): more than f(n) = " + std::to_string(k.bound(n)) + " members");
        }
      });
    }
    for (auto& [key, s] : found) level.push_back(std::move(s));
  }
  return cache.emplace(n, std::move(level)).first->second;
}

/// Members of size at most n, by size then canonical order.
inline std::vector<Structure> enumerate_age_upto(const AgeClass& k, std::size_t n) {
  std::vector<Structure> out;
  for (std::size_t i = 0; i <= n; ++i) {
    const auto& lvl = enumerate_age(k, i);
    out.insert(out.end(), lvl.begin(), lvl.end());
  }
  return out;
}

/// Canonical key of `d` with its first `fixed` elements individually coloured.
inline std::string relative_key(const Structure& d, std::size_t fixed) {
  std::vector<int> colors(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    colors[i] = static_cast<int>(i < fixed ? i : fixed);
  }
  return canonical_labeling(d, colors).key;
}

/// Members D of size |C| + extra whose first |C| elements induce C,
/// one per isomorphism class over C, ordered by relative key.
inline std::vector<Structure> relative_extensions(const AgeClass& k, const Structure& c,
                                                  std::size_t extra) {
  std::vector<Structure> frontier{c};
  for (std::size_t step = 0; step < extra; ++step) {
    std::map<std::string, Structure> next;
    std::uint64_t examined = 0;
    for (const auto& base : frontier) {
      k.extensions(base, [&](const Structure& s) {
        if (++examined > k.max_candidates) {
          throw ResourceLimit("relative extensions of a size-" + std::to_string(c.size()) +
                              " structure exceed the candidate cap");
        }
        if (!k.member(s)) return;
        next.try_emplace(relative_key(s, c.size()), s);
      });
    }
    frontier.clear();
    for (auto& [key, s] : next) frontier.push_back(std::move(s));
  }
  return frontier;
}

/// Exhaustive check that `s` is closed under deleting single points.
inline std::optional<Structure> hereditary_violation(const AgeClass& k, const Structure& s) {
  for (Element x = 0; x < s.size(); ++x) {
    std::vector<Element> rest;
    for (Element y = 0; y < s.size(); ++y) {
      if (y != x) rest.push_back(y);
    }
    auto sub = induced_substructure(s, rest);
    if (!k.member(sub)) return sub;
  }
  return std::nullopt;
}

}  // namespace mtk
