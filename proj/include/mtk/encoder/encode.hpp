#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mtk/core/text_format.hpp"
#include "mtk/encoder/npair.hpp"

namespace mtk {

/// An L-structure (U-form: with the L0 relations on P; N-form: L only) and
/// the n-pairs it was built with.
struct EncodedStructure {
  Structure structure;
  std::vector<NPair> registry;
};

/// A tuple of an L0 relation to be labelled: relation index n and the tuple.
struct Label {
  std::size_t n = 0;
  Tuple tuple;

  bool operator==(const Label&) const = default;
  auto operator<=>(const Label&) const = default;
};

/// Every instance of every L0 relation in `a`, each labelled once.
inline std::vector<Label> label_all(const Structure& a) {
  const auto idx = relation_indices(a.vocabulary());
  std::vector<Label> out;
  for (std::size_t sym = 0; sym < a.vocabulary().size(); ++sym) {
    for (const auto& t : a.relation(sym)) out.push_back({idx[sym], t});
  }
  return out;
}

/// Adds one n-pair labelling `tuple` with fresh Q-elements named <stem>_0..
inline NPair attach_npair(StructureBuilder& b, std::size_t n, const Tuple& tuple,
                          const std::string& stem) {
  const auto& v = b.vocabulary();
  const std::size_t Q = v.index_of("Q"), lam = v.index_of("lam"), rho = v.index_of("rho"),
                    H = v.index_of("H"), S = v.index_of("S");
  const std::size_t m = tuple.size();
  NPair pair{n, tuple, {}};
  for (std::size_t j = 0; j < n; ++j) {
    std::string nm = stem + "_" + std::to_string(j);
    pair.c.push_back(b.find(nm) ? b.add_fresh_element(stem + "_" + std::to_string(j) + "x")
                                : b.add_element(nm));
    b.add(Q, {pair.c.back()});
  }
  for (std::size_t j = 0; j < n; ++j) b.add(H, {pair.c[j], pair.c[(j + 1) % n]});
  b.add(lam, {pair.c[0]});
  b.add(rho, {pair.c[m - 1]});
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t l = 0; l < m; ++l) b.add(S, {tuple[j], pair.c[j], tuple[l], pair.c[l]});
  }
  return pair;
}

/// U-form encoding of `a`: P-part is `a` (names and order kept), and each
/// label gets its own disjoint Q-cycle. Labels must name true instances.
inline EncodedStructure encode(const Structure& a, const std::vector<Label>& labels) {
  const auto& l0 = a.vocabulary();
  const auto idx = relation_indices(l0);
  StructureBuilder b(combined_vocabulary(l0));
  const std::size_t P = b.vocabulary().index_of("P");
  for (Element x = 0; x < a.size(); ++x) {
    b.add_element(a.name(x));
    b.add(P, {x});
  }
  for (std::size_t sym = 0; sym < l0.size(); ++sym) {
    const auto target = b.vocabulary().index_of(l0[sym].name);
    for (const auto& t : a.relation(sym)) b.add(target, t);
  }
  EncodedStructure out;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto& lab = labels[k];
    std::size_t sym = idx.size();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] == lab.n) sym = i;
    }
    if (sym == idx.size()) {
      throw ValidationError("no relation with index " + std::to_string(lab.n));
    }
    if (lab.tuple.size() != l0[sym].arity) {
      throw ValidationError("label for " + l0[sym].name + " has the wrong length");
    }
    for (auto e : lab.tuple) {
      if (e >= a.size()) throw ValidationError("label mentions an unknown element");
    }
    if (!a.holds(sym, lab.tuple)) {
      std::string t;
      for (auto e : lab.tuple) t += (t.empty() ? "" : ",") + a.name(e);
      throw ValidationError("labelled tuple (" + t + ") does not satisfy " + l0[sym].name +
                            "; condition (iii) would fail");
    }
    out.registry.push_back(attach_npair(b, lab.n, lab.tuple, "q" + std::to_string(k)));
  }
  out.structure = b.build();
  return out;
}

/// N-form: the reduct to L.
inline Structure l_reduct(const Structure& u) { return reduct(u, target_language()); }

/// Decoding: domain is the P-part (order kept), R_n(ā) holds iff a valid
/// n-pair labels ā and R_n has arity |ā|. Other Q-structure is ignored.
inline Structure decode(const Structure& n_struct, const Vocabulary& l0) {
  const auto idx = relation_indices(l0);
  const detail::LSymbols L(n_struct.vocabulary());
  StructureBuilder b(l0);
  std::vector<Element> remap(n_struct.size(), 0);
  for (Element x = 0; x < n_struct.size(); ++x) {
    if (n_struct.holds(L.p, {x})) remap[x] = b.add_element(n_struct.name(x));
  }
  for (const auto& pair : find_npairs(n_struct)) {
    for (std::size_t sym = 0; sym < idx.size(); ++sym) {
      if (idx[sym] != pair.n || l0[sym].arity != pair.arity()) continue;
      Tuple t;
      for (auto e : pair.a) t.push_back(remap[e]);
      b.add(sym, std::move(t));
    }
  }
  return b.build();
}

/// Text form of an encoded structure, with the registry as comment lines.
inline std::string emit_encoded(const std::string& id, const EncodedStructure& e) {
  std::string out;
  for (const auto& p : e.registry) out += "# " + describe_npair(e.structure, p) + "\n";
  out += emit_structure(id, e.structure);
  return out;
}

}  // namespace mtk
