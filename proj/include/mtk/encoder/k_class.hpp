#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtk/encoder/encode.hpp"
#include "mtk/fraisse/properties.hpp"
#include "mtk/logic/qf_type.hpp"

namespace mtk {

struct KMembership {
  bool member = true;
  std::vector<std::string> violations;  // cite "sort", "(i)", "(ii)" or "(iii)"
};

/// Elements of `d` in P, in domain order.
inline std::vector<Element> p_elements(const Structure& d) {
  return extension_of(d, d.vocabulary().index_of("P"));
}

/// The P-part as an L0-structure over `l0`.
inline Structure p_part(const Structure& d, const Vocabulary& l0) {
  return reduct(induced_substructure(d, p_elements(d)), l0);
}

inline KMembership k_membership(const Structure& d, const AgeClass& k0) {
  KMembership out;
  auto bad = [&](std::string v) {
    out.member = false;
    out.violations.push_back(std::move(v));
  };
  const auto& v = d.vocabulary();
  const detail::LSymbols L(v);
  for (Element e = 0; e < d.size(); ++e) {
    if (d.holds(L.p, {e}) == d.holds(L.q, {e})) {
      bad("sort: " + d.name(e) + " must be in exactly one of P, Q");
    }
  }
  auto in = [&](std::size_t unary, Element e) { return d.holds(unary, {e}); };
  for (auto sym : {L.lam, L.rho, L.h}) {
    for (const auto& t : d.relation(sym)) {
      for (auto e : t) {
        if (!in(L.q, e)) bad("sort: " + v[sym].name + " mentions " + d.name(e) + " outside Q");
      }
    }
  }
  for (const auto& t : d.relation(L.s)) {
    if (!in(L.p, t[0]) || !in(L.q, t[1]) || !in(L.p, t[2]) || !in(L.q, t[3])) {
      bad("sort: S(" + d.name(t[0]) + "," + d.name(t[1]) + "," + d.name(t[2]) + "," +
          d.name(t[3]) + ") is not on (P,Q,P,Q)");
    }
  }
  const auto& l0 = k0.vocab;
  for (const auto& s : l0.symbols()) {
    for (const auto& t : d.relation(s.name)) {
      for (auto e : t) {
        if (!in(L.p, e)) bad("(i) " + s.name + " mentions " + d.name(e) + " outside P");
      }
    }
  }
  if (!out.member) return out;  // the rest assumes a well-sorted structure

  if (!k0.member(p_part(d, l0))) bad("(ii) the P-part is not in " + k0.name);

  const auto idx = relation_indices(l0);
  for (const auto& pair : find_npairs(d)) {
    std::optional<std::size_t> sym;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] == pair.n) sym = i;
    }
    if (!sym) {
      bad("(iii) " + describe_npair(d, pair) + ", but no relation has index " +
          std::to_string(pair.n));
    } else if (l0[*sym].arity != pair.arity()) {
      bad("(iii) " + describe_npair(d, pair) + ", but " + l0[*sym].name + " has arity " +
          std::to_string(l0[*sym].arity));
    } else if (!d.holds(v.index_of(l0[*sym].name), pair.a)) {
      bad("(iii) " + describe_npair(d, pair) + " labels a tuple outside " + l0[*sym].name);
    }
  }
  return out;
}

namespace detail {

// D1, D2 share their first `b` elements (same induced structure), and each
// has exactly one more point. Result: the shared prefix, then D1's point at
// b, then D2's point at b + 1.
//   both points in P: the L0 relations on P come from a K0 amalgam of the
//     P-parts, which must keep the two points apart;
//   both in Q: free amalgam;
//   a P-point x against a Q-point c': free amalgam plus S(x, c, x, c') for
//     every Q-point c of the prefix. Without these, a label on one side and an
//     unlabelled cycle on the other can complete an n-pair. Each one is
//     unwanted by (4) in any such pair, and none can hold in a valid pair,
//     since that would need the cross atom S(x, c', x, c').
inline std::optional<Structure> one_point_amalgam_K(const AgeClass& k0, std::size_t b,
                                                    const Structure& d1, const Structure& d2) {
  const std::size_t P = d1.vocabulary().index_of("P");
  StructureBuilder out(d1);
  const Element y = out.add_element(out.find(d2.name(b)) ? fresh_name(d1) : d2.name(b));
  auto lift2 = [&](Element e) { return e == b ? y : e; };
  const bool case1 = d1.holds(P, {static_cast<Element>(b)}) &&
                     d2.holds(P, {static_cast<Element>(b)});
  for (std::size_t sym = 0; sym < d2.vocabulary().size(); ++sym) {
    const bool l0sym = !is_target_symbol(d2.vocabulary()[sym].name);
    if (case1 && l0sym) continue;  // taken from the K0 amalgam below
    for (const auto& t : d2.relation(sym)) {
      Tuple u;
      for (auto e : t) u.push_back(lift2(e));
      out.add(sym, std::move(u));
    }
  }
  if (!case1) {
    const std::size_t Q = d1.vocabulary().index_of("Q"), S = d1.vocabulary().index_of("S");
    const bool x_left = d1.holds(P, {static_cast<Element>(b)});
    const bool x_right = d2.holds(P, {static_cast<Element>(b)});
    if (x_left != x_right) {
      const Element x = x_left ? static_cast<Element>(b) : y;
      const Element c2 = x_left ? y : static_cast<Element>(b);
      for (Element c = 0; c < b; ++c) {
        if (d1.holds(Q, {c})) out.add(S, {x, c, x, c2});
      }
    }
    return out.build_unchecked();
  }

  // Case 1: amalgamate the P-parts in K0.
  const auto& l0 = k0.vocab;
  std::vector<Element> cp;  // P-elements of the prefix
  for (Element e = 0; e < b; ++e) {
    if (d1.holds(P, {e})) cp.push_back(e);
  }
  auto p1 = cp, p2 = cp;
  p1.push_back(static_cast<Element>(b));
  p2.push_back(static_cast<Element>(b));
  const Structure e1 = reduct(induced_substructure(d1, p1), l0);
  const Structure e2 = reduct(induced_substructure(d2, p2), l0);
  const Structure c = reduct(induced_substructure(d1, cp), l0);
  const auto f = prefix_map(cp.size());
  std::optional<Amalgam> a;
  if (k0.amalgamate) a = k0.amalgamate(c, e1, f, e2, f);
  if (!a || !verify_amalgam(k0, c, e1, f, e2, f, *a)) {
    a = find_amalgam(k0, c, e1, f, e2, f, cp.size() + 2);
  }
  if (!a || a->structure.size() != cp.size() + 2 || a->g1[cp.size()] == a->g2[cp.size()]) {
    return std::nullopt;
  }
  // amalgam element -> result element
  std::vector<Element> back(a->structure.size());
  for (std::size_t i = 0; i < cp.size(); ++i) back[a->g1[i]] = cp[i];
  back[a->g1[cp.size()]] = static_cast<Element>(b);
  back[a->g2[cp.size()]] = y;
  const auto& av = a->structure.vocabulary();
  for (std::size_t sym = 0; sym < av.size(); ++sym) {
    const auto target = d1.vocabulary().index_of(av[sym].name);
    for (const auto& t : a->structure.relation(sym)) {
      Tuple u;
      for (auto e : t) u.push_back(back[e]);
      out.add(target, std::move(u));
    }
  }
  return out.build_unchecked();
}

// `order` lists, for each new position, the old element; the rest keep order.
inline std::vector<Element> front_first(std::size_t n, const std::vector<Element>& front) {
  std::vector<Element> order = front;
  std::vector<bool> used(n, false);
  for (auto e : front) used[e] = true;
  for (Element e = 0; e < n; ++e) {
    if (!used[e]) order.push_back(e);
  }
  return order;
}

}  // namespace detail

/// Amalgamation in K, one point at a time over a grid of one-point problems.
/// D1 keeps its names and order; D2's new points follow.
inline std::optional<Amalgam> amalgamate_K(const AgeClass& k0, const Structure& c,
                                           const Structure& d1, const std::vector<Element>& f1,
                                           const Structure& d2, const std::vector<Element>& f2) {
  const std::size_t nc = c.size();
  // D2 with C first, so its new points can be added in order.
  const auto order2 = detail::front_first(d2.size(), f2);
  const Structure d2c = permuted(d2, order2);

  Structure cur = d1;
  std::vector<Element> g2c(d2c.size());  // d2c element -> cur element
  for (std::size_t i = 0; i < nc; ++i) g2c[i] = f1[i];

  for (std::size_t t = nc; t < d2c.size(); ++t) {
    // Image of d2c[0..t) first in cur, then the rest of cur.
    const std::vector<Element> img(g2c.begin(), g2c.begin() + static_cast<std::ptrdiff_t>(t));
    const auto order = detail::front_first(cur.size(), img);
    const Structure curp = permuted(cur, order);
    std::vector<Element> prefix(t + 1);
    for (Element i = 0; i <= t; ++i) prefix[i] = i;
    // g is curp[0..s) followed by D2's point t
    Structure g = induced_substructure(d2c, prefix);
    {
      std::vector<std::string> names;
      for (std::size_t i = 0; i < t; ++i) names.push_back(curp.name(i));
      names.push_back(curp.find(d2c.name(t)) ? "" : d2c.name(t));
      if (names.back().empty()) {
        std::size_t k = curp.size();
        while (curp.find("e" + std::to_string(k))) ++k;
        names.back() = "e" + std::to_string(k);
      }
      std::vector<Element> id(t + 1);
      for (Element i = 0; i <= t; ++i) id[i] = i;
      g = permuted(g, id, &names);
    }
    for (std::size_t s = t; s < curp.size(); ++s) {
      std::vector<Element> upto(s + 1);
      for (Element i = 0; i <= s; ++i) upto[i] = i;
      auto next = detail::one_point_amalgam_K(k0, s, induced_substructure(curp, upto), g);
      if (!next) return std::nullopt;
      g = std::move(*next);
    }
    // Back to cur's order, new point last.
    std::vector<Element> undo(cur.size() + 1);
    for (std::size_t i = 0; i < order.size(); ++i) undo[order[i]] = static_cast<Element>(i);
    undo[cur.size()] = static_cast<Element>(cur.size());
    cur = permuted(g, undo);
    g2c[t] = static_cast<Element>(cur.size() - 1);
  }

  Amalgam a;
  a.structure = std::move(cur);
  a.g1.resize(d1.size());
  for (Element x = 0; x < d1.size(); ++x) a.g1[x] = x;
  a.g2.resize(d2.size());
  for (std::size_t i = 0; i < order2.size(); ++i) a.g2[order2[i]] = g2c[i];
  return a;
}

/// Valid n-pairs of the amalgam that are not images of n-pairs of a factor.
inline std::vector<NPair> new_npairs(const Structure& d1, const Structure& d2, const Amalgam& a) {
  std::vector<NPair> old;
  auto push = [&](const Structure& d, const std::vector<Element>& g) {
    for (auto p : find_npairs(d)) {
      for (auto& e : p.a) e = g[e];
      for (auto& e : p.c) e = g[e];
      old.push_back(std::move(p));
    }
  };
  push(d1, a.g1);
  push(d2, a.g2);
  std::sort(old.begin(), old.end());
  std::vector<NPair> out;
  for (const auto& p : find_npairs(a.structure)) {
    if (!std::binary_search(old.begin(), old.end(), p)) out.push_back(p);
  }
  return out;
}

inline AmalgamationStrategy k_strategy(const AgeClass& k0) {
  return [k0](const Structure& c, const Structure& d1, const std::vector<Element>& f1,
              const Structure& d2, const std::vector<Element>& f2) -> std::optional<Amalgam> {
    auto a = amalgamate_K(k0, c, d1, f1, d2, f2);
    if (a) {
      auto fresh = new_npairs(d1, d2, *a);
      if (!fresh.empty()) {
        throw ValidationError("amalgam gained an n-pair: " +
                              describe_npair(a->structure, fresh.front()));
      }
    }
    return a;
  };
}

namespace detail {

// One-point extensions that respect the P/Q split: a new P-point takes a K0
// extension of the P-part plus any S-atoms through it; a new Q-point takes
// any lam/rho/H/S-atoms through it.
inline ExtensionGenerator k_generator(const AgeClass& k0) {
  return [k0](const Structure& base, const std::function<void(const Structure&)>& visit) {
    const auto& v = base.vocabulary();
    const LSymbols L(v);
    const auto n = static_cast<Element>(base.size());
    const auto ps = p_elements(base);
    const auto qs = extension_of(base, L.q);
    const std::string nm = fresh_name(base);

    auto with_subsets = [&](const Structure& start,
                            const std::vector<std::pair<std::size_t, Tuple>>& atoms) {
      if (atoms.size() >= 30) throw ResourceLimit("one-point extension has too many atoms");
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << atoms.size()); ++mask) {
        StructureBuilder b(start);
        for (std::size_t i = 0; i < atoms.size(); ++i) {
          if (mask >> i & 1U) b.add(atoms[i].first, atoms[i].second);
        }
        visit(b.build_unchecked());
      }
    };

    // new P-point
    {
      auto ps1 = ps;
      ps1.push_back(n);
      std::vector<std::pair<std::size_t, Tuple>> s_atoms;
      for (auto a : ps1) {
        for (auto c : qs) {
          for (auto a2 : ps1) {
            for (auto c2 : qs) {
              if (a == n || a2 == n) s_atoms.emplace_back(L.s, Tuple{a, c, a2, c2});
            }
          }
        }
      }
      const Structure bp = p_part(base, k0.vocab);
      k0.extensions(bp, [&](const Structure& ext) {
        StructureBuilder b(base);
        b.add_element(nm);
        b.add(L.p, {n});
        const auto& ev = ext.vocabulary();
        for (std::size_t sym = 0; sym < ev.size(); ++sym) {
          const auto target = v.index_of(ev[sym].name);
          for (const auto& t : ext.relation(sym)) {
            if (std::find(t.begin(), t.end(), static_cast<Element>(ps.size())) == t.end()) {
              continue;
            }
            Tuple u;
            for (auto e : t) u.push_back(ps1[e]);
            b.add(target, std::move(u));
          }
        }
        with_subsets(b.build_unchecked(), s_atoms);
      });
    }
    // new Q-point
    {
      auto qs1 = qs;
      qs1.push_back(n);
      std::vector<std::pair<std::size_t, Tuple>> atoms{{L.lam, {n}}, {L.rho, {n}}};
      for (auto c : qs1) {
        atoms.emplace_back(L.h, Tuple{n, c});
        if (c != n) atoms.emplace_back(L.h, Tuple{c, n});
      }
      for (auto a : ps) {
        for (auto c : qs1) {
          for (auto a2 : ps) {
            for (auto c2 : qs1) {
              if (c == n || c2 == n) atoms.emplace_back(L.s, Tuple{a, c, a2, c2});
            }
          }
        }
      }
      StructureBuilder b(base);
      b.add_element(nm);
      b.add(L.q, {n});
      with_subsets(b.build_unchecked(), atoms);
    }
  };
}

}  // namespace detail

/// The class K over K0: L-structures with (i) L0 only on P, (ii) P-part in
/// K0, (iii) every n-pair labelling an R_n-tuple.
inline AgeClass encoder_class(const AgeClass& k0) {
  AgeClass k;
  k.name = "K(" + k0.name + ")";
  k.vocab = combined_vocabulary(k0.vocab);
  k.member = [k0](const Structure& d) { return k_membership(d, k0).member; };
  k.extensions = detail::k_generator(k0);
  k.amalgamate = k_strategy(k0);
  k.bound = [](std::size_t) { return std::uint64_t{1} << 22; };
  // A live n-pair labelling an R-tuple spans at most arity(R) + n points
  // (4 over graphs: 2 P + 2 Q).
  std::size_t radius = 4;
  const auto idx = relation_indices(k0.vocab);
  for (std::size_t i = 0; i < idx.size(); ++i) radius = std::max(radius, idx[i] + k0.vocab[i].arity);
  k.locality_radius = radius;
  return k;
}

struct DenseReductReport {
  bool pass = true;
  std::size_t pairs_checked = 0;
  std::string failure;
};

/// Finite density surrogate: for P-tuples ā, b̄ of length < s with the same
/// L0 type, ā -> b̄ must be a partial L-isomorphism that extends by one point
/// in either direction inside U.
inline DenseReductReport check_dense_reduct(const Structure& u, std::size_t s,
                                            std::uint64_t max_pairs = std::uint64_t{1} << 22) {
  DenseReductReport rep;
  const Structure l0 = reduct(u, l0_part(u.vocabulary()));
  const Structure nl = l_reduct(u);
  const auto ps = p_elements(u);

  auto show = [&](const std::vector<Element>& t) {
    std::string out = "(";
    for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + u.name(t[i]);
    return out + ")";
  };
  // every u-point on the left has a partner on the right
  auto forth = [&](std::vector<Element> a, std::vector<Element> b) -> std::optional<Element> {
    a.push_back(0);
    b.push_back(0);
    std::map<std::string, bool> seen;
    for (Element y = 0; y < nl.size(); ++y) {
      b.back() = y;
      seen[qf_type(nl, b).key()] = true;
    }
    for (Element x = 0; x < nl.size(); ++x) {
      a.back() = x;
      if (!seen.count(qf_type(nl, a).key())) return x;
    }
    return std::nullopt;
  };

  for (std::size_t len = 0; len < s && rep.pass; ++len) {
    std::map<std::string, std::vector<std::vector<Element>>> by_type;
    for_each_tuple(ps.size(), len, [&](const Tuple& t) {
      std::vector<Element> a;
      for (auto i : t) a.push_back(ps[i]);
      by_type[qf_type(l0, a).key()].push_back(std::move(a));
    });
    for (const auto& [key, group] : by_type) {
      for (std::size_t i = 0; i < group.size() && rep.pass; ++i) {
        for (std::size_t j = i; j < group.size() && rep.pass; ++j) {
          if (++rep.pairs_checked > max_pairs) {
            throw ResourceLimit("check_dense_reduct: more than " + std::to_string(max_pairs) +
                                " tuple pairs");
          }
          const auto &a = group[i], &b = group[j];
          if (qf_type(nl, a).key() != qf_type(nl, b).key()) {
            rep.pass = false;
            rep.failure = show(a) + " -> " + show(b) + " is not a partial L-isomorphism";
          } else if (auto x = forth(a, b)) {
            rep.pass = false;
            rep.failure = show(a) + " -> " + show(b) + ": no image for " + u.name(*x);
          } else if (auto y = forth(b, a)) {
            rep.pass = false;
            rep.failure = show(b) + " -> " + show(a) + ": no image for " + u.name(*y);
          }
        }
      }
    }
  }
  return rep;
}

}  // namespace mtk
