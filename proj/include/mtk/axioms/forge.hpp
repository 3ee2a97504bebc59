#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mtk/encoder/language.hpp"
#include "mtk/fraisse/generic.hpp"
#include "mtk/fraisse/types.hpp"
#include "mtk/logic/evaluate.hpp"

namespace mtk {

struct AxiomBudget {
  std::size_t n = 2;  // max quantifiers
  std::size_t l = 0;  // max arity; 0 means the vocabulary's max arity
  std::set<Scheme> schemes{Scheme::a, Scheme::b, Scheme::c, Scheme::d};
};

namespace detail {

inline std::string var(std::size_t i) { return "x" + std::to_string(i + 1); }

inline std::vector<std::string> vars(std::size_t from, std::size_t to) {
  std::vector<std::string> out;
  for (std::size_t i = from; i < to; ++i) out.push_back(var(i));
  return out;
}

inline std::vector<Formula> distinct(std::size_t from, std::size_t to) {
  std::vector<Formula> out;
  for (std::size_t i = 0; i < to; ++i) {
    for (std::size_t j = std::max(i + 1, from); j < to; ++j) {
      out.push_back(Formula::negate(Formula::eq(var(i), var(j))));
    }
  }
  return out;
}

// Literals of the diagram of s (element i is x_{i+1}) that mention at least
// one element >= from, over symbols of arity <= l.
inline std::vector<Formula> diagram(const Structure& s, std::size_t l, std::size_t from = 0) {
  std::vector<Formula> out;
  const auto& v = s.vocabulary();
  for (std::size_t sym = 0; sym < v.size(); ++sym) {
    if (v[sym].arity > l) continue;
    for_each_tuple(s.size(), v[sym].arity, [&](const Tuple& t) {
      if (std::none_of(t.begin(), t.end(), [&](Element e) { return e >= from; })) return;
      std::vector<std::string> args;
      for (auto e : t) args.push_back(var(e));
      auto atom = Formula::rel(v[sym].name, args);
      out.push_back(s.holds(sym, t) ? atom : Formula::negate(atom));
    });
  }
  return out;
}

inline std::vector<QuantifiedVar> block(Quantifier q, std::size_t from, std::size_t to) {
  std::vector<QuantifiedVar> out;
  for (std::size_t i = from; i < to; ++i) out.push_back({q, var(i)});
  return out;
}

inline std::vector<Formula> concat(std::vector<Formula> a, const std::vector<Formula>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline std::size_t max_symbol_arity(const Formula& f) {
  std::size_t m = f.kind == Formula::Kind::rel ? f.vars.size() : 0;
  for (const auto& c : f.children) m = std::max(m, max_symbol_arity(c));
  return m;
}

inline bool is_encoder_vocabulary(const Vocabulary& v) {
  for (const auto* s : {"P", "Q", "lam", "rho", "H", "S"}) {
    if (!v.find(s)) return false;
  }
  return true;
}

// Reduct to the symbols of arity <= l.
inline Vocabulary restricted(const Vocabulary& v, std::size_t l) {
  return v.filter([l](const Symbol& s) { return s.arity <= l; });
}

}  // namespace detail

/// Forbids s: forall x1..xk not(distinct and diagram).
inline Sentence forbid_sentence(const Structure& s, std::size_t l) {
  Sentence out;
  out.prefix = detail::block(Quantifier::forall, 0, s.size());
  out.matrix = Formula::negate(
      Formula::all_of(detail::concat(detail::distinct(0, s.size()), detail::diagram(s, l))));
  out.scheme = Scheme::a;
  return out;
}

/// Realises s: exists x1..xk (distinct and diagram).
inline Sentence exists_sentence(const Structure& s, std::size_t l) {
  Sentence out;
  out.prefix = detail::block(Quantifier::exists, 0, s.size());
  out.matrix =
      Formula::all_of(detail::concat(detail::distinct(0, s.size()), detail::diagram(s, l)));
  out.scheme = Scheme::c;
  return out;
}

/// Every copy of a (the first |a| elements of b) extends to b:
/// forall x̄ exists ȳ (distinct(x̄) and diag a  ->  distinct(x̄ȳ) and diag b over ȳ).
inline Sentence extension_sentence(const Structure& a, const Structure& b, std::size_t l) {
  Sentence out;
  out.prefix = detail::block(Quantifier::forall, 0, a.size());
  auto ex = detail::block(Quantifier::exists, a.size(), b.size());
  out.prefix.insert(out.prefix.end(), ex.begin(), ex.end());
  auto lhs = Formula::all_of(detail::concat(detail::distinct(0, a.size()), detail::diagram(a, l)));
  auto rhs = Formula::all_of(
      detail::concat(detail::distinct(a.size(), b.size()), detail::diagram(b, l, a.size())));
  out.matrix = a.size() == 0 ? rhs : Formula::implies(lhs, rhs);
  out.scheme = Scheme::d;
  return out;
}

/// Minimal non-members of size <= n: one-point extensions (from the class
/// generator) of members that fail membership while every proper
/// substructure is a member. One per isomorphism type, canonical order.
inline std::vector<Structure> minimal_non_members(const AgeClass& k, std::size_t n) {
  std::map<std::string, Structure> found;
  for (std::size_t s = 1; s <= n; ++s) {
    std::map<std::string, Structure> level;
    for (const auto& base : enumerate_age(k, s - 1)) {
      k.extensions(base, [&](const Structure& d) {
        if (k.member(d) || hereditary_violation(k, d)) return;
        auto key = canonical_form(d);
        if (!level.count(key)) level.emplace(key, canonical_representative(d));
      });
    }
    for (auto& [key, d] : level) found.emplace(std::to_string(s) + "#" + key, std::move(d));
  }
  std::vector<Structure> out;
  for (auto& [key, d] : found) out.push_back(std::move(d));
  std::stable_sort(out.begin(), out.end(),
                   [](const Structure& x, const Structure& y) { return x.size() < y.size(); });
  return out;
}

/// Conditions (1)-(4) on labels x1..xm and cycle x_{m+1}..x_{m+n}.
inline Formula npair_formula(std::size_t m, std::size_t n) {
  auto a = [&](std::size_t i) { return detail::var(i); };
  auto c = [&](std::size_t j) { return detail::var(m + j); };
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < m; ++i) parts.push_back(Formula::rel("P", {a(i)}));
  for (std::size_t j = 0; j < n; ++j) parts.push_back(Formula::rel("Q", {c(j)}));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) parts.push_back(Formula::negate(Formula::eq(c(i), c(j))));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto h = Formula::rel("H", {c(i), c(j)});
      parts.push_back(j == (i + 1) % n ? h : Formula::negate(h));
    }
    auto lam = Formula::rel("lam", {c(i)});
    auto rho = Formula::rel("rho", {c(i)});
    parts.push_back(i == 0 ? lam : Formula::negate(lam));
    parts.push_back(i + 1 == m ? rho : Formula::negate(rho));
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
          auto s = Formula::rel("S", {a(i), c(j), a(k), c(l)});
          if (j >= m || l >= m) {
            parts.push_back(Formula::negate(s));
            continue;
          }
          std::vector<Formula> want;
          if (i != j) want.push_back(Formula::eq(a(i), a(j)));
          if (k != l) want.push_back(Formula::eq(a(k), a(l)));
          auto w = Formula::all_of(want);
          parts.push_back(want.empty() ? s
                                       : Formula::all_of({Formula::implies(s, w),
                                                          Formula::implies(w, s)}));
        }
      }
    }
  }
  return Formula::all_of(parts);
}

/// Scheme (b) for encoder classes: sort discipline, then for each n-pair
/// shape (m labels, n cycle points, m + n <= budget) the universal saying
/// that such a pair labels an R_n-tuple, or cannot exist when no R_n of
/// arity m is present. Empty for other vocabularies.
inline std::vector<Sentence> scheme_b(const Vocabulary& v, std::size_t budget) {
  std::vector<Sentence> out;
  if (!detail::is_encoder_vocabulary(v)) return out;
  auto uni = [&](std::size_t k, Formula f) {
    Sentence s;
    s.prefix = detail::block(Quantifier::forall, 0, k);
    s.matrix = std::move(f);
    s.scheme = Scheme::b;
    if (k <= budget) out.push_back(std::move(s));
  };
  using F = Formula;
  const auto x = detail::var(0), y = detail::var(1), z = detail::var(2), w = detail::var(3);
  uni(1, F::any_of({F::rel("P", {x}), F::rel("Q", {x})}));
  uni(1, F::negate(F::all_of({F::rel("P", {x}), F::rel("Q", {x})})));
  uni(1, F::implies(F::rel("lam", {x}), F::rel("Q", {x})));
  uni(1, F::implies(F::rel("rho", {x}), F::rel("Q", {x})));
  uni(2, F::implies(F::rel("H", {x, y}), F::all_of({F::rel("Q", {x}), F::rel("Q", {y})})));
  uni(4, F::implies(F::rel("S", {x, y, z, w}),
                    F::all_of({F::rel("P", {x}), F::rel("Q", {y}), F::rel("P", {z}),
                               F::rel("Q", {w})})));
  const auto l0 = l0_part(v);
  for (const auto& s : l0.symbols()) {
    std::vector<Formula> ps;
    for (std::size_t i = 0; i < s.arity; ++i) ps.push_back(F::rel("P", {detail::var(i)}));
    uni(s.arity, F::implies(F::rel(s.name, detail::vars(0, s.arity)), F::all_of(ps)));
  }
  const auto idx = relation_indices(l0);
  for (std::size_t n = 1; n < budget; ++n) {
    for (std::size_t m = 1; m <= n && m + n <= budget; ++m) {
      std::optional<std::string> target;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] == n && l0[i].arity == m) target = l0[i].name;
      }
      auto body = npair_formula(m, n);
      uni(m + n, target ? F::implies(body, F::rel(*target, detail::vars(0, m)))
                        : F::negate(body));
    }
  }
  return out;
}

/// l_n: the largest arity of a symbol holding somewhere in a member of size <= n.
inline std::size_t arity_cut(const AgeClass& k, std::size_t n) {
  std::size_t out = 0;
  for (const auto& s : enumerate_age_upto(k, n)) {
    for (std::size_t sym = 0; sym < s.vocabulary().size(); ++sym) {
      if (!s.relation(sym).empty()) out = std::max(out, s.vocabulary()[sym].arity);
    }
  }
  return out;
}

namespace detail {

// Keeps the first of each tagged sentence text (so per scheme); inputs use canonical
// variable names, so this is duplicate removal up to renaming.
inline void append_unique(std::vector<Sentence>& out, std::set<std::string>& seen,
                          std::vector<Sentence> more) {
  for (auto& s : more) {
    if (seen.insert(emit_tagged(s)).second) out.push_back(std::move(s));
  }
}

inline std::vector<Sentence> scheme_a(const AgeClass& k, std::size_t n, std::size_t l) {
  std::vector<Sentence> out;
  if (!k.universal_laws.empty()) {
    for (auto s : k.universal_laws) {
      if (s.quantifier_count() <= n && max_symbol_arity(s.matrix) <= l) {
        s.scheme = Scheme::a;
        out.push_back(std::move(s));
      }
    }
    return out;
  }
  for (const auto& d : minimal_non_members(k, n)) {
    auto r = reduct(d, restricted(k.vocab, l));
    out.push_back(forbid_sentence(r, l));
  }
  return out;
}

inline std::vector<Sentence> scheme_c(const AgeClass& k, std::size_t n, std::size_t l) {
  std::vector<Sentence> out;
  const auto rv = restricted(k.vocab, l);
  std::set<std::string> seen;
  for (std::size_t s = 1; s <= n; ++s) {
    std::map<std::string, Structure> level;
    for (const auto& m : enumerate_age(k, s)) {
      auto r = canonical_representative(reduct(m, rv));
      level.try_emplace(canonical_form(r), r);
    }
    for (const auto& [key, r] : level) out.push_back(exists_sentence(r, l));
  }
  return out;
}

inline std::vector<Sentence> d_from_pairs(const std::vector<std::pair<Structure, Structure>>& ab,
                                          std::size_t l) {
  // Same key iff the sentences are renamings of each other: an isomorphism
  // of the B's that keeps A on A and the new point on the new point. The
  // class is represented by the smallest text over all orders of A, so the
  // choice does not depend on which member showed up first.
  std::map<std::string, Sentence> keyed;
  for (const auto& [a, b] : ab) {
    std::vector<int> colors(b.size(), 0);
    for (std::size_t i = a.size(); i < b.size(); ++i) colors[i] = 1;
    std::string key = std::to_string(b.size()) + "#" + canonical_labeling(b, colors).key;
    if (keyed.count(key)) continue;
    std::vector<Element> order(b.size());
    std::iota(order.begin(), order.end(), Element{0});
    std::optional<Sentence> best;
    std::string best_text;
    do {
      const auto pb = permuted(b, order);
      std::vector<Element> prefix(a.size());
      std::iota(prefix.begin(), prefix.end(), Element{0});
      auto s = extension_sentence(induced_substructure(pb, prefix), pb, l);
      auto text = emit_sentence(s);
      if (!best || text < best_text) {
        best = std::move(s);
        best_text = std::move(text);
      }
    } while (std::next_permutation(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(a.size())));
    keyed.emplace(key, std::move(*best));
  }
  std::vector<Sentence> out;
  for (auto& [key, s] : keyed) out.push_back(std::move(s));
  return out;
}

inline std::vector<Sentence> scheme_d(const AgeClass& k, std::size_t n, std::size_t l) {
  const auto rv = restricted(k.vocab, l);
  std::vector<std::pair<Structure, Structure>> ab;
  for (const auto& dm : extension_demands(k, n)) {
    ab.emplace_back(reduct(dm.a, rv), reduct(dm.b, rv));
  }
  return d_from_pairs(ab, l);
}

}  // namespace detail

/// Schemes (a)-(d) up to the budget, in scheme order, duplicates removed.
/// Throws ResourceLimit when the class enumeration caps are exceeded.
inline std::vector<Sentence> generate_axioms(const AgeClass& k, const AxiomBudget& budget) {
  const std::size_t l = budget.l ? budget.l : k.vocab.max_arity();
  std::vector<Sentence> out;
  std::set<std::string> seen;
  if (budget.n == 0) return out;
  if (budget.schemes.count(Scheme::a)) detail::append_unique(out, seen, detail::scheme_a(k, budget.n, l));
  if (budget.schemes.count(Scheme::b)) {
    std::vector<Sentence> b;
    for (auto& s : scheme_b(k.vocab, budget.n)) {
      if (detail::max_symbol_arity(s.matrix) <= l) b.push_back(std::move(s));
    }
    detail::append_unique(out, seen, std::move(b));
  }
  if (budget.schemes.count(Scheme::c)) detail::append_unique(out, seen, detail::scheme_c(k, budget.n, l));
  if (budget.schemes.count(Scheme::d)) detail::append_unique(out, seen, detail::scheme_d(k, budget.n, l));
  return out;
}

inline std::vector<Sentence> select_scheme(const std::vector<Sentence>& axioms, Scheme s) {
  std::vector<Sentence> out;
  for (const auto& a : axioms) {
    if (a.scheme == s) out.push_back(a);
  }
  return out;
}

/// The structure a scheme-(c) sentence realises: one element per variable,
/// positive atoms of the conjunction.
inline Structure structure_of_exists(const Sentence& s, const Vocabulary& v) {
  StructureBuilder b(v);
  std::map<std::string, Element> at;
  for (const auto& q : s.prefix) {
    if (q.q != Quantifier::exists) throw ValidationError("not an existential sentence");
    at[q.var] = b.add_element(q.var);
  }
  if (s.matrix.kind != Formula::Kind::conjunction) {
    throw ValidationError("existential matrix is not a conjunction");
  }
  for (const auto& lit : s.matrix.children) {
    if (lit.kind != Formula::Kind::rel) continue;
    Tuple t;
    for (const auto& x : lit.vars) t.push_back(at.at(x));
    b.add(lit.symbol, std::move(t));
  }
  return b.build_unchecked();
}

/// Scheme (d) recomputed from scheme-(a) and scheme-(c) sentences and the
/// Ryll-Nardzewski values alone. The (c) sentences give the members of size
/// <= n; `rn[j]` (j <= n) must equal the number of qf j-types they realise,
/// which certifies the list is complete. The (a) sentences must hold in each.
inline std::vector<Sentence> derive_d(const std::vector<Sentence>& a_axioms,
                                      const std::vector<Sentence>& c_axioms,
                                      const std::vector<std::uint64_t>& rn, const Vocabulary& v,
                                      std::size_t n, std::size_t l) {
  const auto rv = detail::restricted(v, l ? l : v.max_arity());
  const std::size_t ll = l ? l : v.max_arity();
  std::vector<Structure> members{Structure(rv)};
  for (const auto& s : c_axioms) {
    auto m = structure_of_exists(s, rv);
    for (const auto& law : a_axioms) {
      if (!evaluate(m, law)) throw ValidationError("scheme (c) structure violates " + emit_sentence(law));
    }
    members.push_back(std::move(m));
  }
  for (std::size_t j = 0; j < rn.size() && j <= n; ++j) {
    std::set<std::string> types;
    for (const auto& m : members) {
      for_each_tuple(m.size(), j, [&](const Tuple& t) {
        types.insert(qf_type(m, std::vector<Element>(t.begin(), t.end())).key());
      });
    }
    if (types.size() != rn[j]) {
      throw ValidationError("scheme (c) input realises " + std::to_string(types.size()) + " " +
                            std::to_string(j) + "-types, expected " + std::to_string(rn[j]));
    }
  }
  std::vector<std::pair<Structure, Structure>> ab;
  for (const auto& b : members) {
    if (b.size() == 0) continue;
    // every way of seeing b as a one-point extension: the new point goes last
    for (Element x = 0; x < b.size(); ++x) {
      std::vector<Element> order;
      for (Element y = 0; y < b.size(); ++y) {
        if (y != x) order.push_back(y);
      }
      std::vector<Element> front = order;
      order.push_back(x);
      const auto bb = permuted(b, order);
      auto a = induced_substructure(b, front);
      const auto lab = canonical_labeling(a);
      // A in canonical order, as in extension_demands
      std::vector<Element> full;
      for (auto i : lab.order) full.push_back(i);
      full.push_back(static_cast<Element>(a.size()));
      const auto names = default_names(bb.size());
      ab.emplace_back(permuted(a, lab.order, nullptr), permuted(bb, full, &names));
    }
  }
  return detail::d_from_pairs(ab, ll);
}

struct AxiomCheck {
  Sentence sentence;
  bool holds = false;
};

struct ModelReport {
  std::vector<AxiomCheck> checks;
  std::map<char, std::pair<std::size_t, std::size_t>> per_scheme;  // letter -> (passed, total)

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.holds; });
  }
  const AxiomCheck* first_failure() const {
    for (const auto& c : checks) {
      if (!c.holds) return &c;
    }
    return nullptr;
  }
};

inline ModelReport verify_model_of(const Structure& s, const std::vector<Sentence>& axioms,
                                   const EvaluationOptions& opt = {}) {
  ModelReport rep;
  for (const auto& a : axioms) {
    AxiomCheck c{a, evaluate(s, a, opt)};
    auto& cell = rep.per_scheme[scheme_letter(a.scheme)];
    cell.second += 1;
    cell.first += c.holds ? 1 : 0;
    rep.checks.push_back(std::move(c));
  }
  return rep;
}

inline std::string render_model_report(const ModelReport& r, bool full) {
  std::string out;
  for (const auto& c : r.checks) {
    if (!full && c.holds) continue;
    out += std::string(c.holds ? "holds  " : "FAILS  ") + emit_tagged(c.sentence) + "\n";
  }
  out += "\n[summary]\n";
  std::size_t passed = 0;
  for (const auto& [letter, pt] : r.per_scheme) {
    out += std::string("scheme_") + letter + "=" + std::to_string(pt.first) + "/" +
           std::to_string(pt.second) + "\n";
    passed += pt.first;
  }
  out += "axioms=" + std::to_string(r.checks.size()) + "\n";
  out += "passed=" + std::to_string(passed) + "\n";
  out += std::string("verdict=") + (r.pass() ? "pass" : "fail") + "\n";
  return out;
}

}  // namespace mtk
