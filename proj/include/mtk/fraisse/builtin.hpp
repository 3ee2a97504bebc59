#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "mtk/fraisse/age_class.hpp"

namespace mtk {

namespace detail {

inline bool is_simple_graph(const Structure& s, std::size_t e) {
  for (const auto& t : s.relation(e)) {
    if (t[0] == t[1] || !s.holds(e, {t[1], t[0]})) return false;
  }
  return true;
}

// New vertex joined to each subset of the old vertices.
inline ExtensionGenerator graph_generator(std::size_t e) {
  return [e](const Structure& base, const std::function<void(const Structure&)>& visit) {
    const auto n = static_cast<Element>(base.size());
    StructureBuilder root(base);
    root.add_element(fresh_name(base));
    const Structure start = root.build_unchecked();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      StructureBuilder b(start);
      for (Element x = 0; x < n; ++x) {
        if (mask >> x & 1U) {
          b.add(e, {x, n});
          b.add(e, {n, x});
        }
      }
      visit(b.build_unchecked());
    }
  };
}

inline bool has_triangle(const Structure& s, std::size_t e) {
  for (const auto& t : s.relation(e)) {
    for (Element z = 0; z < s.size(); ++z) {
      if (z != t[0] && z != t[1] && s.holds(e, {t[0], z}) && s.holds(e, {t[1], z})) return true;
    }
  }
  return false;
}

// Number of the unary-diagonal predicates (symbols 1..) holding at x.
inline std::size_t predicate_count(const Structure& s, Element x) {
  std::size_t c = 0;
  for (std::size_t sym = 1; sym < s.vocabulary().size(); ++sym) {
    Tuple diag(s.vocabulary()[sym].arity, x);
    if (s.holds(sym, diag)) ++c;
  }
  return c;
}

inline std::vector<Element> order_of(const Structure& s) {
  std::vector<Element> seq(s.size());
  for (Element x = 0; x < s.size(); ++x) seq[x] = x;
  std::sort(seq.begin(), seq.end(),
            [&](Element a, Element b) { return a != b && s.holds(0, {a, b}); });
  return seq;
}

}  // namespace detail

inline AgeClass sets_class() {
  AgeClass k;
  k.name = "sets";
  k.member = [](const Structure&) { return true; };
  k.extensions = all_atoms_generator();
  k.amalgamate = free_strategy();
  k.bound = [](std::size_t) { return std::uint64_t{1}; };
  return k;
}

inline AgeClass graphs_class() {
  AgeClass k;
  k.name = "graphs";
  k.vocab = Vocabulary{{"E", 2}};
  k.member = [](const Structure& s) { return detail::is_simple_graph(s, 0); };
  k.extensions = detail::graph_generator(0);
  k.amalgamate = free_strategy();
  k.bound = [](std::size_t n) {
    return n > 11 ? ~std::uint64_t{0} : std::uint64_t{1} << (n * (n - (n ? 1 : 0)) / 2);
  };
  return k;
}

inline AgeClass triangle_free_class() {
  AgeClass k = graphs_class();
  k.name = "triangle-free";
  k.member = [](const Structure& s) {
    return detail::is_simple_graph(s, 0) && !detail::has_triangle(s, 0);
  };
  return k;
}

/// Graphs that are complete or edgeless; fails JEP.
inline AgeClass complete_or_empty_class() {
  AgeClass k = graphs_class();
  k.name = "complete-or-empty";
  k.member = [](const Structure& s) {
    if (!detail::is_simple_graph(s, 0)) return false;
    const auto m = s.relation(0).size();
    return m == 0 || m == s.size() * (s.size() - 1);
  };
  k.bound = [](std::size_t) { return std::uint64_t{2}; };
  return k;
}

/// Finite linear orders (`lt`) with nested initial segments C1 ⊆ ... ⊆ CN,
/// the finite substructures of (Q,<) with constants c1 < ... < cN where Cj
/// reads "x <= cj". Cj has arity j+2 and holds only on constant tuples
/// (x,...,x), so arities strictly increase along the symbol list.
inline AgeClass constants_class(std::size_t n_constants) {
  std::vector<Symbol> syms{{"lt", 2}};
  for (std::size_t j = 1; j <= n_constants; ++j) syms.push_back({"C" + std::to_string(j), j + 2});
  AgeClass k;
  k.name = n_constants == 0 ? "linear-orders" : "constants-" + std::to_string(n_constants);
  k.vocab = Vocabulary(syms);
  const std::size_t nc = n_constants;
  k.member = [nc](const Structure& s) {
    const auto n = static_cast<Element>(s.size());
    for (Element x = 0; x < n; ++x) {
      if (s.holds(0, {x, x})) return false;
      for (Element y = 0; y < n; ++y) {
        if (x != y && s.holds(0, {x, y}) == s.holds(0, {y, x})) return false;
        for (Element z = 0; z < n; ++z) {
          if (s.holds(0, {x, y}) && s.holds(0, {y, z}) && !s.holds(0, {x, z})) return false;
        }
      }
    }
    for (std::size_t j = 1; j <= nc; ++j) {
      for (const auto& t : s.relation(j)) {
        for (auto e : t) {
          if (e != t[0]) return false;
        }
        const Element y = t[0];
        for (Element x = 0; x < n; ++x) {
          if (s.holds(0, {x, y}) && !s.holds(j, Tuple(j + 2, x))) return false;
        }
        if (j < nc && !s.holds(j + 1, Tuple(j + 3, y))) return false;
      }
    }
    return true;
  };
  // New point at each rank, with each admissible predicate count.
  k.extensions = [nc](const Structure& base, const std::function<void(const Structure&)>& visit) {
    const auto seq = detail::order_of(base);
    const auto n = static_cast<Element>(base.size());
    StructureBuilder root(base);
    root.add_element(fresh_name(base));
    const Structure start = root.build_unchecked();
    for (std::size_t pos = 0; pos <= seq.size(); ++pos) {
      const std::size_t hi = pos == 0 ? nc : detail::predicate_count(base, seq[pos - 1]);
      const std::size_t lo = pos == seq.size() ? 0 : detail::predicate_count(base, seq[pos]);
      for (std::size_t cnt = lo; cnt <= hi; ++cnt) {
        StructureBuilder b(start);
        for (std::size_t i = 0; i < seq.size(); ++i) {
          if (i < pos) {
            b.add(0, {seq[i], n});
          } else {
            b.add(0, {n, seq[i]});
          }
        }
        for (std::size_t j = nc - cnt + 1; j <= nc; ++j) b.add(j, Tuple(j + 2, n));
        visit(b.build_unchecked());
      }
    }
  };
  // Merge the two orders cut by cut; inside a cut, more predicates come first,
  // ties go to D1.
  k.amalgamate = [](const Structure& c, const Structure& d1, const std::vector<Element>& f1,
                    const Structure& d2,
                    const std::vector<Element>& f2) -> std::optional<Amalgam> {
    auto base = free_amalgam(c, d1, f1, d2, f2);
    const auto seq1 = detail::order_of(d1);
    const auto seq2 = detail::order_of(d2);
    std::vector<bool> c1(d1.size(), false), c2(d2.size(), false);
    for (auto x : f1) c1[x] = true;
    for (auto x : f2) c2[x] = true;
    std::vector<Element> merged;
    std::size_t i = 0, j = 0;
    while (i < seq1.size() || j < seq2.size()) {
      std::vector<Element> g1, g2;
      while (i < seq1.size() && !c1[seq1[i]]) g1.push_back(seq1[i++]);
      while (j < seq2.size() && !c2[seq2[j]]) g2.push_back(seq2[j++]);
      std::size_t a = 0, b = 0;
      while (a < g1.size() || b < g2.size()) {
        if (b == g2.size() ||
            (a < g1.size() && detail::predicate_count(d1, g1[a]) >=
                                  detail::predicate_count(d2, g2[b]))) {
          merged.push_back(base.g1[g1[a++]]);
        } else {
          merged.push_back(base.g2[g2[b++]]);
        }
      }
      if (i < seq1.size()) {
        // both sequences now sit on the same C element
        if (j >= seq2.size() || base.g1[seq1[i]] != base.g2[seq2[j]]) return std::nullopt;
        merged.push_back(base.g1[seq1[i]]);
        ++i;
        ++j;
      }
    }
    StructureBuilder b(base.structure);
    for (std::size_t x = 0; x < merged.size(); ++x) {
      for (std::size_t y = x + 1; y < merged.size(); ++y) b.add(0, {merged[x], merged[y]});
    }
    base.structure = b.build_unchecked();
    return base;
  };
  // order laws, diagonal support, downward closure, nesting
  {
    using F = Formula;
    auto uni = [&](std::vector<std::string> vs, Formula f) {
      Sentence s;
      for (auto& v : vs) s.prefix.push_back({Quantifier::forall, std::move(v)});
      s.matrix = std::move(f);
      s.scheme = Scheme::a;
      k.universal_laws.push_back(std::move(s));
    };
    auto lt = [](const char* a, const char* b) { return F::rel("lt", {a, b}); };
    auto diag = [](std::size_t j, const std::string& x) {
      return F::rel("C" + std::to_string(j), std::vector<std::string>(j + 2, x));
    };
    uni({"x1"}, F::negate(lt("x1", "x1")));
    uni({"x1", "x2"}, F::negate(F::all_of({lt("x1", "x2"), lt("x2", "x1")})));
    uni({"x1", "x2"}, F::any_of({F::eq("x1", "x2"), lt("x1", "x2"), lt("x2", "x1")}));
    uni({"x1", "x2", "x3"},
        F::implies(F::all_of({lt("x1", "x2"), lt("x2", "x3")}), lt("x1", "x3")));
    for (std::size_t j = 1; j <= nc; ++j) {
      std::vector<std::string> xs;
      std::vector<Formula> same;
      for (std::size_t i = 1; i <= j + 2; ++i) {
        xs.push_back("x" + std::to_string(i));
        if (i > 1) same.push_back(F::eq("x1", xs.back()));
      }
      uni(xs, F::implies(F::rel("C" + std::to_string(j), xs), F::all_of(same)));
      uni({"x1", "x2"}, F::implies(F::all_of({diag(j, "x2"), lt("x1", "x2")}), diag(j, "x1")));
      if (j < nc) uni({"x1"}, F::implies(diag(j, "x1"), diag(j + 1, "x1")));
    }
  }
  k.bound = [nc](std::size_t n) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < nc; ++i) r = r * (n + 1 + i) / (i + 1);
    return r;
  };
  return k;
}

inline AgeClass linear_orders_class() { return constants_class(0); }

inline std::vector<std::string> builtin_class_names() {
  return {"sets", "graphs", "triangle-free", "linear-orders", "complete-or-empty",
          "constants-1", "constants-2"};
}

/// Looks up a builtin class by name; `constants-N` accepts any N.
inline std::optional<AgeClass> builtin_class(const std::string& name) {
  if (name == "sets") return sets_class();
  if (name == "graphs") return graphs_class();
  if (name == "triangle-free") return triangle_free_class();
  if (name == "linear-orders") return linear_orders_class();
  if (name == "complete-or-empty") return complete_or_empty_class();
  if (name.rfind("constants-", 0) == 0) {
    try {
      std::size_t used = 0;
      auto n = std::stoul(name.substr(10), &used);
      if (used == name.size() - 10 && n <= 8) return constants_class(n);
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

}  // namespace mtk
