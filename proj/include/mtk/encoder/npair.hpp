#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mtk/core/structure.hpp"
#include "mtk/encoder/language.hpp"

namespace mtk {

/// n-pair of arity m: labels ā (m P-elements, repeats allowed) by the
/// n-cycle c̄ of distinct Q-elements.
struct NPair {
  std::size_t n = 0;
  std::vector<Element> a;
  std::vector<Element> c;

  std::size_t arity() const { return a.size(); }
  bool operator==(const NPair&) const = default;
  auto operator<=>(const NPair&) const = default;
};

struct NPairCheck {
  bool valid = true;
  std::vector<std::string> violations;  // each cites the condition number
};

namespace detail {

struct LSymbols {
  std::size_t p, q, lam, rho, h, s;

  explicit LSymbols(const Vocabulary& v)
      : p(v.index_of("P")),
        q(v.index_of("Q")),
        lam(v.index_of("lam")),
        rho(v.index_of("rho")),
        h(v.index_of("H")),
        s(v.index_of("S")) {}
};

}  // namespace detail

/// Conditions (1)-(4) for (ā, c̄) as an n-pair in M. Condition (4) is read
/// on the tuple itself: for i, k < m and j, l < n,
///   S(a_i, c_j, a_k, c_l)  iff  j < m, l < m, a_i = a_j and a_k = a_l.
/// So cycle position j < m carries the label a_j, positions >= m carry none,
/// and S-atoms with P-elements outside ā are not constrained.
inline NPairCheck validate_npair(const Structure& m_struct, const std::vector<Element>& a,
                                 const std::vector<Element>& c, std::size_t n) {
  NPairCheck out;
  auto bad = [&](std::string v) {
    out.valid = false;
    out.violations.push_back(std::move(v));
  };
  const detail::LSymbols L(m_struct.vocabulary());
  const std::size_t m = a.size();
  for (auto e : a) {
    if (e >= m_struct.size()) throw ValidationError("element index outside domain");
  }
  for (auto e : c) {
    if (e >= m_struct.size()) throw ValidationError("element index outside domain");
  }
  // (1)
  if (c.size() != n) bad("(1) cycle has " + std::to_string(c.size()) + " elements, n = " +
                         std::to_string(n));
  if (m == 0 || m > n) bad("(1) arity " + std::to_string(m) + " not in 1..n");
  for (auto e : a) {
    if (!m_struct.holds(L.p, {e})) bad("(1) label " + m_struct.name(e) + " is not in P");
  }
  for (auto e : c) {
    if (!m_struct.holds(L.q, {e})) bad("(1) cycle element " + m_struct.name(e) + " is not in Q");
  }
  if (!out.valid) return out;
  // (2)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (c[i] == c[j]) bad("(2) cycle element " + m_struct.name(c[i]) + " repeats");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const bool want = j == (i + 1) % n;
      if (m_struct.holds(L.h, {c[i], c[j]}) != want) {
        bad(std::string("(2) H(") + m_struct.name(c[i]) + "," + m_struct.name(c[j]) + ") " +
            (want ? "missing" : "unexpected"));
      }
    }
  }
  // (3)
  for (std::size_t i = 0; i < n; ++i) {
    if (m_struct.holds(L.lam, {c[i]}) != (i == 0)) {
      bad("(3) lam at position " + std::to_string(i) + (i == 0 ? " missing" : " unexpected"));
    }
    if (m_struct.holds(L.rho, {c[i]}) != (i + 1 == m)) {
      bad("(3) rho at position " + std::to_string(i) + (i + 1 == m ? " missing" : " unexpected"));
    }
  }
  // (4)
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
          const bool want = j < m && l < m && a[i] == a[j] && a[k] == a[l];
          if (m_struct.holds(L.s, {a[i], c[j], a[k], c[l]}) != want) {
            bad("(4) S(" + m_struct.name(a[i]) + "," + m_struct.name(c[j]) + "," +
                m_struct.name(a[k]) + "," + m_struct.name(c[l]) + ") " +
                (want ? "missing" : "unexpected"));
          }
        }
      }
    }
  }
  return out;
}

/// Every valid n-pair of M, for every n up to |Q|: cycles are traced from
/// lam-marked Q-elements along H, arity is read from the rho position and
/// labels from the diagonal S(x, c_j, x, c_j). Sorted.
inline std::vector<NPair> find_npairs(const Structure& m_struct) {
  const detail::LSymbols L(m_struct.vocabulary());
  std::vector<std::vector<Element>> succ(m_struct.size());
  for (const auto& t : m_struct.relation(L.h)) succ[t[0]].push_back(t[1]);
  std::vector<NPair> out;
  std::vector<bool> on_path(m_struct.size(), false);
  std::vector<Element> path;

  auto labels_and_emit = [&](const std::vector<Element>& cyc) {
    std::size_t rho_pos = cyc.size();
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      if (m_struct.holds(L.rho, {cyc[i]})) {
        if (rho_pos != cyc.size()) return;  // two rho marks: (3) fails
        rho_pos = i;
      }
    }
    if (rho_pos == cyc.size()) return;
    const std::size_t m = rho_pos + 1;
    std::vector<std::vector<Element>> cand(m);
    for (std::size_t j = 0; j < m; ++j) {
      for (const auto& t : m_struct.relation(L.s)) {
        if (t[1] == cyc[j] && t[3] == cyc[j] && t[0] == t[2]) cand[j].push_back(t[0]);
      }
      if (cand[j].empty()) return;
    }
    std::vector<Element> a(m);
    std::function<void(std::size_t)> pick = [&](std::size_t j) {
      if (j == m) {
        if (validate_npair(m_struct, a, cyc, cyc.size()).valid) {
          out.push_back({cyc.size(), a, cyc});
        }
        return;
      }
      for (auto x : cand[j]) {
        a[j] = x;
        pick(j + 1);
      }
    };
    pick(0);
  };

  std::function<void(Element)> walk = [&](Element v) {
    for (auto w : succ[v]) {
      if (w == path.front()) labels_and_emit(path);
      if (on_path[w] || !m_struct.holds(L.q, {w})) continue;
      on_path[w] = true;
      path.push_back(w);
      walk(w);
      path.pop_back();
      on_path[w] = false;
    }
  };
  for (const auto& t : m_struct.relation(L.lam)) {
    const Element start = t[0];
    if (!m_struct.holds(L.q, {start})) continue;
    path = {start};
    on_path[start] = true;
    walk(start);
    on_path[start] = false;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::string describe_npair(const Structure& s, const NPair& p) {
  std::string out = std::to_string(p.n) + "-pair of arity " + std::to_string(p.arity()) + " (";
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    if (i) out += ",";
    out += s.name(p.a[i]);
  }
  out += ") via cycle";
  for (auto c : p.c) out += " " + s.name(c);
  return out;
}

}  // namespace mtk
