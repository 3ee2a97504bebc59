#pragma once

// Enumeration tables: one `e n x` triple per line; the position of a triple
// is its index among the triples of the file. Blank lines and `#` comments
// are skipped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mtk/axioms/forge.hpp"
#include "mtk/core/text_format.hpp"
#include "mtk/encoder/language.hpp"
#include "mtk/fraisse/age_class.hpp"

namespace mtk {

using BigNat = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// pairing and primes

/// Cantor pairing (i+j)(i+j+1)/2 + j.
inline std::uint64_t code_pair(std::uint64_t i, std::uint64_t j) {
  const BigNat w = BigNat(i) + j;
  const BigNat c = w * (w + 1) / 2 + j;
  if (c > BigNat(UINT64_MAX)) throw ResourceLimit("pair code overflows 64 bits");
  return static_cast<std::uint64_t>(c);
}

inline std::pair<std::uint64_t, std::uint64_t> decode_pair(std::uint64_t m) {
  // w = floor((sqrt(8m+1) - 1) / 2), corrected after the float estimate
  std::uint64_t w = static_cast<std::uint64_t>((std::sqrt(8.0L * m + 1) - 1) / 2);
  auto tri = [](std::uint64_t v) { return BigNat(v) * (v + 1) / 2; };
  while (w > 0 && tri(w) > m) --w;
  while (tri(w + 1) <= m) ++w;
  const auto j = m - static_cast<std::uint64_t>(tri(w));
  return {w - j, j};
}

/// p_n with p_0 = 2.
inline std::uint64_t nth_prime(std::size_t n) {
  static std::vector<std::uint64_t> primes{2};
  for (std::uint64_t c = primes.back() + 1; primes.size() <= n; ++c) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes[n];
}

/// a(0) = 3, a(x+1) = max(a(x) + 1, floor(p_{i_x} a(x) / p_{i_{x+1}}) + 1), where
/// i_x is the first coordinate of the pair coded by x. The least increasing
/// function into {3, 4, ...} with p_{i_x} a(x) strictly increasing.
class ArityFunction {
 public:
  const BigNat& operator()(std::uint64_t x) {
    if (memo_.empty()) memo_.push_back(3);
    while (memo_.size() <= x) {
      const std::uint64_t prev = memo_.size() - 1;
      const BigNat& a = memo_.back();
      const auto p0 = nth_prime(decode_pair(prev).first);
      const auto p1 = nth_prime(decode_pair(prev + 1).first);
      BigNat next = a + 1;
      BigNat alt = a * p0 / p1 + 1;
      memo_.push_back(std::max(next, alt));
    }
    return memo_[x];
  }

  /// p_{i_x} a(x): the arity of P*_x, and l_x for the layer it opens.
  BigNat product(std::uint64_t x) { return (*this)(x) * nth_prime(decode_pair(x).first); }

 private:
  std::vector<BigNat> memo_;
};

inline ArityFunction& arity_a() {
  static ArityFunction a;
  return a;
}

/// l_m = p_n a(m), n the first coordinate of the pair coded by m.
inline BigNat layer_bound(std::uint64_t m) { return arity_a().product(m); }

// ---------------------------------------------------------------------------
// enumeration tables

struct Triple {
  std::uint64_t e = 0, n = 0, x = 0;
  bool operator==(const Triple&) const = default;
  auto operator<=>(const Triple&) const = default;
};

struct EnumerationTable {
  std::vector<Triple> rows;
};

inline EnumerationTable parse_table(const std::string& text) {
  EnumerationTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = detail::tokenize_line(line);
    if (toks.empty()) continue;
    if (toks.size() != 3) {
      throw ParseError("expected three naturals 'e n x'", lineno,
                       toks.size() > 3 ? toks[3].column : toks.back().column);
    }
    std::uint64_t v[3];
    for (int k = 0; k < 3; ++k) {
      const auto& s = toks[k].text;
      if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 18) {
        throw ParseError("not a natural number: " + s, lineno, toks[k].column);
      }
      v[k] = std::stoull(s);
    }
    t.rows.push_back({v[0], v[1], v[2]});
  }
  return t;
}

inline std::string emit_table(const EnumerationTable& t) {
  std::string out;
  for (const auto& r : t.rows) {
    out += std::to_string(r.e) + " " + std::to_string(r.n) + " " + std::to_string(r.x) + "\n";
  }
  return out;
}

/// Reproducible random table: `len` triples with entries below the caps.
inline EnumerationTable random_table(std::uint64_t seed, std::size_t len, std::uint64_t e_cap,
                                     std::uint64_t n_cap, std::uint64_t x_cap) {
  std::mt19937_64 rng(seed);
  EnumerationTable t;
  for (std::size_t k = 0; k < len; ++k) {
    t.rows.push_back({rng() % e_cap, rng() % n_cap, rng() % x_cap});
  }
  return t;
}

/// D^s_e: codes <n, k> <= l_s such that row k is the first occurrence of
/// its triple <e, n, x>.
inline std::set<std::uint64_t> compute_D(const EnumerationTable& t, std::uint64_t e,
                                         std::uint64_t s) {
  const BigNat ls = layer_bound(s);
  std::set<std::uint64_t> out;
  std::set<Triple> seen;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& r = t.rows[k];
    if (!seen.insert(r).second || r.e != e) continue;
    const BigNat code = (BigNat(r.n) + k) * (BigNat(r.n) + k + 1) / 2 + k;
    if (code <= ls) out.insert(static_cast<std::uint64_t>(code));
  }
  return out;
}

/// 2^d, d = number of codes in D whose pair has first coordinate n.
inline BigNat count_sort_types(const std::set<std::uint64_t>& d, std::uint64_t n) {
  std::size_t k = 0;
  for (auto c : d) k += decode_pair(c).first == n;
  return BigNat(1) << k;
}

// ---------------------------------------------------------------------------
// verdicts

struct SortShadow {
  std::uint64_t sort = 0;
  std::size_t shadow = 0;    // distinct x with <e, sort, x> in the table
  std::size_t live = 0;      // codes of D^s_e on this sort
  BigNat types = 1;          // 2^live
  bool flagged = false;      // shadow reached the growth flag
};

struct CategoricityReport {
  std::uint64_t e = 0, horizon = 0;
  std::size_t rows = 0, growth_flag = 8;
  std::set<std::uint64_t> d;
  std::vector<SortShadow> sorts;
  bool categorical = true;  // at this horizon only
};

/// Shadow of |W| for each sort n <= s: the distinct x listed for <e, n, .>.
inline std::vector<std::size_t> sort_shadows(const EnumerationTable& t, std::uint64_t e,
                                             std::uint64_t s, std::size_t prefix) {
  std::vector<std::set<std::uint64_t>> xs(s + 1);
  for (std::size_t k = 0; k < std::min(prefix, t.rows.size()); ++k) {
    const auto& r = t.rows[k];
    if (r.e == e && r.n <= s) xs[r.n].insert(r.x);
  }
  std::vector<std::size_t> out;
  for (const auto& x : xs) out.push_back(x.size());
  return out;
}

inline CategoricityReport categoricity_verdict(const EnumerationTable& t, std::uint64_t e,
                                               std::uint64_t s, std::size_t growth_flag = 8) {
  CategoricityReport r;
  r.e = e;
  r.horizon = s;
  r.rows = t.rows.size();
  r.growth_flag = growth_flag;
  r.d = compute_D(t, e, s);
  const auto shadows = sort_shadows(t, e, s, t.rows.size());
  for (std::uint64_t n = 0; n <= s; ++n) {
    SortShadow sh;
    sh.sort = n;
    sh.shadow = shadows[n];
    for (auto c : r.d) sh.live += decode_pair(c).first == n;
    sh.types = count_sort_types(r.d, n);
    sh.flagged = sh.shadow >= growth_flag;
    if (sh.flagged) r.categorical = false;
    r.sorts.push_back(std::move(sh));
  }
  return r;
}

inline std::string render_verdict(const CategoricityReport& r, bool full) {
  std::string out = "categoricity verdict for e=" + std::to_string(r.e) + " at horizon " +
                    std::to_string(r.horizon) + " (" + std::to_string(r.rows) +
                    " table rows, growth flag " + std::to_string(r.growth_flag) + ")\n";
  out += "  D = {";
  bool first = true;
  for (auto c : r.d) {
    out += (first ? "" : ", ") + std::to_string(c);
    first = false;
  }
  out += "}\n";
  for (const auto& s : r.sorts) {
    if (!full && s.shadow == 0 && s.live == 0) continue;
    out += "  sort " + std::to_string(s.sort) + ": shadow " + std::to_string(s.shadow) +
           ", predicates " + std::to_string(s.live) + ", 1-types " + s.types.str() +
           (s.flagged ? "  <- growing" : "") + "\n";
  }
  out += std::string("  verdict: ") +
         (r.categorical ? "omega-categorical at horizon " + std::to_string(r.horizon)
                        : "non-categorical evidence at horizon " + std::to_string(r.horizon)) +
         " (a finite shadow, not a proof)\n";
  out += "\n[summary]\ne=" + std::to_string(r.e) + "\nhorizon=" + std::to_string(r.horizon) + "\n";
  std::size_t flagged = 0;
  for (const auto& s : r.sorts) flagged += s.flagged;
  out += "codes=" + std::to_string(r.d.size()) + "\n";
  out += "flagged_sorts=" + std::to_string(flagged) + "\n";
  out += std::string("verdict=") + (r.categorical ? "categorical-at-horizon" : "flagged") + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// the classes K_{m,D}

struct GadgetSymbol {
  enum class Kind { e, pstar, pad };
  Kind kind = Kind::pad;
  std::uint64_t sort = 0;  // E_n / P*_i of sort n
  std::uint64_t code = 0;  // P*_i only
  std::size_t p = 0;       // p_n
  std::size_t blocks = 0;  // a(i), P*_i only
  bool live = false;       // P*_i with i in D
};

struct GadgetTheory {
  std::uint64_t m = 0;
  std::set<std::uint64_t> d;
  std::size_t l = 0;                      // l_m
  std::vector<GadgetSymbol> info;         // parallel to vocab
  std::vector<std::uint64_t> outside;     // codes of D whose P* is not in L_m
  std::vector<std::size_t> shared_arities;  // arities carrying two symbols
  AgeClass k;

  const Vocabulary& vocab() const { return k.vocab; }
};

namespace detail {

// Sorted p-subsets of {0..n-1}.
inline std::vector<Tuple> p_sets(std::size_t n, std::size_t p) {
  std::vector<Tuple> out;
  if (p > n) return out;
  Tuple cur;
  std::function<void(Element)> go = [&](Element from) {
    if (cur.size() == p) {
      out.push_back(cur);
      return;
    }
    for (Element x = from; x < n; ++x) {
      cur.push_back(x);
      go(x + 1);
      cur.pop_back();
    }
  };
  go(0);
  return out;
}

inline bool repeats(const Tuple& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      if (t[i] == t[j]) return true;
    }
  }
  return false;
}

// Abstract description of one sort in a structure: class of each p-set
// (sets in p_sets order) and, per class, the live predicates it is in.
struct SortState {
  std::vector<int> cls;
  std::vector<std::vector<bool>> in_pred;  // [class][live predicate]
};

inline std::size_t state_classes(const SortState& st) { return st.in_pred.size(); }

// Reads the sort state of `s` for the E symbol `e_sym`; live predicate
// symbols of that sort in `preds`. Assumes membership.
inline SortState read_sort(const Structure& s, std::size_t e_sym, std::size_t p,
                           const std::vector<std::pair<std::size_t, std::size_t>>& preds) {
  SortState st;
  const auto sets = p_sets(s.size(), p);
  std::vector<std::size_t> reps;
  for (const auto& a : sets) {
    int c = -1;
    for (std::size_t k = 0; k < reps.size() && c < 0; ++k) {
      Tuple t = sets[reps[k]];
      t.insert(t.end(), a.begin(), a.end());
      if (s.holds(e_sym, t)) c = static_cast<int>(k);
    }
    if (c < 0) {
      c = static_cast<int>(reps.size());
      reps.push_back(st.cls.size());
    }
    st.cls.push_back(c);
  }
  for (auto r : reps) {
    std::vector<bool> bits;
    for (auto [sym, blocks] : preds) {
      Tuple t;
      for (std::size_t b = 0; b < blocks; ++b) t.insert(t.end(), sets[r].begin(), sets[r].end());
      bits.push_back(s.holds(sym, t));
    }
    st.in_pred.push_back(std::move(bits));
  }
  return st;
}

struct SortSymbols {
  std::size_t e_sym;
  std::size_t p;
  std::vector<std::pair<std::size_t, std::size_t>> preds;  // (symbol, blocks)
};

inline std::vector<SortSymbols> sort_symbols(const GadgetTheory& g) {
  std::vector<SortSymbols> out;
  for (std::size_t i = 0; i < g.info.size(); ++i) {
    if (g.info[i].kind != GadgetSymbol::Kind::e) continue;
    SortSymbols ss{i, g.info[i].p, {}};
    for (std::size_t j = 0; j < g.info.size(); ++j) {
      const auto& q = g.info[j];
      if (q.kind == GadgetSymbol::Kind::pstar && q.live && q.sort == g.info[i].sort) {
        ss.preds.emplace_back(j, q.blocks);
      }
    }
    out.push_back(std::move(ss));
  }
  return out;
}

// Builds the explicit 1-sorted structure from sort states.
inline Structure materialize(const Vocabulary& v, const std::vector<std::string>& names,
                             const std::vector<SortSymbols>& syms,
                             const std::vector<SortState>& states) {
  StructureBuilder b(v);
  for (const auto& nm : names) b.add_element(nm);
  const std::size_t n = names.size();
  for (std::size_t k = 0; k < syms.size(); ++k) {
    const auto& ss = syms[k];
    const auto& st = states[k];
    const auto sets = p_sets(n, ss.p);
    std::map<Tuple, std::size_t> set_index;
    for (std::size_t i = 0; i < sets.size(); ++i) set_index.emplace(sets[i], i);
    // group every p-tuple by class; -1 is the repeated-coordinate class
    std::map<int, std::vector<Tuple>> groups;
    for_each_tuple(n, ss.p, [&](const Tuple& t) {
      if (repeats(t)) {
        groups[-1].push_back(t);
        return;
      }
      Tuple sorted = t;
      std::sort(sorted.begin(), sorted.end());
      groups[st.cls[set_index.at(sorted)]].push_back(t);
    });
    for (const auto& [c, ts] : groups) {
      for (const auto& x : ts) {
        for (const auto& y : ts) {
          Tuple t = x;
          t.insert(t.end(), y.begin(), y.end());
          b.add(ss.e_sym, std::move(t));
        }
      }
      if (c < 0) continue;
      for (std::size_t q = 0; q < ss.preds.size(); ++q) {
        if (!st.in_pred[static_cast<std::size_t>(c)][q]) continue;
        const auto [sym, blocks] = ss.preds[q];
        for_each_tuple(ts.size(), blocks, [&](const Tuple& pick) {
          Tuple t;
          for (auto i : pick) t.insert(t.end(), ts[i].begin(), ts[i].end());
          b.add(sym, std::move(t));
        });
      }
    }
  }
  return b.build_unchecked();
}

// Union-find over p-tuple ids.
struct Dsu {
  std::vector<std::size_t> up;
  explicit Dsu(std::size_t n) : up(n) { std::iota(up.begin(), up.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (up[x] != x) x = up[x] = up[up[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { up[find(a)] = find(b); }
};

inline std::size_t tuple_id(const Element* t, std::size_t p, std::size_t n) {
  std::size_t id = 0;
  for (std::size_t i = 0; i < p; ++i) id = id * n + t[i];
  return id;
}

inline bool gadget_member(const GadgetTheory& g, const Structure& s) {
  const std::size_t n = s.size();
  std::map<std::uint64_t, std::vector<std::size_t>> class_of;  // sort -> tuple id -> root
  for (std::size_t sym = 0; sym < g.info.size(); ++sym) {
    const auto& q = g.info[sym];
    if (q.kind == GadgetSymbol::Kind::pad || (q.kind == GadgetSymbol::Kind::pstar && !q.live)) {
      if (!s.relation(sym).empty()) return false;
      continue;
    }
    if (q.kind != GadgetSymbol::Kind::e) continue;
    const std::size_t p = q.p;
    std::size_t total = 1;
    for (std::size_t i = 0; i < p; ++i) {
      total *= std::max<std::size_t>(n, 1);
      if (total > (std::size_t{1} << 22)) throw ResourceLimit("E" + std::to_string(q.sort) + " has too many tuples to check");
    }
    if (n == 0) {
      if (!s.relation(sym).empty()) return false;
      class_of[q.sort] = {};
      continue;
    }
    Dsu dsu(total);
    for (const auto& t : s.relation(sym)) dsu.unite(tuple_id(t.data(), p, n), tuple_id(t.data() + p, p, n));
    std::vector<std::size_t> size(total, 0);
    for (std::size_t id = 0; id < total; ++id) ++size[dsu.find(id)];
    std::size_t want = 0;
    for (auto c : size) want += c * c;
    if (want != s.relation(sym).size()) return false;
    std::optional<std::size_t> diag;
    bool ok = true;
    for_each_tuple(n, p, [&](const Tuple& t) {
      if (!ok) return;
      const auto root = dsu.find(tuple_id(t.data(), p, n));
      if (repeats(t)) {
        if (diag && *diag != root) ok = false;
        diag = root;
        return;
      }
      Tuple sorted = t;
      std::sort(sorted.begin(), sorted.end());
      if (dsu.find(tuple_id(sorted.data(), p, n)) != root) ok = false;
    });
    if (!ok) return false;
    // the repeated class holds nothing else
    if (diag) {
      bool clean = true;
      for_each_tuple(n, p, [&](const Tuple& t) {
        if (!repeats(t) && dsu.find(tuple_id(t.data(), p, n)) == *diag) clean = false;
      });
      if (!clean) return false;
    }
    std::vector<std::size_t> roots(total);
    for (std::size_t id = 0; id < total; ++id) roots[id] = dsu.find(id);
    class_of[q.sort] = std::move(roots);
  }
  for (std::size_t sym = 0; sym < g.info.size(); ++sym) {
    const auto& q = g.info[sym];
    if (q.kind != GadgetSymbol::Kind::pstar || !q.live) continue;
    const auto& roots = class_of.at(q.sort);
    std::set<std::size_t> touched;
    for (const auto& t : s.relation(sym)) {
      const auto first = tuple_id(t.data(), q.p, n);
      Tuple block(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(q.p));
      if (repeats(block)) return false;
      for (std::size_t b = 1; b < q.blocks; ++b) {
        if (roots[tuple_id(t.data() + b * q.p, q.p, n)] != roots[first]) return false;
      }
      touched.insert(roots[first]);
    }
    // E-invariance: every block tuple over a touched class is present
    std::map<std::size_t, std::size_t> size;
    for (auto r : roots) ++size[r];
    std::size_t want = 0;
    for (auto r : touched) {
      std::size_t c = 1;
      for (std::size_t b = 0; b < q.blocks; ++b) c *= size[r];
      want += c;
    }
    if (want != s.relation(sym).size()) return false;
  }
  return true;
}

// Restricted-growth labelings of `count` new sets: each takes an old class
// (< old) or a new one (numbered from old in order of first use).
inline void for_each_labeling(std::size_t count, std::size_t old,
                              const std::function<void(const std::vector<int>&, std::size_t)>& f) {
  std::vector<int> lab(count);
  std::function<void(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t fresh) {
    if (i == count) {
      f(lab, fresh);
      return;
    }
    for (std::size_t c = 0; c <= old + fresh; ++c) {
      lab[i] = static_cast<int>(c);
      go(i + 1, c == old + fresh ? fresh + 1 : fresh);
    }
  };
  go(0, 0);
}

inline ExtensionGenerator gadget_generator(const GadgetTheory& g) {
  const auto syms = sort_symbols(g);
  const auto vocab = g.k.vocab;
  return [syms, vocab](const Structure& base,
                       const std::function<void(const Structure&)>& visit) {
    const std::size_t n = base.size() + 1;
    auto names = base.names();
    names.push_back(fresh_name(base));
    // per sort: the list of possible new states
    std::vector<std::vector<SortState>> options;
    for (const auto& ss : syms) {
      const auto old = read_sort(base, ss.e_sym, ss.p, ss.preds);
      const auto old_sets = p_sets(base.size(), ss.p);
      const auto sets = p_sets(n, ss.p);
      std::vector<std::size_t> fresh_sets;  // indices into `sets` containing the new point
      std::vector<int> base_cls(sets.size(), -1);
      {
        std::map<Tuple, std::size_t> idx;
        for (std::size_t i = 0; i < old_sets.size(); ++i) idx.emplace(old_sets[i], i);
        for (std::size_t i = 0; i < sets.size(); ++i) {
          auto it = idx.find(sets[i]);
          if (it == idx.end()) {
            fresh_sets.push_back(i);
          } else {
            base_cls[i] = old.cls[it->second];
          }
        }
      }
      std::vector<SortState> opts;
      const std::size_t old_classes = state_classes(old);
      for_each_labeling(fresh_sets.size(), old_classes,
                        [&](const std::vector<int>& lab, std::size_t fresh) {
                          const std::size_t np = ss.preds.size();
                          for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (np * fresh)); ++mask) {
                            SortState st;
                            st.cls = base_cls;
                            for (std::size_t k = 0; k < fresh_sets.size(); ++k) st.cls[fresh_sets[k]] = lab[k];
                            st.in_pred = old.in_pred;
                            for (std::size_t c = 0; c < fresh; ++c) {
                              std::vector<bool> bits(np);
                              for (std::size_t q = 0; q < np; ++q) bits[q] = mask >> (c * np + q) & 1U;
                              st.in_pred.push_back(std::move(bits));
                            }
                            opts.push_back(std::move(st));
                          }
                        });
      options.push_back(std::move(opts));
    }
    std::vector<SortState> pick(syms.size());
    std::function<void(std::size_t)> go = [&](std::size_t k) {
      if (k == syms.size()) {
        visit(materialize(vocab, names, syms, pick));
        return;
      }
      for (const auto& o : options[k]) {
        pick[k] = o;
        go(k + 1);
      }
    };
    go(0);
  };
}

// Free amalgamation with classes glued along C: sets inside one factor keep
// that factor's class, classes meeting on a C-set merge, mixed sets are
// singleton classes outside every predicate.
inline AmalgamationStrategy gadget_strategy(const GadgetTheory& g) {
  const auto syms = sort_symbols(g);
  const auto vocab = g.k.vocab;
  return [syms, vocab](const Structure& c, const Structure& d1, const std::vector<Element>& f1,
                       const Structure& d2,
                       const std::vector<Element>& f2) -> std::optional<Amalgam> {
    auto base = free_amalgam(c, d1, f1, d2, f2);
    const std::size_t n = base.structure.size();
    std::vector<SortState> states;
    for (const auto& ss : syms) {
      const auto s1 = read_sort(d1, ss.e_sym, ss.p, ss.preds);
      const auto s2 = read_sort(d2, ss.e_sym, ss.p, ss.preds);
      const auto sets = p_sets(n, ss.p);
      std::map<Tuple, std::size_t> idx;
      for (std::size_t i = 0; i < sets.size(); ++i) idx.emplace(sets[i], i);
      const std::size_t k1 = state_classes(s1), k2 = state_classes(s2);
      // nodes: classes of D1, classes of D2, then one per mixed set
      std::vector<std::size_t> node(sets.size(), SIZE_MAX);
      Dsu dsu(k1 + k2 + sets.size());
      auto place = [&](const Structure& d, const SortState& st, const std::vector<Element>& img,
                       std::size_t offset) {
        const auto own = p_sets(d.size(), ss.p);
        for (std::size_t i = 0; i < own.size(); ++i) {
          Tuple t;
          for (auto x : own[i]) t.push_back(img[x]);
          std::sort(t.begin(), t.end());
          const auto j = idx.at(t);
          const std::size_t nd = offset + static_cast<std::size_t>(st.cls[i]);
          if (node[j] == SIZE_MAX) {
            node[j] = nd;
          } else {
            dsu.unite(node[j], nd);
          }
        }
      };
      place(d1, s1, base.g1, 0);
      place(d2, s2, base.g2, k1);
      for (std::size_t j = 0; j < sets.size(); ++j) {
        if (node[j] == SIZE_MAX) node[j] = k1 + k2 + j;
      }
      SortState st;
      std::map<std::size_t, int> number;
      for (std::size_t j = 0; j < sets.size(); ++j) {
        const auto r = dsu.find(node[j]);
        auto [it, fresh] = number.try_emplace(r, static_cast<int>(number.size()));
        if (fresh) st.in_pred.emplace_back(ss.preds.size(), false);
        st.cls.push_back(it->second);
      }
      for (std::size_t q = 0; q < ss.preds.size(); ++q) {
        for (std::size_t i = 0; i < k1; ++i) {
          if (s1.in_pred[i][q] && number.count(dsu.find(i))) st.in_pred[number[dsu.find(i)]][q] = true;
        }
        for (std::size_t i = 0; i < k2; ++i) {
          if (s2.in_pred[i][q] && number.count(dsu.find(k1 + i))) {
            st.in_pred[number[dsu.find(k1 + i)]][q] = true;
          }
        }
      }
      states.push_back(std::move(st));
    }
    base.structure = materialize(vocab, base.structure.names(), syms, states);
    return base;
  };
}

// --- universal laws ---------------------------------------------------------

inline std::vector<std::string> fresh_vars(std::size_t& next, std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back("x" + std::to_string(++next));
  return out;
}

inline std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline Formula rep_formula(const std::vector<std::string>& u) {
  std::vector<Formula> eqs;
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = i + 1; j < u.size(); ++j) eqs.push_back(Formula::eq(u[i], u[j]));
  }
  return Formula::any_of(std::move(eqs));
}

inline std::vector<Sentence> gadget_laws(const GadgetTheory& g) {
  std::vector<Sentence> out;
  using F = Formula;
  auto law = [&](std::vector<std::string> vars, Formula body) {
    Sentence s;
    for (auto& v : vars) s.prefix.push_back({Quantifier::forall, std::move(v)});
    s.matrix = std::move(body);
    s.scheme = Scheme::a;
    out.push_back(std::move(s));
  };
  const auto& v = g.k.vocab;
  std::map<std::uint64_t, std::string> e_name;
  for (std::size_t i = 0; i < g.info.size(); ++i) {
    if (g.info[i].kind == GadgetSymbol::Kind::e) e_name[g.info[i].sort] = v[i].name;
  }
  for (std::size_t i = 0; i < g.info.size(); ++i) {
    const auto& q = g.info[i];
    const auto& name = v[i].name;
    std::size_t next = 0;
    if (q.kind == GadgetSymbol::Kind::pad || (q.kind == GadgetSymbol::Kind::pstar && !q.live)) {
      auto xs = fresh_vars(next, v[i].arity);
      law(xs, F::negate(F::rel(name, xs)));
      continue;
    }
    if (q.kind == GadgetSymbol::Kind::e) {
      const auto p = q.p;
      {
        next = 0;
        auto u = fresh_vars(next, p);
        law(u, F::rel(name, concat(u, u)));
        // adjacent transpositions generate every reordering
        for (std::size_t k = 0; k + 1 < p; ++k) {
          auto w = u;
          std::swap(w[k], w[k + 1]);
          law(u, F::rel(name, concat(u, w)));
        }
      }
      {
        next = 0;
        auto u = fresh_vars(next, p), w = fresh_vars(next, p);
        law(concat(u, w), F::implies(F::rel(name, concat(u, w)), F::rel(name, concat(w, u))));
        law(concat(u, w), F::implies(F::all_of({rep_formula(u), rep_formula(w)}),
                                     F::rel(name, concat(u, w))));
        law(concat(u, w), F::implies(F::all_of({rep_formula(u), F::rel(name, concat(u, w))}),
                                     rep_formula(w)));
        auto z = fresh_vars(next, p);
        law(concat(concat(u, w), z),
            F::implies(F::all_of({F::rel(name, concat(u, w)), F::rel(name, concat(w, z))}),
                       F::rel(name, concat(u, z))));
      }
      continue;
    }
    // live P*: diagonal support, collapse to the diagonal, E-invariance
    const auto& e = e_name.at(q.sort);
    const auto p = q.p;
    next = 0;
    std::vector<std::vector<std::string>> blocks;
    std::vector<std::string> all;
    for (std::size_t b = 0; b < q.blocks; ++b) {
      blocks.push_back(fresh_vars(next, p));
      all = concat(all, blocks.back());
    }
    auto diag_of = [&](const std::vector<std::string>& u) {
      std::vector<std::string> t;
      for (std::size_t b = 0; b < q.blocks; ++b) t = concat(t, u);
      return t;
    };
    std::vector<Formula> same{F::negate(rep_formula(blocks[0]))};
    for (std::size_t b = 1; b < q.blocks; ++b) same.push_back(F::rel(e, concat(blocks[0], blocks[b])));
    law(all, F::implies(F::rel(name, all), F::all_of(same)));
    law(all, F::implies(F::rel(name, all), F::rel(name, diag_of(blocks[0]))));
    std::vector<Formula> grow = same;
    grow.push_back(F::rel(name, diag_of(blocks[0])));
    law(all, F::implies(F::all_of(grow), F::rel(name, all)));
    std::size_t n2 = 0;
    auto u = fresh_vars(n2, p), w = fresh_vars(n2, p);
    law(concat(u, w), F::implies(F::all_of({F::rel(name, diag_of(u)), F::rel(e, concat(u, w))}),
                                 F::rel(name, diag_of(w))));
  }
  return out;
}

}  // namespace detail

/// Most symbols the flattened vocabulary of one layer may have.
inline constexpr std::size_t kMaxLayerArity = 512;

/// K_{m,D} in the 1-sorted language L_m: E_n (arity 2 p_n) for 2 p_n <= l_m,
/// P*_i (arity a(i) p_n, i coding <n, j>) for a(i) p_n <= l_m, live iff
/// i in D, and an empty padder Z<l> for every other arity l <= l_m.
inline GadgetTheory build_gadget_class(const std::set<std::uint64_t>& d, std::uint64_t m) {
  GadgetTheory g;
  g.m = m;
  g.d = d;
  const BigNat lm = layer_bound(m);
  if (lm > kMaxLayerArity) {
    throw ResourceLimit("l_" + std::to_string(m) + " = " + lm.str() + " exceeds the vocabulary cap " +
                        std::to_string(kMaxLayerArity));
  }
  g.l = static_cast<std::size_t>(lm);
  for (auto c : d) {
    if (BigNat(c) > lm) {
      throw ValidationError("code " + std::to_string(c) + " exceeds l_" + std::to_string(m) + " = " +
                            std::to_string(g.l));
    }
  }
  struct Entry {
    std::size_t arity;
    int order;  // E before P* at equal arity
    Symbol sym;
    GadgetSymbol info;
  };
  std::vector<Entry> entries;
  for (std::size_t n = 0; 2 * nth_prime(n) <= g.l; ++n) {
    GadgetSymbol s;
    s.kind = GadgetSymbol::Kind::e;
    s.sort = n;
    s.p = nth_prime(n);
    entries.push_back({2 * s.p, 0, {"E" + std::to_string(n), 2 * s.p}, s});
  }
  for (std::uint64_t i = 0; layer_bound(i) <= lm; ++i) {
    GadgetSymbol s;
    s.kind = GadgetSymbol::Kind::pstar;
    s.code = i;
    s.sort = decode_pair(i).first;
    s.p = nth_prime(s.sort);
    s.blocks = static_cast<std::size_t>(arity_a()(i));
    s.live = d.count(i) > 0;
    const auto ar = static_cast<std::size_t>(layer_bound(i));
    entries.push_back({ar, 1, {"P*" + std::to_string(i), ar}, s});
  }
  for (auto c : d) {
    if (layer_bound(c) > lm) g.outside.push_back(c);
  }
  std::set<std::size_t> used;
  std::map<std::size_t, int> per_arity;
  for (const auto& e : entries) {
    used.insert(e.arity);
    if (++per_arity[e.arity] == 2) g.shared_arities.push_back(e.arity);
  }
  for (std::size_t a = 1; a <= g.l; ++a) {
    if (!used.count(a)) entries.push_back({a, 2, {"Z" + std::to_string(a), a}, {}});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return std::tie(x.arity, x.order) < std::tie(y.arity, y.order);
  });
  std::vector<Symbol> syms;
  for (const auto& e : entries) {
    syms.push_back(e.sym);
    g.info.push_back(e.info);
  }
  g.k.vocab = Vocabulary(syms);
  std::string dn;
  for (auto c : d) dn += (dn.empty() ? "" : ",") + std::to_string(c);
  g.k.name = "K_{" + std::to_string(m) + ",{" + dn + "}}";
  // the lambdas copy the theory without its class
  GadgetTheory shape = g;
  g.k.member = [shape](const Structure& s) { return detail::gadget_member(shape, s); };
  g.k.extensions = detail::gadget_generator(shape);
  g.k.amalgamate = detail::gadget_strategy(shape);
  g.k.universal_laws = detail::gadget_laws(shape);
  return g;
}

inline BigNat count_sort_types(const GadgetTheory& g, std::uint64_t n) {
  return count_sort_types(g.d, n);
}

/// Sort n rendered as its own carrier: quotient elements with one unary
/// predicate per code of D on that sort. Every pattern is allowed, since the
/// predicates generate a free Boolean algebra.
inline AgeClass sort_quotient_class(const std::set<std::uint64_t>& d, std::uint64_t n) {
  std::vector<Symbol> syms;
  for (auto c : d) {
    if (decode_pair(c).first == n) syms.push_back({"P" + std::to_string(c), 1});
  }
  AgeClass k;
  k.name = "S" + std::to_string(n);
  k.vocab = Vocabulary(syms);
  k.member = [](const Structure&) { return true; };
  k.extensions = all_atoms_generator();
  k.amalgamate = free_strategy();
  return k;
}

/// Non-diagonal E_n classes of `s` with the predicates they lie in, as a
/// structure of sort_quotient_class(D, n); elements named by a
/// representative set.
inline Structure sort_quotient(const GadgetTheory& g, const Structure& s, std::uint64_t n) {
  const auto q = sort_quotient_class(g.d, n);
  StructureBuilder b(q.vocab);
  for (const auto& ss : detail::sort_symbols(g)) {
    if (g.info[ss.e_sym].sort != n) continue;
    const auto st = detail::read_sort(s, ss.e_sym, ss.p, ss.preds);
    const auto sets = detail::p_sets(s.size(), ss.p);
    std::vector<bool> named(detail::state_classes(st), false);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const auto c = static_cast<std::size_t>(st.cls[i]);
      if (named[c]) continue;
      named[c] = true;
      std::string nm = "[";
      for (std::size_t k = 0; k < sets[i].size(); ++k) nm += (k ? "," : "") + s.name(sets[i][k]);
      b.add_element(nm + "]");
    }
    for (std::size_t c = 0; c < st.in_pred.size(); ++c) {
      for (std::size_t k = 0; k < ss.preds.size(); ++k) {
        if (!st.in_pred[c][k]) continue;
        const auto code = g.info[ss.preds[k].first].code;
        b.add("P" + std::to_string(code), {static_cast<Element>(c)});
      }
    }
  }
  return b.build();
}

// ---------------------------------------------------------------------------
// axioms

struct GadgetAxioms {
  std::vector<Sentence> one_sorted;  // schemes (a)-(d) of K_{m,D}
  std::vector<Sentence> rewritten;   // their L-rewrites, same order
};

namespace detail {

inline Formula rename(const Formula& f, const std::map<std::string, std::string>& to) {
  Formula out = f;
  for (auto& v : out.vars) {
    if (auto it = to.find(v); it != to.end()) v = it->second;
  }
  for (auto& c : out.children) c = rename(c, to);
  return out;
}

}  // namespace detail

/// Rewrites an L0-sentence into L: quantifiers are relativised to P and each
/// L0 atom R_n(x̄) becomes "some n-pair labels x̄", with the cycle variables
/// quantified existentially at positive occurrences and universally at
/// negative ones (appended to the prefix; they are fresh, so this is the
/// prenex form of the substitution).
inline Sentence rewrite_to_L(const Sentence& s, const Vocabulary& l0) {
  const auto idx = relation_indices(l0);
  Sentence out;
  out.scheme = s.scheme;
  out.prefix = s.prefix;
  std::set<std::string> taken;
  for (const auto& q : s.prefix) taken.insert(q.var);
  std::size_t fresh = 0;
  auto next_var = [&] {
    std::string v;
    do {
      v = "c" + std::to_string(++fresh);
    } while (taken.count(v));
    taken.insert(v);
    return v;
  };
  std::vector<QuantifiedVar> extra;
  std::function<Formula(const Formula&, bool)> go = [&](const Formula& f, bool positive) -> Formula {
    using K = Formula::Kind;
    switch (f.kind) {
      case K::eq:
        return f;
      case K::rel: {
        auto sym = l0.find(f.symbol);
        if (!sym) throw VocabularyMismatch("symbol " + f.symbol + " is not in L0");
        const std::size_t n = idx[*sym], m = f.vars.size();
        std::map<std::string, std::string> to;
        for (std::size_t i = 0; i < m; ++i) to["x" + std::to_string(i + 1)] = f.vars[i];
        for (std::size_t j = 0; j < n; ++j) {
          auto c = next_var();
          to["x" + std::to_string(m + j + 1)] = c;
          extra.push_back({positive ? Quantifier::exists : Quantifier::forall, c});
        }
        return detail::rename(npair_formula(m, n), to);
      }
      case K::negation:
        return Formula::negate(go(f.children[0], !positive));
      case K::implication:
        return Formula::implies(go(f.children[0], !positive), go(f.children[1], positive));
      default: {
        Formula g = f;
        for (auto& c : g.children) c = go(c, positive);
        return g;
      }
    }
  };
  // npair_formula's placeholders are substituted simultaneously, so the
  // original x1.. names cannot capture each other
  Formula m = go(s.matrix, true);
  for (std::size_t k = s.prefix.size(); k-- > 0;) {
    auto guard = Formula::rel("P", {s.prefix[k].var});
    m = s.prefix[k].q == Quantifier::forall ? Formula::implies(std::move(guard), std::move(m))
                                            : Formula::all_of({std::move(guard), std::move(m)});
  }
  out.prefix.insert(out.prefix.end(), extra.begin(), extra.end());
  out.matrix = std::move(m);
  return out;
}

inline GadgetAxioms assemble_gadget_axioms(const GadgetTheory& g, const AxiomBudget& budget) {
  GadgetAxioms out;
  out.one_sorted = generate_axioms(g.k, budget);
  for (const auto& s : out.one_sorted) out.rewritten.push_back(rewrite_to_L(s, g.k.vocab));
  return out;
}

inline std::string emit_gadget_axioms(const GadgetTheory& g, const GadgetAxioms& a) {
  std::string out = "# " + g.k.name + ": 1-sorted axioms over L_" + std::to_string(g.m) + "\n";
  out += emit_axiom_file(a.one_sorted);
  out += "# L-rewrites (P-relativised, each L0 atom replaced by its n-pair definition)\n";
  out += emit_axiom_file(a.rewritten);
  return out;
}

inline std::string describe_gadget(const GadgetTheory& g) {
  std::string out = "gadget class " + g.k.name + ": l_" + std::to_string(g.m) + " = " +
                    std::to_string(g.l) + ", " + std::to_string(g.k.vocab.size()) + " symbols\n";
  std::string live, e;
  for (std::size_t i = 0; i < g.info.size(); ++i) {
    const auto& q = g.info[i];
    if (q.kind == GadgetSymbol::Kind::e) e += " " + g.k.vocab[i].name + "/" + std::to_string(g.k.vocab[i].arity);
    if (q.kind == GadgetSymbol::Kind::pstar && q.live) {
      live += " " + g.k.vocab[i].name + "/" + std::to_string(g.k.vocab[i].arity);
    }
  }
  out += "  equivalences:" + (e.empty() ? std::string(" none") : e) + "\n";
  out += "  live predicates:" + (live.empty() ? std::string(" none") : live) + "\n";
  if (!g.outside.empty()) {
    out += "  codes of D outside L_" + std::to_string(g.m) + ":";
    for (auto c : g.outside) out += " " + std::to_string(c);
    out += "\n";
  }
  if (!g.shared_arities.empty()) {
    out += "  arities with two symbols:";
    for (auto a : g.shared_arities) out += " " + std::to_string(a);
    out += "\n";
  }
  return out;
}

}  // namespace mtk
