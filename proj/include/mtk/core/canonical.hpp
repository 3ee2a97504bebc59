#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mtk/core/structure.hpp"

namespace mtk {

/// Canonical labeling result: `order[i]` is the element placed at position i.
struct CanonicalLabeling {
  std::string key;
  std::vector<Element> order;
};

namespace detail {

// Relabeled relations, compared lexicographically to pick the minimal leaf.
using Certificate = std::vector<std::vector<Tuple>>;

class CanonicalSearch {
 public:
  CanonicalSearch(const Structure& s, std::vector<int> initial) : s_(s), n_(s.size()) {
    incidence_.resize(n_);
    for (std::size_t sym = 0; sym < s.vocabulary().size(); ++sym) {
      const auto& rel = s.relation(sym);
      for (std::size_t t = 0; t < rel.size(); ++t) {
        const auto& tup = rel[t];
        for (std::size_t p = 0; p < tup.size(); ++p) {
          // record each tuple once per element
          if (std::find(tup.begin(), tup.begin() + static_cast<long>(p), tup[p]) ==
              tup.begin() + static_cast<long>(p)) {
            incidence_[tup[p]].emplace_back(sym, t);
          }
        }
      }
    }
    if (initial.empty()) initial.assign(n_, 0);
    colors_ = rank(initial);
  }

  CanonicalLabeling run() {
    refine(colors_);
    search(colors_);
    CanonicalLabeling out;
    out.order = best_order_;
    out.key = encode();
    return out;
  }

 private:
  static std::vector<int> rank(const std::vector<int>& keys) {
    std::vector<int> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> out(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), keys[i]) -
                                sorted.begin());
    }
    return out;
  }

  static std::size_t distinct(const std::vector<int>& c) {
    std::vector<int> s = c;
    std::sort(s.begin(), s.end());
    return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
  }

  // Iterated refinement: an element's new color is its old color together
  // with the sorted multiset of incident tuples described by the colors of the
  // other coordinates (the element itself marked as -1).
  void refine(std::vector<int>& colors) const {
    std::size_t cells = distinct(colors);
    while (cells < n_) {
      std::vector<std::pair<std::vector<std::vector<int>>, Element>> sigs(n_);
      for (Element v = 0; v < n_; ++v) {
        auto& sig = sigs[v].first;
        sigs[v].second = v;
        sig.push_back({colors[v]});
        std::vector<std::vector<int>> entries;
        for (auto [sym, t] : incidence_[v]) {
          const auto& tup = s_.relation(sym)[t];
          std::vector<int> e;
          e.reserve(tup.size() + 1);
          e.push_back(static_cast<int>(sym));
          for (auto x : tup) e.push_back(x == v ? -1 : colors[x]);
          entries.push_back(std::move(e));
        }
        std::sort(entries.begin(), entries.end());
        sig.insert(sig.end(), entries.begin(), entries.end());
      }
      std::vector<std::size_t> idx(n_);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return sigs[a].first < sigs[b].first; });
      std::vector<int> next(n_);
      int c = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (i > 0 && sigs[idx[i]].first != sigs[idx[i - 1]].first) ++c;
        next[idx[i]] = c;
      }
      std::size_t now = static_cast<std::size_t>(c) + (n_ ? 1 : 0);
      colors = std::move(next);
      if (now == cells) break;
      cells = now;
    }
  }

  bool twins(Element a, Element b) const {
    std::vector<Element> swap(n_);
    std::iota(swap.begin(), swap.end(), 0);
    std::swap(swap[a], swap[b]);
    for (auto [sym, t] : incidence_[a]) {
      Tuple u = s_.relation(sym)[t];
      for (auto& x : u) x = swap[x];
      if (!s_.holds(sym, u)) return false;
    }
    for (auto [sym, t] : incidence_[b]) {
      Tuple u = s_.relation(sym)[t];
      for (auto& x : u) x = swap[x];
      if (!s_.holds(sym, u)) return false;
    }
    return true;
  }

  void search(const std::vector<int>& colors) {
    // target cell: the smallest color shared by more than one element
    std::vector<int> count(n_ + 1, 0);
    for (auto c : colors) ++count[static_cast<std::size_t>(c)];
    int target = -1;
    for (std::size_t c = 0; c < count.size(); ++c) {
      if (count[c] > 1) {
        target = static_cast<int>(c);
        break;
      }
    }
    if (target < 0) {
      leaf(colors);
      return;
    }
    std::vector<Element> cell;
    for (Element v = 0; v < n_; ++v) {
      if (colors[v] == target) cell.push_back(v);
    }
    std::vector<Element> reps;
    for (auto v : cell) {
      bool dup = false;
      for (auto r : reps) {
        if (twins(r, v)) {
          dup = true;
          break;
        }
      }
      if (!dup) reps.push_back(v);
    }
    for (auto v : reps) {
      std::vector<int> next(n_);
      for (Element x = 0; x < n_; ++x) {
        next[x] = 2 * colors[x] + ((colors[x] == target && x != v) ? 1 : 0);
      }
      next = rank(next);
      refine(next);
      search(next);
    }
  }

  void leaf(const std::vector<int>& colors) {
    Certificate cert(s_.vocabulary().size());
    for (std::size_t sym = 0; sym < cert.size(); ++sym) {
      for (const auto& t : s_.relation(sym)) {
        Tuple u;
        u.reserve(t.size());
        for (auto x : t) u.push_back(static_cast<Element>(colors[x]));
        cert[sym].push_back(std::move(u));
      }
      std::sort(cert[sym].begin(), cert[sym].end());
    }
    if (!have_best_ || cert < best_) {
      best_ = std::move(cert);
      have_best_ = true;
      best_order_.assign(n_, 0);
      for (Element x = 0; x < n_; ++x) best_order_[static_cast<std::size_t>(colors[x])] = x;
    }
  }

  std::string encode() const {
    std::string key = s_.vocabulary().signature();
    key += '|';
    key += std::to_string(n_);
    for (std::size_t sym = 0; sym < s_.vocabulary().size(); ++sym) {
      key += '|';
      key += s_.vocabulary()[sym].name;
      key += ':';
      bool first = true;
      for (const auto& t : have_best_ ? best_[sym] : Relation{}) {
        if (!first) key += ';';
        first = false;
        for (std::size_t i = 0; i < t.size(); ++i) {
          if (i) key += ',';
          key += std::to_string(t[i]);
        }
      }
    }
    return key;
  }

  const Structure& s_;
  std::size_t n_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> incidence_;
  std::vector<int> colors_;
  Certificate best_;
  bool have_best_ = false;
  std::vector<Element> best_order_;
};

}  // namespace detail

/// Canonical labeling by colour refinement and individualization, pruning
/// interchangeable (twin) elements. `initial_colors`, if given, must be an
/// isomorphism-invariant colouring; elements keep their relative colour order.
///
/// Key format: `<signature>|<size>|<sym>:<t1>;<t2>...|...`, tuples written
/// as comma-separated canonical positions. The empty structure over `E/2`
/// has key `E/2|0|E:`.
inline CanonicalLabeling canonical_labeling(const Structure& s,
                                            std::vector<int> initial_colors = {}) {
  if (!initial_colors.empty() && initial_colors.size() != s.size()) {
    throw ValidationError("initial colouring has wrong length");
  }
  detail::CanonicalSearch search(s, std::move(initial_colors));
  return search.run();
}

inline std::string canonical_form(const Structure& s) { return canonical_labeling(s).key; }

/// `s` relabeled into canonical order (names kept).
inline Structure canonical_representative(const Structure& s) {
  return permuted(s, canonical_labeling(s).order);
}

}  // namespace mtk
