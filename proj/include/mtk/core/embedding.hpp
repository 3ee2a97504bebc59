#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "mtk/core/structure.hpp"

namespace mtk {

/// An embedding given by the images of the source elements, in source order.
struct Embedding {
  std::vector<Element> image;

  bool operator==(const Embedding&) const = default;
  auto operator<=>(const Embedding&) const = default;
};

struct EmbeddingQuery {
  bool iso_only = false;
  /// Optional pre-assigned images (same length as the source); unset entries are free.
  std::vector<std::optional<Element>> fixed;
  /// Stop after this many results (0 = all).
  std::size_t limit = 0;
};

namespace detail {

inline void require_same_vocabulary(const Structure& a, const Structure& b) {
  if (!(a.vocabulary() == b.vocabulary())) {
    throw VocabularyMismatch("vocabulary mismatch: [" + a.vocabulary().signature() + "] vs [" +
                             b.vocabulary().signature() + "]");
  }
}

// Backtracking search assigning source elements in order. Preservation is
// checked on source tuples whose largest coordinate was just assigned;
// reflection by comparing, per symbol, the number of target tuples inside the
// image that mention the new image point with the number of source tuples
// that mention the new point. Injectivity makes equal counts equivalent to
// reflection.
class EmbeddingSearch {
 public:
  EmbeddingSearch(const Structure& a, const Structure& b) : a_(a), b_(b) {
    const auto syms = a.vocabulary().size();
    by_max_.assign(a.size(), {});
    for (std::size_t sym = 0; sym < syms; ++sym) {
      for (const auto& t : a.relation(sym)) {
        Element m = 0;
        for (auto x : t) m = std::max(m, x);
        by_max_[m].emplace_back(sym, &t);
      }
    }
    a_count_.assign(a.size(), std::vector<std::size_t>(syms, 0));
    for (Element v = 0; v < a.size(); ++v) {
      for (auto& [sym, t] : by_max_[v]) ++a_count_[v][sym];
    }
    b_incident_.assign(b.size(), {});
    for (std::size_t sym = 0; sym < syms; ++sym) {
      for (const auto& t : b.relation(sym)) {
        for (std::size_t p = 0; p < t.size(); ++p) {
          bool first = true;
          for (std::size_t q = 0; q < p; ++q) {
            if (t[q] == t[p]) first = false;
          }
          if (first) b_incident_[t[p]].emplace_back(sym, &t);
        }
      }
    }
  }

  void run(const EmbeddingQuery& q, const std::function<bool(const Embedding&)>& emit) {
    if (q.iso_only && a_.size() != b_.size()) return;
    if (a_.size() > b_.size()) return;
    if (!q.fixed.empty() && q.fixed.size() != a_.size()) {
      throw ValidationError("fixed map has wrong length");
    }
    fixed_ = q.fixed;
    image_.assign(a_.size(), 0);
    used_.assign(b_.size(), false);
    stop_ = false;
    emit_ = &emit;
    assign(0);
  }

 private:
  bool consistent(Element v) {
    Tuple mapped;
    for (auto& [sym, t] : by_max_[v]) {
      mapped.clear();
      for (auto x : *t) mapped.push_back(image_[x]);
      if (!b_.holds(sym, mapped)) return false;
    }
    const Element w = image_[v];
    std::vector<std::size_t> cnt(a_.vocabulary().size(), 0);
    for (auto& [sym, t] : b_incident_[w]) {
      bool inside = true;
      for (auto x : *t) {
        if (!used_[x]) {
          inside = false;
          break;
        }
      }
      if (inside) ++cnt[sym];
    }
    return cnt == a_count_[v];
  }

  void assign(Element v) {
    if (stop_) return;
    if (v == a_.size()) {
      if (!(*emit_)(Embedding{image_})) stop_ = true;
      return;
    }
    auto try_one = [&](Element w) {
      if (used_[w]) return;
      image_[v] = w;
      used_[w] = true;
      if (consistent(v)) assign(v + 1);
      used_[w] = false;
    };
    if (!fixed_.empty() && fixed_[v]) {
      if (*fixed_[v] < b_.size()) try_one(*fixed_[v]);
      return;
    }
    for (Element w = 0; w < b_.size() && !stop_; ++w) try_one(w);
  }

  const Structure& a_;
  const Structure& b_;
  std::vector<std::vector<std::pair<std::size_t, const Tuple*>>> by_max_;
  std::vector<std::vector<std::size_t>> a_count_;
  std::vector<std::vector<std::pair<std::size_t, const Tuple*>>> b_incident_;
  std::vector<std::optional<Element>> fixed_;
  std::vector<Element> image_;
  std::vector<bool> used_;
  bool stop_ = false;
  const std::function<bool(const Embedding&)>* emit_ = nullptr;
};

}  // namespace detail

/// Calls `visit` for each embedding of `a` into `b` in lexicographic order of
/// images; `visit` returns false to stop early.
inline void for_each_embedding(const Structure& a, const Structure& b, const EmbeddingQuery& q,
                               const std::function<bool(const Embedding&)>& visit) {
  detail::require_same_vocabulary(a, b);
  detail::EmbeddingSearch search(a, b);
  search.run(q, visit);
}

/// Every embedding of `a` into `b` (isomorphisms only with `iso_only`).
inline std::vector<Embedding> enumerate_embeddings(const Structure& a, const Structure& b,
                                                   bool iso_only = false) {
  std::vector<Embedding> out;
  EmbeddingQuery q;
  q.iso_only = iso_only;
  for_each_embedding(a, b, q, [&](const Embedding& e) {
    out.push_back(e);
    return true;
  });
  return out;
}

inline std::vector<Embedding> enumerate_embeddings(const Structure& a, const Structure& b,
                                                   const EmbeddingQuery& q) {
  std::vector<Embedding> out;
  for_each_embedding(a, b, q, [&](const Embedding& e) {
    out.push_back(e);
    return q.limit == 0 || out.size() < q.limit;
  });
  return out;
}

inline std::optional<Embedding> find_embedding(const Structure& a, const Structure& b,
                                               EmbeddingQuery q = {}) {
  std::optional<Embedding> found;
  for_each_embedding(a, b, q, [&](const Embedding& e) {
    found = e;
    return false;
  });
  return found;
}

inline bool is_isomorphic(const Structure& a, const Structure& b) {
  if (!(a.vocabulary() == b.vocabulary()) || a.size() != b.size()) return false;
  EmbeddingQuery q;
  q.iso_only = true;
  return find_embedding(a, b, q).has_value();
}

/// Direct check that `e` is an embedding (injective, preserves and reflects).
inline bool is_embedding(const Structure& a, const Structure& b, const Embedding& e) {
  if (e.image.size() != a.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (auto w : e.image) {
    if (w >= b.size() || used[w]) return false;
    used[w] = true;
  }
  for (std::size_t sym = 0; sym < a.vocabulary().size(); ++sym) {
    for (const auto& t : a.relation(sym)) {
      Tuple u;
      for (auto x : t) u.push_back(e.image[x]);
      if (!b.holds(sym, u)) return false;
    }
    std::vector<std::optional<Element>> back(b.size());
    for (Element x = 0; x < a.size(); ++x) back[e.image[x]] = x;
    for (const auto& t : b.relation(sym)) {
      Tuple u;
      bool inside = true;
      for (auto y : t) {
        if (!back[y]) {
          inside = false;
          break;
        }
        u.push_back(*back[y]);
      }
      if (inside && !a.holds(sym, u)) return false;
    }
  }
  return true;
}

}  // namespace mtk
