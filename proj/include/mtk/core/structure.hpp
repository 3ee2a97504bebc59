#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mtk/core/error.hpp"
#include "mtk/core/vocabulary.hpp"

namespace mtk {

using Element = std::uint32_t;
using Tuple = std::vector<Element>;
/// Sorted, duplicate-free tuple list.
using Relation = std::vector<Tuple>;

/// A finite relational structure. Elements are 0..size()-1 in declaration
/// order and carry opaque string names. Every vocabulary symbol has a
/// relation, possibly empty.
class Structure {
 public:
  Structure() = default;
  explicit Structure(Vocabulary vocab) : vocab_(std::move(vocab)), relations_(vocab_.size()) {}

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(Element e) const { return names_.at(e); }
  std::optional<Element> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const Relation& relation(std::size_t symbol) const { return relations_.at(symbol); }
  const Relation& relation(std::string_view symbol) const {
    return relations_.at(vocab_.index_of(symbol));
  }

  bool holds(std::size_t symbol, std::span<const Element> tuple) const {
    const auto& r = relations_[symbol];
    return std::binary_search(r.begin(), r.end(), tuple, [](const auto& a, const auto& b) {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
  }
  bool holds(std::size_t symbol, std::initializer_list<Element> tuple) const {
    return holds(symbol, std::span<const Element>(tuple.begin(), tuple.size()));
  }
  bool holds(std::string_view symbol, std::initializer_list<Element> tuple) const {
    return holds(vocab_.index_of(symbol), tuple);
  }

  /// Total number of tuples across all relations.
  std::size_t atom_count() const {
    std::size_t n = 0;
    for (const auto& r : relations_) n += r.size();
    return n;
  }

  /// Exact equality: vocabulary, element names and order, relations.
  bool operator==(const Structure& o) const {
    return vocab_ == o.vocab_ && names_ == o.names_ && relations_ == o.relations_;
  }

 private:
  friend class StructureBuilder;

  Vocabulary vocab_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, Element> index_;
  std::vector<Relation> relations_;
};

/// Accumulates elements and tuples; build() validates and freezes.
class StructureBuilder {
 public:
  explicit StructureBuilder(Vocabulary vocab) : s_(std::move(vocab)) {}
  explicit StructureBuilder(const Structure& base) : s_(base) {}

  const Vocabulary& vocabulary() const noexcept { return s_.vocab_; }
  std::size_t size() const noexcept { return s_.names_.size(); }
  const std::vector<std::string>& names() const noexcept { return s_.names_; }

  Element add_element(std::string name) {
    if (name.empty()) throw ValidationError("empty element name");
    if (s_.index_.count(name)) throw ValidationError("duplicate element " + name);
    auto e = static_cast<Element>(s_.names_.size());
    s_.index_.emplace(name, e);
    s_.names_.push_back(std::move(name));
    return e;
  }

  /// Adds a fresh element whose name starts with `stem` and avoids clashes.
  Element add_fresh_element(std::string_view stem) {
    std::size_t k = s_.names_.size();
    std::string candidate;
    do {
      candidate = std::string(stem) + std::to_string(k++);
    } while (s_.index_.count(candidate));
    return add_element(candidate);
  }

  std::optional<Element> find(std::string_view name) const { return s_.find(name); }

  StructureBuilder& add(std::size_t symbol, Tuple tuple) {
    pending_.emplace_back(symbol, std::move(tuple));
    return *this;
  }
  StructureBuilder& add(std::string_view symbol, Tuple tuple) {
    return add(s_.vocab_.index_of(symbol), std::move(tuple));
  }
  /// Tuple given by element names; unknown names are a validation error.
  StructureBuilder& add_named(std::string_view symbol, const std::vector<std::string>& names) {
    auto sym = s_.vocab_.find(symbol);
    if (!sym) throw ValidationError("unknown symbol " + std::string(symbol));
    Tuple t;
    for (const auto& n : names) {
      auto e = s_.find(n);
      if (!e) throw ValidationError("unknown element " + n);
      t.push_back(*e);
    }
    return add(*sym, std::move(t));
  }

  /// Removes a tuple that is already part of the base structure or pending.
  StructureBuilder& remove(std::size_t symbol, const Tuple& tuple) {
    flush();
    auto& r = s_.relations_.at(symbol);
    auto it = std::lower_bound(r.begin(), r.end(), tuple);
    if (it != r.end() && *it == tuple) r.erase(it);
    return *this;
  }

  /// Validates every invariant; throws ValidationError naming the culprit.
  Structure build() {
    flush();
    validate(s_);
    return s_;
  }

  /// Skips validation; for internal producers that maintain invariants.
  Structure build_unchecked() {
    flush();
    return s_;
  }

  static void validate(const Structure& s) {
    const auto& v = s.vocab_;
    const auto n = static_cast<Element>(s.size());
    for (std::size_t sym = 0; sym < v.size(); ++sym) {
      for (const auto& t : s.relations_[sym]) {
        if (t.size() != v[sym].arity) {
          throw ValidationError("arity mismatch for " + v[sym].name + ": tuple of length " +
                                std::to_string(t.size()) + ", expected " +
                                std::to_string(v[sym].arity));
        }
        for (auto e : t) {
          if (e >= n) throw ValidationError("unknown element index " + std::to_string(e));
        }
      }
    }
    if (auto p = v.partition()) {
      for (Element e = 0; e < n; ++e) {
        const bool a = s.holds(p->first, {e});
        const bool b = s.holds(p->second, {e});
        if (a && b) {
          throw ValidationError("partition violation: " + s.name(e) + " is in both " +
                                v[p->first].name + " and " + v[p->second].name);
        }
        if (!a && !b) {
          throw ValidationError("partition violation: " + s.name(e) + " is in neither " +
                                v[p->first].name + " nor " + v[p->second].name);
        }
      }
    }
    for (std::size_t sym = 0; sym < v.size(); ++sym) {
      const auto& pattern = v.sorts(sym);
      if (pattern.empty()) continue;
      for (const auto& t : s.relations_[sym]) {
        for (std::size_t i = 0; i < t.size(); ++i) {
          if (pattern[i] && !s.holds(*pattern[i], {t[i]})) {
            throw ValidationError("sort violation: " + v[sym].name + " position " +
                                  std::to_string(i) + " requires " + v[*pattern[i]].name +
                                  " but " + s.name(t[i]) + " is not");
          }
        }
      }
    }
  }

 private:
  void flush() {
    if (pending_.empty()) return;
    for (auto& [sym, t] : pending_) {
      if (sym >= s_.relations_.size()) throw ValidationError("unknown symbol index");
      if (t.size() != s_.vocab_[sym].arity) {
        throw ValidationError("arity mismatch for " + s_.vocab_[sym].name + ": tuple of length " +
                              std::to_string(t.size()) + ", expected " +
                              std::to_string(s_.vocab_[sym].arity));
      }
      s_.relations_[sym].push_back(std::move(t));
    }
    pending_.clear();
    for (auto& r : s_.relations_) {
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
    }
  }

  Structure s_;
  std::vector<std::pair<std::size_t, Tuple>> pending_;
};

/// Builds and validates a structure from element names and named tuples.
inline Structure build_structure(
    const Vocabulary& vocab, const std::vector<std::string>& domain,
    const std::map<std::string, std::vector<std::vector<std::string>>>& tuples) {
  StructureBuilder b(vocab);
  for (const auto& d : domain) b.add_element(d);
  for (const auto& [sym, list] : tuples) {
    auto si = vocab.find(sym);
    if (!si) throw ValidationError("unknown symbol " + sym);
    for (const auto& t : list) {
      if (t.size() != vocab[*si].arity) {
        throw ValidationError("arity mismatch for " + sym + ": tuple of length " +
                              std::to_string(t.size()) + ", expected " +
                              std::to_string(vocab[*si].arity));
      }
      b.add_named(sym, t);
    }
  }
  return b.build();
}

/// Restriction to `subset` (element indices); keeps the original element order.
inline Structure induced_substructure(const Structure& s, std::vector<Element> subset) {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  std::vector<std::int64_t> remap(s.size(), -1);
  StructureBuilder b(s.vocabulary());
  for (auto e : subset) {
    if (e >= s.size()) throw ValidationError("element index outside domain");
    remap[e] = b.add_element(s.name(e));
  }
  for (std::size_t sym = 0; sym < s.vocabulary().size(); ++sym) {
    for (const auto& t : s.relation(sym)) {
      Tuple u;
      u.reserve(t.size());
      bool inside = true;
      for (auto e : t) {
        if (remap[e] < 0) {
          inside = false;
          break;
        }
        u.push_back(static_cast<Element>(remap[e]));
      }
      if (inside) b.add(sym, std::move(u));
    }
  }
  return b.build_unchecked();
}

/// Restriction to the named elements; unknown names are an error.
inline Structure induced_substructure(const Structure& s, const std::vector<std::string>& names) {
  std::vector<Element> subset;
  for (const auto& n : names) {
    auto e = s.find(n);
    if (!e) throw ValidationError("element outside domain: " + n);
    subset.push_back(*e);
  }
  return induced_substructure(s, std::move(subset));
}

/// Restriction of `s` to the symbols of `target` (matched by name and arity).
inline Structure reduct(const Structure& s, const Vocabulary& target) {
  StructureBuilder b(target);
  for (const auto& n : s.names()) b.add_element(n);
  for (std::size_t sym = 0; sym < target.size(); ++sym) {
    auto src = s.vocabulary().find(target[sym].name);
    if (!src || s.vocabulary()[*src].arity != target[sym].arity) {
      throw VocabularyMismatch("reduct target symbol " + target[sym].name + " missing in source");
    }
    for (const auto& t : s.relation(*src)) b.add(sym, t);
  }
  return b.build_unchecked();
}

/// Same domain over `target`; symbols absent from `s` are interpreted as empty.
inline Structure expand(const Structure& s, const Vocabulary& target) {
  StructureBuilder b(target);
  for (const auto& n : s.names()) b.add_element(n);
  for (std::size_t sym = 0; sym < target.size(); ++sym) {
    auto src = s.vocabulary().find(target[sym].name);
    if (!src) continue;
    if (s.vocabulary()[*src].arity != target[sym].arity) {
      throw VocabularyMismatch("symbol " + target[sym].name + " changes arity");
    }
    for (const auto& t : s.relation(*src)) b.add(sym, t);
  }
  return b.build_unchecked();
}

/// Reorders the domain: new element i is old element order[i].
inline Structure permuted(const Structure& s, const std::vector<Element>& order,
                          const std::vector<std::string>* new_names = nullptr) {
  if (order.size() != s.size()) throw ValidationError("permutation size mismatch");
  std::vector<Element> inverse(s.size());
  StructureBuilder b(s.vocabulary());
  for (std::size_t i = 0; i < order.size(); ++i) {
    inverse.at(order[i]) = static_cast<Element>(i);
    b.add_element(new_names ? new_names->at(i) : s.name(order[i]));
  }
  for (std::size_t sym = 0; sym < s.vocabulary().size(); ++sym) {
    for (const auto& t : s.relation(sym)) {
      Tuple u;
      u.reserve(t.size());
      for (auto e : t) u.push_back(inverse[e]);
      b.add(sym, std::move(u));
    }
  }
  return b.build_unchecked();
}

/// Elements satisfying the unary symbol `symbol`, in domain order.
inline std::vector<Element> extension_of(const Structure& s, std::size_t symbol) {
  std::vector<Element> out;
  for (const auto& t : s.relation(symbol)) out.push_back(t[0]);
  return out;
}

}  // namespace mtk
