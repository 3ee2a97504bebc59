#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtk/core/error.hpp"

namespace mtk {

struct Symbol {
  std::string name;
  std::size_t arity = 1;

  bool operator==(const Symbol&) const = default;
};

/// Ordered list of relation symbols plus optional sort annotations.
///
/// A partition annotation names two unary symbols whose extensions must split
/// the domain. A sort annotation pins, for one symbol, which unary symbol each
/// argument position must satisfy (an empty entry leaves the position free).
class Vocabulary {
 public:
  using SortPattern = std::vector<std::optional<std::size_t>>;

  Vocabulary() = default;
  Vocabulary(std::initializer_list<Symbol> symbols) : Vocabulary(std::vector<Symbol>(symbols)) {}
  explicit Vocabulary(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (symbols_[i].arity == 0) {
        throw ValidationError("symbol " + symbols_[i].name + " has arity 0");
      }
      if (!valid_name(symbols_[i].name)) {
        throw ValidationError("bad symbol name '" + symbols_[i].name + "'");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (symbols_[j].name == symbols_[i].name) {
          throw ValidationError("duplicate symbol " + symbols_[i].name);
        }
      }
    }
    sorts_.assign(symbols_.size(), {});
  }

  static bool valid_name(std::string_view name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
      return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
             c == '_' || c == '*' || c == '-' || c == '.';
    });
  }

  const std::vector<Symbol>& symbols() const noexcept { return symbols_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  const Symbol& operator[](std::size_t i) const { return symbols_.at(i); }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (symbols_[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::size_t index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw VocabularyMismatch("unknown symbol " + std::string(name));
  }

  bool contains(const Symbol& s) const {
    auto i = find(s.name);
    return i && symbols_[*i].arity == s.arity;
  }

  std::size_t max_arity() const {
    std::size_t m = 0;
    for (const auto& s : symbols_) m = std::max(m, s.arity);
    return m;
  }

  /// Declares that the unary symbols `first` and `second` partition the domain.
  Vocabulary& with_partition(std::string_view first, std::string_view second) {
    if (partition_) throw ValidationError("vocabulary already has a partition annotation");
    auto a = index_of(first);
    auto b = index_of(second);
    if (symbols_[a].arity != 1 || symbols_[b].arity != 1 || a == b) {
      throw ValidationError("partition must name two distinct unary symbols");
    }
    partition_ = std::make_pair(a, b);
    return *this;
  }

  /// Pins argument positions of `symbol` to unary symbols ("" or "*" = free).
  Vocabulary& with_sorts(std::string_view symbol, const std::vector<std::string>& per_position) {
    auto s = index_of(symbol);
    if (per_position.size() != symbols_[s].arity) {
      throw ValidationError("sort pattern for " + std::string(symbol) + " has wrong length");
    }
    SortPattern pattern;
    for (const auto& u : per_position) {
      if (u.empty() || u == "*") {
        pattern.emplace_back();
        continue;
      }
      auto ui = index_of(u);
      if (symbols_[ui].arity != 1) throw ValidationError("sort " + u + " is not unary");
      pattern.emplace_back(ui);
    }
    sorts_[s] = std::move(pattern);
    return *this;
  }

  const std::optional<std::pair<std::size_t, std::size_t>>& partition() const noexcept {
    return partition_;
  }
  const SortPattern& sorts(std::size_t symbol) const { return sorts_.at(symbol); }
  bool has_annotations() const {
    return partition_ || std::any_of(sorts_.begin(), sorts_.end(),
                                     [](const SortPattern& p) { return !p.empty(); });
  }

  /// Symbols accepted by `keep`, carrying over annotations whose symbols survive.
  template <typename Pred>
  Vocabulary filter(Pred keep) const {
    std::vector<Symbol> kept;
    for (const auto& s : symbols_) {
      if (keep(s)) kept.push_back(s);
    }
    Vocabulary out(std::move(kept));
    if (partition_ && out.find(symbols_[partition_->first].name) &&
        out.find(symbols_[partition_->second].name)) {
      out.with_partition(symbols_[partition_->first].name, symbols_[partition_->second].name);
    }
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (sorts_[i].empty() || !out.find(symbols_[i].name)) continue;
      std::vector<std::string> names;
      bool ok = true;
      for (const auto& p : sorts_[i]) {
        if (!p) {
          names.emplace_back();
        } else if (out.find(symbols_[*p].name)) {
          names.push_back(symbols_[*p].name);
        } else {
          ok = false;
        }
      }
      if (ok) out.with_sorts(symbols_[i].name, names);
    }
    return out;
  }

  /// This vocabulary followed by the symbols of `other` not already present.
  Vocabulary extended(const Vocabulary& other) const {
    std::vector<Symbol> all = symbols_;
    for (const auto& s : other.symbols_) {
      if (auto i = find(s.name)) {
        if (symbols_[*i].arity != s.arity) {
          throw VocabularyMismatch("symbol " + s.name + " declared with two arities");
        }
        continue;
      }
      all.push_back(s);
    }
    Vocabulary out(std::move(all));
    out.copy_annotations_from(*this);
    out.copy_annotations_from(other);
    return out;
  }

  /// "E/2 P/1" - the symbol list only.
  std::string signature() const {
    std::string out;
    for (const auto& s : symbols_) {
      if (!out.empty()) out += ' ';
      out += s.name + "/" + std::to_string(s.arity);
    }
    return out;
  }

  bool operator==(const Vocabulary&) const = default;

 private:
  void copy_annotations_from(const Vocabulary& v) {
    if (v.partition_ && !partition_) {
      with_partition(v.symbols_[v.partition_->first].name, v.symbols_[v.partition_->second].name);
    }
    for (std::size_t i = 0; i < v.symbols_.size(); ++i) {
      if (v.sorts_[i].empty()) continue;
      std::vector<std::string> names;
      for (const auto& p : v.sorts_[i]) names.push_back(p ? v.symbols_[*p].name : std::string());
      sorts_[index_of(v.symbols_[i].name)].clear();
      with_sorts(v.symbols_[i].name, names);
    }
  }

  std::vector<Symbol> symbols_;
  std::optional<std::pair<std::size_t, std::size_t>> partition_;
  std::vector<SortPattern> sorts_;
};

}  // namespace mtk
