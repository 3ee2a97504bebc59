#pragma once

#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "mtk/core/vocabulary.hpp"

namespace mtk {

// Fixed symbol positions in the target language.
inline constexpr std::size_t kP = 0, kQ = 1, kLam = 2, kRho = 3, kH = 4, kS = 5;

/// L = {P, Q, lam, rho, H, S}: P/Q partition the domain, lam, rho and H live
/// on Q, S on (P, Q, P, Q).
inline Vocabulary target_language() {
  Vocabulary v{{"P", 1}, {"Q", 1}, {"lam", 1}, {"rho", 1}, {"H", 2}, {"S", 4}};
  v.with_partition("P", "Q")
      .with_sorts("lam", {"Q"})
      .with_sorts("rho", {"Q"})
      .with_sorts("H", {"Q", "Q"})
      .with_sorts("S", {"P", "Q", "P", "Q"});
  return v;
}

inline bool is_target_symbol(const std::string& name) {
  return name == "P" || name == "Q" || name == "lam" || name == "rho" || name == "H" ||
         name == "S";
}

/// Relation indices n of the L0 symbols, in symbol order. A symbol named
/// `R<k>` has index k; any other symbol takes max(arity, previous index + 1).
/// Indices must strictly increase and be at least the arity (so an n-pair of
/// arity m <= n can label a tuple of R_n).
inline std::vector<std::size_t> relation_indices(const Vocabulary& l0) {
  std::vector<std::size_t> out;
  std::size_t prev = 0;
  for (const auto& s : l0.symbols()) {
    std::size_t n = 0;
    if (s.name.size() > 1 && s.name[0] == 'R' &&
        s.name.find_first_not_of("0123456789", 1) == std::string::npos) {
      n = std::strtoul(s.name.c_str() + 1, nullptr, 10);
    } else {
      n = std::max(s.arity, prev + 1);
    }
    if (n < s.arity) {
      throw ValidationError("symbol " + s.name + " has arity " + std::to_string(s.arity) +
                            " above its index " + std::to_string(n));
    }
    if (n <= prev && !out.empty()) {
      throw ValidationError("relation indices must increase (" + s.name + ")");
    }
    out.push_back(n);
    prev = n;
  }
  return out;
}

/// The L0 symbol with relation index n, if any.
inline std::optional<std::size_t> symbol_with_index(const Vocabulary& l0, std::size_t n) {
  auto idx = relation_indices(l0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] == n) return i;
  }
  return std::nullopt;
}

/// L followed by L0, every L0 position sorted to P.
inline Vocabulary combined_vocabulary(const Vocabulary& l0) {
  for (const auto& s : l0.symbols()) {
    if (is_target_symbol(s.name)) {
      throw VocabularyMismatch("L0 symbol " + s.name + " clashes with the target language");
    }
  }
  relation_indices(l0);
  Vocabulary v = target_language().extended(l0);
  for (const auto& s : l0.symbols()) v.with_sorts(s.name, std::vector<std::string>(s.arity, "P"));
  return v;
}

/// The L0 part of a combined vocabulary (symbols outside L, annotations dropped).
inline Vocabulary l0_part(const Vocabulary& v) {
  std::vector<Symbol> syms;
  for (const auto& s : v.symbols()) {
    if (!is_target_symbol(s.name)) syms.push_back(s);
  }
  return Vocabulary(syms);
}

}  // namespace mtk
