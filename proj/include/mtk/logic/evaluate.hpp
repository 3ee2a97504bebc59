#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtk/core/structure.hpp"
#include "mtk/logic/sentence.hpp"

namespace mtk {

struct EvaluationOptions {
  /// Refuse sentences whose full expansion exceeds this many assignments.
  std::uint64_t max_assignments = std::uint64_t{1} << 32;
};

namespace detail {

// Matrix with variables resolved to prefix slots and symbols to indices.
struct CompiledFormula {
  Formula::Kind kind;
  std::size_t symbol = 0;
  std::vector<std::size_t> slots;
  std::vector<CompiledFormula> children;
};

inline CompiledFormula compile(const Formula& f, const std::map<std::string, std::size_t>& slot,
                               const Vocabulary& vocab) {
  CompiledFormula c;
  c.kind = f.kind;
  if (f.kind == Formula::Kind::rel) {
    auto i = vocab.find(f.symbol);
    if (!i || vocab[*i].arity != f.vars.size()) {
      throw VocabularyMismatch("sentence uses " + f.symbol + "/" + std::to_string(f.vars.size()) +
                               ", not in [" + vocab.signature() + "]");
    }
    c.symbol = *i;
  }
  for (const auto& v : f.vars) {
    auto it = slot.find(v);
    if (it == slot.end()) throw ValidationError("unbound " + v);
    c.slots.push_back(it->second);
  }
  for (const auto& ch : f.children) c.children.push_back(compile(ch, slot, vocab));
  return c;
}

inline bool eval_matrix(const CompiledFormula& f, const Structure& s,
                        const std::vector<Element>& env, Tuple& scratch) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::rel:
      scratch.resize(f.slots.size());
      for (std::size_t i = 0; i < f.slots.size(); ++i) scratch[i] = env[f.slots[i]];
      return s.holds(f.symbol, scratch);
    case K::eq: return env[f.slots[0]] == env[f.slots[1]];
    case K::negation: return !eval_matrix(f.children[0], s, env, scratch);
    case K::conjunction:
      for (const auto& c : f.children) {
        if (!eval_matrix(c, s, env, scratch)) return false;
      }
      return true;
    case K::disjunction:
      for (const auto& c : f.children) {
        if (eval_matrix(c, s, env, scratch)) return true;
      }
      return false;
    case K::implication:
      return !eval_matrix(f.children[0], s, env, scratch) ||
             eval_matrix(f.children[1], s, env, scratch);
  }
  return false;
}

inline bool eval_prefix(const std::vector<QuantifiedVar>& prefix, std::size_t depth,
                        const CompiledFormula& m, const Structure& s, std::vector<Element>& env,
                        Tuple& scratch) {
  if (depth == prefix.size()) return eval_matrix(m, s, env, scratch);
  const bool universal = prefix[depth].q == Quantifier::forall;
  for (Element e = 0; e < s.size(); ++e) {
    env[depth] = e;
    if (eval_prefix(prefix, depth + 1, m, s, env, scratch) != universal) return !universal;
  }
  return universal;
}

}  // namespace detail

/// Tarskian truth of `phi` in `s` by exhaustive expansion. The structure may
/// carry extra symbols; every symbol of `phi` must occur with its arity.
inline bool evaluate(const Structure& s, const Sentence& phi, const EvaluationOptions& opt = {}) {
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < phi.prefix.size(); ++i) {
    if (!slot.emplace(phi.prefix[i].var, i).second) {
      throw ValidationError("variable " + phi.prefix[i].var + " bound twice");
    }
  }
  auto compiled = detail::compile(phi.matrix, slot, s.vocabulary());
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < phi.prefix.size() && s.size() > 1; ++i) {
    total *= s.size();
    if (total > opt.max_assignments) {
      throw ResourceLimit("evaluation needs more than " + std::to_string(opt.max_assignments) +
                          " assignments (" + std::to_string(phi.prefix.size()) +
                          " quantifiers over " + std::to_string(s.size()) + " elements)");
    }
  }
  std::vector<Element> env(phi.prefix.size(), 0);
  Tuple scratch;
  return detail::eval_prefix(phi.prefix, 0, compiled, s, env, scratch);
}

/// Truth of the matrix under an explicit assignment of the prefix variables.
inline bool evaluate_matrix(const Structure& s, const Sentence& phi,
                            const std::vector<Element>& assignment) {
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < phi.prefix.size(); ++i) slot.emplace(phi.prefix[i].var, i);
  auto compiled = detail::compile(phi.matrix, slot, s.vocabulary());
  Tuple scratch;
  return detail::eval_matrix(compiled, s, assignment, scratch);
}

}  // namespace mtk
