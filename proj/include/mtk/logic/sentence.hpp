#pragma once

// Prenex first-order sentences over relational vocabularies with equality.
//
// Concrete syntax (S-expressions, whitespace insensitive):
//
//   sentence := formula                      -- must be closed and prenex
//   formula  := '(' 'forall' '(' VAR+ ')' formula ')'
//             | '(' 'exists' '(' VAR+ ')' formula ')'
//             | '(' 'rel' SYMBOL VAR+ ')'
//             | '(' 'eq' VAR VAR ')'
//             | '(' 'not' formula ')'
//             | '(' 'and' formula* ')'       -- (and) is true
//             | '(' 'or' formula* ')'        -- (or) is false
//             | '(' 'implies' formula formula ')'
//
// Quantifier blocks may only appear at the top, before the first connective
// or atom. The emitter merges adjacent blocks of the same quantifier, so
// `(forall (x) (forall (y) ...))` is written as `(forall (x y) ...)`.
//
// Axiom files hold one sentence per line, optionally prefixed by a scheme tag
// `[a]` .. `[d]`.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mtk/core/error.hpp"
#include "mtk/core/vocabulary.hpp"

namespace mtk {

enum class Quantifier { forall, exists };

enum class Scheme { none, a, b, c, d };

inline char scheme_letter(Scheme s) {
  switch (s) {
    case Scheme::a: return 'a';
    case Scheme::b: return 'b';
    case Scheme::c: return 'c';
    case Scheme::d: return 'd';
    default: return '-';
  }
}

struct Formula {
  enum class Kind { rel, eq, negation, conjunction, disjunction, implication };

  Kind kind = Kind::conjunction;
  std::string symbol;              // rel only
  std::vector<std::string> vars;   // rel, eq
  std::vector<Formula> children;   // connectives

  bool operator==(const Formula&) const = default;

  static Formula rel(std::string sym, std::vector<std::string> args) {
    Formula f;
    f.kind = Kind::rel;
    f.symbol = std::move(sym);
    f.vars = std::move(args);
    return f;
  }
  static Formula eq(std::string x, std::string y) {
    Formula f;
    f.kind = Kind::eq;
    f.vars = {std::move(x), std::move(y)};
    return f;
  }
  static Formula negate(Formula g) {
    Formula f;
    f.kind = Kind::negation;
    f.children.push_back(std::move(g));
    return f;
  }
  static Formula all_of(std::vector<Formula> gs) {
    Formula f;
    f.kind = Kind::conjunction;
    f.children = std::move(gs);
    return f;
  }
  static Formula any_of(std::vector<Formula> gs) {
    Formula f;
    f.kind = Kind::disjunction;
    f.children = std::move(gs);
    return f;
  }
  static Formula implies(Formula a, Formula b) {
    Formula f;
    f.kind = Kind::implication;
    f.children.push_back(std::move(a));
    f.children.push_back(std::move(b));
    return f;
  }
  static Formula truth() { return all_of({}); }
  static Formula falsity() { return any_of({}); }
};

struct QuantifiedVar {
  Quantifier q;
  std::string var;

  bool operator==(const QuantifiedVar&) const = default;
};

struct Sentence {
  std::vector<QuantifiedVar> prefix;
  Formula matrix;
  Scheme scheme = Scheme::none;

  bool operator==(const Sentence&) const = default;

  std::size_t quantifier_count() const { return prefix.size(); }
};

namespace detail {

inline void collect_vars(const Formula& f, std::set<std::string>& out) {
  for (const auto& v : f.vars) out.insert(v);
  for (const auto& c : f.children) collect_vars(c, out);
}

inline void check_arities(const Formula& f, const Vocabulary& vocab) {
  if (f.kind == Formula::Kind::rel) {
    auto i = vocab.find(f.symbol);
    if (!i) throw ValidationError("unknown symbol " + f.symbol);
    if (vocab[*i].arity != f.vars.size()) {
      throw ValidationError("arity mismatch for " + f.symbol + ": " +
                            std::to_string(f.vars.size()) + " arguments, expected " +
                            std::to_string(vocab[*i].arity));
    }
  }
  for (const auto& c : f.children) check_arities(c, vocab);
}

inline void emit_formula(const Formula& f, std::string& out) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::rel:
      out += "(rel " + f.symbol;
      for (const auto& v : f.vars) out += " " + v;
      out += ")";
      return;
    case K::eq:
      out += "(eq " + f.vars[0] + " " + f.vars[1] + ")";
      return;
    case K::negation: out += "(not "; break;
    case K::conjunction: out += "(and"; break;
    case K::disjunction: out += "(or"; break;
    case K::implication: out += "(implies "; break;
  }
  for (std::size_t i = 0; i < f.children.size(); ++i) {
    if (i || f.kind == K::conjunction || f.kind == K::disjunction) out += " ";
    emit_formula(f.children[i], out);
  }
  out += ")";
}

}  // namespace detail

/// Checks the Sentence invariants: distinct prefix variables, closed matrix,
/// and (when `vocab` is given) symbol arities.
inline void validate_sentence(const Sentence& s, const Vocabulary* vocab = nullptr) {
  std::set<std::string> bound;
  for (const auto& qv : s.prefix) {
    if (!bound.insert(qv.var).second) throw ValidationError("variable " + qv.var + " bound twice");
  }
  std::set<std::string> used;
  detail::collect_vars(s.matrix, used);
  for (const auto& v : used) {
    if (!bound.count(v)) throw ValidationError("unbound " + v);
  }
  if (vocab) detail::check_arities(s.matrix, *vocab);
}

inline std::string emit_formula(const Formula& f) {
  std::string out;
  detail::emit_formula(f, out);
  return out;
}

inline std::string emit_sentence(const Sentence& s) {
  std::string out;
  std::size_t open = 0;
  for (std::size_t i = 0; i < s.prefix.size();) {
    std::size_t j = i;
    while (j < s.prefix.size() && s.prefix[j].q == s.prefix[i].q) ++j;
    out += s.prefix[i].q == Quantifier::forall ? "(forall (" : "(exists (";
    for (std::size_t k = i; k < j; ++k) {
      if (k > i) out += " ";
      out += s.prefix[k].var;
    }
    out += ") ";
    ++open;
    i = j;
  }
  detail::emit_formula(s.matrix, out);
  out.append(open, ')');
  return out;
}

/// `[c] (exists ...)` style line; untagged sentences are written bare.
inline std::string emit_tagged(const Sentence& s) {
  if (s.scheme == Scheme::none) return emit_sentence(s);
  return std::string("[") + scheme_letter(s.scheme) + "] " + emit_sentence(s);
}

/// The same sentence with every quantifier relativised to `unary`.
inline Sentence relativize(const Sentence& s, const std::string& unary = "P") {
  Sentence out = s;
  Formula m = s.matrix;
  for (std::size_t k = s.prefix.size(); k-- > 0;) {
    auto guard = Formula::rel(unary, {s.prefix[k].var});
    m = s.prefix[k].q == Quantifier::forall ? Formula::implies(std::move(guard), std::move(m))
                                            : Formula::all_of({std::move(guard), std::move(m)});
  }
  out.matrix = std::move(m);
  return out;
}

namespace detail {

class SentenceParser {
 public:
  SentenceParser(const std::string& text, std::size_t line) : text_(text), line_(line) {}

  Sentence parse() {
    Sentence s;
    parse_prefix(s);
    s.matrix = parse_matrix();
    skip();
    if (pos_ != text_.size()) fail("trailing input");
    return s;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, line_, pos_ + 1);
  }

  void skip() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  void expect(char c) {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool peek(char c) {
    skip();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  std::string word() {
    skip();
    std::size_t b = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           text_[pos_] != ' ' && text_[pos_] != '\t' && text_[pos_] != '\n' &&
           text_[pos_] != '\r') {
      ++pos_;
    }
    if (b == pos_) fail("expected a name");
    return text_.substr(b, pos_ - b);
  }

  // Reads the keyword after '(' without consuming it when it is not a quantifier.
  std::string peek_keyword() {
    std::size_t save = pos_;
    expect('(');
    std::string kw = word();
    pos_ = save;
    return kw;
  }

  void parse_prefix(Sentence& s) {
    while (peek('(')) {
      std::string kw = peek_keyword();
      if (kw != "forall" && kw != "exists") return;
      expect('(');
      word();
      Quantifier q = kw == "forall" ? Quantifier::forall : Quantifier::exists;
      expect('(');
      if (peek(')')) fail("empty variable list");
      while (!peek(')')) s.prefix.push_back({q, word()});
      expect(')');
      ++closers_;
    }
  }

  Formula parse_matrix() {
    Formula f = parse_formula();
    for (; closers_ > 0; --closers_) expect(')');
    return f;
  }

  Formula parse_formula() {
    expect('(');
    std::size_t kw_pos = pos_;
    std::string kw = word();
    Formula f;
    if (kw == "rel") {
      f.kind = Formula::Kind::rel;
      f.symbol = word();
      while (!peek(')')) f.vars.push_back(word());
      if (f.vars.empty()) fail("rel needs arguments");
    } else if (kw == "eq") {
      f.kind = Formula::Kind::eq;
      f.vars.push_back(word());
      f.vars.push_back(word());
    } else if (kw == "not") {
      f.kind = Formula::Kind::negation;
      f.children.push_back(parse_formula());
    } else if (kw == "and" || kw == "or") {
      f.kind = kw == "and" ? Formula::Kind::conjunction : Formula::Kind::disjunction;
      while (!peek(')')) f.children.push_back(parse_formula());
    } else if (kw == "implies") {
      f.kind = Formula::Kind::implication;
      f.children.push_back(parse_formula());
      f.children.push_back(parse_formula());
    } else if (kw == "forall" || kw == "exists") {
      pos_ = kw_pos;
      fail("quantifier inside the matrix (sentences must be prenex)");
    } else {
      pos_ = kw_pos;
      fail("unknown keyword '" + kw + "'");
    }
    expect(')');
    return f;
  }

  const std::string& text_;
  std::size_t line_;
  std::size_t pos_ = 0;
  std::size_t closers_ = 0;
};

}  // namespace detail

/// Parses one sentence. Structural errors are ParseError with a position;
/// unbound variables and arity mismatches are ParseError at column 1.
inline Sentence parse_sentence(const std::string& text, const Vocabulary* vocab = nullptr,
                               std::size_t line = 1) {
  Sentence s = detail::SentenceParser(text, line).parse();
  try {
    validate_sentence(s, vocab);
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), line, 1);
  }
  return s;
}

inline Sentence parse_sentence(const std::string& text, const Vocabulary& vocab) {
  return parse_sentence(text, &vocab);
}

/// Parses an axiom file: one sentence per line, `[a]`..`[d]` tags optional,
/// blank lines and `#` comment lines ignored.
inline std::vector<Sentence> parse_axiom_file(const std::string& text,
                                              const Vocabulary* vocab = nullptr) {
  std::vector<Sentence> out;
  std::size_t line = 0, b = 0;
  while (b <= text.size()) {
    std::size_t e = text.find('\n', b);
    if (e == std::string::npos) e = text.size();
    std::string l = text.substr(b, e - b);
    ++line;
    b = e + 1;
    std::size_t i = l.find_first_not_of(" \t\r");
    if (i == std::string::npos || l[i] == '#') {
      if (e == text.size()) break;
      continue;
    }
    Scheme tag = Scheme::none;
    if (l[i] == '[') {
      if (i + 2 >= l.size() || l[i + 2] != ']') throw ParseError("bad scheme tag", line, i + 1);
      switch (l[i + 1]) {
        case 'a': tag = Scheme::a; break;
        case 'b': tag = Scheme::b; break;
        case 'c': tag = Scheme::c; break;
        case 'd': tag = Scheme::d; break;
        default: throw ParseError("bad scheme tag", line, i + 2);
      }
      l.replace(0, i + 3, std::string(i + 3, ' '));
    }
    Sentence s = parse_sentence(l, vocab, line);
    s.scheme = tag;
    out.push_back(std::move(s));
    if (e == text.size()) break;
  }
  return out;
}

inline std::string emit_axiom_file(const std::vector<Sentence>& axioms) {
  std::string out;
  for (const auto& s : axioms) out += emit_tagged(s) + "\n";
  return out;
}

}  // namespace mtk
