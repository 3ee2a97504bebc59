#pragma once

// Line-based structure files.
//
//   file       := { line }
//   line       := blank | comment | vocab | partition | sort | block
//   comment    := '#' ... end of line (also allowed after any line)
//   vocab      := "vocab" { NAME '/' ARITY }          (once, before any block)
//   partition  := "partition" NAME NAME               (two unary symbols)
//   sort       := "sort" NAME { NAME | '*' }           (one entry per position)
//   block      := "structure" ID
//                 "domain" { ID }
//                 { "rel" NAME { TUPLE } }
//                 "end"
//   TUPLE      := '(' ID { ',' ID } ')'                (no spaces inside)
//
// Tokens are whitespace separated. IDs may not contain '(', ')', ',' or '#'.
// A symbol without a `rel` line is empty; a symbol may have several `rel`
// lines whose tuples are merged.
//
// The normalized form written by emit_structures() is: the vocab line, the
// partition line, sort lines in symbol order, then for each structure a blank
// line followed by its block with one `rel` line per symbol (vocabulary
// order, tuples sorted by element position). Parsing a normalized file and
// emitting it again reproduces it byte for byte.

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mtk/core/error.hpp"
#include "mtk/core/structure.hpp"

namespace mtk {

struct NamedStructure {
  std::string id;
  Structure structure;
};

struct StructureFile {
  Vocabulary vocabulary;
  std::vector<NamedStructure> structures;
};

namespace detail {

struct Token {
  std::string text;
  std::size_t column;
};

inline std::vector<Token> tokenize_line(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' &&
           line[j] != '#') {
      ++j;
    }
    out.push_back({line.substr(i, j - i), i + 1});
    i = j;
  }
  return out;
}

inline bool valid_id(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c == '(' || c == ')' || c == ',' || c == '#' || c == ' ' || c == '\t') return false;
  }
  return true;
}

}  // namespace detail

inline StructureFile parse_structures(const std::string& text) {
  StructureFile out;
  bool have_vocab = false;
  bool in_block = false;
  std::string id;
  std::vector<std::string> domain;
  bool have_domain = false;
  std::vector<std::pair<std::string, std::vector<std::string>>> tuples;
  std::vector<std::pair<std::size_t, std::size_t>> tuple_pos;
  std::vector<std::pair<std::string, std::string>> partition;
  std::vector<std::pair<std::string, std::vector<std::string>>> sorts;

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what, std::size_t col) -> void {
    throw ParseError(what, lineno, col);
  };
  auto finish_vocab = [&]() {
    for (auto& [a, b] : partition) out.vocabulary.with_partition(a, b);
    for (auto& [s, p] : sorts) out.vocabulary.with_sorts(s, p);
    partition.clear();
    sorts.clear();
  };
  bool vocab_finished = false;

  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::tokenize_line(line);
    if (toks.empty()) continue;
    const auto& kw = toks[0].text;
    if (!in_block) {
      if (kw == "vocab") {
        if (have_vocab) fail("second vocab line", toks[0].column);
        std::vector<Symbol> syms;
        for (std::size_t i = 1; i < toks.size(); ++i) {
          auto slash = toks[i].text.rfind('/');
          if (slash == std::string::npos || slash == 0) {
            fail("expected NAME/ARITY, got '" + toks[i].text + "'", toks[i].column);
          }
          std::size_t arity = 0;
          try {
            std::size_t used = 0;
            arity = std::stoul(toks[i].text.substr(slash + 1), &used);
            if (used != toks[i].text.size() - slash - 1) throw std::invalid_argument("");
          } catch (const std::exception&) {
            fail("bad arity in '" + toks[i].text + "'", toks[i].column);
          }
          syms.push_back({toks[i].text.substr(0, slash), arity});
        }
        try {
          out.vocabulary = Vocabulary(std::move(syms));
        } catch (const ValidationError& e) {
          fail(e.what(), toks[0].column);
        }
        have_vocab = true;
      } else if (kw == "partition") {
        if (!have_vocab || vocab_finished) fail("partition must follow the vocab line", 1);
        if (toks.size() != 3) fail("partition needs two symbols", toks[0].column);
        partition.emplace_back(toks[1].text, toks[2].text);
      } else if (kw == "sort") {
        if (!have_vocab || vocab_finished) fail("sort must follow the vocab line", 1);
        if (toks.size() < 2) fail("sort needs a symbol", toks[0].column);
        std::vector<std::string> pattern;
        for (std::size_t i = 2; i < toks.size(); ++i) pattern.push_back(toks[i].text);
        sorts.emplace_back(toks[1].text, pattern);
      } else if (kw == "structure") {
        if (!have_vocab) fail("structure before vocab line", toks[0].column);
        if (!vocab_finished) {
          try {
            finish_vocab();
          } catch (const Error& e) {
            fail(e.what(), 1);
          }
          vocab_finished = true;
        }
        if (toks.size() != 2 || !detail::valid_id(toks[1].text)) {
          fail("structure needs one identifier", toks[0].column);
        }
        in_block = true;
        id = toks[1].text;
        domain.clear();
        tuples.clear();
        tuple_pos.clear();
        have_domain = false;
      } else {
        fail("unexpected '" + kw + "'", toks[0].column);
      }
      continue;
    }
    if (kw == "domain") {
      if (have_domain) fail("second domain line", toks[0].column);
      have_domain = true;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (!detail::valid_id(toks[i].text)) fail("bad element id", toks[i].column);
        domain.push_back(toks[i].text);
      }
    } else if (kw == "rel") {
      if (!have_domain) fail("rel before domain", toks[0].column);
      if (toks.size() < 2) fail("rel needs a symbol", toks[0].column);
      if (!out.vocabulary.find(toks[1].text)) {
        fail("unknown symbol " + toks[1].text, toks[1].column);
      }
      for (std::size_t i = 2; i < toks.size(); ++i) {
        const auto& t = toks[i].text;
        if (t.size() < 2 || t.front() != '(' || t.back() != ')') {
          fail("expected (e1,e2,...), got '" + t + "'", toks[i].column);
        }
        std::vector<std::string> elems;
        std::string cur;
        for (std::size_t k = 1; k + 1 < t.size(); ++k) {
          if (t[k] == ',') {
            elems.push_back(cur);
            cur.clear();
          } else {
            cur += t[k];
          }
        }
        elems.push_back(cur);
        for (const auto& e : elems) {
          if (!detail::valid_id(e)) fail("bad element id in '" + t + "'", toks[i].column);
        }
        tuples.emplace_back(toks[1].text, std::move(elems));
        tuple_pos.emplace_back(lineno, toks[i].column);
      }
    } else if (kw == "end") {
      if (!have_domain) fail("structure without domain", toks[0].column);
      StructureBuilder b(out.vocabulary);
      for (const auto& d : domain) {
        try {
          b.add_element(d);
        } catch (const ValidationError& e) {
          fail(e.what(), 1);
        }
      }
      for (std::size_t i = 0; i < tuples.size(); ++i) {
        try {
          b.add_named(tuples[i].first, tuples[i].second);
        } catch (const ValidationError& e) {
          throw ParseError(e.what(), tuple_pos[i].first, tuple_pos[i].second);
        }
      }
      try {
        out.structures.push_back({id, b.build()});
      } catch (const ValidationError& e) {
        fail(std::string(e.what()) + " in structure " + id, toks[0].column);
      }
      in_block = false;
    } else {
      fail("unexpected '" + kw + "' inside structure block", toks[0].column);
    }
  }
  if (in_block) throw ParseError("missing end for structure " + id, lineno, 1);
  if (have_vocab && !vocab_finished) {
    try {
      finish_vocab();
    } catch (const Error& e) {
      throw ParseError(e.what(), lineno, 1);
    }
  }
  return out;
}

inline std::string emit_vocabulary_header(const Vocabulary& v) {
  std::string out = "vocab";
  for (const auto& s : v.symbols()) out += " " + s.name + "/" + std::to_string(s.arity);
  out += "\n";
  if (auto p = v.partition()) out += "partition " + v[p->first].name + " " + v[p->second].name + "\n";
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& pat = v.sorts(i);
    if (pat.empty()) continue;
    out += "sort " + v[i].name;
    for (const auto& u : pat) out += " " + (u ? v[*u].name : std::string("*"));
    out += "\n";
  }
  return out;
}

inline std::string emit_structure_block(const std::string& id, const Structure& s) {
  std::string out = "structure " + id + "\ndomain";
  for (const auto& n : s.names()) out += " " + n;
  out += "\n";
  for (std::size_t sym = 0; sym < s.vocabulary().size(); ++sym) {
    out += "rel " + s.vocabulary()[sym].name;
    for (const auto& t : s.relation(sym)) {
      out += " (";
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) out += ",";
        out += s.name(t[i]);
      }
      out += ")";
    }
    out += "\n";
  }
  out += "end\n";
  return out;
}

inline std::string emit_structures(const StructureFile& f) {
  std::string out = emit_vocabulary_header(f.vocabulary);
  for (const auto& ns : f.structures) {
    if (!(ns.structure.vocabulary() == f.vocabulary)) {
      throw VocabularyMismatch("structure " + ns.id + " does not use the file vocabulary");
    }
    out += "\n" + emit_structure_block(ns.id, ns.structure);
  }
  return out;
}

inline std::string emit_structure(const std::string& id, const Structure& s) {
  return emit_structures(StructureFile{s.vocabulary(), {{id, s}}});
}

}  // namespace mtk
