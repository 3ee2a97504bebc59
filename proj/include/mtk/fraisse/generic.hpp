#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mtk/fraisse/properties.hpp"

namespace mtk {

/// One-point extension demand: every copy of `a` in U must extend to `b`
/// (b's first |a| elements are a, its last element is new).
struct Demand {
  Structure a;
  Structure b;
  std::string key;  // canonical key of b, then relative key of (a, b)
};

struct UnmetDemand {
  std::size_t demand = 0;           // index into the demand list
  std::vector<Element> embedding;   // copy of a in U that does not extend
};

struct GenericApproximation {
  std::string class_name;
  std::size_t level = 0;
  Structure structure;
  bool saturated = false;
  std::vector<std::string> log;
  std::vector<std::string> unmet;
  std::string note;
};

struct GenericOptions {
  std::size_t size_cap = 24;
  /// Starting structure (a member); empty structure when unset.
  std::optional<Structure> seed;
  /// 0 keeps canonical demand order; other values shuffle it reproducibly.
  std::uint64_t demand_seed = 0;
  /// Demand indices (in canonical order) to leave unsatisfied and unchecked.
  std::set<std::size_t> skip;
};

/// All one-point demands with |B| <= level, sorted by (key of B, key of A).
inline std::vector<Demand> extension_demands(const AgeClass& k, std::size_t level) {
  std::vector<Demand> out;
  if (level == 0) return out;
  for (const auto& a : enumerate_age_upto(k, level - 1)) {
    for (auto& b : relative_extensions(k, a, 1)) {
      std::string key = canonical_form(b) + "#" + canonical_form(a) + "#" + relative_key(b, a.size());
      out.push_back({a, std::move(b), std::move(key)});
    }
  }
  std::sort(out.begin(), out.end(), [](const Demand& x, const Demand& y) { return x.key < y.key; });
  return out;
}

inline std::string describe_demand(const Demand& d, const Structure& u,
                                   const std::vector<Element>& g) {
  std::string out = "extend (";
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += ",";
    out += u.name(g[i]);
  }
  out += ") from [" + canonical_form(d.a) + "] to [" + canonical_form(d.b) + "]";
  return out;
}

/// First demand (in `order`) with a copy of its A in `u` that does not extend.
inline std::optional<UnmetDemand> first_unmet_demand(const std::vector<Demand>& demands,
                                                     const std::vector<std::size_t>& order,
                                                     const Structure& u) {
  for (auto idx : order) {
    const auto& d = demands[idx];
    std::optional<UnmetDemand> miss;
    for_each_embedding(d.a, u, {}, [&](const Embedding& g) {
      EmbeddingQuery q;
      q.fixed.assign(d.b.size(), std::nullopt);
      for (std::size_t i = 0; i < g.image.size(); ++i) q.fixed[i] = g.image[i];
      if (find_embedding(d.b, u, q)) return true;
      miss = UnmetDemand{idx, g.image};
      return false;
    });
    if (miss) return miss;
  }
  return std::nullopt;
}

/// Every unmet (demand, copy) pair; used for reports on unsaturated results.
inline std::vector<UnmetDemand> all_unmet_demands(const std::vector<Demand>& demands,
                                                  const std::vector<std::size_t>& order,
                                                  const Structure& u, std::size_t limit = 50) {
  std::vector<UnmetDemand> out;
  for (auto idx : order) {
    const auto& d = demands[idx];
    for_each_embedding(d.a, u, {}, [&](const Embedding& g) {
      EmbeddingQuery q;
      q.fixed.assign(d.b.size(), std::nullopt);
      for (std::size_t i = 0; i < g.image.size(); ++i) q.fixed[i] = g.image[i];
      if (!find_embedding(d.b, u, q)) out.push_back({idx, g.image});
      return out.size() < limit;
    });
    if (out.size() >= limit) break;
  }
  return out;
}

/// Closes a member under the level-k extension property by repeatedly
/// amalgamating the first unmet demand's B over its A. The final structure is
/// re-checked against every demand; hitting the size cap first yields an
/// unsaturated result listing the unmet demands.
inline GenericApproximation build_generic_approx(const AgeClass& k, std::size_t level,
                                                 const GenericOptions& opt = {}) {
  GenericApproximation out;
  out.class_name = k.name;
  out.level = level;
  Structure u = opt.seed ? *opt.seed : Structure(k.vocab);
  if (!k.member(u)) throw ValidationError("seed structure is not a member of " + k.name);

  const auto demands = extension_demands(k, level);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < demands.size(); ++i) {
    if (!opt.skip.count(i)) order.push_back(i);
  }
  if (opt.demand_seed != 0) {
    std::mt19937_64 rng(opt.demand_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  while (true) {
    auto miss = first_unmet_demand(demands, order, u);
    if (!miss) {
      out.saturated = true;
      break;
    }
    if (u.size() >= opt.size_cap) {
      out.note = "size cap " + std::to_string(opt.size_cap) + " reached";
      for (const auto& m : all_unmet_demands(demands, order, u)) {
        out.unmet.push_back(describe_demand(demands[m.demand], u, m.embedding));
      }
      break;
    }
    const auto& d = demands[miss->demand];
    std::vector<Element> f2(d.a.size());
    for (Element i = 0; i < d.a.size(); ++i) f2[i] = i;
    std::optional<Amalgam> a;
    if (k.amalgamate) a = k.amalgamate(d.a, u, miss->embedding, d.b, f2);
    if (!a || !verify_amalgam(k, d.a, u, miss->embedding, d.b, f2, *a)) {
      out.note = "amalgamation strategy failed";
      out.unmet.push_back(describe_demand(d, u, miss->embedding));
      break;
    }
    out.log.push_back(describe_demand(d, u, miss->embedding));
    // keep U's elements in front, in their old order
    std::vector<Element> order_new(a->g1.begin(), a->g1.end());
    std::vector<bool> seen(a->structure.size(), false);
    for (auto x : order_new) seen[x] = true;
    for (Element x = 0; x < a->structure.size(); ++x) {
      if (!seen[x]) order_new.push_back(x);
    }
    u = permuted(a->structure, order_new);
  }
  out.structure = std::move(u);
  return out;
}

inline std::string render_generic(const GenericApproximation& g, bool full) {
  std::string out;
  out += "generic approximation of " + g.class_name + " at level " + std::to_string(g.level) +
         ": " + std::to_string(g.structure.size()) + " elements, " +
         (g.saturated ? "saturated" : "unsaturated") + "\n";
  if (!g.note.empty()) out += "note: " + g.note + "\n";
  if (full) {
    for (std::size_t i = 0; i < g.log.size(); ++i) {
      out += "  step " + std::to_string(i + 1) + ": " + g.log[i] + "\n";
    }
  }
  for (const auto& m : g.unmet) out += "  unmet: " + m + "\n";
  out += emit_structure("U", g.structure);
  out += "\n[summary]\n";
  out += "class=" + g.class_name + "\n";
  out += "level=" + std::to_string(g.level) + "\n";
  out += "size=" + std::to_string(g.structure.size()) + "\n";
  out += "steps=" + std::to_string(g.log.size()) + "\n";
  out += std::string("saturated=") + (g.saturated ? "true" : "false") + "\n";
  out += "unmet=" + std::to_string(g.unmet.size()) + "\n";
  return out;
}

}  // namespace mtk
