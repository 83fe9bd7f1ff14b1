#pragma once

// Reference answer-set enumerator used to cross-check the production
// enumerator. Deliberately naive and written independently: it walks every
// subset of the full atom universe and re-derives stability from scratch
// (constraint check, reduct construction, least-model fixpoint) without
// sharing any code with src/worlds.cpp. Only usable for small universes.

#include <set>
#include <vector>

#include "prasp/worlds.hpp"

namespace oracle {

using prasp::Bits;
using prasp::GroundProgram;

inline bool oracleFormulaTrue(const prasp::Formula& f, const GroundProgram& gp,
                              const std::set<int>& world) {
  using prasp::FormulaKind;
  switch (f.kind) {
    case FormulaKind::True:
      return true;
    case FormulaKind::False:
      return false;
    case FormulaKind::Atom: {
      int id = gp.find(prasp::atom_name(f));
      return id >= 0 && world.count(id) > 0;
    }
    case FormulaKind::StrongNeg: {
      int id = gp.find(prasp::atom_name(f));
      return id >= 0 && world.count(id) > 0;
    }
    case FormulaKind::DefaultNeg:
      return !oracleFormulaTrue(f.sub[0], gp, world);
    case FormulaKind::And:
      for (const auto& s : f.sub)
        if (!oracleFormulaTrue(s, gp, world)) return false;
      return true;
    case FormulaKind::Or:
      for (const auto& s : f.sub)
        if (oracleFormulaTrue(s, gp, world)) return true;
      return false;
    case FormulaKind::Count: {
      int k = 0;
      for (const auto& s : f.sub)
        if (oracleFormulaTrue(s, gp, world)) ++k;
      return (f.lo < 0 || k >= f.lo) && (f.hi < 0 || k <= f.hi);
    }
    case FormulaKind::Rule: {
      for (size_t i = 1; i < f.sub.size(); ++i)
        if (!oracleFormulaTrue(f.sub[i], gp, world)) return true;
      return oracleFormulaTrue(f.sub[0], gp, world);
    }
    default:
      return false;  // Compare should have been grounded away
  }
}

// Positive-rule fixpoint over (head, positive body) pairs plus seed facts.
inline std::set<int> oracleLeastModel(
    const std::vector<int>& seed,
    const std::vector<std::pair<int, std::vector<int>>>& posRules) {
  std::set<int> m(seed.begin(), seed.end());
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [head, body] : posRules) {
      if (m.count(head)) continue;
      bool fire = true;
      for (int b : body)
        if (!m.count(b)) {
          fire = false;
          break;
        }
      if (fire) {
        m.insert(head);
        grew = true;
      }
    }
  }
  return m;
}

inline bool oracleStable(const GroundProgram& gp, const std::set<int>& world) {
  // integrity constraints (head == -1): body true => reject
  for (const auto& r : gp.rules) {
    if (r.head >= 0) continue;
    bool bodyTrue = true;
    for (int p : r.pos) bodyTrue = bodyTrue && world.count(p) > 0;
    for (int ng : r.neg) bodyTrue = bodyTrue && world.count(ng) == 0;
    for (const auto& e : r.extra)
      bodyTrue = bodyTrue && oracleFormulaTrue(e, gp, world);
    if (bodyTrue) return false;
  }

  std::vector<int> seed = gp.facts;
  std::vector<std::pair<int, std::vector<int>>> posRules;

  // ordinary rules: evaluate negative part and residual formulas against
  // the candidate; survivors keep their positive body
  for (const auto& r : gp.rules) {
    if (r.head < 0) continue;
    bool keep = true;
    for (int ng : r.neg) keep = keep && world.count(ng) == 0;
    for (const auto& e : r.extra)
      keep = keep && oracleFormulaTrue(e, gp, world);
    if (keep) posRules.emplace_back(r.head, r.pos);
  }

  // choices: a chosen atom is supported through the choice body (reduct rule
  // elem <- positive body), never as a bare fact, so e.g. `1{a}1 :- a.` does
  // not justify {a}; when the whole body holds the bounds must be respected
  for (const auto& c : gp.choices) {
    bool outerTrue = true;
    for (int ng : c.neg) outerTrue = outerTrue && world.count(ng) == 0;
    for (const auto& e : c.extra)
      outerTrue = outerTrue && oracleFormulaTrue(e, gp, world);
    if (!outerTrue) continue;
    int chosen = 0;
    for (int el : c.elems)
      if (world.count(el)) {
        ++chosen;
        posRules.emplace_back(el, c.pos);
      }
    bool posTrue = true;
    for (int p : c.pos) posTrue = posTrue && world.count(p) > 0;
    if (posTrue) {
      if (c.lo >= 0 && chosen < c.lo) return false;
      if (c.hi >= 0 && chosen > c.hi) return false;
    }
  }

  return oracleLeastModel(seed, posRules) == world;
}

// Every answer set, found by trying all 2^n subsets of the universe.
inline std::vector<Bits> bruteForceAnswerSets(const GroundProgram& gp) {
  std::vector<Bits> out;
  if (gp.inconsistent) return out;
  size_t n = gp.atoms.size();
  for (uint64_t mask = 0; mask < (uint64_t(1) << n); ++mask) {
    std::set<int> world;
    for (size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1) world.insert(int(i));
    if (oracleStable(gp, world)) {
      Bits b(n);
      for (int a : world) b.set(size_t(a));
      out.push_back(b);
    }
  }
  return out;
}

}  // namespace oracle
