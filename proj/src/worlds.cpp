#include "prasp/worlds.hpp"

#include <bit>
#include <set>
#include <stdexcept>

#include "prasp/grounder.hpp"
#include "prasp/parser.hpp"

namespace prasp {

size_t Bits::count() const {
  size_t c = 0;
  for (uint64_t word : w) c += std::popcount(word);
  return c;
}

bool Bits::operator<(const Bits& o) const {
  for (size_t i = w.size(); i-- > 0;)
    if (w[i] != o.w[i]) return w[i] < o.w[i];
  return false;
}

int GroundProgram::ensure(const std::string& name) {
  auto it = atomIndex.find(name);
  if (it != atomIndex.end()) return it->second;
  int id = static_cast<int>(atoms.size());
  atoms.push_back(name);
  atomIndex.emplace(name, id);
  return id;
}

int GroundProgram::find(const std::string& name) const {
  auto it = atomIndex.find(name);
  return it == atomIndex.end() ? -1 : it->second;
}

std::string atom_name(const Formula& f) {
  if (f.kind == FormulaKind::StrongNeg) return "-" + to_string(f.sub[0]);
  return to_string(f);
}

// ------------------------------------------------------------ construction

namespace {

// Atoms mentioned anywhere in a residual body formula must exist in the
// universe so enumeration can branch on them.
void register_atoms(GroundProgram& gp, const Formula& f) {
  if (f.kind == FormulaKind::Atom || f.kind == FormulaKind::StrongNeg) {
    gp.ensure(atom_name(f));
    return;
  }
  for (const auto& s : f.sub) register_atoms(gp, s);
}

void add_body_literal(GroundProgram& gp, const Formula& lit,
                      std::vector<int>& pos, std::vector<int>& neg,
                      std::vector<Formula>& extra) {
  switch (lit.kind) {
    case FormulaKind::True:
      return;
    case FormulaKind::Atom:
    case FormulaKind::StrongNeg:
      pos.push_back(gp.ensure(atom_name(lit)));
      return;
    case FormulaKind::DefaultNeg:
      if (lit.sub[0].kind == FormulaKind::Atom ||
          lit.sub[0].kind == FormulaKind::StrongNeg) {
        neg.push_back(gp.ensure(atom_name(lit.sub[0])));
        return;
      }
      break;  // negated compound: evaluate classically
    default:
      break;
  }
  register_atoms(gp, lit);
  extra.push_back(lit);
}

std::vector<int> choice_elements(GroundProgram& gp, const Formula& count,
                                 int line) {
  std::vector<int> elems;
  for (const auto& e : count.sub) {
    if (e.kind != FormulaKind::Atom && e.kind != FormulaKind::StrongNeg)
      throw ParseError(line, "choice element must be an atom: " + to_string(e));
    elems.push_back(gp.ensure(atom_name(e)));
  }
  return elems;
}

}  // namespace

GroundProgram build_ground_program(const std::vector<AnnotatedFormula>& certain) {
  GroundProgram gp;
  for (const auto& af : certain) {
    const Formula& f = af.formula;
    switch (f.kind) {
      case FormulaKind::True:
        break;
      case FormulaKind::False:
        gp.inconsistent = true;
        break;
      case FormulaKind::Atom:
      case FormulaKind::StrongNeg:
        gp.facts.push_back(gp.ensure(atom_name(f)));
        break;
      case FormulaKind::Count: {
        Choice c;
        c.lo = f.lo;
        c.hi = f.hi;
        c.elems = choice_elements(gp, f, af.line);
        gp.choices.push_back(std::move(c));
        break;
      }
      case FormulaKind::Rule: {
        const Formula& head = f.sub[0];
        if (head.kind == FormulaKind::Count) {
          Choice c;
          c.lo = head.lo;
          c.hi = head.hi;
          c.elems = choice_elements(gp, head, af.line);
          for (size_t i = 1; i < f.sub.size(); ++i)
            add_body_literal(gp, f.sub[i], c.pos, c.neg, c.extra);
          gp.choices.push_back(std::move(c));
        } else if (head.kind == FormulaKind::Atom ||
                   head.kind == FormulaKind::StrongNeg ||
                   head.kind == FormulaKind::False) {
          GroundRule r;
          if (head.kind != FormulaKind::False) r.head = gp.ensure(atom_name(head));
          for (size_t i = 1; i < f.sub.size(); ++i)
            add_body_literal(gp, f.sub[i], r.pos, r.neg, r.extra);
          gp.rules.push_back(std::move(r));
        } else {
          throw ParseError(af.line, "unsupported rule head: " + to_string(head));
        }
        break;
      }
      default:
        // Conjunctions/disjunctions as certain statements are handled by the
        // spanning step, never passed down here.
        throw ParseError(af.line,
                         "internal: compound statement reached the ground "
                         "program builder: " + to_string(f));
    }
  }
  // An atom and its classical negation exclude each other.
  size_t present = gp.atoms.size();
  for (size_t i = 0; i < present; ++i) {
    if (gp.atoms[i].empty() || gp.atoms[i][0] != '-') continue;
    int posId = gp.find(gp.atoms[i].substr(1));
    if (posId < 0) continue;
    GroundRule r;
    r.pos = {posId, static_cast<int>(i)};
    gp.rules.push_back(std::move(r));
  }
  return gp;
}

// -------------------------------------------------------------- evaluation

bool holds(const Formula& f, const GroundProgram& gp, const Bits& world) {
  switch (f.kind) {
    case FormulaKind::True:
      return true;
    case FormulaKind::False:
      return false;
    case FormulaKind::Atom:
    case FormulaKind::StrongNeg: {
      int id = gp.find(atom_name(f));
      return id >= 0 && world.test(static_cast<size_t>(id));
    }
    case FormulaKind::DefaultNeg:
      return !holds(f.sub[0], gp, world);
    case FormulaKind::And:
      for (const auto& s : f.sub)
        if (!holds(s, gp, world)) return false;
      return true;
    case FormulaKind::Or:
      for (const auto& s : f.sub)
        if (holds(s, gp, world)) return true;
      return false;
    case FormulaKind::Count: {
      int c = 0;
      for (const auto& s : f.sub) c += holds(s, gp, world) ? 1 : 0;
      return (f.lo < 0 || c >= f.lo) && (f.hi < 0 || c <= f.hi);
    }
    case FormulaKind::Rule: {
      for (size_t i = 1; i < f.sub.size(); ++i)
        if (!holds(f.sub[i], gp, world)) return true;
      return holds(f.sub[0], gp, world);
    }
    case FormulaKind::Compare: {
      int c = term_order(f.args[0], f.args[1]);
      if (f.pred == "==") return c == 0;
      if (f.pred == "!=") return c != 0;
      if (f.pred == "<") return c < 0;
      if (f.pred == "<=") return c <= 0;
      if (f.pred == ">") return c > 0;
      return c >= 0;
    }
  }
  return false;
}

Bits least_model(const GroundProgram& gp, const std::vector<int>& facts,
                 const std::vector<GroundRule>& rules) {
  Bits m(gp.atoms.size());
  for (int a : facts) m.set(static_cast<size_t>(a));
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& r : rules) {
      if (r.head < 0 || m.test(static_cast<size_t>(r.head))) continue;
      bool fire = true;
      for (int p : r.pos)
        if (!m.test(static_cast<size_t>(p))) {
          fire = false;
          break;
        }
      if (fire) {
        m.set(static_cast<size_t>(r.head));
        changed = true;
      }
    }
  }
  return m;
}

bool is_stable(const GroundProgram& gp, const Bits& world) {
  if (gp.inconsistent) return false;
  auto bodyHolds = [&](const std::vector<int>& pos, const std::vector<int>& neg,
                       const std::vector<Formula>& extra) {
    for (int p : pos)
      if (!world.test(static_cast<size_t>(p))) return false;
    for (int n : neg)
      if (world.test(static_cast<size_t>(n))) return false;
    for (const auto& e : extra)
      if (!holds(e, gp, world)) return false;
    return true;
  };

  std::vector<int> seed = gp.facts;
  std::vector<GroundRule> reduct;
  for (const auto& r : gp.rules) {
    if (r.head < 0) {
      if (bodyHolds(r.pos, r.neg, r.extra)) return false;  // violated constraint
      continue;
    }
    bool survives = true;
    for (int n : r.neg)
      if (world.test(static_cast<size_t>(n))) {
        survives = false;
        break;
      }
    if (survives)
      for (const auto& e : r.extra)
        if (!holds(e, gp, world)) {
          survives = false;
          break;
        }
    if (survives) reduct.push_back(r);
  }
  for (const auto& c : gp.choices) {
    bool outer = true;  // negative + residual body parts, fixed by the candidate
    for (int n : c.neg)
      if (world.test(static_cast<size_t>(n))) {
        outer = false;
        break;
      }
    if (outer)
      for (const auto& e : c.extra)
        if (!holds(e, gp, world)) {
          outer = false;
          break;
        }
    if (!outer) continue;
    // Chosen atoms are supported through the choice body, not as bare facts:
    // `1{a}1 :- a.` must not justify itself.
    for (int e : c.elems)
      if (world.test(static_cast<size_t>(e))) {
        GroundRule support;
        support.head = e;
        support.pos = c.pos;
        reduct.push_back(std::move(support));
      }
    if (bodyHolds(c.pos, c.neg, c.extra)) {
      int chosen = 0;
      for (int e : c.elems)
        if (world.test(static_cast<size_t>(e))) ++chosen;
      if ((c.lo >= 0 && chosen < c.lo) || (c.hi >= 0 && chosen > c.hi))
        return false;
    }
  }
  return least_model(gp, seed, reduct) == world;
}

// ------------------------------------------------------------- enumeration

namespace {

void collect_atom_ids(const GroundProgram& gp, const Formula& f,
                      std::set<int>& out) {
  if (f.kind == FormulaKind::Atom || f.kind == FormulaKind::StrongNeg) {
    int id = gp.find(atom_name(f));
    if (id >= 0) out.insert(id);
    return;
  }
  for (const auto& s : f.sub) collect_atom_ids(gp, s, out);
}

}  // namespace

std::vector<Bits> enumerate_answer_sets(const GroundProgram& gp,
                                        int maxBranchAtoms) {
  std::vector<Bits> out;
  if (gp.inconsistent) return out;

  std::set<int> branchSet;
  for (const auto& c : gp.choices) {
    branchSet.insert(c.elems.begin(), c.elems.end());
    branchSet.insert(c.neg.begin(), c.neg.end());
    for (const auto& e : c.extra) collect_atom_ids(gp, e, branchSet);
  }
  for (const auto& r : gp.rules) {
    branchSet.insert(r.neg.begin(), r.neg.end());
    for (const auto& e : r.extra) collect_atom_ids(gp, e, branchSet);
  }
  std::vector<int> branch(branchSet.begin(), branchSet.end());
  if (branch.size() > static_cast<size_t>(maxBranchAtoms))
    throw std::runtime_error(
        "too many undetermined atoms (" + std::to_string(branch.size()) +
        ") for exhaustive world enumeration");

  size_t nAtoms = gp.atoms.size();
  for (uint64_t mask = 0; mask < (uint64_t(1) << branch.size()); ++mask) {
    Bits assigned(nAtoms);
    for (size_t i = 0; i < branch.size(); ++i)
      if ((mask >> i) & 1) assigned.set(static_cast<size_t>(branch[i]));

    // Deterministic closure under the branch assignment: positive parts are
    // derived, negated/residual parts read the assignment (every atom they
    // mention is in the branch set, so the reading is final).
    Bits s(nAtoms);
    for (int a : gp.facts) s.set(static_cast<size_t>(a));
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& r : gp.rules) {
        if (r.head < 0 || s.test(static_cast<size_t>(r.head))) continue;
        bool fire = true;
        for (int p : r.pos)
          if (!s.test(static_cast<size_t>(p))) {
            fire = false;
            break;
          }
        for (int n : r.neg)
          if (fire && assigned.test(static_cast<size_t>(n))) fire = false;
        for (const auto& e : r.extra)
          if (fire && !holds(e, gp, assigned)) fire = false;
        if (fire) {
          s.set(static_cast<size_t>(r.head));
          changed = true;
        }
      }
      for (const auto& c : gp.choices) {
        bool on = true;
        for (int p : c.pos)
          if (!s.test(static_cast<size_t>(p))) {
            on = false;
            break;
          }
        for (int n : c.neg)
          if (on && assigned.test(static_cast<size_t>(n))) on = false;
        for (const auto& e : c.extra)
          if (on && !holds(e, gp, assigned)) on = false;
        if (!on) continue;
        for (int e : c.elems)
          if (assigned.test(static_cast<size_t>(e)) &&
              !s.test(static_cast<size_t>(e))) {
            s.set(static_cast<size_t>(e));
            changed = true;
          }
      }
    }

    bool consistent = true;
    for (int b : branch)
      if (assigned.test(static_cast<size_t>(b)) !=
          s.test(static_cast<size_t>(b))) {
        consistent = false;
        break;
      }
    if (consistent && is_stable(gp, s)) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace prasp
