#pragma once

// Stable-model machinery over ground programs: the atom universe, candidate
// worlds as bitsets, least models, the stability check, and answer-set
// enumeration by branching on the atoms whose truth is not determined
// deterministically (choice elements, default-negated atoms, atoms inside
// cardinality tests in rule bodies).

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prasp/ast.hpp"

namespace prasp {

// Dynamic bitset sized to the atom universe. Word 0 holds atoms 0..63.
struct Bits {
  std::vector<uint64_t> w;
  size_t n = 0;

  Bits() = default;
  explicit Bits(size_t nbits) : w((nbits + 63) / 64, 0), n(nbits) {}

  void set(size_t i) { w[i / 64] |= uint64_t(1) << (i % 64); }
  void reset(size_t i) { w[i / 64] &= ~(uint64_t(1) << (i % 64)); }
  bool test(size_t i) const { return (w[i / 64] >> (i % 64)) & 1; }
  size_t count() const;

  bool operator==(const Bits& o) const { return w == o.w; }
  bool operator!=(const Bits& o) const { return w != o.w; }
  bool operator<(const Bits& o) const;  // numeric, atom 0 least significant
};

// A rule body: positive/negative atom references plus any residual ground
// formulas (cardinality tests, double negation) which are evaluated
// classically against the candidate world before the reduct is formed.
struct GroundRule {
  int head = -1;  // atom index; -1 = integrity constraint
  std::vector<int> pos, neg;
  std::vector<Formula> extra;
};

struct Choice {
  int lo = -1, hi = -1;  // -1 = unbounded side
  std::vector<int> elems;
  std::vector<int> pos, neg;
  std::vector<Formula> extra;
};

struct GroundProgram {
  std::vector<std::string> atoms;
  std::map<std::string, int> atomIndex;
  std::vector<int> facts;
  std::vector<GroundRule> rules;  // constraints included (head == -1)
  std::vector<Choice> choices;
  bool inconsistent = false;  // an unconditional `false` statement

  int ensure(const std::string& name);
  int find(const std::string& name) const;  // -1 when absent
};

// Name of a ground atom ("-" prefix encodes classical negation).
std::string atom_name(const Formula& atomOrStrongNeg);

// Assembles rules/facts/choices/constraints from certain ground statements.
// Compound statements (conjunctions, disjunctions) are not representable
// here; the spanning step turns them into choices plus constraints on the
// probability distribution before this is called.
GroundProgram build_ground_program(const std::vector<AnnotatedFormula>& certain);

// Classical truth of a ground formula in a world. Atoms outside the
// universe are false. A rule is read as body -> head, an empty head as the
// negated body, a count as a cardinality test over its literals.
bool holds(const Formula& f, const GroundProgram& gp, const Bits& world);

// Least model of the positive rules in `rules` together with `facts`.
Bits least_model(const GroundProgram& gp, const std::vector<int>& facts,
                 const std::vector<GroundRule>& rules);

// Gelfond-Lifschitz style check. Chosen atoms of a choice rule are
// supported through the choice body (reduct rule elem <- positive body), so
// a choice cannot justify its own body; when the body holds in the
// candidate the cardinality bounds must be met. Ordinary rules drop their
// negative part against the candidate.
bool is_stable(const GroundProgram& gp, const Bits& world);

// All answer sets, in false-first branch order over the atom universe.
// Throws std::runtime_error when the branch set exceeds `maxBranchAtoms`.
std::vector<Bits> enumerate_answer_sets(const GroundProgram& gp,
                                        int maxBranchAtoms = 25);

}  // namespace prasp
