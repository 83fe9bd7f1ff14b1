#pragma once

// Grounding: replaces term shorthands (1..3, a;b) and variables with ground
// instances, expands multi-bracket annotations into per-instance weighted
// formulas, desugars annotated disjunctions, and rewrites condPr heads into
// conditional formulas.
//
// Variable binding sources, in order: a #domain declaration for the variable
// name, else positive body literals over predicates whose extension is fully
// known. "Fully known" covers predicates defined only by unannotated facts
// (never in a nonempty-body rule head, a choice, or any annotated formula)
// plus predicates derivable from those through deterministic rules. Body
// literals over fully-known predicates are evaluated at grounding time:
// true literals vanish, false ones drop the instance.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "prasp/ast.hpp"
#include "prasp/parser.hpp"

namespace prasp {

struct DomainMap {
  // pred/arity -> sorted ground argument tuples
  std::map<std::string, std::vector<std::vector<Term>>> ext;
  // Predicates whose extension is complete, so body literals over them can
  // be decided during grounding.
  std::set<std::string> complete;

  static std::string key(const std::string& pred, size_t arity) {
    return pred + "/" + std::to_string(arity);
  }
  bool isComplete(const std::string& pred, size_t arity) const {
    return complete.count(key(pred, arity)) > 0;
  }
  bool holdsFact(const Formula& groundAtom) const;
};

// Deterministic order on ground terms/formulas: token-wise, integer tokens
// compare numerically, words lexicographically, numbers before words.
bool term_less(const Term& a, const Term& b);
bool formula_less(const Formula& a, const Formula& b);

// Three-way comparison backing term_less; also used to evaluate ground
// comparison literals.
int term_order(const Term& a, const Term& b);

// p(1..3) / p(a;b) expansion (cartesian across argument positions).
std::vector<Formula> expand_term_shorthand(const Formula& f);

// Least fixpoint of fact extensions plus deterministically derivable rules.
DomainMap compute_domains(const Program& prog);

// Grounds one statement. Output is sorted and deduplicated per statement.
std::vector<AnnotatedFormula> ground_statement(
    const AnnotatedFormula& af, const DomainMap& domains,
    const std::vector<std::pair<std::string, std::string>>& domainDecls);

void sort_instances(std::vector<AnnotatedFormula>& list);

struct GroundedProgram {
  std::vector<AnnotatedFormula> formulas;  // all ground, ADs desugared
  int indepGroupCount = 0;
  int pIndepGroupCount = 0;
  int adHelperGroup = -1;  // mutual group holding every AD helper fact
};

GroundedProgram ground_program(const Program& prog);

// Grounds query/hypothesis/example statements against background domains
// augmented with the file's own context facts.
std::vector<AnnotatedFormula> ground_aux_file(const Program& auxFile,
                                              const Program& background);

}  // namespace prasp
