#pragma once

// Turns a grounded weighted program into its weight-free nondeterministic
// counterpart. Weighted atoms become 0{a}1 choices, weighted rules split
// worlds via a fresh guard atom into "rule holds" / "body true, head false",
// and compound or conditional formulas contribute choices for their atoms
// that have no defining occurrence anywhere else. The probabilistic content
// survives separately as weighted index entries that later become
// constraint rows over the enumerated worlds.

#include <set>
#include <string>
#include <vector>

#include "prasp/ast.hpp"
#include "prasp/grounder.hpp"
#include "prasp/worlds.hpp"

namespace prasp {

// One probabilistic statement, carried forward to the constraint stage.
struct WeightedEntry {
  int sourceId = -1;  // position of the originating statement in the input
  Formula formula;    // weight-free formula (rules keep their rule shape)
  Annotation ann;     // Point or IntervalW, possibly with a condition
  int indepGroup = -1;
  int pIndepGroup = -1;
  int line = 0;
};

struct SpanningProgram {
  GroundProgram ground;
  std::vector<WeightedEntry> weighted;
  std::set<std::string> helperAtoms;  // guard/AD atoms, hidden from output
  // The spanning program in input syntax (certain statements plus generated
  // fragments), for display.
  std::vector<AnnotatedFormula> statements;
  int indepGroupCount = 0;
  int pIndepGroupCount = 0;
};

SpanningProgram build_spanning_program(const GroundedProgram& g);

}  // namespace prasp
