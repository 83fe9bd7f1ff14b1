#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "prasp/grounder.hpp"
#include "prasp/parser.hpp"
#include "prasp/spanning.hpp"
#include "prasp/worlds.hpp"
#include "test_util.hpp"

using namespace prasp;

namespace {

SpanningProgram span_of(const std::string& text) {
  return build_spanning_program(ground_program(parse_program(text)));
}

std::vector<std::string> statement_strings(const SpanningProgram& sp) {
  std::vector<std::string> out;
  for (const auto& af : sp.statements) out.push_back(to_string(af));
  return out;
}

// how many worlds contain / lack the named atom
std::pair<int, int> polarity_split(const SpanningProgram& sp,
                                   const std::vector<Bits>& worlds,
                                   const std::string& atom) {
  int id = sp.ground.find(atom);
  REQUIRE(id >= 0);
  int with = 0, without = 0;
  for (const auto& w : worlds)
    (w.test(size_t(id)) ? with : without)++;
  return {with, without};
}

}  // namespace

TEST_CASE("two-coin program spans to exactly the four coin worlds") {
  SpanningProgram sp = span_of(read_fixture("kb1.prasp"));
  REQUIRE(sp.weighted.size() == 2);
  CHECK(sp.weighted[0].ann.lo == 0.6);
  CHECK(sp.weighted[0].indepGroup == sp.weighted[1].indepGroup);
  CHECK(sp.weighted[0].indepGroup >= 0);

  auto worlds = enumerate_answer_sets(sp.ground);
  CHECK(worlds.size() == 4);
  // weighted atoms stay nondeterministic
  for (const auto& e : sp.weighted) {
    auto [with, without] = polarity_split(sp, worlds, to_string(e.formula));
    CHECK(with > 0);
    CHECK(without > 0);
  }
  // the choice elements are not re-choiced: three certain statements only
  CHECK(sp.statements.size() == 3);
}

TEST_CASE("weighted rule splits the body-true worlds on a guard atom") {
  SpanningProgram sp = span_of(read_fixture("happy_rule.prasp"));
  auto worlds = enumerate_answer_sets(sp.ground);
  CHECK(worlds.size() == 5);

  REQUIRE(sp.weighted.size() == 3);
  CHECK(sp.weighted[2].formula.kind == FormulaKind::Rule);
  CHECK(to_string(sp.weighted[2].formula) == "happy :- win");

  int guard = sp.ground.find("hp__span_0");
  REQUIRE(guard >= 0);
  CHECK(sp.helperAtoms.count("hp__span_0") == 1);

  int happy = sp.ground.find("happy");
  int win = sp.ground.find("win");
  REQUIRE(happy >= 0);
  REQUIRE(win >= 0);
  int happyWorlds = 0;
  for (const auto& w : worlds) {
    if (w.test(size_t(happy))) {
      ++happyWorlds;
      CHECK(w.test(size_t(win)));
      CHECK(w.test(size_t(guard)));
    }
    // guard off means: body holds, head does not
    if (!w.test(size_t(guard))) {
      CHECK(w.test(size_t(win)));
      CHECK(!w.test(size_t(happy)));
    }
  }
  CHECK(happyWorlds == 1);
}

TEST_CASE("weight-free program passes through untouched") {
  GroundedProgram g = ground_program(parse_program(read_fixture("tweety.prasp")));
  SpanningProgram sp = build_spanning_program(g);
  CHECK(sp.weighted.empty());
  CHECK(sp.helperAtoms.empty());
  REQUIRE(sp.statements.size() == g.formulas.size());
  for (size_t i = 0; i < g.formulas.size(); ++i)
    CHECK(to_string(sp.statements[i]) == to_string(g.formulas[i]));
  CHECK(enumerate_answer_sets(sp.ground).size() == 2);
}

TEST_CASE("conditional weights add choices for their atoms, no constraints") {
  SpanningProgram sp = span_of(read_fixture("traffic.prasp"));
  // 3 light colours x hit free = 6 worlds
  auto worlds = enumerate_answer_sets(sp.ground);
  CHECK(worlds.size() == 6);
  auto [with, without] = polarity_split(sp, worlds, "hit");
  CHECK(with == 3);
  CHECK(without == 3);
  // 6 conditionals + 3 colour weights
  CHECK(sp.weighted.size() == 9);
  int conditionals = 0;
  for (const auto& e : sp.weighted) conditionals += e.ann.cond ? 1 : 0;
  CHECK(conditionals == 6);
}

TEST_CASE("weight-free nondeterminism marker becomes a plain choice") {
  SpanningProgram sp = span_of("#indep\n[0.4] c1.\n#endIndep\n[.] x1.\n");
  CHECK(sp.weighted.size() == 1);  // x1 contributes no row
  auto worlds = enumerate_answer_sets(sp.ground);
  CHECK(worlds.size() == 4);
  auto [with, without] = polarity_split(sp, worlds, "x1");
  CHECK(with == 2);
  CHECK(without == 2);
}

TEST_CASE("weighted compound opens choices on its undefined atoms only") {
  SpanningProgram sp = span_of("[0.3] a & (b | not c).\n");
  CHECK(sp.weighted.size() == 1);
  CHECK(enumerate_answer_sets(sp.ground).size() == 8);

  SpanningProgram defined = span_of(
      "1 { h1, h2, h3 } 1.\np :- h1.\nq :- not h1.\n[0.6] 2{h1, h2}2.\n");
  CHECK(defined.weighted.size() == 1);
  // nothing new to define: spanning statements = the three certain ones
  CHECK(defined.statements.size() == 3);
  CHECK(enumerate_answer_sets(defined.ground).size() == 3);
}

TEST_CASE("weight-one statements are emitted as certain, without helpers") {
  SpanningProgram sp = span_of("[0.5] p.\n[1] q :- p.\n");
  auto stmts = statement_strings(sp);
  REQUIRE(std::count(stmts.begin(), stmts.end(), "[1] q :- p.") == 1);
  CHECK(sp.helperAtoms.empty());
  auto worlds = enumerate_answer_sets(sp.ground);
  CHECK(worlds.size() == 2);  // {} and {p,q}
  CHECK(sp.weighted.size() == 2);  // the certain rule still owns a row
}

TEST_CASE("weighted constraint keeps its atom nondeterministic") {
  SpanningProgram sp = span_of("[0.4] :- a.\n");
  REQUIRE(sp.weighted.size() == 1);
  CHECK(sp.weighted[0].formula.kind == FormulaKind::Rule);
  auto worlds = enumerate_answer_sets(sp.ground);
  CHECK(worlds.size() == 2);
}

TEST_CASE("certain compound statements become weight-one rows") {
  SpanningProgram sp = span_of("a | b.\n");
  REQUIRE(sp.weighted.size() == 1);
  CHECK(sp.weighted[0].ann.isPoint());
  CHECK(sp.weighted[0].ann.lo == 1.0);
  CHECK(to_string(sp.weighted[0].formula) == "a | b");
  // no hard constraint: all four combinations remain worlds
  CHECK(enumerate_answer_sets(sp.ground).size() == 4);
}

TEST_CASE("volatile blocks contribute neither rows nor atoms") {
  SpanningProgram sp = span_of("[0.5] p.\n#volat\n[0.5] v.\n#endVolat\n");
  CHECK(sp.weighted.size() == 1);
  CHECK(sp.ground.find("v") == -1);
  CHECK(enumerate_answer_sets(sp.ground).size() == 2);
}
