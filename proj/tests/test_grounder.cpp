#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "prasp/grounder.hpp"
#include "prasp/parser.hpp"
#include "test_util.hpp"

using namespace prasp;

namespace {

std::vector<std::string> lines_of(const std::vector<AnnotatedFormula>& fs) {
  std::vector<std::string> out;
  for (const auto& f : fs) out.push_back(to_string(f));
  return out;
}

bool contains(const std::vector<std::string>& ls, const std::string& s) {
  return std::find(ls.begin(), ls.end(), s) != ls.end();
}

}  // namespace

TEST_CASE("term shorthand expansion") {
  auto fs = expand_term_shorthand(parse_formula("twoCoins(1..3,1..2)"));
  REQUIRE(fs.size() == 6);
  CHECK(to_string(fs[0]) == "twoCoins(1,1)");
  CHECK(to_string(fs[1]) == "twoCoins(1,2)");
  CHECK(to_string(fs[2]) == "twoCoins(2,1)");
  CHECK(to_string(fs[5]) == "twoCoins(3,2)");

  auto ps = expand_term_shorthand(parse_formula("person(a;b;c)"));
  REQUIRE(ps.size() == 3);
  CHECK(to_string(ps[0]) == "person(a)");
  CHECK(to_string(ps[2]) == "person(c)");

  // nested and mixed shorthand, cartesian across positions
  auto ms = expand_term_shorthand(parse_formula("m(a;b,1..2)"));
  REQUIRE(ms.size() == 4);
  CHECK(to_string(ms[0]) == "m(a,1)");
  CHECK(to_string(ms[3]) == "m(b,2)");
}

TEST_CASE("instance ordering compares tokens, numbers numerically") {
  Formula v1 = parse_formula("v(1)"), v2 = parse_formula("v(2)"),
          v10 = parse_formula("v(10)"), va = parse_formula("v(a)");
  CHECK(formula_less(v1, v2));
  CHECK(formula_less(v2, v10));
  CHECK(formula_less(v10, va));  // numbers sort before words
  CHECK(!formula_less(v10, v2));
}

TEST_CASE("domain extensions: facts, derived rules, uncertainty taint") {
  Program p = parse_program(
      "e(1).\n"
      "e(2).\n"
      "d(X) :- e(X).\n"
      "[0.5] u(1).\n"
      "1{c1,c2}1.\n");
  DomainMap dom = compute_domains(p);
  CHECK(dom.isComplete("e", 1));
  CHECK(dom.isComplete("d", 1));
  CHECK(!dom.isComplete("u", 1));  // annotated
  CHECK(!dom.isComplete("c1", 0));  // choice head
  REQUIRE(dom.ext.count("d/1"));
  CHECK(dom.ext.at("d/1").size() == 2);
  CHECK(dom.holdsFact(parse_formula("d(1)")));
  CHECK(dom.holdsFact(parse_formula("d(2)")));
  CHECK(!dom.holdsFact(parse_formula("d(3)")));
}

TEST_CASE("mutually recursive rules stay unsimplified") {
  GroundedProgram g = ground_program(parse_program(read_fixture("tweety.prasp")));
  auto ls = lines_of(g.formulas);
  CHECK(contains(ls, "fly(tweety) :- not neg_fly(tweety)."));
  CHECK(contains(ls, "fly(tux) :- not neg_fly(tux)."));
  CHECK(contains(ls, "neg_fly(tweety) :- not fly(tweety)."));
  CHECK(contains(ls, "neg_fly(tux)."));  // from the penguin rule
  CHECK(contains(ls, "bird(tweety)."));
  CHECK(g.formulas.size() == 9);
}

TEST_CASE("weighted per-instance rule simplifies to weighted facts") {
  GroundedProgram g = ground_program(parse_program(read_fixture("coins3.prasp")));
  auto ls = lines_of(g.formulas);
  CHECK(contains(ls, "[0.5] coin_out(2,heads)."));
  CHECK(contains(ls, "[0.5] coin_out(3,heads)."));
  CHECK(contains(ls, "[0.6] coin_out(1,heads)."));
  CHECK(contains(ls, "1{coin_out(1,heads),coin_out(1,tails)}1."));
  CHECK(contains(ls, "1{coin_out(3,heads),coin_out(3,tails)}1."));
  CHECK(contains(ls, "n_win :- coin_out(2,tails)."));
  CHECK(contains(ls, "win :- not n_win."));

  // the per-instance weighted facts inherit the declared independence group
  int group = -2;
  for (const auto& af : g.formulas)
    if (to_string(af) == "[0.6] coin_out(1,heads).") group = af.indepGroup;
  REQUIRE(group >= 0);
  for (const auto& af : g.formulas)
    if (to_string(af) == "[0.5] coin_out(3,heads).")
      CHECK(af.indepGroup == group);
}

TEST_CASE("uniform distribution over instances") {
  Program p = parse_program(
      "face(1..6).\n"
      "[[:]] faceObserved(F) :- face(F).\n");
  GroundedProgram g = ground_program(p);
  int seen = 0;
  for (const auto& af : g.formulas)
    if (af.ann && af.formula.pred == "faceObserved") {
      CHECK(af.ann->lo == doctest::Approx(1.0 / 6).epsilon(1e-15));
      ++seen;
    }
  CHECK(seen == 6);
  auto ls = lines_of(g.formulas);
  CHECK(contains(ls, "[0.1666666666666667] faceObserved(4)."));
}

TEST_CASE("conditional-probability heads expand against their guards") {
  Program p = parse_program(read_fixture("monty1.prasp"));
  GroundedProgram g = ground_program(p);
  auto ls = lines_of(g.formulas);

  // host picks one of the two goat doors when the contestant found the car
  CHECK(contains(ls, "[0.5|c(1)] h(1,2)."));
  CHECK(contains(ls, "[0.5|c(1)] h(1,3)."));
  CHECK(contains(ls, "[0.5|c(2)] h(2,1)."));
  CHECK(contains(ls, "[0.5|c(2)] h(2,3)."));
  CHECK(contains(ls, "[0.5|c(3)] h(3,1)."));
  CHECK(contains(ls, "[0.5|c(3)] h(3,2)."));
  // host never opens the contestant's door / the car door
  CHECK(contains(ls, "[0|c(1)] h(2,2)."));
  CHECK(contains(ls, "[0|c(2)] h(1,2)."));
  // forced move when contestant sits on a goat door
  CHECK(contains(ls, "[1|c(1)] h(2,3)."));
  CHECK(contains(ls, "[1|c(1)] h(3,2)."));

  int conditionals = 0;
  for (const auto& af : g.formulas)
    if (af.ann && af.ann->cond) ++conditionals;
  // 9 (I==J) + 9 (J==K) + 6 (I==K,J!=K) + 6 (all distinct)
  CHECK(conditionals == 30);

  // 3 door facts + 3 weighted c(i) + 30 conditionals
  CHECK(g.formulas.size() == 36);
}

TEST_CASE("annotated disjunctions ground before desugaring") {
  Program p = parse_program(read_fixture("sneezing.prasp"));
  GroundedProgram g = ground_program(p);
  auto ls = lines_of(g.formulas);

  // david/jennifer with flu, david with hay fever; no jennifer instance for
  // the hay-fever clause since hayFever(jennifer) is not derivable
  CHECK(contains(ls, "[0.3] hp__ad_0_0."));
  CHECK(contains(ls, "strongSneezing(david) :- hp__ad_0_0."));
  CHECK(contains(ls, "moderateSneezing(david) :- not hp__ad_0_0, hp__ad_0_1."));
  CHECK(contains(ls, "[0.3] hp__ad_1_0."));
  CHECK(contains(ls, "strongSneezing(jennifer) :- hp__ad_1_0."));
  CHECK(contains(ls, "[0.2] hp__ad_2_0."));
  CHECK(contains(ls, "strongSneezing(david) :- hp__ad_2_0."));
  CHECK(contains(ls, "moderateSneezing(david) :- not hp__ad_2_0, hp__ad_2_1."));
  for (const auto& s : ls) CHECK(s.find("hp__ad_3") == std::string::npos);

  // second alternative weight is renormalized by the first
  for (const auto& af : g.formulas) {
    if (to_string(af.formula) == "hp__ad_0_1" && af.ann)
      CHECK(af.ann->lo == doctest::Approx(0.5 / 0.7).epsilon(1e-12));
    if (to_string(af.formula) == "hp__ad_2_1" && af.ann)
      CHECK(af.ann->lo == doctest::Approx(0.6 / 0.8).epsilon(1e-12));
  }

  // all helper facts share one fresh mutual-independence group
  REQUIRE(g.adHelperGroup >= 0);
  int helpers = 0;
  for (const auto& af : g.formulas)
    if (af.ann && af.formula.pred.rfind("hp__ad_", 0) == 0) {
      CHECK(af.indepGroup == g.adHelperGroup);
      ++helpers;
    }
  CHECK(helpers == 6);
}

TEST_CASE("single-bracket weight on a non-ground formula covers the conjunction") {
  GroundedProgram g = ground_program(parse_program(read_fixture("vx.prasp")));
  auto ls = lines_of(g.formulas);
  CHECK(contains(ls, "[0.1] v(1) & v(2) & v(3)."));
  CHECK(contains(ls, "[0.5] v(1)."));
  CHECK(contains(ls, "[0.5] v(3)."));
}

TEST_CASE("rule-body joins bind variables and drop decided literals") {
  GroundedProgram g =
      ground_program(parse_program(read_fixture("smokersNetwork.prasp")));
  auto ls = lines_of(g.formulas);
  CHECK(contains(ls, "smokes(1) :- stress(1)."));
  CHECK(contains(ls, "smokes(4) :- stress(4)."));
  CHECK(contains(ls, "smokes(1) :- influences(2,1), smokes(2)."));
  CHECK(contains(ls, "smokes(2) :- influences(1,2), smokes(1)."));
  CHECK(contains(ls, "smokes(2) :- influences(4,2), smokes(4)."));
  CHECK(contains(ls, "smokes(3) :- influences(2,3), smokes(2)."));
  CHECK(contains(ls, "smokes(4) :- influences(2,4), smokes(2)."));
  CHECK(contains(ls, "[0.8] stress(4)."));
  // 4 person + 5 friend facts + 4 stress rules + 5 friend rules + 1 weighted
  CHECK(g.formulas.size() == 19);
}

TEST_CASE("shared-variable conditions pair instance-wise") {
  Program p = parse_program(
      "q(a).\n"
      "q(b).\n"
      "q(c).\n"
      "#domain q(X).\n"
      "[[0.2|w(X)]] v(X).\n");
  GroundedProgram g = ground_program(p);
  auto ls = lines_of(g.formulas);
  CHECK(contains(ls, "[0.2|w(a)] v(a)."));
  CHECK(contains(ls, "[0.2|w(b)] v(b)."));
  CHECK(contains(ls, "[0.2|w(c)] v(c)."));
  CHECK(!contains(ls, "[0.2|w(b)] v(a)."));
}

TEST_CASE("triple brackets cross all formula and condition instances") {
  Program p = parse_program(
      "q(a).\n"
      "q(b).\n"
      "q(c).\n"
      "#domain q(X).\n"
      "[[[0.2|w(X)]]] v(X).\n");
  GroundedProgram g = ground_program(p);
  int pairs = 0;
  for (const auto& af : g.formulas)
    if (af.ann && af.ann->cond) ++pairs;
  CHECK(pairs == 9);
  auto ls = lines_of(g.formulas);
  CHECK(contains(ls, "[0.2|w(a)] v(a)."));
  CHECK(contains(ls, "[0.2|w(b)] v(a)."));
  CHECK(contains(ls, "[0.2|w(c)] v(c)."));
}

TEST_CASE("query files ground against background plus their own context") {
  Program bg = parse_program(
      "q(a).\n"
      "q(b).\n"
      "#domain q(X).\n");
  Program query = parse_program("[[?|w(X)]] v(X).\n", FileKind::Query);
  auto gs = ground_aux_file(query, bg);
  auto ls = lines_of(gs);
  REQUIRE(gs.size() == 2);
  CHECK(contains(ls, "[?|w(a)] v(a)."));
  CHECK(contains(ls, "[?|w(b)] v(b)."));

  // a declaration local to the query file takes precedence
  Program query2 = parse_program(
      "r(c).\n"
      "#domain r(X).\n"
      "[[?]] v(X).\n",
      FileKind::Query);
  auto gs2 = ground_aux_file(query2, bg);
  auto ls2 = lines_of(gs2);
  CHECK(contains(ls2, "[?] v(c)."));
  CHECK(!contains(ls2, "[?] v(a)."));
}

TEST_CASE("unsafe variables are reported with their name") {
  Program p = parse_program("[0.5] w(X).\n");
  CHECK_THROWS_WITH_AS(ground_program(p),
                       doctest::Contains("unsafe variable X"), ParseError);
}

TEST_CASE("level-2 count mismatch between formula and condition is an error") {
  Program p = parse_program(
      "q(a).\n"
      "q(b).\n"
      "r(c).\n"
      "r(d).\n"
      "r(e).\n"
      "#domain q(X).\n"
      "#domain r(Y).\n"
      "[[0.2|w(Y)]] v(X).\n");
  CHECK_THROWS_AS(ground_program(p), ParseError);
}

TEST_CASE("choice rules with bound bodies become ground choices") {
  Program p = parse_program(
      "coin(1..2).\n"
      "1{coin_out(N,heads), coin_out(N,tails)}1 :- coin(N).\n");
  GroundedProgram g = ground_program(p);
  auto ls = lines_of(g.formulas);
  CHECK(contains(ls, "1{coin_out(1,heads),coin_out(1,tails)}1."));
  CHECK(contains(ls, "1{coin_out(2,heads),coin_out(2,tails)}1."));
  CHECK(g.formulas.size() == 4);
}
