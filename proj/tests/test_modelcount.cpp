#include <string>
#include <vector>

#include "doctest.h"
#include "prasp/grounder.hpp"
#include "prasp/modelcount.hpp"
#include "prasp/parser.hpp"
#include "prasp/spanning.hpp"
#include "prasp/worlds.hpp"
#include "test_util.hpp"

using namespace prasp;

namespace {

struct CcSetup {
  CcResult cc;
  GroundProgram gp;
  std::vector<Bits> worlds;
};

CcSetup cc_setup(const std::string& text, CountingConfig cfg = {}) {
  CcSetup s;
  s.cc = weights2cc_transform(ground_program(parse_program(text)), cfg);
  s.gp = build_spanning_program(s.cc.program).ground;
  s.worlds = enumerate_answer_sets(s.gp);
  return s;
}

long count_holding(const CcSetup& s, const std::string& q) {
  Formula f = parse_formula(q);
  long c = 0;
  for (const auto& w : s.worlds) c += holds(f, s.gp, w) ? 1 : 0;
  return c;
}

double pr(const CcSetup& s, const std::string& q) {
  return counting_probability(s.gp, s.worlds, parse_formula(q));
}

}  // namespace

TEST_CASE("best fraction under a denominator cap") {
  CHECK(best_fraction(0.6, 20) == std::pair<long, long>(3, 5));
  CHECK(best_fraction(0.5, 20) == std::pair<long, long>(1, 2));
  CHECK(best_fraction(1.0, 20) == std::pair<long, long>(1, 1));
  CHECK(best_fraction(0.0, 20) == std::pair<long, long>(0, 1));
  CHECK(best_fraction(1.0 / 3.0, 20) == std::pair<long, long>(1, 3));
  CHECK(best_fraction(0.15, 20) == std::pair<long, long>(3, 20));
  CHECK(best_fraction(0.4, 20) == std::pair<long, long>(2, 5));
  CHECK(best_fraction(0.75, 20) == std::pair<long, long>(3, 4));
  // 0.61 has no exact small fraction; 11/18 is the closest under 20 and a
  // tighter cap falls back to 3/5.
  CHECK(best_fraction(0.61, 20) == std::pair<long, long>(11, 18));
  CHECK(best_fraction(0.61, 10) == std::pair<long, long>(3, 5));
}

TEST_CASE("single weighted fact splits the models per its fraction") {
  CcSetup s = cc_setup("[0.5] a.\n");
  REQUIRE(s.cc.fractions == std::vector<std::pair<long, long>>{{1, 2}});
  REQUIRE(s.worlds.size() == 2);
  CHECK(pr(s, "a") == 0.5);
  CHECK(s.gp.find("hp__cc0_1") >= 0);
  CHECK(s.cc.warnings.empty());
}

TEST_CASE("weight one passes through, weight zero forbids") {
  CcSetup one = cc_setup("[1] a.\n");
  REQUIRE(one.cc.fractions == std::vector<std::pair<long, long>>{{1, 1}});
  REQUIRE(one.worlds.size() == 1);
  CHECK(pr(one, "a") == 1.0);
  CHECK(one.gp.find("hp__cc0_1") < 0);

  CcSetup zero = cc_setup("0{a}1.\n[0] a.\n");
  REQUIRE(zero.cc.fractions == std::vector<std::pair<long, long>>{{0, 1}});
  REQUIRE(zero.worlds.size() == 1);
  CHECK(pr(zero, "a") == 0.0);
}

TEST_CASE("three coins count to the exact product weights") {
  CcSetup s = cc_setup(read_fixture("coins3.prasp"));
  REQUIRE(s.cc.fractions ==
          std::vector<std::pair<long, long>>{{3, 5}, {1, 2}, {1, 2}});
  REQUIRE(s.worlds.size() == 20);

  CHECK(pr(s, "win") == 0.15);
  CHECK(pr(s, "coin_out(1,heads)") == 0.6);
  CHECK(pr(s, "coin_out(2,heads)") == 0.5);
  CHECK(pr(s, "coin_out(3,heads)") == 0.5);

  // Conjunctions of independent weighted atoms are exact fractions:
  // cnt/total == prod(m)/prod(n), checked without division.
  CHECK(count_holding(s, "coin_out(1,heads) & coin_out(2,heads)") * 10 ==
        long(s.worlds.size()) * 3);
  CHECK(count_holding(s, "coin_out(2,heads) & coin_out(3,heads)") * 4 ==
        long(s.worlds.size()) * 1);
  CHECK(count_holding(
            s, "coin_out(1,heads) & coin_out(2,heads) & coin_out(3,heads)") *
            20 ==
        long(s.worlds.size()) * 3);
}

TEST_CASE("weighted rules and strong negation get the helper encoding") {
  CcSetup s = cc_setup("a.\n[0.5] b :- a.\n");
  REQUIRE(s.worlds.size() == 2);
  CHECK(pr(s, "a") == 1.0);
  CHECK(pr(s, "b") == 0.5);

  CcSetup neg = cc_setup("[0.5] -a.\n");
  REQUIRE(neg.worlds.size() == 2);
  CHECK(pr(neg, "-a") == 0.5);
}

TEST_CASE("conditional and compound weights are rejected") {
  GroundedProgram cond = ground_program(parse_program("c.\n[0.5|c] a.\n"));
  CHECK_THROWS_WITH_AS(weights2cc_transform(cond, {}),
                       doctest::Contains("conditional"), std::runtime_error);

  GroundedProgram disj = ground_program(parse_program("[0.5] a | b.\n"));
  CHECK_THROWS_WITH_AS(weights2cc_transform(disj, {}),
                       doctest::Contains("facts and rules"),
                       std::runtime_error);
}

TEST_CASE("inexact and interval weights warn") {
  CcSetup s = cc_setup("[0.61] a.\n");
  REQUIRE(s.cc.fractions == std::vector<std::pair<long, long>>{{11, 18}});
  REQUIRE(s.cc.warnings.size() == 1);
  CHECK(s.cc.warnings[0].find("11/18") != std::string::npos);
  REQUIRE(s.worlds.size() == 18);
  CHECK(pr(s, "a") == 11.0 / 18.0);

  CountingConfig tight;
  tight.denominatorCap = 10;
  CcSetup t = cc_setup("[0.61] a.\n", tight);
  REQUIRE(t.cc.fractions == std::vector<std::pair<long, long>>{{3, 5}});
  CHECK(pr(t, "a") == 0.6);

  CcSetup iv = cc_setup("[0.4;0.6] a.\n");
  REQUIRE(iv.cc.fractions == std::vector<std::pair<long, long>>{{1, 2}});
  REQUIRE(iv.cc.warnings.size() == 1);
  CHECK(iv.cc.warnings[0].find("midpoint") != std::string::npos);
  CHECK(pr(iv, "a") == 0.5);

  CountingConfig bad;
  bad.denominatorCap = 1;
  GroundedProgram g = ground_program(parse_program("[0.5] a.\n"));
  CHECK_THROWS_AS(weights2cc_transform(g, bad), std::invalid_argument);
}

TEST_CASE("plain counting over unweighted knowledge") {
  // 1{h1,h2,h3}1 with p on h1 and q otherwise: thirds, printed as the
  // familiar 16-digit doubles downstream.
  CcSetup s = cc_setup(read_fixture("counting.prasp"));
  REQUIRE(s.worlds.size() == 3);
  CHECK(pr(s, "p") == 1.0 / 3.0);
  CHECK(pr(s, "q") == 2.0 / 3.0);
  CHECK(pr(s, "p") == 0.3333333333333333);
  CHECK(pr(s, "q") == 0.6666666666666666);

  CcSetup ab = cc_setup("1{a,b}1.\n");
  REQUIRE(ab.worlds.size() == 2);
  CHECK(pr(ab, "a") == 0.5);
  CHECK(pr(ab, "b") == 0.5);

  CcSetup none = cc_setup("a.\n:- a.\n");
  CHECK(none.worlds.empty());
  CHECK_THROWS_AS(counting_probability(none.gp, none.worlds,
                                       parse_formula("a")),
                  std::runtime_error);
}

TEST_CASE("ten coins: fractions checked symbolically, no enumeration") {
  GroundedProgram g = ground_program(parse_program(read_fixture(
      "coins10.prasp")));
  CcResult cc = weights2cc_transform(g, {});
  REQUIRE(cc.fractions.size() == 10);
  CHECK(cc.fractions[0] == std::pair<long, long>(3, 5));
  long num = 1, den = 1;
  for (const auto& [m, n] : cc.fractions) {
    num *= m;
    den *= n;
  }
  CHECK(num == 3);
  CHECK(den == 2560);
  // All-heads probability 0.6 * 0.5^9 as an exact fraction.
  CHECK(double(num) / double(den) == 0.001171875);
  CHECK(cc.warnings.empty());
}

TEST_CASE("independent triples keep exact product semantics") {
  const double triples[][3] = {
      {0.2, 0.5, 0.8}, {0.25, 0.75, 0.4}, {0.6, 0.5, 0.9}};
  for (const auto& t : triples) {
    CAPTURE(t[0]);
    std::string text = "[" + std::to_string(t[0]) + "] a.\n[" +
                       std::to_string(t[1]) + "] b.\n[" +
                       std::to_string(t[2]) + "] c.\n";
    CcSetup s = cc_setup(text);
    REQUIRE(s.cc.fractions.size() == 3);
    long total = 1;
    for (const auto& [m, n] : s.cc.fractions) total *= n;
    REQUIRE(long(s.worlds.size()) == total);

    const char* names[] = {"a", "b", "c"};
    for (int mask = 1; mask < 8; ++mask) {
      std::string q;
      long num = 1, den = 1;
      for (int i = 0; i < 3; ++i) {
        if (!((mask >> i) & 1)) continue;
        if (!q.empty()) q += " & ";
        q += names[i];
        num *= s.cc.fractions[size_t(i)].first;
        den *= s.cc.fractions[size_t(i)].second;
      }
      CHECK(count_holding(s, q) * den == total * num);
    }
  }
}
