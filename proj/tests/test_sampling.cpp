#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "prasp/grounder.hpp"
#include "prasp/parser.hpp"
#include "prasp/sampling.hpp"
#include "prasp/spanning.hpp"
#include "prasp/worlds.hpp"
#include "test_util.hpp"

using namespace prasp;

namespace {

struct Setup {
  SpanningProgram sp;
  std::vector<Bits> worlds;
};

Setup setup(const std::string& text) {
  Setup s;
  s.sp = build_spanning_program(ground_program(parse_program(text)));
  s.worlds = enumerate_answer_sets(s.sp.ground);
  return s;
}

double freq_of(const Setup& s, const SampleMultiset& m, const std::string& f) {
  Formula q = parse_formula(f);
  size_t hit = 0, total = 0;
  for (const auto& item : m.items) {
    if (!item) continue;
    ++total;
    hit += holds(q, s.sp.ground, *item) ? 1 : 0;
  }
  REQUIRE(total > 0);
  return double(hit) / double(total);
}

}  // namespace

TEST_CASE("uniform sampling: degenerate and statistical behaviour") {
  Setup one = setup("a.\n");
  REQUIRE(one.worlds.size() == 1);
  SplitMix64 rng(7);
  SampleMultiset s = sample_uniform(one.worlds, 3, rng);
  REQUIRE(s.items.size() == 3);
  for (const auto& i : s.items) CHECK(*i == one.worlds[0]);

  CHECK(sample_uniform(one.worlds, 0, rng).items.empty());

  Setup two = setup("0{a}1.\n");
  SplitMix64 rng2(11);
  SampleMultiset big = sample_uniform(two.worlds, 10000, rng2);
  double f = freq_of(two, big, "a");
  CHECK(f >= 0.485);  // 3 sigma = 0.015
  CHECK(f <= 0.515);

  CHECK_THROWS_AS(sample_uniform({}, 1, rng), std::runtime_error);
}

TEST_CASE("identical seeds reproduce the multiset exactly") {
  Setup s = setup(read_fixture("kb1.prasp"));
  SplitMix64 a(42), b(42);
  SampleMultiset m1 = flip_sample(s.sp, s.worlds, 200, true, false, a);
  SampleMultiset m2 = flip_sample(s.sp, s.worlds, 200, true, false, b);
  REQUIRE(m1.items.size() == m2.items.size());
  for (size_t i = 0; i < m1.items.size(); ++i) {
    REQUIRE(m1.items[i].has_value() == m2.items[i].has_value());
    if (m1.items[i]) CHECK(*m1.items[i] == *m2.items[i]);
  }
}

TEST_CASE("parity-constrained draws: fixed points and uniformity") {
  Setup one = setup("a.\nb :- a.\n");
  REQUIRE(one.worlds.size() == 1);
  SplitMix64 rng(3);
  for (int i = 0; i < 5; ++i)
    CHECK(xor_sample(one.sp.ground, one.worlds, 100, -1, rng).world ==
          one.worlds[0]);

  // chi-square over the 4 coin worlds, 20000 draws, 3 dof, alpha = 0.001
  Setup coins = setup(read_fixture("kb1.prasp"));
  REQUIRE(coins.worlds.size() == 4);
  SplitMix64 rng2(1234);
  std::map<std::vector<uint64_t>, int> counts;
  const int N = 20000;
  for (int i = 0; i < N; ++i) {
    XorDraw d = xor_sample(coins.sp.ground, coins.worlds, 100, -1, rng2);
    counts[d.world.w]++;
  }
  double chi2 = 0.0, expect = double(N) / 4.0;
  for (const auto& w : coins.worlds) {
    double obs = counts[w.w];
    chi2 += (obs - expect) * (obs - expect) / expect;
  }
  CHECK(chi2 < 16.27);

  // q2 = 0 keeps no constraints: uniform among the first q1
  SplitMix64 rng3(5);
  XorDraw free = xor_sample(coins.sp.ground, coins.worlds, 100, 0, rng3);
  CHECK(!free.fellBack);
}

TEST_CASE("sixteen symmetric worlds stay near uniform under parity draws") {
  Setup s = setup("0{a}1.\n0{b}1.\n0{c}1.\n0{d}1.\n");
  REQUIRE(s.worlds.size() == 16);
  SplitMix64 rng(20240817);
  std::map<std::vector<uint64_t>, int> counts;
  const int N = 50000;
  for (int i = 0; i < N; ++i)
    counts[xor_sample(s.sp.ground, s.worlds, 100, -1, rng).world.w]++;
  double tv = 0.0;
  for (const auto& w : s.worlds)
    tv += std::abs(double(counts[w.w]) / N - 1.0 / 16.0);
  CHECK(tv / 2.0 <= 0.05);
}

TEST_CASE("stratified ranks hit point weights exactly at full strata") {
  Setup s = setup("[0.5] a.\n");
  SplitMix64 rng(9);
  SampleMultiset m = flip_sample(s.sp, s.worlds, 10, true, false, rng);
  int pos = 0;
  for (const auto& i : m.items) {
    REQUIRE(i.has_value());
    pos += holds(parse_formula("a"), s.sp.ground, *i) ? 1 : 0;
  }
  CHECK(pos == 5);
}

TEST_CASE("flip frequencies track weights within four sigma") {
  Setup s = setup(read_fixture("coins3.prasp"));
  const long N = 20000;
  auto bound = [&](double w) { return 4.0 * std::sqrt(w * (1 - w) / double(N)); };

  for (bool stratified : {true, false}) {
    CAPTURE(stratified);
    SplitMix64 rng(2025);
    SampleMultiset m = flip_sample(s.sp, s.worlds, N, stratified, false, rng);
    CHECK(std::abs(freq_of(s, m, "coin_out(1,heads)") - 0.6) <= bound(0.6));
    CHECK(std::abs(freq_of(s, m, "coin_out(2,heads)") - 0.5) <= bound(0.5));
    CHECK(std::abs(freq_of(s, m, "coin_out(3,heads)") - 0.5) <= bound(0.5));
    // every engaged draw is a real answer set
    for (const auto& i : m.items)
      if (i) CHECK(is_stable(s.sp.ground, *i));
  }
}

TEST_CASE("independence-respecting flips leave cross-group formulas free") {
  Setup s = setup("[0.9] a.\n#indep\n[0.9] b.\n[0.9] c.\n#endIndep\n");
  SplitMix64 rng(77);
  const long N = 20000;
  SampleMultiset m = flip_sample(s.sp, s.worlds, N, false, true, rng);
  // a (group-free, first) is forced toward 0.9; b and c stay uniform
  CHECK(std::abs(freq_of(s, m, "a") - 0.9) <= 0.02);
  CHECK(std::abs(freq_of(s, m, "b") - 0.5) <= 0.02);
  CHECK(std::abs(freq_of(s, m, "c") - 0.5) <= 0.02);

  // without the guard all three are forced
  SplitMix64 rng2(78);
  SampleMultiset m2 = flip_sample(s.sp, s.worlds, N, false, false, rng2);
  CHECK(std::abs(freq_of(s, m2, "b") - 0.9) <= 0.02);
}

TEST_CASE("initial-sample dispatch: empty, exhaustive, and product modes") {
  Setup s = setup(read_fixture("kb1.prasp"));
  SplitMix64 rng(4);

  SamplerConfig empty;
  empty.method = 0;
  CHECK(initial_sample(empty, s.sp, s.worlds, rng).items.empty());

  SamplerConfig all;
  all.method = 2;
  all.n = 0;
  SampleMultiset ex = initial_sample(all, s.sp, s.worlds, rng);
  REQUIRE(ex.items.size() == 4);
  for (size_t i = 0; i < 4; ++i) CHECK(*ex.items[i] == s.worlds[i]);

  SamplerConfig prod;
  prod.method = 3;
  prod.n = 20000;
  SampleMultiset pm = initial_sample(prod, s.sp, s.worlds, rng);
  CHECK(std::abs(freq_of(s, pm, "win") - 0.3) <= 0.015);
  CHECK(std::abs(freq_of(s, pm, "coin1(heads)") - 0.6) <= 0.015);

  // method 3 demands declared independence
  Setup noGroups = setup("[0.5] a.\n");
  SamplerConfig bad;
  bad.method = 3;
  bad.n = 10;
  CHECK_THROWS_WITH_AS(initial_sample(bad, noGroups.sp, noGroups.worlds, rng),
                       doctest::Contains("methods 4-7"), std::runtime_error);
}
