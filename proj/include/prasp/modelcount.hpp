#pragma once

// Inference by plain model counting: answer-set frequencies stand in for
// probabilities. Weighted formulas can first be compiled away with the
// choice-construct conversion: each weight w ~ m/n becomes a 1{h1..hn}1
// pick over fresh helper atoms, with the formula forced true under the
// first m helpers and forced false under the rest. Counting the models of
// the converted program then reproduces the weights exactly - provided the
// weighted formulas are mutually independent, which is not checked.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prasp/grounder.hpp"
#include "prasp/worlds.hpp"

namespace prasp {

struct CountingConfig {
  bool weights2cc = false;  // compile weights into helper choices
  int denominatorCap = 20;  // largest n tried when approximating w by m/n
};

// Closest fraction m/n to w with 1 <= n <= maxDenominator, reduced; ties
// keep the smallest denominator.
std::pair<long, long> best_fraction(double w, int maxDenominator);

struct CcResult {
  GroundedProgram program;  // weight-free, ready for the spanning stage
  // (m, n) per replaced weight, in statement order
  std::vector<std::pair<long, long>> fractions;
  std::vector<std::string> warnings;  // inexact fractions, interval collapse
};

// Replaces every point- or interval-weighted statement with its helper
// encoding. Supported shapes: facts (atoms, strong negation) and rules
// over ground literals. Conditional weights have no counting encoding and
// are rejected.
CcResult weights2cc_transform(const GroundedProgram& g,
                              const CountingConfig& cfg);

// Relative frequency of f over an enumerated world list.
double counting_probability(const GroundProgram& gp,
                            const std::vector<Bits>& worlds, const Formula& f);

}  // namespace prasp
