#pragma once

// Query evaluation over a computed world distribution, plus result
// formatting. Point answers are world-probability sums, conditionals the
// quotient Pr(f and c)/Pr(c), interval answers come from the linear-program
// bounds. Unannotated non-fact statements in a query file act as extra
// conjuncts of every satisfaction check (facts only feed grounding).

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prasp/linsys.hpp"
#include "prasp/sampling.hpp"
#include "prasp/worlds.hpp"

namespace prasp {

struct QueryResult {
  Formula formula;
  std::optional<Formula> cond;
  enum class Kind { Point, Interval, List, Unknown } kind = Kind::Unknown;
  double value = 0.0;         // Point
  double lo = 0.0, hi = 0.0;  // Interval
  std::vector<double> values;  // List: one point answer per distribution
};

// Ground query-file statements sorted into queries and context conjuncts.
struct QueryBatch {
  std::vector<AnnotatedFormula> queries;
  std::vector<Formula> context;
};
QueryBatch split_query_statements(const std::vector<AnnotatedFormula>& ground);

// Total probability of the worlds satisfying f (unclamped).
double mass_of(const Formula& f, const GroundProgram& gp,
               const std::vector<Bits>& worlds,
               const std::vector<double>& probs);

// Point or conditional-point answer; Unknown when the condition carries
// less than 1e-12 probability. Reported values are clamped into [0, 1].
QueryResult answer_query(const AnnotatedFormula& q,
                         const std::vector<Formula>& context,
                         const GroundProgram& gp,
                         const std::vector<Bits>& worlds,
                         const std::vector<double>& probs);

// Tight [lo, hi] answer subject to the constraint system; Unknown when the
// system is infeasible or the condition cannot have positive probability.
QueryResult answer_query_interval(const AnnotatedFormula& q,
                                  const std::vector<Formula>& context,
                                  const GroundProgram& gp,
                                  const std::vector<Bits>& worlds,
                                  const ConstraintSystem& sys);

// Deduplicated worlds with their relative frequencies; placeholders are
// skipped. Throws when the multiset holds no models.
std::pair<std::vector<Bits>, std::vector<double>> frequency_distribution(
    const SampleMultiset& s);

// Up to 16 significant digits, "0" and "1" for the exact endpoints.
std::string format_probability(double p);

// "[p] f." / "[p|c] f." / "[lo;hi] f." / "[p1,p2] f." / "[?] f."
std::string format_result(const QueryResult& r);

}  // namespace prasp
