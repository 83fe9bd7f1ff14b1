#pragma once

// Approximate inference over the possible worlds of a spanning program.
//
// Three engines live here. Simulated annealing grows a multiset of sampled
// worlds whose frequencies approach the declared formula weights, accepting
// or rejecting candidate extensions Metropolis-style under a geometric
// cooling schedule. Iterative refinement starts from an initial distribution
// over a fixed world list and repeatedly rescales the three cells each
// weighted formula induces (condition-and-formula, condition-without-
// formula, no-condition) until the distribution stops moving; started from
// uniform it converges to the maximum-entropy distribution consistent with
// the weights. MaxWalkSAT leaves stable-model semantics entirely: it runs
// weighted local search over classical truth assignments and returns
// low-cost assignments for MAP-style use.

#include <optional>
#include <vector>

#include "prasp/rng.hpp"
#include "prasp/sampling.hpp"
#include "prasp/spanning.hpp"
#include "prasp/worlds.hpp"

namespace prasp {

struct AnnealParams {
  double maxEnergy = 0.05;   // acceptable weight-vs-frequency distance
  double minTemp = 1e-150;   // stop once cooled below this
  double tempDecr = 0.95;    // geometric cooling factor per iteration
  int samplingMethod = 0;    // 0 near-uniform, 1/2 weight-product acceptance
                             // (1 honors declared independence), >= 3 the
                             // initial-sampling method of the same number
  double initTemp = 5.0;
  int samplesPerStep = 1;    // draws per increment for methods >= 3
  bool targetAll = true;     // false: only entries with weight < 1 count
  int maxTime = 5000;        // iteration budget (not wall clock)
  int parallelism = 4;       // candidate extensions tried per iteration
};

struct RefineParams {
  double epsilon = 0.02;     // stop when the step-to-step distance drops here
  int maxIterations = 1000;
  bool retainCounts = false; // start from multiset frequencies, not uniform
};

struct WalkSatParams {
  double costTarget = 1.0;   // record assignments whose cost is <= this
  int maxFlips = 100000;     // flips per try
  int maxTries = 10000;
  double p = 0.3;            // probability of a random-walk flip
  bool replacement = true;   // false: deduplicate recorded assignments
  int nModels = 1;           // stop after this many recorded assignments
};

// Distance between observed formula frequencies (over the engaged draws of
// `s`) and the declared weights: sqrt of the summed squared deviations.
// Interval weights contribute their distance to the nearest endpoint;
// conditional entries use the conditional frequency among draws satisfying
// the condition (no such draws: no contribution); `[.]`-style entries carry
// no target and are skipped. Throws when `s` has no engaged draws.
double energy(const SampleMultiset& s, const GroundProgram& gp,
              const std::vector<WeightedEntry>& weighted, bool targetAll);

// One sampling increment for the annealing loop. Methods 0-2 draw a single
// world near-uniformly (cfg.uniMethod selects the parity-constrained or
// plain draw; cfg.method/cfg.n are ignored); methods 1 and 2 then accept it
// with probability tied to the product of the weights of the supported
// formulas — method 1 over the largest declared-independent supported
// subset, method 2 over all of them — and return an empty increment on
// rejection. Methods >= 3 delegate to initial_sample with the same method
// number and n = samplesPerStep.
SampleMultiset sample_step(int method, const SpanningProgram& span,
                           const std::vector<Bits>& worlds,
                           const AnnealParams& params,
                           const SamplerConfig& cfg, SplitMix64& rng);

// The annealing loop. Per iteration, `parallelism` candidate extensions of
// the accepted multiset are drawn (each from its own split of `rng`), the
// lowest-energy one is kept and accepted either on improvement or with
// probability exp(-(e'-e)/temp); then temp decays by tempDecr. Stops as
// soon as the accepted energy reaches maxEnergy (a satisfying initial
// multiset is returned untouched), the temperature falls below minTemp, or
// maxTime iterations have run. Throws only when the final multiset contains
// no engaged draw at all. `acceptedEnergies`, when given, receives the
// energy of every accepted candidate in order.
SampleMultiset simulated_annealing(const SpanningProgram& span,
                                   const std::vector<Bits>& worlds,
                                   const AnnealParams& params,
                                   const SamplerConfig& cfg,
                                   SampleMultiset initSamples, SplitMix64& rng,
                                   std::vector<double>* acceptedEnergies = nullptr);

// A point-weighted formula for iterative refinement; no condition means
// the weight constrains Pr(formula) directly.
struct RefineItem {
  Formula formula;
  std::optional<Formula> cond;
  double weight = 0.5;
};

struct RefineResult {
  std::vector<Bits> worlds;    // deduplicated, first-encounter order
  std::vector<double> probs;   // parallel to `worlds`
  int iterations = 0;
  double lastDelta = 0.0;      // distance between the final two iterates
};

// Multiplicative refinement towards a distribution satisfying
// Pr(f | c) = w for every item. Each pass rescales, item by item, the
// probability mass of the three world cells the item induces; passes repeat
// until the euclidean step distance drops to epsilon or the iteration cap
// is hit. Items whose rescaling is undefined that round (all relevant cells
// empty of mass) are skipped for the round. Throws when `initSamples` has
// no engaged draws.
RefineResult iterative_refinement(const SampleMultiset& initSamples,
                                  const GroundProgram& gp,
                                  const std::vector<RefineItem>& items,
                                  const RefineParams& params);

// Input to maxwalksat: lo == hi for point weights. A lower bound >= 1 makes
// the formula hard (internal weight 1000); other intervals weigh in at
// their midpoint.
struct WeightedClause {
  Formula formula;
  double lo = 1.0, hi = 1.0;
};

// Weighted local search over classical truth assignments of the atoms
// occurring in `formulas`. Every formula must be "simple" (a ground
// literal, conjunction of literals, cardinality over literals, or a rule
// built from those); anything else throws with the offending formula in
// the message. Each try starts from a random assignment (or a randomly
// picked seed world when `seeds` is non-empty) and flips atoms of a random
// unsatisfied formula — with probability p an arbitrary one, otherwise the
// flip whose resulting cost is lowest (ties: lowest atom index). Collects
// assignments costing at most costTarget until nModels are found or the
// try budget runs out; may return fewer (or none).
std::vector<Bits> maxwalksat(const GroundProgram& gp,
                             const std::vector<WeightedClause>& formulas,
                             const WalkSatParams& params, SplitMix64& rng,
                             const std::vector<Bits>* seeds = nullptr);

}  // namespace prasp
