#pragma once

// Hypothesis weight learning. A task pairs background knowledge with a set
// of [?]-marked hypothesis formulas and a set of example formulas; learning
// searches for hypothesis weights that maximize the probability the induced
// distribution assigns to the examples (their product, or the probability of
// their conjunction). The search is Barzilai-Borwein gradient ascent over a
// numerically differentiated objective: the inner inference loop re-solves
// the distribution for each probed weight vector, so the backend favors
// cheap solvers (iterative refinement over the full world list while it is
// small, weighted flip-sampling plus frequency counting beyond that).

#include <cstdint>
#include <string>
#include <vector>

#include "prasp/approx.hpp"
#include "prasp/ast.hpp"
#include "prasp/rng.hpp"

namespace prasp {

struct LearningTask {
  Program background;
  std::vector<Formula> hypotheses;  // ground, weight slots to be learned
  std::vector<Formula> examples;    // ground, unweighted
  bool conjunctiveTarget = false;   // maximize Pr(e1 & ... & em) instead
  bool keepDuplicates = false;
  bool normalize = true;  // post-run consistency rescale
};

// Grounds hypothesis/example files against the background and validates
// them: hypothesis entries must be [?]-annotated (instances of [[?]] count
// individually), example entries must be bare formulas. Duplicate examples
// collapse unless keepDuplicates. Throws std::invalid_argument on an empty
// or malformed hypothesis set, std::runtime_error on weighted examples.
LearningTask make_learning_task(const Program& background,
                                const Program& hypothProgram,
                                const Program& examplesProgram,
                                bool conjunctiveTarget = false,
                                bool keepDuplicates = false,
                                bool normalize = true);

// Inner-inference knobs for one objective evaluation. With at most
// exactWorldCap worlds the distribution comes from iterative refinement
// over the full enumeration (deterministic); larger programs fall back to
// sampleSize weighted flips tallied into frequencies. The same seed is
// reused for every evaluation so finite differences see common random
// numbers.
struct InferenceConfig {
  size_t exactWorldCap = 4096;
  long sampleSize = 2000;
  bool stratified = true;
  bool respectIndep = true;
  uint64_t seed = kDefaultSeed;
  RefineParams refine{};
  int threads = 4;  // parallel gradient components; <=1 = sequential
};

struct LearnedWeights {
  std::vector<double> w;  // one weight per hypothesis, in [0,1]
  double objective = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

// Learned iterates are kept inside [kWeightFloor, kWeightCeil]: interior
// weights keep the spanning structure of the probed programs constant and
// keep difference quotients well-defined at the box edge.
inline constexpr double kWeightFloor = 0.001;
inline constexpr double kWeightCeil = 0.999;

// Probability of the examples under hypothesis weights w (product of
// per-example probabilities, or the conjunction probability when the task
// says so). Empty example list gives 1. Throws when inference is impossible
// (e.g. background plus hypotheses has no possible world).
double likelihood(const LearningTask& task, const std::vector<double>& w,
                  const InferenceConfig& inference = {});

// Forward-difference gradient of likelihood at w, step h_i = sqrt(eps)*w_i
// floored at 1e-8. Components are independent inference runs and evaluate
// in parallel when inference.threads allows.
std::vector<double> numeric_gradient(const LearningTask& task,
                                     const std::vector<double>& w,
                                     const InferenceConfig& inference = {});

// Barzilai-Borwein ascent from w0: step s_k = grad/alpha_k, iterates
// projected into the weight box, alpha adapted from successive gradients
// (the quotient s_k.y_k / s_k.s_k of the equivalent descent formulation,
// reset to alpha0 when degenerate). Stops when |s_k| <= tol or after
// maxIter steps; five consecutive undefined objectives abort with the best
// weights seen so far and a warning. Unless task.normalize is off, a final
// consistency check rescales weights that the background cannot support to
// the values achieved by the nearest satisfiable distribution.
// objectiveTrace, when given, receives the objective at every accepted
// iterate (starting point included).
LearnedWeights bb_learn(const LearningTask& task, std::vector<double> w0,
                        double alpha0 = 1.0, int maxIter = 200,
                        double tol = 1e-4,
                        const InferenceConfig& inference = {},
                        std::vector<double>* objectiveTrace = nullptr);

// bb_learn with the stock start: w0 = (0.5,...,0.5), alpha0 = 1.
LearnedWeights learn_weights(const LearningTask& task,
                             const InferenceConfig& inference = {});

}  // namespace prasp
