#pragma once

// The constraint system over possible worlds and its solvers. Each weighted
// formula pins the total probability of the worlds satisfying it into
// [lo, hi]; conditional weights become homogeneous rows; independence
// declarations multiply out over subsets; one normalization row forces the
// probabilities to sum to 1. Point solutions come from non-negative least
// squares (Lawson-Hanson), interval answers from a two-phase primal simplex,
// conditional intervals through the Charnes-Cooper transform, and ties among
// equally good solutions are broken by entropy.

#include <string>
#include <vector>

#include "prasp/rng.hpp"
#include "prasp/spanning.hpp"
#include "prasp/worlds.hpp"

namespace prasp {

inline constexpr double kUnboundedRow = 1e30;  // +/- sentinel for lo/hi

enum class RowKind { Weight, Conditional, Independence, Normalization };

struct ConstraintRow {
  std::vector<double> coef;  // one entry per world
  double lo = 0.0, hi = 0.0;
  RowKind kind = RowKind::Weight;
  int sourceId = -1;  // index into the weighted-entry list, -1 for synthetic
};

struct ConstraintSystem {
  std::vector<ConstraintRow> rows;
  size_t nWorlds = 0;
};

struct WorldDistribution {
  std::vector<double> probs;  // parallel to the world list
  double residual = 0.0;      // interval-violation norm, see residual_of
};

// Rows from weighted entries evaluated over the enumerated worlds.
// mutualGroups/pairwiseGroups hold indices into `weighted`; mutual groups
// produce one product row per subset of size >= 2 (smallest subsets first,
// capped at limitIndepCombs when >= 0), pairwise groups pairs only.
// Conditions of conditional entries additionally get Pr(cond) >= 1e-9 rows.
// Throws std::runtime_error when `worlds` is empty.
ConstraintSystem build_system(const std::vector<Bits>& worlds,
                              const GroundProgram& gp,
                              const std::vector<WeightedEntry>& weighted,
                              const std::vector<std::vector<int>>& mutualGroups,
                              const std::vector<std::vector<int>>& pairwiseGroups,
                              long limitIndepCombs = -1);

// sqrt of the summed squared distances of each row value to its [lo, hi].
double residual_of(const ConstraintSystem& sys, const std::vector<double>& probs);

// -inf < x -> 0 entropy convention; natural log.
double entropy(const std::vector<double>& probs);

// Non-negative least squares, min ||Ax - b|| s.t. x >= 0 (Lawson-Hanson
// active set). scanOrder, when non-null, permutes the order in which
// candidate columns are considered, which selects among equally good
// active sets.
struct NnlsResult {
  std::vector<double> x;
  double residual = 0.0;  // ||Ax - b||
};
NnlsResult nnls(const std::vector<std::vector<double>>& A,
                const std::vector<double>& b,
                const std::vector<int>* scanOrder = nullptr);

// Minimum-norm least-squares solution x = A^T (A A^T)^+ b (may be negative).
std::vector<double> min_norm_ls(const std::vector<std::vector<double>>& A,
                                const std::vector<double>& b);

enum class PickMode { Default, IgnoreEntropy };

// Solve the system for a single distribution. Default mode gathers the
// minimum-norm candidate plus `nCandidates` NNLS runs under randomized
// column orders and keeps the maximum-entropy one among those with
// (near-)minimal residual; IgnoreEntropy returns the deterministic NNLS
// solution. Probabilities are clamped to >= 0 and renormalized.
WorldDistribution pick_distribution(const ConstraintSystem& sys,
                                    PickMode mode, int nCandidates,
                                    SplitMix64& rng);

// Tight probability interval of the worlds selected by `indicator` subject
// to the system, via two-phase simplex (Bland's rule, capped iterations).
// Throws std::runtime_error("primal infeasible") when no distribution
// satisfies every row.
std::pair<double, double> lp_bounds(const ConstraintSystem& sys,
                                    const std::vector<double>& indicator);

// Interval for a conditional query Pr(f | c) = Pr(f and c)/Pr(c) via the
// Charnes-Cooper fractional-program transform. fcInd selects worlds
// satisfying f and c, cInd those satisfying c.
std::pair<double, double> lp_conditional_bounds(const ConstraintSystem& sys,
                                                const std::vector<double>& fcInd,
                                                const std::vector<double>& cInd);

}  // namespace prasp
