#pragma once

// Samplers over possible worlds: uniform draws from the enumerated world
// list, parity-constrained near-uniform draws, and weighted flip-sampling
// that forces literals by thresholding per-formula rank vectors against
// their weights. Draws that contradict the program are recorded as empty
// placeholders and excluded from frequency denominators downstream.

#include <optional>
#include <vector>

#include "prasp/rng.hpp"
#include "prasp/spanning.hpp"
#include "prasp/worlds.hpp"

namespace prasp {

struct SampleMultiset {
  // nullopt marks an inconsistent draw (the empty-set placeholder)
  std::vector<std::optional<Bits>> items;

  size_t engaged() const {
    size_t k = 0;
    for (const auto& i : items) k += i.has_value() ? 1 : 0;
    return k;
  }
};

struct SamplerConfig {
  int method = 2;     // initial_sample dispatch, 0..7
  long n = 0;         // method 2: 0 = all worlds
  int uniMethod = 0;  // 0/1: from the enumerated list, 2: parity-constrained
  long xorQ1 = 100;   // candidate pool per parity draw
  long xorQ2 = -1;    // parity-constraint count, -1 = ceil(log2 |atoms|)
};

// n draws with replacement, uniform over `worlds`.
SampleMultiset sample_uniform(const std::vector<Bits>& worlds, long n,
                              SplitMix64& rng);

// One draw via random parity constraints: q2 of them (auto when < 0), each
// over a random half of the atom universe with a random target parity;
// the draw is uniform among the first q1 enumerated worlds satisfying all
// constraints. Unsatisfiable constraint sets are redrawn (50 attempts),
// then the draw falls back to plain uniform and sets fellBack.
struct XorDraw {
  Bits world;
  bool fellBack = false;
};
XorDraw xor_sample(const GroundProgram& gp, const std::vector<Bits>& worlds,
                   long q1, long q2, SplitMix64& rng);

// Weighted flip-sampling. Rank vectors per uncertain formula (stratified: a
// random permutation of 1/n..n/n; otherwise i.i.d. uniforms) are thresholded
// against lo + (hi-lo)*rand to decide the forced polarity of each formula;
// each draw is then uniform among worlds matching every forced polarity.
// respectIndep forces only formulas sharing one declared mutual group (or a
// single group-free formula), leaving the rest to the uniform world draw.
SampleMultiset flip_sample(const SpanningProgram& span,
                           const std::vector<Bits>& worlds, long n,
                           bool stratified, bool respectIndep,
                           SplitMix64& rng);

// Initial-sample dispatch: 0 empty; 1 near-uniform n times (per uniMethod);
// 2 first n enumerated worlds (n = 0: all); 3 resampling proportional to the
// product of declared-independent formula weights; 4/5 stratified flips
// (5 respecting independence); 6/7 unstratified flips (7 respecting).
// Method 3 without declared groups is an error.
SampleMultiset initial_sample(const SamplerConfig& cfg,
                              const SpanningProgram& span,
                              const std::vector<Bits>& worlds,
                              SplitMix64& rng);

}  // namespace prasp
