#pragma once

// Command-line front end and run orchestration. dispatch() turns argv-style
// tokens into a RunConfig: tasks are bound explicitly (-b/-q/-l/-e) or by
// file extension (.prasp/.query/.hypoth/.examples), switches select the
// sampler and the solver stage, and the -oN shortcuts expand to their
// switch combinations. run() then executes the pipeline per task: parse,
// ground, spanning program, initial sample, solver stage, query answering
// or weight learning. Each query file re-processes the background from
// scratch, so results never depend on sibling query files.
//
// Results and requested diagnostics go to `out`; warnings (one line each,
// prefixed "WARNING:") and --verbose/--debug chatter go to `err`. Hard
// failures are thrown; the binary maps them to exit code 1.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prasp/approx.hpp"
#include "prasp/rng.hpp"
#include "prasp/sampling.hpp"

namespace prasp {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The stage that produces the distribution consumed by the query stage.
enum class SolverKind {
  Nnls,         // constraint rows + non-negative least squares (default)
  LpIntervals,  // per-query linear-program bounds (--intervalresults)
  ItRefine,     // multiplicative refinement from the initial sample
  SimAnneal,    // annealed multiset, then counting or a solver pass
  MaxWalkSat,   // weighted local search, MAP-style world set
  Counting,     // relative frequencies of the initial sample (--nosolve)
};

struct PipelineOptions {
  // Solver stage.
  bool nosolve = false;
  bool nospan = false;
  bool weights2cc = false;
  bool intervalresults = false;
  bool simanneal = false;
  AnnealParams anneal{};
  bool itrefinement = false;
  RefineParams refine{};
  bool walksat = false;
  WalkSatParams walksatParams{};
  long ndistrs = 1;
  bool maxentropy = false;
  double maxentPrecision = 1e-4;  // refinement step threshold under --maxentropy
  bool ignoreentropy = false;

  // Independence handling.
  bool noautoindeps = false;  // accepted for compatibility; nothing is ever
                              // discovered automatically here
  bool noindepconstrs = false;
  bool ignoredeclindeps = false;
  long limitindepcombs = -1;  // -1 = unlimited subset length

  // Sampling knobs that exist for command-line compatibility: the internal
  // samplers always draw exactly from the enumerated world list, so these
  // only get recorded (and reported under --verbose).
  int flipsampconf = 0;
  long sirndconf = 100;
  bool initsampleGiven = false;
  bool modelsGiven = false;
  long models = 0;

  // Diagnostics.
  bool check = false;
  bool pwdistr = false;
  long pwdistrLimit = -1;  // cap on printed worlds, -1 = all
  bool pwsamples = false;
  long pwsamplesN = -1;  // draws with replacement, -1 = list each world once
  bool showentropy = false;
  bool showspan = false;
  bool showexpansion = false;
  bool verbose = false;
  bool debug = false;
  bool strict = false;  // exit 2 when any query result is unknown
  uint64_t seed = kDefaultSeed;

  // Learning.
  bool maxconjexamples = false;
  bool keepduplicateexamples = false;
  bool nonorm = false;

  bool help = false;
};

struct RunConfig {
  std::string backgroundPath;
  std::vector<std::string> queryPaths;  // processed in command-line order
  std::optional<std::string> hypothPath;
  std::optional<std::string> examplesPath;
  SamplerConfig sampler{};
  SolverKind solver = SolverKind::Nnls;
  PipelineOptions opts{};
};

// Token list -> RunConfig. Switch order never matters; file arguments keep
// their order only within the query list. Throws CliError on unknown
// switches, on switches this build recognizes but does not support, on
// malformed or missing arguments, and on invalid task combinations (zero
// or several background files, --learn without --examples, ...).
RunConfig dispatch(const std::vector<std::string>& args);

// Executes one configured run. Returns the exit status: 0 normally, 2 when
// --strict is set and at least one query came back unknown. File, parse,
// and solve failures are thrown with file context attached.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// The --help text.
std::string usage_text();

}  // namespace prasp
