#include "prasp/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace prasp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Entries that carry an actual probability target; `[.]` spans do not.
bool has_target(const WeightedEntry& e) {
  return e.ann.kind == AnnKind::Point || e.ann.kind == AnnKind::IntervalW;
}

double point_weight(const Annotation& a) {
  return a.isPoint() ? a.lo : 0.5 * (a.lo + a.hi);
}

// Per-entry support counters, maintained incrementally so the annealing
// loop does not rescan the whole multiset for every candidate. For
// conditional entries `den` counts draws satisfying the condition; for the
// rest the engaged total is the denominator.
struct FreqState {
  long engaged = 0;
  struct Cnt {
    long sup = 0, den = 0;
  };
  std::vector<Cnt> cnt;
};

void fold_in(FreqState& st, const SampleMultiset& inc,
             const GroundProgram& gp,
             const std::vector<WeightedEntry>& weighted) {
  st.cnt.resize(weighted.size());
  for (const auto& item : inc.items) {
    if (!item) continue;
    ++st.engaged;
    for (size_t i = 0; i < weighted.size(); ++i) {
      const auto& e = weighted[i];
      if (!has_target(e)) continue;
      if (e.ann.cond) {
        if (!holds(*e.ann.cond, gp, *item)) continue;
        ++st.cnt[i].den;
      }
      if (holds(e.formula, gp, *item)) ++st.cnt[i].sup;
    }
  }
}

double energy_of_state(const FreqState& st,
                       const std::vector<WeightedEntry>& weighted,
                       bool targetAll) {
  double sum2 = 0.0;
  for (size_t i = 0; i < weighted.size(); ++i) {
    const auto& e = weighted[i];
    if (!has_target(e)) continue;
    if (!targetAll && e.ann.lo >= 1.0) continue;
    long den = e.ann.cond ? st.cnt[i].den : st.engaged;
    if (den == 0) continue;  // conditional without evidence yet
    double freq = double(st.cnt[i].sup) / double(den);
    double d = 0.0;
    if (freq < e.ann.lo)
      d = e.ann.lo - freq;
    else if (freq > e.ann.hi)
      d = freq - e.ann.hi;
    sum2 += d * d;
  }
  return std::sqrt(sum2);
}

Bits one_uniform(const SamplerConfig& cfg, const GroundProgram& gp,
                 const std::vector<Bits>& worlds, SplitMix64& rng) {
  if (cfg.uniMethod == 2)
    return xor_sample(gp, worlds, cfg.xorQ1, cfg.xorQ2, rng).world;
  return *sample_uniform(worlds, 1, rng).items[0];
}

}  // namespace

double energy(const SampleMultiset& s, const GroundProgram& gp,
              const std::vector<WeightedEntry>& weighted, bool targetAll) {
  if (s.engaged() == 0)
    throw std::runtime_error(
        "cannot evaluate energy: the sample multiset holds no models");
  FreqState st;
  fold_in(st, s, gp, weighted);
  return energy_of_state(st, weighted, targetAll);
}

SampleMultiset sample_step(int method, const SpanningProgram& span,
                           const std::vector<Bits>& worlds,
                           const AnnealParams& params,
                           const SamplerConfig& cfg, SplitMix64& rng) {
  if (method >= 3) {
    SamplerConfig sub = cfg;
    sub.method = method;
    sub.n = params.samplesPerStep;
    return initial_sample(sub, span, worlds, rng);
  }

  SampleMultiset inc;
  Bits cs = one_uniform(cfg, span.ground, worlds, rng);
  if (method == 0) {
    inc.items.push_back(std::move(cs));
    return inc;
  }

  // Weight-product acceptance. Conditional entries stay out of the
  // product; spans weigh 1 by dropping out of the supported set.
  std::vector<int> supported;
  for (size_t i = 0; i < span.weighted.size(); ++i) {
    const auto& e = span.weighted[i];
    if (!has_target(e) || e.ann.cond) continue;
    if (holds(e.formula, span.ground, cs)) supported.push_back(int(i));
  }

  double prod = 1.0;
  size_t picked = 0;  // size of the subset realizing the product
  if (method == 2) {
    // everything is assumed mutually independent
    for (int i : supported) prod *= point_weight(span.weighted[size_t(i)].ann);
    picked = supported.size();
  } else {
    // smallest product over a declared-independent supported subset: the
    // empty set, single formulas, whole mutual groups, pairwise pairs
    for (int i : supported) {
      double w = point_weight(span.weighted[size_t(i)].ann);
      if (w < prod) {
        prod = w;
        picked = 1;
      }
    }
    std::map<int, std::pair<double, size_t>> mutual;
    std::map<int, std::vector<int>> pairwise;
    for (int i : supported) {
      const auto& e = span.weighted[size_t(i)];
      if (e.indepGroup >= 0) {
        auto& [p, c] = mutual[e.indepGroup];
        if (c == 0) p = 1.0;
        p *= point_weight(e.ann);
        ++c;
      }
      if (e.pIndepGroup >= 0) pairwise[e.pIndepGroup].push_back(i);
    }
    for (const auto& [g, pc] : mutual)
      if (pc.first < prod) {
        prod = pc.first;
        picked = pc.second;
      }
    for (const auto& [g, v] : pairwise)
      for (size_t a = 0; a < v.size(); ++a)
        for (size_t b = a + 1; b < v.size(); ++b) {
          double w = point_weight(span.weighted[size_t(v[a])].ann) *
                     point_weight(span.weighted[size_t(v[b])].ann);
          if (w < prod) {
            prod = w;
            picked = 2;
          }
        }
  }

  double r = cs.count() == picked ? prod : rng.uniform() * prod;
  if (rng.uniform() <= r) inc.items.push_back(std::move(cs));
  return inc;
}

SampleMultiset simulated_annealing(const SpanningProgram& span,
                                   const std::vector<Bits>& worlds,
                                   const AnnealParams& params,
                                   const SamplerConfig& cfg,
                                   SampleMultiset initSamples, SplitMix64& rng,
                                   std::vector<double>* acceptedEnergies) {
  SampleMultiset s = std::move(initSamples);
  FreqState state;
  fold_in(state, s, span.ground, span.weighted);
  double e = state.engaged > 0
                 ? energy_of_state(state, span.weighted, params.targetAll)
                 : kInf;

  const int width = std::max(1, params.parallelism);
  double temp = params.initTemp;
  for (int k = 0; k <= params.maxTime && temp >= params.minTemp &&
                  e > params.maxEnergy;
       ++k, temp *= params.tempDecr) {
    // Candidate generators are split off up front: each extension draws
    // from its own stream, so evaluation order carries no state.
    std::vector<SplitMix64> streams;
    streams.reserve(size_t(width));
    for (int i = 0; i < width; ++i) streams.emplace_back(rng.next());

    SampleMultiset bestInc;
    FreqState bestState;
    double bestE = kInf;
    bool haveBest = false;
    for (int i = 0; i < width; ++i) {
      SampleMultiset inc = sample_step(params.samplingMethod, span, worlds,
                                       params, cfg, streams[size_t(i)]);
      FreqState cand = state;
      fold_in(cand, inc, span.ground, span.weighted);
      double ce = cand.engaged > 0
                      ? energy_of_state(cand, span.weighted, params.targetAll)
                      : kInf;
      if (!haveBest || ce < bestE) {
        haveBest = true;
        bestE = ce;
        bestInc = std::move(inc);
        bestState = std::move(cand);
      }
    }

    bool accept;
    if (std::isinf(bestE) && std::isinf(e))
      accept = false;  // nothing drawn yet on either side
    else if (bestE < e)
      accept = true;
    else
      accept = rng.uniform() < std::exp(-(bestE - e) / temp);
    if (accept) {
      for (auto& item : bestInc.items) s.items.push_back(std::move(item));
      state = std::move(bestState);
      e = bestE;
      if (acceptedEnergies) acceptedEnergies->push_back(e);
    }
  }

  if (state.engaged == 0)
    throw std::runtime_error(
        "simulated annealing produced no models within the iteration budget");
  return s;
}

RefineResult iterative_refinement(const SampleMultiset& initSamples,
                                  const GroundProgram& gp,
                                  const std::vector<RefineItem>& items,
                                  const RefineParams& params) {
  RefineResult r;
  std::map<Bits, size_t> index;
  std::vector<long> counts;
  long total = 0;
  for (const auto& item : initSamples.items) {
    if (!item) continue;
    ++total;
    auto [pos, fresh] = index.try_emplace(*item, r.worlds.size());
    if (fresh) {
      r.worlds.push_back(*item);
      counts.push_back(0);
    }
    ++counts[pos->second];
  }
  if (total == 0)
    throw std::runtime_error(
        "iterative refinement needs at least one model to start from");

  const size_t n = r.worlds.size();
  r.probs.assign(n, 1.0 / double(n));
  if (params.retainCounts)
    for (size_t i = 0; i < n; ++i)
      r.probs[i] = double(counts[i]) / double(total);

  // World partition per item: 0 = condition and formula, 1 = condition
  // without formula, 2 = condition fails.
  std::vector<std::vector<int8_t>> cell(items.size());
  for (size_t j = 0; j < items.size(); ++j) {
    cell[j].resize(n);
    for (size_t i = 0; i < n; ++i) {
      bool c = !items[j].cond || holds(*items[j].cond, gp, r.worlds[i]);
      cell[j][i] =
          !c ? 2 : (holds(items[j].formula, gp, r.worlds[i]) ? 0 : 1);
    }
  }

  std::vector<double> prev(n);
  double d = 0.0;
  int done = 0;
  do {
    prev = r.probs;
    for (size_t j = 0; j < items.size(); ++j) {
      double prA = 0.0, prB = 0.0, prC = 0.0;
      for (size_t i = 0; i < n; ++i) {
        double p = r.probs[i];
        if (cell[j][i] == 0)
          prA += p;
        else if (cell[j][i] == 1)
          prB += p;
        else
          prC += p;
      }
      double w = items[j].weight;
      double b = std::pow(prA, w) * std::pow(prB, 1.0 - w);
      double denom =
          b + prC * std::pow(w, w) * std::pow(1.0 - w, 1.0 - w);
      if (!(denom > 0.0)) continue;  // no cell can absorb mass this round
      double a = b / denom;
      double fA = prA > 0.0 ? w * a / prA : 0.0;
      double fB = prB > 0.0 ? (1.0 - w) * a / prB : 0.0;
      double fC = prC > 0.0 ? (1.0 - a) / prC : 0.0;
      for (size_t i = 0; i < n; ++i)
        r.probs[i] *= cell[j][i] == 0 ? fA : cell[j][i] == 1 ? fB : fC;
    }
    double s2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double df = r.probs[i] - prev[i];
      s2 += df * df;
    }
    d = std::sqrt(s2);
    ++done;
  } while (done < params.maxIterations && d > params.epsilon);

  r.iterations = done;
  r.lastDelta = d;
  return r;
}

namespace {

bool is_literal(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Atom:
    case FormulaKind::StrongNeg:
      return true;
    case FormulaKind::DefaultNeg:
      return is_literal(f.sub[0]);
    default:
      return false;
  }
}

// Literals, conjunctions and cardinalities of literals, and rules built
// from those; disjunction and anything nested further is out.
bool is_simple(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::And: {
      for (const auto& s : f.sub)
        if (!is_simple(s) || s.kind == FormulaKind::Rule) return false;
      return true;
    }
    case FormulaKind::Count: {
      for (const auto& s : f.sub)
        if (!is_literal(s)) return false;
      return true;
    }
    case FormulaKind::Rule: {
      if (!is_literal(f.sub[0])) return false;
      for (size_t i = 1; i < f.sub.size(); ++i)
        if (!is_literal(f.sub[i]) &&
            !(f.sub[i].kind == FormulaKind::Count && is_simple(f.sub[i])))
          return false;
      return true;
    }
    default:
      return is_literal(f);
  }
}

// Atom table ids occurring in f; strong-negated atoms are separate table
// entries ("-p"), so the walk stops at StrongNeg instead of descending.
void atom_ids(const Formula& f, const GroundProgram& gp, std::set<int>& out) {
  if (f.kind == FormulaKind::Atom || f.kind == FormulaKind::StrongNeg) {
    int id = gp.find(atom_name(f));
    if (id >= 0) out.insert(id);
    return;
  }
  for (const auto& s : f.sub) atom_ids(s, gp, out);
}

}  // namespace

std::vector<Bits> maxwalksat(const GroundProgram& gp,
                             const std::vector<WeightedClause>& formulas,
                             const WalkSatParams& params, SplitMix64& rng,
                             const std::vector<Bits>* seeds) {
  std::vector<double> weight(formulas.size());
  std::vector<std::vector<int>> flipSet(formulas.size());
  std::set<int> allAtoms;
  for (size_t i = 0; i < formulas.size(); ++i) {
    const Formula& f = formulas[i].formula;
    if (!is_simple(f))
      throw std::runtime_error(
          "maxwalksat expects simple formulas (literals, conjunctions, "
          "cardinalities, rules over ground literals); got: " +
          to_string(f));
    weight[i] =
        formulas[i].lo >= 1.0 ? 1000.0 : 0.5 * (formulas[i].lo + formulas[i].hi);
    std::set<int> ids;
    atom_ids(f, gp, ids);
    flipSet[i].assign(ids.begin(), ids.end());
    allAtoms.insert(ids.begin(), ids.end());
  }

  auto cost_of = [&](const Bits& m, std::vector<int>* unsat) {
    double cost = 0.0;
    for (size_t i = 0; i < formulas.size(); ++i) {
      if (holds(formulas[i].formula, gp, m)) continue;
      cost += weight[i];
      if (unsat) unsat->push_back(int(i));
    }
    return cost;
  };

  std::vector<Bits> found;
  for (int t = 0; t < params.maxTries && int(found.size()) < params.nModels;
       ++t) {
    Bits m(gp.atoms.size());
    if (seeds && !seeds->empty()) {
      m = (*seeds)[rng.below(seeds->size())];
    } else {
      for (int a : allAtoms)
        if (rng.uniform() < 0.5) m.set(size_t(a));
    }

    for (int j = 0; j < params.maxFlips; ++j) {
      std::vector<int> unsat;
      double cost = cost_of(m, &unsat);
      if (cost <= params.costTarget) {
        if (params.replacement ||
            std::find(found.begin(), found.end(), m) == found.end())
          found.push_back(m);
        break;
      }
      if (unsat.empty()) break;  // only reachable with a negative target

      const std::vector<int>& fa = flipSet[unsat[rng.below(unsat.size())]];
      if (fa.empty()) continue;  // truth-constant formula, nothing to flip
      int flip;
      if (rng.uniform() < params.p) {
        flip = fa[rng.below(fa.size())];
      } else {
        flip = fa[0];
        double best = kInf;
        for (int a : fa) {  // ascending ids: ties keep the lowest atom
          m.test(size_t(a)) ? m.reset(size_t(a)) : m.set(size_t(a));
          double c = cost_of(m, nullptr);
          m.test(size_t(a)) ? m.reset(size_t(a)) : m.set(size_t(a));
          if (c < best) {
            best = c;
            flip = a;
          }
        }
      }
      m.test(size_t(flip)) ? m.reset(size_t(flip)) : m.set(size_t(flip));
    }
  }
  return found;
}

}  // namespace prasp
