#include "prasp/learning.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "prasp/grounder.hpp"
#include "prasp/linsys.hpp"
#include "prasp/query.hpp"
#include "prasp/sampling.hpp"
#include "prasp/spanning.hpp"
#include "prasp/worlds.hpp"

namespace prasp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInconsistencyResidual = 1e-3;

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

struct GradEval {
  double value = 0.0;
  std::vector<double> grad;
};

void collect_groups(const std::vector<WeightedEntry>& weighted,
                    std::vector<std::vector<int>>& mutual,
                    std::vector<std::vector<int>>& pairwise) {
  std::map<int, std::vector<int>> m, p;
  for (size_t i = 0; i < weighted.size(); ++i) {
    if (weighted[i].indepGroup >= 0) m[weighted[i].indepGroup].push_back(int(i));
    if (weighted[i].pIndepGroup >= 0)
      p[weighted[i].pIndepGroup].push_back(int(i));
  }
  for (auto& [g, v] : m) mutual.push_back(std::move(v));
  for (auto& [g, v] : p) pairwise.push_back(std::move(v));
}

// Everything that stays fixed while weights vary: hypothesis weights only
// annotate formulas, so the grounded program, its spanning structure and the
// world list can be built once (interior weights guarantee every hypothesis
// becomes a choice, never a certainty). Each objective evaluation then only
// re-solves the distribution and takes precomputed satisfaction masks.
class Engine {
 public:
  Engine(const LearningTask& task, const InferenceConfig& cfg)
      : task_(task), cfg_(cfg) {
    GroundedProgram g = ground_program(task.background);
    size_t base = g.formulas.size();
    for (const Formula& h : task.hypotheses) {
      AnnotatedFormula af;
      Annotation a;
      a.kind = AnnKind::Point;
      a.lo = a.hi = 0.5;  // placeholder, patched per evaluation
      af.ann = a;
      af.formula = h;
      g.formulas.push_back(std::move(af));
    }
    span_ = build_spanning_program(g);
    worlds_ = enumerate_answer_sets(span_.ground);
    if (worlds_.empty())
      throw std::runtime_error(
          "learning: background plus hypotheses has no possible worlds");

    hypoSlot_.assign(task.hypotheses.size(), -1);
    for (size_t j = 0; j < span_.weighted.size(); ++j) {
      int sid = span_.weighted[j].sourceId;
      if (sid >= int(base)) hypoSlot_[size_t(sid) - base] = int(j);
    }
    for (int slot : hypoSlot_)
      if (slot < 0)
        throw std::logic_error(
            "learning: a hypothesis produced no weight entry");

    itemSlot_.assign(task.hypotheses.size(), -1);
    std::vector<int> itemOf(span_.weighted.size(), -1);
    for (size_t j = 0; j < span_.weighted.size(); ++j) {
      const WeightedEntry& e = span_.weighted[j];
      if (e.ann.kind == AnnKind::Span) continue;
      if (e.ann.isPoint() && e.ann.lo >= 1.0) continue;  // already certain
      RefineItem item;
      item.formula = e.formula;
      item.cond = e.ann.cond;
      item.weight = (e.ann.lo + e.ann.hi) / 2.0;
      itemOf[j] = int(baseItems_.size());
      baseItems_.push_back(std::move(item));
    }
    for (size_t i = 0; i < hypoSlot_.size(); ++i)
      itemSlot_[i] = itemOf[size_t(hypoSlot_[i])];

    allOnce_.items.reserve(worlds_.size());
    for (size_t k = 0; k < worlds_.size(); ++k) {
      allOnce_.items.emplace_back(worlds_[k]);
      worldPos_.emplace(worlds_[k], k);
    }
    exMask_.reserve(task.examples.size());
    for (const Formula& e : task.examples) {
      std::vector<char> mask(worlds_.size(), 0);
      for (size_t k = 0; k < worlds_.size(); ++k)
        mask[k] = holds(e, span_.ground, worlds_[k]) ? 1 : 0;
      exMask_.push_back(std::move(mask));
    }
  }

  double eval(const std::vector<double>& w) const {
    std::vector<double> probs = distribution(w);
    if (task_.examples.empty()) return 1.0;
    if (task_.conjunctiveTarget) {
      double m = 0.0;
      for (size_t k = 0; k < worlds_.size(); ++k) {
        bool all = true;
        for (const auto& mask : exMask_) all = all && mask[k];
        if (all) m += probs[k];
      }
      return clamp01(m);
    }
    double L = 1.0;
    for (const auto& mask : exMask_) {
      double m = 0.0;
      for (size_t k = 0; k < worlds_.size(); ++k)
        if (mask[k]) m += probs[k];
      L *= clamp01(m);
    }
    return L;
  }

  GradEval grad_eval(const std::vector<double>& w) const {
    const double sqrtEps =
        std::sqrt(std::numeric_limits<double>::epsilon());
    GradEval ge;
    ge.value = eval(w);
    size_t n = w.size();
    ge.grad.assign(n, 0.0);
    std::vector<double> steps(n), shifted(n);
    std::vector<std::vector<double>> points;
    points.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      steps[i] = std::max(sqrtEps * w[i], 1e-8);
      std::vector<double> wi = w;
      wi[i] += steps[i];
      points.push_back(std::move(wi));
    }
    std::vector<double> values(n);
    if (cfg_.threads > 1 && n > 1) {
      size_t next = 0;
      while (next < n) {
        size_t batch = std::min(size_t(cfg_.threads), n - next);
        std::vector<std::future<double>> futs;
        futs.reserve(batch);
        for (size_t b = 0; b < batch; ++b) {
          const std::vector<double>& pt = points[next + b];
          futs.push_back(std::async(std::launch::async,
                                    [this, pt] { return eval(pt); }));
        }
        for (size_t b = 0; b < batch; ++b) values[next + b] = futs[b].get();
        next += batch;
      }
    } else {
      for (size_t i = 0; i < n; ++i) values[i] = eval(points[i]);
    }
    for (size_t i = 0; i < n; ++i)
      ge.grad[i] = (values[i] - ge.value) / steps[i];
    return ge;
  }

  // Clamp-and-check pass after the ascent: when the background cannot carry
  // the learned weights (best least-squares residual above threshold), each
  // weight is replaced by the probability mass the nearest satisfiable
  // distribution actually gives its hypothesis.
  void normalize(std::vector<double>& w,
                 std::vector<std::string>& warnings) const {
    for (double& x : w) x = clamp01(x);
    if (worlds_.size() > cfg_.exactWorldCap) return;
    std::vector<WeightedEntry> patched = span_.weighted;
    for (size_t i = 0; i < w.size(); ++i) {
      WeightedEntry& e = patched[size_t(hypoSlot_[i])];
      e.ann.lo = e.ann.hi = w[i];
    }
    std::vector<std::vector<int>> mutual, pairwise;
    collect_groups(patched, mutual, pairwise);
    ConstraintSystem sys =
        build_system(worlds_, span_.ground, patched, mutual, pairwise);
    SplitMix64 rng(cfg_.seed);
    WorldDistribution d =
        pick_distribution(sys, PickMode::IgnoreEntropy, 1, rng);
    if (d.residual <= kInconsistencyResidual) return;
    for (size_t i = 0; i < w.size(); ++i) {
      double m = 0.0;
      for (size_t k = 0; k < worlds_.size(); ++k)
        if (holds(task_.hypotheses[i], span_.ground, worlds_[k]))
          m += d.probs[k];
      w[i] = clamp01(m);
    }
    warnings.push_back(
        "learned weights are probabilistically inconsistent with the "
        "background knowledge; rescaled to the nearest satisfiable "
        "assignment");
  }

 private:
  std::vector<double> distribution(const std::vector<double>& w) const {
    if (worlds_.size() <= cfg_.exactWorldCap) {
      std::vector<RefineItem> items = baseItems_;
      for (size_t i = 0; i < w.size(); ++i)
        items[size_t(itemSlot_[i])].weight = w[i];
      RefineResult rr =
          iterative_refinement(allOnce_, span_.ground, items, cfg_.refine);
      if (rr.worlds.size() != worlds_.size())
        throw std::logic_error("learning: refinement lost worlds");
      return std::move(rr.probs);
    }
    SpanningProgram patched = span_;
    for (size_t i = 0; i < w.size(); ++i) {
      WeightedEntry& e = patched.weighted[size_t(hypoSlot_[i])];
      e.ann.lo = e.ann.hi = w[i];
    }
    SplitMix64 rng(cfg_.seed);
    SampleMultiset s = flip_sample(patched, worlds_, cfg_.sampleSize,
                                   cfg_.stratified, cfg_.respectIndep, rng);
    auto [sw, sp] = frequency_distribution(s);
    std::vector<double> probs(worlds_.size(), 0.0);
    for (size_t k = 0; k < sw.size(); ++k)
      probs[worldPos_.at(sw[k])] = sp[k];
    return probs;
  }

  const LearningTask& task_;
  const InferenceConfig& cfg_;
  SpanningProgram span_;
  std::vector<Bits> worlds_;
  SampleMultiset allOnce_;
  std::map<Bits, size_t> worldPos_;
  std::vector<int> hypoSlot_;  // hypothesis -> index into span_.weighted
  std::vector<int> itemSlot_;  // hypothesis -> index into baseItems_
  std::vector<RefineItem> baseItems_;
  std::vector<std::vector<char>> exMask_;
};

double box_clamp(double x) {
  return std::clamp(x, kWeightFloor, kWeightCeil);
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

LearningTask make_learning_task(const Program& background,
                                const Program& hypothProgram,
                                const Program& examplesProgram,
                                bool conjunctiveTarget, bool keepDuplicates,
                                bool normalize) {
  LearningTask t;
  t.background = background;
  t.conjunctiveTarget = conjunctiveTarget;
  t.keepDuplicates = keepDuplicates;
  t.normalize = normalize;

  std::vector<AnnotatedFormula> gh = ground_aux_file(hypothProgram, background);
  for (const AnnotatedFormula& af : gh) {
    if (!af.ann || af.ann->kind != AnnKind::Query)
      throw std::invalid_argument(
          "hypothesis entries must be [?]-annotated formulas");
    t.hypotheses.push_back(af.formula);
  }
  if (t.hypotheses.empty())
    throw std::invalid_argument(
        "no hypotheses to learn (expected [?]-annotated formulas)");

  std::vector<AnnotatedFormula> ge =
      ground_aux_file(examplesProgram, background);
  std::set<std::string> seen;
  for (const AnnotatedFormula& af : ge) {
    if (af.ann) {
      if (af.ann->kind == AnnKind::Query)
        throw std::invalid_argument("example formulas must be unannotated");
      throw std::runtime_error(
          "weighted example formulas are not yet supported");
    }
    if (!keepDuplicates && !seen.insert(to_string(af.formula)).second)
      continue;
    t.examples.push_back(af.formula);
  }
  return t;
}

double likelihood(const LearningTask& task, const std::vector<double>& w,
                  const InferenceConfig& inference) {
  if (w.size() != task.hypotheses.size())
    throw std::invalid_argument(
        "likelihood: weight vector must match the hypothesis count");
  return Engine(task, inference).eval(w);
}

std::vector<double> numeric_gradient(const LearningTask& task,
                                     const std::vector<double>& w,
                                     const InferenceConfig& inference) {
  if (w.size() != task.hypotheses.size())
    throw std::invalid_argument(
        "numeric_gradient: weight vector must match the hypothesis count");
  return Engine(task, inference).grad_eval(w).grad;
}

LearnedWeights bb_learn(const LearningTask& task, std::vector<double> w0,
                        double alpha0, int maxIter, double tol,
                        const InferenceConfig& inference,
                        std::vector<double>* objectiveTrace) {
  const size_t n = task.hypotheses.size();
  if (w0.size() != n)
    throw std::invalid_argument(
        "bb_learn: w0 must match the hypothesis count");
  LearnedWeights out;
  std::vector<double> w = std::move(w0);
  for (double& x : w) x = box_clamp(x);

  std::optional<Engine> eng;
  try {
    eng.emplace(task, inference);
  } catch (const std::exception& ex) {
    out.w = w;
    out.objective = kNegInf;
    out.warnings.push_back(std::string("learning aborted: ") + ex.what());
    return out;
  }

  auto safe = [&](const std::vector<double>& x) -> std::optional<GradEval> {
    try {
      GradEval ge = eng->grad_eval(x);
      if (!std::isfinite(ge.value)) return std::nullopt;
      for (double gi : ge.grad)
        if (!std::isfinite(gi)) return std::nullopt;
      return ge;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };

  double alpha = alpha0;
  std::optional<GradEval> cur = safe(w);
  int consecutiveFails = cur ? 0 : 1;
  std::vector<double> bestW = w;
  double bestVal = cur ? cur->value : kNegInf;
  if (cur && objectiveTrace) objectiveTrace->push_back(cur->value);

  int steps = 0;
  bool diverged = consecutiveFails >= 5;
  while (steps < maxIter) {
    ++steps;
    if (!cur) {
      cur = safe(w);
      if (!cur) {
        if (++consecutiveFails >= 5) {
          diverged = true;
          break;
        }
        continue;
      }
      consecutiveFails = 0;
      if (objectiveTrace) objectiveTrace->push_back(cur->value);
      if (cur->value > bestVal) {
        bestVal = cur->value;
        bestW = w;
      }
    }
    std::vector<double> s(n);
    for (size_t i = 0; i < n; ++i) s[i] = cur->grad[i] / alpha;
    if (norm2(s) <= tol) break;
    std::vector<double> wNext(n), sAct(n);
    for (size_t i = 0; i < n; ++i) {
      wNext[i] = box_clamp(w[i] + s[i]);
      sAct[i] = wNext[i] - w[i];
    }
    std::optional<GradEval> nxt = safe(wNext);
    if (!nxt) {
      w = std::move(wNext);
      cur.reset();
      if (++consecutiveFails >= 5) {
        diverged = true;
        break;
      }
      continue;
    }
    consecutiveFails = 0;
    double sy = 0.0, ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      sy += sAct[i] * (nxt->grad[i] - cur->grad[i]);
      ss += sAct[i] * sAct[i];
    }
    // curvature along the step, in the descent reading of the update rule;
    // flat or uphill-curved stretches fall back to the starting step size
    double aNew = ss > 0.0 ? -sy / ss : 0.0;
    alpha = (std::isfinite(aNew) && aNew > 1e-10) ? aNew : alpha0;
    w = std::move(wNext);
    cur = std::move(nxt);
    if (objectiveTrace) objectiveTrace->push_back(cur->value);
    if (cur->value > bestVal) {
      bestVal = cur->value;
      bestW = w;
    }
  }

  if (diverged)
    out.warnings.push_back(
        "objective diverged during learning; returning the best weights "
        "found so far");
  out.w = std::move(bestW);
  out.objective = bestVal;
  out.iterations = steps;
  if (task.normalize && std::isfinite(out.objective))
    eng->normalize(out.w, out.warnings);
  return out;
}

LearnedWeights learn_weights(const LearningTask& task,
                             const InferenceConfig& inference) {
  std::vector<double> w0(task.hypotheses.size(), 0.5);
  return bb_learn(task, std::move(w0), 1.0, 200, 1e-4, inference);
}

}  // namespace prasp
