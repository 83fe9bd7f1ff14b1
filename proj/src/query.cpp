#include "prasp/query.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace prasp {

namespace {

constexpr double kMinCond = 1e-12;

bool is_fact(const Formula& f) {
  return f.kind == FormulaKind::Atom || f.kind == FormulaKind::StrongNeg;
}

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

std::vector<char> context_mask(const std::vector<Formula>& context,
                               const GroundProgram& gp,
                               const std::vector<Bits>& worlds) {
  std::vector<char> ok(worlds.size(), 1);
  for (const auto& c : context)
    for (size_t i = 0; i < worlds.size(); ++i)
      if (ok[i] && !holds(c, gp, worlds[i])) ok[i] = 0;
  return ok;
}

}  // namespace

QueryBatch split_query_statements(
    const std::vector<AnnotatedFormula>& ground) {
  QueryBatch b;
  for (const auto& af : ground) {
    if (af.ann && af.ann->kind == AnnKind::Query)
      b.queries.push_back(af);
    else if (!af.ann && !is_fact(af.formula))
      b.context.push_back(af.formula);
    // plain facts serve query grounding only
  }
  return b;
}

double mass_of(const Formula& f, const GroundProgram& gp,
               const std::vector<Bits>& worlds,
               const std::vector<double>& probs) {
  double p = 0.0;
  for (size_t i = 0; i < worlds.size(); ++i)
    if (holds(f, gp, worlds[i])) p += probs[i];
  return p;
}

QueryResult answer_query(const AnnotatedFormula& q,
                         const std::vector<Formula>& context,
                         const GroundProgram& gp,
                         const std::vector<Bits>& worlds,
                         const std::vector<double>& probs) {
  QueryResult r;
  r.formula = q.formula;
  if (q.ann) r.cond = q.ann->cond;

  std::vector<char> ok = context_mask(context, gp, worlds);
  double pf = 0.0, pc = 0.0;
  for (size_t i = 0; i < worlds.size(); ++i) {
    if (!ok[i]) continue;
    bool c = !r.cond || holds(*r.cond, gp, worlds[i]);
    if (!c) continue;
    pc += probs[i];
    if (holds(q.formula, gp, worlds[i])) pf += probs[i];
  }
  if (r.cond) {
    if (pc < kMinCond) return r;  // Unknown
    r.value = clamp01(pf / pc);
  } else {
    r.value = clamp01(pf);
  }
  r.kind = QueryResult::Kind::Point;
  return r;
}

QueryResult answer_query_interval(const AnnotatedFormula& q,
                                  const std::vector<Formula>& context,
                                  const GroundProgram& gp,
                                  const std::vector<Bits>& worlds,
                                  const ConstraintSystem& sys) {
  QueryResult r;
  r.formula = q.formula;
  if (q.ann) r.cond = q.ann->cond;

  std::vector<char> ok = context_mask(context, gp, worlds);
  std::vector<double> fInd(worlds.size(), 0.0), cInd(worlds.size(), 0.0);
  for (size_t i = 0; i < worlds.size(); ++i) {
    if (!ok[i]) continue;
    bool c = !r.cond || holds(*r.cond, gp, worlds[i]);
    if (!c) continue;
    cInd[i] = 1.0;
    if (holds(q.formula, gp, worlds[i])) fInd[i] = 1.0;
  }
  try {
    auto [lo, hi] = r.cond ? lp_conditional_bounds(sys, fInd, cInd)
                           : lp_bounds(sys, fInd);
    r.lo = clamp01(lo);
    r.hi = clamp01(std::max(lo, hi));
    r.kind = QueryResult::Kind::Interval;
  } catch (const std::runtime_error&) {
    // infeasible system or impossible condition: leave Unknown
  }
  return r;
}

std::pair<std::vector<Bits>, std::vector<double>> frequency_distribution(
    const SampleMultiset& s) {
  std::vector<Bits> worlds;
  std::vector<double> probs;
  std::map<Bits, size_t> index;
  long total = 0;
  for (const auto& item : s.items) {
    if (!item) continue;
    ++total;
    auto [pos, fresh] = index.try_emplace(*item, worlds.size());
    if (fresh) {
      worlds.push_back(*item);
      probs.push_back(0.0);
    }
    probs[pos->second] += 1.0;
  }
  if (total == 0)
    throw std::runtime_error("no models in the sample to answer queries from");
  for (double& p : probs) p /= double(total);
  return {std::move(worlds), std::move(probs)};
}

std::string format_probability(double p) {
  if (p == 0.0) return "0";  // also normalizes -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16g", p);
  return buf;
}

std::string format_result(const QueryResult& r) {
  std::string head;
  switch (r.kind) {
    case QueryResult::Kind::Point:
      head = format_probability(r.value);
      break;
    case QueryResult::Kind::Interval:
      head = format_probability(r.lo) + ";" + format_probability(r.hi);
      break;
    case QueryResult::Kind::List: {
      for (size_t i = 0; i < r.values.size(); ++i) {
        if (i) head += ",";
        head += format_probability(r.values[i]);
      }
      break;
    }
    case QueryResult::Kind::Unknown:
      return "[?] " + to_string(r.formula) + ".";
  }
  if (r.cond) head += "|" + to_string(*r.cond);
  return "[" + head + "] " + to_string(r.formula) + ".";
}

}  // namespace prasp
