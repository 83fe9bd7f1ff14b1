#include "prasp/modelcount.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace prasp {

namespace {

bool is_plain_literal(const Formula& f) {
  if (f.kind == FormulaKind::Atom || f.kind == FormulaKind::StrongNeg)
    return true;
  return f.kind == FormulaKind::DefaultNeg &&
         (f.sub[0].kind == FormulaKind::Atom ||
          f.sub[0].kind == FormulaKind::StrongNeg);
}

Formula negate_literal(const Formula& lit) {
  if (lit.kind == FormulaKind::DefaultNeg) return lit.sub[0];
  return Formula::defaultNeg(lit);
}

void emit(std::vector<AnnotatedFormula>& out, Formula f, int line) {
  AnnotatedFormula af;
  af.formula = std::move(f);
  af.line = line;
  out.push_back(std::move(af));
}

}  // namespace

std::pair<long, long> best_fraction(double w, int maxDenominator) {
  long bm = 0, bn = 1;
  double bestErr = std::abs(w);
  for (long n = 1; n <= maxDenominator; ++n) {
    long m = std::lround(w * double(n));
    if (m < 0) m = 0;
    if (m > n) m = n;
    double err = std::abs(w - double(m) / double(n));
    if (err < bestErr) {
      bestErr = err;
      bm = m;
      bn = n;
    }
  }
  long g = std::gcd(bm, bn);
  if (g > 1) {
    bm /= g;
    bn /= g;
  }
  return {bm, bn};
}

CcResult weights2cc_transform(const GroundedProgram& g,
                              const CountingConfig& cfg) {
  if (cfg.denominatorCap < 2)
    throw std::invalid_argument(
        "weights2cc denominator cap must be at least 2");

  CcResult r;
  r.program.indepGroupCount = g.indepGroupCount;
  r.program.pIndepGroupCount = g.pIndepGroupCount;
  r.program.adHelperGroup = g.adHelperGroup;

  int serial = 0;
  for (const auto& af : g.formulas) {
    bool weighted =
        af.ann && (af.ann->kind == AnnKind::Point ||
                   af.ann->kind == AnnKind::IntervalW);
    if (!weighted) {
      r.program.formulas.push_back(af);
      continue;
    }
    if (af.ann->cond)
      throw std::runtime_error(
          "weights2cc cannot encode conditional probabilities: " +
          to_string(af));

    double w = af.ann->lo;
    if (af.ann->kind == AnnKind::IntervalW) {
      w = 0.5 * (af.ann->lo + af.ann->hi);
      r.warnings.push_back("weights2cc: treating interval weight of " +
                           to_string(af.formula) + " as its midpoint");
    }
    auto [m, n] = best_fraction(w, cfg.denominatorCap);
    if (std::abs(w - double(m) / double(n)) > 1e-9)
      r.warnings.push_back("weights2cc: approximating weight of " +
                           to_string(af.formula) + " by " +
                           std::to_string(m) + "/" + std::to_string(n));
    r.fractions.emplace_back(m, n);

    const Formula& f = af.formula;
    if (m == n) {  // certain: keep the formula itself
      emit(r.program.formulas, f, af.line);
      ++serial;
      continue;
    }

    // Helper pick plus the atoms blocking the formula's negated branch.
    std::vector<Formula> helpers;
    std::vector<Formula> notLow;  // not h1, ..., not hm
    if (m > 0) {
      for (long i = 1; i <= n; ++i)
        helpers.push_back(
            Formula::atom("hp__cc" + std::to_string(serial) + "_" +
                          std::to_string(i)));
      emit(r.program.formulas, Formula::count(1, helpers, 1), af.line);
      for (long i = 0; i < m; ++i)
        notLow.push_back(Formula::defaultNeg(helpers[size_t(i)]));
    }

    if (f.kind == FormulaKind::Atom || f.kind == FormulaKind::StrongNeg) {
      for (long i = 0; i < m; ++i)
        emit(r.program.formulas, Formula::rule(f, {helpers[size_t(i)]}),
             af.line);
      std::vector<Formula> body{f};
      body.insert(body.end(), notLow.begin(), notLow.end());
      emit(r.program.formulas,
           Formula::rule(Formula::falseF(), std::move(body)), af.line);
    } else if (f.kind == FormulaKind::Rule && f.sub.size() >= 1 &&
               (f.sub[0].kind == FormulaKind::False ||
                f.sub[0].kind == FormulaKind::Atom ||
                f.sub[0].kind == FormulaKind::StrongNeg)) {
      for (size_t i = 1; i < f.sub.size(); ++i)
        if (!is_plain_literal(f.sub[i]))
          throw std::runtime_error(
              "weights2cc supports weighted facts and rules over ground "
              "literals only: " +
              to_string(af));
      const Formula& head = f.sub[0];
      std::vector<Formula> ruleBody(f.sub.begin() + 1, f.sub.end());

      // Under a low helper the rule must hold: re-assert it guarded.
      for (long i = 0; i < m; ++i) {
        std::vector<Formula> body = ruleBody;
        body.push_back(helpers[size_t(i)]);
        emit(r.program.formulas, Formula::rule(head, std::move(body)),
             af.line);
      }
      // Otherwise the rule must fail: body forced true, head forced false.
      for (const Formula& lit : ruleBody) {
        std::vector<Formula> body{negate_literal(lit)};
        body.insert(body.end(), notLow.begin(), notLow.end());
        emit(r.program.formulas,
             Formula::rule(Formula::falseF(), std::move(body)), af.line);
      }
      if (head.kind != FormulaKind::False) {
        std::vector<Formula> body{head};
        body.insert(body.end(), notLow.begin(), notLow.end());
        emit(r.program.formulas,
             Formula::rule(Formula::falseF(), std::move(body)), af.line);
      }
    } else {
      throw std::runtime_error(
          "weights2cc supports weighted facts and rules over ground "
          "literals only: " +
          to_string(af));
    }
    ++serial;
  }
  return r;
}

double counting_probability(const GroundProgram& gp,
                            const std::vector<Bits>& worlds,
                            const Formula& f) {
  if (worlds.empty())
    throw std::runtime_error("program has no answer sets to count");
  size_t cnt = 0;
  for (const auto& w : worlds) cnt += holds(f, gp, w) ? 1 : 0;
  return double(cnt) / double(worlds.size());
}

}  // namespace prasp
