#include "prasp/grounder.hpp"

#include <algorithm>
#include <functional>
#include <optional>

namespace prasp {

namespace {

// ------------------------------------------------------------- ordering
//
// Ground terms and formulas are ordered by their token sequence so that
// v(2) sorts before v(10) and numbers sort before words. This ordering
// drives instance sorting, extension storage, and positional pairing.

struct Token {
  bool isInt = false;
  long long num = 0;
  std::string word;
};

Token intTok(long long v) { return {true, v, {}}; }
Token wordTok(std::string w) { return {false, 0, std::move(w)}; }

void term_tokens(const Term& t, std::vector<Token>& out) {
  switch (t.kind) {
    case TermKind::Integer:
      out.push_back(intTok(t.value));
      break;
    case TermKind::Constant:
    case TermKind::Variable:
      out.push_back(wordTok(t.text));
      break;
    case TermKind::Interval:
      term_tokens(t.args[0], out);
      out.push_back(wordTok(".."));
      term_tokens(t.args[1], out);
      break;
    case TermKind::Sequence:
      for (const auto& a : t.args) term_tokens(a, out);
      break;
    case TermKind::Compound:
      out.push_back(wordTok(t.text));
      for (const auto& a : t.args) term_tokens(a, out);
      break;
  }
}

void formula_tokens(const Formula& f, std::vector<Token>& out) {
  switch (f.kind) {
    case FormulaKind::True:
      out.push_back(wordTok("true"));
      break;
    case FormulaKind::False:
      out.push_back(wordTok("false"));
      break;
    case FormulaKind::Atom:
      out.push_back(wordTok(f.pred));
      for (const auto& a : f.args) term_tokens(a, out);
      break;
    case FormulaKind::StrongNeg:
      out.push_back(wordTok("-"));
      formula_tokens(f.sub[0], out);
      break;
    case FormulaKind::DefaultNeg:
      out.push_back(wordTok("not"));
      formula_tokens(f.sub[0], out);
      break;
    case FormulaKind::And:
    case FormulaKind::Or:
      for (size_t i = 0; i < f.sub.size(); ++i) {
        if (i) out.push_back(wordTok(f.kind == FormulaKind::And ? "&" : "|"));
        formula_tokens(f.sub[i], out);
      }
      break;
    case FormulaKind::Rule:
      formula_tokens(f.sub[0], out);
      out.push_back(wordTok(":-"));
      for (size_t i = 1; i < f.sub.size(); ++i) {
        if (i > 1) out.push_back(wordTok(","));
        formula_tokens(f.sub[i], out);
      }
      break;
    case FormulaKind::Count:
      out.push_back(intTok(f.lo));
      out.push_back(wordTok("{"));
      for (size_t i = 0; i < f.sub.size(); ++i) {
        if (i) out.push_back(wordTok(","));
        formula_tokens(f.sub[i], out);
      }
      out.push_back(wordTok("}"));
      out.push_back(intTok(f.hi));
      break;
    case FormulaKind::Compare:
      term_tokens(f.args[0], out);
      out.push_back(wordTok(f.pred));
      term_tokens(f.args[1], out);
      break;
  }
}

// -1 / 0 / +1 over token sequences; numbers before words.
int token_cmp(const std::vector<Token>& a, const std::vector<Token>& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    const Token &x = a[i], &y = b[i];
    if (x.isInt != y.isInt) return x.isInt ? -1 : 1;
    if (x.isInt) {
      if (x.num != y.num) return x.num < y.num ? -1 : 1;
    } else if (x.word != y.word) {
      return x.word < y.word ? -1 : 1;
    }
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

std::vector<Token> af_tokens(const AnnotatedFormula& af) {
  std::vector<Token> t;
  formula_tokens(af.formula, t);
  if (af.ann && af.ann->cond) {
    t.push_back(wordTok("|"));
    formula_tokens(*af.ann->cond, t);
  }
  return t;
}

bool af_less(const AnnotatedFormula& a, const AnnotatedFormula& b) {
  int c = token_cmp(af_tokens(a), af_tokens(b));
  if (c != 0) return c < 0;
  double alo = a.ann ? a.ann->lo : 1.0, blo = b.ann ? b.ann->lo : 1.0;
  if (alo != blo) return alo < blo;
  double ahi = a.ann ? a.ann->hi : 1.0, bhi = b.ann ? b.ann->hi : 1.0;
  return ahi < bhi;
}

bool af_eq(const AnnotatedFormula& a, const AnnotatedFormula& b) {
  if (!(a.formula == b.formula)) return false;
  if (a.ann.has_value() != b.ann.has_value()) return false;
  if (!a.ann) return true;
  if (a.ann->kind != b.ann->kind || a.ann->lo != b.ann->lo ||
      a.ann->hi != b.ann->hi)
    return false;
  if (a.ann->cond.has_value() != b.ann->cond.has_value()) return false;
  return !a.ann->cond || *a.ann->cond == *b.ann->cond;
}

struct TupleLess {
  bool operator()(const std::vector<Term>& a,
                  const std::vector<Term>& b) const {
    std::vector<Token> ta, tb;
    for (const auto& t : a) term_tokens(t, ta);
    for (const auto& t : b) term_tokens(t, tb);
    return token_cmp(ta, tb) < 0;
  }
};

// --------------------------------------------------- shorthand expansion

// Expands the first 1..3 / a;b shorthand found in t, ascending / listed
// order. Intervals with non-integer endpoints (still containing variables)
// are left alone and picked up again after substitution.
bool expand_term(const Term& t, std::vector<Term>& variants) {
  if (t.kind == TermKind::Interval) {
    const Term &lo = t.args[0], &hi = t.args[1];
    if (lo.kind != TermKind::Integer || hi.kind != TermKind::Integer)
      return false;
    for (long long v = lo.value; v <= hi.value; ++v)
      variants.push_back(Term::integer(v));
    return true;
  }
  if (t.kind == TermKind::Sequence) {
    variants = t.args;
    return true;
  }
  if (t.kind == TermKind::Compound) {
    for (size_t i = 0; i < t.args.size(); ++i) {
      std::vector<Term> vs;
      if (expand_term(t.args[i], vs)) {
        for (auto& v : vs) {
          Term c = t;
          c.args[i] = std::move(v);
          variants.push_back(std::move(c));
        }
        return true;
      }
    }
  }
  return false;
}

bool expand_formula_once(const Formula& f, std::vector<Formula>& variants) {
  for (size_t i = 0; i < f.args.size(); ++i) {
    std::vector<Term> vs;
    if (expand_term(f.args[i], vs)) {
      for (auto& v : vs) {
        Formula c = f;
        c.args[i] = std::move(v);
        variants.push_back(std::move(c));
      }
      return true;
    }
  }
  for (size_t i = 0; i < f.sub.size(); ++i) {
    std::vector<Formula> vs;
    if (expand_formula_once(f.sub[i], vs)) {
      for (auto& v : vs) {
        Formula c = f;
        c.sub[i] = std::move(v);
        variants.push_back(std::move(c));
      }
      return true;
    }
  }
  return false;
}

void expand_rec(const Formula& f, std::vector<Formula>& out, int line) {
  if (out.size() > 100000)
    throw ParseError(line, "term shorthand expansion too large");
  std::vector<Formula> v;
  if (expand_formula_once(f, v)) {
    for (const auto& g : v) expand_rec(g, out, line);
  } else {
    out.push_back(f);
  }
}

// ------------------------------------------------------ literal evaluation

int order_terms(const Term& a, const Term& b) {
  if (a.kind == TermKind::Integer && b.kind == TermKind::Integer)
    return a.value < b.value ? -1 : a.value > b.value ? 1 : 0;
  std::vector<Token> ta, tb;
  term_tokens(a, ta);
  term_tokens(b, tb);
  return token_cmp(ta, tb);
}

bool eval_compare(const Formula& cmp, int line) {
  if (!cmp.args[0].isGround() || !cmp.args[1].isGround())
    throw ParseError(line, "comparison over unbound variable: " + to_string(cmp));
  int c = order_terms(cmp.args[0], cmp.args[1]);
  const std::string& op = cmp.pred;
  if (op == "==") return c == 0;
  if (op == "!=") return c != 0;
  if (op == "<") return c < 0;
  if (op == "<=") return c <= 0;
  if (op == ">") return c > 0;
  if (op == ">=") return c >= 0;
  throw ParseError(line, "unknown comparison operator " + op);
}

// nullopt = not decidable at grounding time; the literal stays in place.
std::optional<bool> eval_literal(const Formula& lit, const DomainMap& dom,
                                 int line) {
  switch (lit.kind) {
    case FormulaKind::True:
      return true;
    case FormulaKind::False:
      return false;
    case FormulaKind::Compare:
      return eval_compare(lit, line);
    case FormulaKind::Atom:
      if (lit.isGround() && dom.isComplete(lit.pred, lit.args.size()))
        return dom.holdsFact(lit);
      return std::nullopt;
    case FormulaKind::DefaultNeg: {
      auto inner = eval_literal(lit.sub[0], dom, line);
      if (inner) return !*inner;
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

// Evaluates decidable body literals of a ground rule instance. True ones
// vanish; a false one drops the whole instance (nullopt). A rule whose
// body empties out degenerates to its bare head.
std::optional<Formula> simplify_instance(const Formula& f, const DomainMap& dom,
                                         int line) {
  if (f.kind != FormulaKind::Rule) return f;
  std::vector<Formula> body;
  for (size_t i = 1; i < f.sub.size(); ++i) {
    auto v = eval_literal(f.sub[i], dom, line);
    if (!v)
      body.push_back(f.sub[i]);
    else if (!*v)
      return std::nullopt;
  }
  if (body.empty()) {
    if (f.sub[0].kind == FormulaKind::False) return Formula::falseF();
    return f.sub[0];
  }
  return Formula::rule(f.sub[0], std::move(body));
}

// ------------------------------------------------------ variable binding

void positive_body_atoms(const Formula& f, std::vector<const Formula*>& out) {
  if (f.kind != FormulaKind::Rule) return;
  for (size_t i = 1; i < f.sub.size(); ++i)
    if (f.sub[i].kind == FormulaKind::Atom) out.push_back(&f.sub[i]);
}

struct Binder {
  const DomainMap& dom;
  const std::vector<std::pair<std::string, std::string>>& decls;
  int line;

  const std::vector<std::vector<Term>>* extOf(const Formula& atom) const {
    auto key = DomainMap::key(atom.pred, atom.args.size());
    if (!dom.complete.count(key)) return nullptr;
    auto it = dom.ext.find(key);
    static const std::vector<std::vector<Term>> kEmpty;
    return it == dom.ext.end() ? &kEmpty : &it->second;
  }

  bool unify(const Term& pat, const Term& val, Substitution& s) const {
    if (pat.kind == TermKind::Variable) {
      if (const Term* bound = s.lookup(pat.text)) return *bound == val;
      s.bind(pat.text, val);
      return true;
    }
    switch (pat.kind) {
      case TermKind::Integer:
        return val.kind == TermKind::Integer && val.value == pat.value;
      case TermKind::Constant:
        return val.kind == TermKind::Constant && val.text == pat.text;
      case TermKind::Compound: {
        if (val.kind != TermKind::Compound || val.text != pat.text ||
            val.args.size() != pat.args.size())
          return false;
        for (size_t i = 0; i < pat.args.size(); ++i)
          if (!unify(pat.args[i], val.args[i], s)) return false;
        return true;
      }
      default:
        return false;
    }
  }

  void finishDecls(const std::vector<std::string>& vars, size_t i,
                   Substitution& s, std::vector<Substitution>& out,
                   const std::string& what) const {
    if (i == vars.size()) {
      out.push_back(s);
      return;
    }
    if (s.lookup(vars[i])) {
      finishDecls(vars, i + 1, s, out, what);
      return;
    }
    // latest declaration wins, so query files can override the background
    const std::string* pred = nullptr;
    for (auto it = decls.rbegin(); it != decls.rend(); ++it)
      if (it->first == vars[i]) {
        pred = &it->second;
        break;
      }
    if (!pred)
      throw ParseError(line, "unsafe variable " + vars[i] + " in " + what);
    auto it = dom.ext.find(DomainMap::key(*pred, 1));
    if (it == dom.ext.end()) return;  // empty domain, no instances
    for (const auto& tup : it->second) {
      Substitution s2 = s;
      s2.bind(vars[i], tup[0]);
      finishDecls(vars, i + 1, s2, out, what);
    }
  }

  void rec(const std::vector<const Formula*>& atoms, size_t i,
           const std::vector<std::string>& vars, Substitution& s,
           std::vector<Substitution>& out, const std::string& what) const {
    if (i == atoms.size()) {
      finishDecls(vars, 0, s, out, what);
      return;
    }
    const auto* tuples = extOf(*atoms[i]);
    if (!tuples) {
      // literal over a predicate we cannot evaluate: no binding power
      rec(atoms, i + 1, vars, s, out, what);
      return;
    }
    for (const auto& tup : *tuples) {
      Substitution s2 = s;
      bool ok = tup.size() == atoms[i]->args.size();
      for (size_t k = 0; ok && k < tup.size(); ++k)
        ok = unify(atoms[i]->args[k], tup[k], s2);
      if (ok) rec(atoms, i + 1, vars, s2, out, what);
    }
  }

  std::vector<Substitution> enumerate(
      const std::vector<std::string>& vars,
      const std::vector<const Formula*>& bindingAtoms,
      const std::string& what) const {
    std::vector<Substitution> out;
    Substitution s;
    rec(bindingAtoms, 0, vars, s, out, what);
    return out;
  }
};

AnnotatedFormula make_inst(const AnnotatedFormula& src, Formula f,
                           std::optional<Annotation> ann) {
  AnnotatedFormula out = src;
  out.formula = std::move(f);
  out.ann = std::move(ann);
  return out;
}

void ensure_ground(const AnnotatedFormula& af) {
  std::vector<std::string> vars;
  collect_variables(af.formula, vars);
  if (af.ann && af.ann->cond) collect_variables(*af.ann->cond, vars);
  if (!vars.empty())
    throw ParseError(af.line, "unsafe variable " + vars.front() + " in " +
                                  to_string(af.formula));
}

// All ground instances of one shorthand-free variant: enumerate bindings,
// substitute, re-expand shorthand freed up by the substitution, simplify.
void collect_instances(const Formula& variant, const Binder& binder,
                       const DomainMap& dom, int line,
                       std::vector<Formula>& out) {
  std::vector<std::string> vars;
  collect_variables(variant, vars);
  std::vector<const Formula*> bindingAtoms;
  positive_body_atoms(variant, bindingAtoms);
  auto sigmas = binder.enumerate(vars, bindingAtoms, to_string(variant));
  for (const auto& s : sigmas) {
    Formula g = substitute(variant, s);
    std::vector<Formula> post;
    expand_rec(g, post, line);
    for (const auto& p : post) {
      auto simplified = simplify_instance(p, dom, line);
      if (simplified) out.push_back(std::move(*simplified));
    }
  }
}

Formula term_to_atom(const Term& t, int line) {
  if (t.kind == TermKind::Compound) return Formula::atom(t.text, t.args);
  if (t.kind == TermKind::Constant) return Formula::atom(t.text);
  throw ParseError(line, "expected an atom, got " + to_string(t));
}

bool condpr_statement(const Formula& f) {
  const Formula* h = f.kind == FormulaKind::Rule ? &f.sub[0] : &f;
  return h->kind == FormulaKind::Atom &&
         (h->pred == "condPr" || h->pred == "condProb");
}

// [[w]] condPr(f, c) :- guards. One conditional formula [w|c] f per ground
// instantiation whose guards all hold. Guards must be decidable here.
std::vector<AnnotatedFormula> ground_condpr(const AnnotatedFormula& af,
                                            const DomainMap& dom,
                                            const Binder& binder) {
  const Formula& f = af.formula;
  const Formula* head = f.kind == FormulaKind::Rule ? &f.sub[0] : &f;
  std::vector<std::string> vars;
  collect_variables(f, vars);
  std::vector<const Formula*> bindingAtoms;
  positive_body_atoms(f, bindingAtoms);
  auto sigmas = binder.enumerate(vars, bindingAtoms, to_string(f));
  double w = af.ann->lo;

  std::vector<AnnotatedFormula> out;
  for (const auto& s : sigmas) {
    bool ok = true;
    if (f.kind == FormulaKind::Rule) {
      for (size_t i = 1; ok && i < f.sub.size(); ++i) {
        Formula guard = substitute(f.sub[i], s);
        auto v = eval_literal(guard, dom, af.line);
        if (!v)
          throw ParseError(af.line, "condPr guard not decidable during "
                                    "grounding: " + to_string(guard));
        ok = *v;
      }
    }
    if (!ok) continue;
    Formula fPart = term_to_atom(substitute(head->args[0], s), af.line);
    Formula cPart = term_to_atom(substitute(head->args[1], s), af.line);
    Annotation ann;
    ann.kind = AnnKind::Point;
    ann.lo = ann.hi = w;
    ann.cond = std::move(cPart);
    ann.bracketLevel = 1;
    out.push_back(make_inst(af, std::move(fPart), std::move(ann)));
  }
  sort_instances(out);
  out.erase(std::unique(out.begin(), out.end(), af_eq), out.end());
  return out;
}

}  // namespace

// ----------------------------------------------------------- public API

bool term_less(const Term& a, const Term& b) {
  std::vector<Token> ta, tb;
  term_tokens(a, ta);
  term_tokens(b, tb);
  return token_cmp(ta, tb) < 0;
}

bool formula_less(const Formula& a, const Formula& b) {
  std::vector<Token> ta, tb;
  formula_tokens(a, ta);
  formula_tokens(b, tb);
  return token_cmp(ta, tb) < 0;
}

int term_order(const Term& a, const Term& b) { return order_terms(a, b); }

bool DomainMap::holdsFact(const Formula& groundAtom) const {
  auto it = ext.find(key(groundAtom.pred, groundAtom.args.size()));
  if (it == ext.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(),
                            groundAtom.args, TupleLess{});
}

std::vector<Formula> expand_term_shorthand(const Formula& f) {
  std::vector<Formula> out;
  expand_rec(f, out, 0);
  return out;
}

void sort_instances(std::vector<AnnotatedFormula>& list) {
  std::stable_sort(list.begin(), list.end(), af_less);
}

DomainMap compute_domains(const Program& prog) {
  DomainMap dom;

  // Predicates appearing in any annotated formula, choice, annotated
  // disjunction alternative, or compound statement are uncertain: their
  // extension cannot be decided at grounding time.
  std::set<std::string> tainted;
  auto taintAll = [&](const Formula& f) {
    std::vector<const Formula*> atoms;
    collect_atoms(f, atoms);
    for (const auto* a : atoms)
      tainted.insert(DomainMap::key(a->pred, a->args.size()));
  };
  std::function<void(const Formula&)> taintCounts = [&](const Formula& f) {
    if (f.kind == FormulaKind::Count) {
      taintAll(f);
      return;
    }
    for (const auto& s : f.sub) taintCounts(s);
  };

  std::map<std::string, std::vector<std::pair<const Formula*, int>>>
      rulesByHead;
  std::vector<std::pair<const Formula*, int>> factStmts;

  for (const auto& af : prog.formulas) {
    if (af.ann) {
      // Queries observe the program without shaping it. For weighted rules
      // only the head is uncertain: body literals are domain guards that the
      // grounder decides (a certainly-true guard simplifies away without
      // changing the rule's probability). Conditions never taint for the
      // same reason: a certain condition is simply true everywhere.
      if (af.ann->kind == AnnKind::Query) continue;
      if (af.formula.kind == FormulaKind::Rule) {
        taintAll(af.formula.sub[0]);
        for (size_t i = 1; i < af.formula.sub.size(); ++i)
          taintCounts(af.formula.sub[i]);
      } else {
        taintAll(af.formula);
      }
      continue;
    }
    const Formula& f = af.formula;
    taintCounts(f);
    if (f.kind == FormulaKind::Atom) {
      factStmts.emplace_back(&f, af.line);
    } else if (f.kind == FormulaKind::Rule) {
      const Formula& h = f.sub[0];
      if (h.kind == FormulaKind::Atom)
        rulesByHead[DomainMap::key(h.pred, h.args.size())].emplace_back(
            &f, af.line);
      else if (h.kind != FormulaKind::False && h.kind != FormulaKind::Count)
        taintAll(h);
    } else if (f.kind != FormulaKind::Count) {
      taintAll(f);  // compound statement, treated as a weight-1 formula
    }
  }
  for (const auto& ad : prog.disjunctions)
    for (const auto& [w, alt] : ad.alternatives) taintAll(alt);

  std::set<std::string> declVars;
  for (const auto& [v, p] : prog.domainDecls) declVars.insert(v);

  // A predicate's extension is complete when it is untainted and every rule
  // defining it only needs comparisons, already-complete predicates, and
  // declared variables. Admission order is a stratification: negation in a
  // rule body only ever refers to predicates finished earlier.
  std::set<std::string> factPreds;
  for (const auto& [f, line] : factStmts) {
    std::vector<Formula> expanded;
    expand_rec(*f, expanded, line);
    for (const auto& g : expanded)
      factPreds.insert(DomainMap::key(g.pred, g.args.size()));
  }

  auto ruleEvaluable = [&](const Formula& r,
                           const std::set<std::string>& complete) {
    std::vector<std::string> bound;
    for (size_t i = 1; i < r.sub.size(); ++i) {
      const Formula& b = r.sub[i];
      if (b.kind == FormulaKind::Atom) {
        if (!complete.count(DomainMap::key(b.pred, b.args.size())))
          return false;
        collect_variables(b, bound);
      } else if (b.kind == FormulaKind::DefaultNeg) {
        if (b.sub[0].kind != FormulaKind::Atom ||
            !complete.count(
                DomainMap::key(b.sub[0].pred, b.sub[0].args.size())))
          return false;
      } else if (b.kind != FormulaKind::Compare) {
        return false;
      }
    }
    std::vector<std::string> all;
    collect_variables(r, all);
    for (const auto& v : all)
      if (std::find(bound.begin(), bound.end(), v) == bound.end() &&
          !declVars.count(v))
        return false;
    return true;
  };

  std::vector<std::string> admission;  // derived predicates, dependency order
  {
    std::set<std::string> candidates;
    for (const auto& k : factPreds)
      if (!tainted.count(k)) candidates.insert(k);
    for (const auto& [k, rs] : rulesByHead)
      if (!tainted.count(k)) candidates.insert(k);

    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& k : candidates) {
        if (dom.complete.count(k)) continue;
        bool ok = true;
        auto it = rulesByHead.find(k);
        if (it != rulesByHead.end())
          for (const auto& [r, line] : it->second)
            if (!ruleEvaluable(*r, dom.complete)) {
              ok = false;
              break;
            }
        if (ok) {
          dom.complete.insert(k);
          if (rulesByHead.count(k)) admission.push_back(k);
          changed = true;
        }
      }
    }
  }

  // Extensions: ground facts, then declaration-bound facts, then derived
  // predicates in admission order.
  std::map<std::string, std::set<std::vector<Term>, TupleLess>> sets;
  auto publish = [&] {
    for (const auto& [k, s] : sets)
      dom.ext[k] = std::vector<std::vector<Term>>(s.begin(), s.end());
  };

  std::vector<std::pair<Formula, int>> varFacts;
  for (const auto& [f, line] : factStmts) {
    std::vector<Formula> expanded;
    expand_rec(*f, expanded, line);
    for (auto& g : expanded) {
      auto k = DomainMap::key(g.pred, g.args.size());
      if (!dom.complete.count(k)) continue;
      if (g.isGround())
        sets[k].insert(g.args);
      else
        varFacts.emplace_back(std::move(g), line);
    }
  }
  publish();

  for (const auto& [f, line] : varFacts) {
    Binder binder{dom, prog.domainDecls, line};
    std::vector<std::string> vars;
    collect_variables(f, vars);
    for (const auto& s : binder.enumerate(vars, {}, to_string(f)))
      sets[DomainMap::key(f.pred, f.args.size())].insert(
          substitute(f, s).args);
  }
  publish();

  for (const auto& k : admission) {
    for (const auto& [r, line] : rulesByHead[k]) {
      Binder binder{dom, prog.domainDecls, line};
      std::vector<std::string> vars;
      collect_variables(*r, vars);
      std::vector<const Formula*> bindingAtoms;
      positive_body_atoms(*r, bindingAtoms);
      for (const auto& s : binder.enumerate(vars, bindingAtoms, to_string(*r))) {
        Formula g = substitute(*r, s);
        bool holds = true;
        for (size_t i = 1; holds && i < g.sub.size(); ++i) {
          auto v = eval_literal(g.sub[i], dom, line);
          holds = v.value_or(false);
        }
        if (holds) sets[k].insert(g.sub[0].args);
      }
    }
    publish();
  }
  return dom;
}

std::vector<AnnotatedFormula> ground_statement(
    const AnnotatedFormula& af, const DomainMap& dom,
    const std::vector<std::pair<std::string, std::string>>& domainDecls) {
  Binder binder{dom, domainDecls, af.line};

  if (af.ann && af.ann->bracketLevel == 2 && condpr_statement(af.formula))
    return ground_condpr(af, dom, binder);

  std::vector<Formula> variants;
  expand_rec(af.formula, variants, af.line);

  int level = af.ann ? af.ann->bracketLevel : 1;
  const Formula* cond =
      af.ann && af.ann->cond ? &*af.ann->cond : nullptr;
  std::vector<std::string> condVars;
  if (cond) collect_variables(*cond, condVars);

  std::vector<AnnotatedFormula> out;

  auto instanceAnn = [&](std::optional<Formula> c) {
    Annotation a = *af.ann;
    a.bracketLevel = 1;
    a.cond = std::move(c);
    return a;
  };

  if (level == 1) {
    if (!af.ann) {
      // certain knowledge: each ground instance is its own statement
      std::vector<Formula> instances;
      for (const auto& v : variants)
        collect_instances(v, binder, dom, af.line, instances);
      for (auto& g : instances)
        out.push_back(make_inst(af, std::move(g), std::nullopt));
    } else if (!cond) {
      // one weighted statement; several instances fold into a conjunction
      std::vector<Formula> instances;
      for (const auto& v : variants)
        collect_instances(v, binder, dom, af.line, instances);
      if (!instances.empty()) {
        std::sort(instances.begin(), instances.end(), formula_less);
        instances.erase(std::unique(instances.begin(), instances.end()),
                        instances.end());
        Formula g = instances.size() == 1 ? std::move(instances.front())
                                          : Formula::conj(std::move(instances));
        out.push_back(make_inst(af, std::move(g), *af.ann));
      }
    } else {
      // conditional: enumerate formula and condition jointly
      std::vector<Formula> fs;
      std::vector<Formula> cs;
      for (const auto& v : variants) {
        std::vector<std::string> vars;
        collect_variables(v, vars);
        for (const auto& cv : condVars)
          if (std::find(vars.begin(), vars.end(), cv) == vars.end())
            vars.push_back(cv);
        std::vector<const Formula*> bindingAtoms;
        positive_body_atoms(v, bindingAtoms);
        for (const auto& s : binder.enumerate(vars, bindingAtoms, to_string(v))) {
          auto simplified = simplify_instance(substitute(v, s), dom, af.line);
          if (!simplified) continue;
          fs.push_back(std::move(*simplified));
          cs.push_back(substitute(*cond, s));
        }
      }
      if (!fs.empty()) {
        for (const auto& c : cs)
          if (!(c == cs.front()))
            throw ParseError(af.line,
                             "conditional formula grounds to several distinct "
                             "conditions; use a double-bracket annotation");
        std::sort(fs.begin(), fs.end(), formula_less);
        fs.erase(std::unique(fs.begin(), fs.end()), fs.end());
        Formula g = fs.size() == 1 ? std::move(fs.front())
                                   : Formula::conj(std::move(fs));
        out.push_back(make_inst(af, std::move(g), instanceAnn(cs.front())));
      }
    }
  } else if (level == 2) {
    std::vector<std::string> formulaVars;
    for (const auto& v : variants) collect_variables(v, formulaVars);
    bool condSubset = true, condDisjoint = true;
    for (const auto& cv : condVars) {
      if (std::find(formulaVars.begin(), formulaVars.end(), cv) ==
          formulaVars.end())
        condSubset = false;
      else
        condDisjoint = false;
    }

    if (af.ann->kind == AnnKind::Distribute) {
      std::vector<Formula> instances;
      for (const auto& v : variants)
        collect_instances(v, binder, dom, af.line, instances);
      std::sort(instances.begin(), instances.end(), formula_less);
      instances.erase(std::unique(instances.begin(), instances.end()),
                      instances.end());
      Annotation a;
      a.kind = AnnKind::Point;
      a.lo = a.hi = instances.empty() ? 0.0 : 1.0 / instances.size();
      a.bracketLevel = 1;
      for (auto& g : instances) out.push_back(make_inst(af, std::move(g), a));
    } else if (!cond || condVars.empty()) {
      // per-instance annotation, condition (if any) repeated verbatim
      std::vector<Formula> instances;
      for (const auto& v : variants)
        collect_instances(v, binder, dom, af.line, instances);
      std::optional<Formula> c;
      if (cond) c = *cond;
      for (auto& g : instances)
        out.push_back(make_inst(af, std::move(g), instanceAnn(c)));
    } else if (condSubset) {
      // shared variables: the condition instantiates along with the formula
      for (const auto& v : variants) {
        std::vector<std::string> vars;
        collect_variables(v, vars);
        for (const auto& cv : condVars)
          if (std::find(vars.begin(), vars.end(), cv) == vars.end())
            vars.push_back(cv);
        std::vector<const Formula*> bindingAtoms;
        positive_body_atoms(v, bindingAtoms);
        for (const auto& s : binder.enumerate(vars, bindingAtoms, to_string(v))) {
          auto simplified = simplify_instance(substitute(v, s), dom, af.line);
          if (!simplified) continue;
          out.push_back(make_inst(af, std::move(*simplified),
                                  instanceAnn(substitute(*cond, s))));
        }
      }
    } else if (condDisjoint) {
      // positional pairing over independently sorted instance lists; a
      // single formula instance pairs with every condition instance
      std::vector<Formula> fInst;
      for (const auto& v : variants)
        collect_instances(v, binder, dom, af.line, fInst);
      std::sort(fInst.begin(), fInst.end(), formula_less);
      fInst.erase(std::unique(fInst.begin(), fInst.end()), fInst.end());

      std::vector<Formula> cInst;
      for (const auto& s : binder.enumerate(condVars, {}, to_string(*cond)))
        cInst.push_back(substitute(*cond, s));
      std::sort(cInst.begin(), cInst.end(), formula_less);
      cInst.erase(std::unique(cInst.begin(), cInst.end()), cInst.end());

      if (fInst.size() == 1) {
        for (const auto& c : cInst)
          out.push_back(make_inst(af, fInst.front(), instanceAnn(c)));
      } else if (cInst.size() == 1) {
        for (auto& g : fInst)
          out.push_back(make_inst(af, std::move(g), instanceAnn(cInst.front())));
      } else if (fInst.size() == cInst.size()) {
        for (size_t i = 0; i < fInst.size(); ++i)
          out.push_back(make_inst(af, std::move(fInst[i]),
                                  instanceAnn(cInst[i])));
      } else {
        throw ParseError(af.line,
                         "cannot pair " + std::to_string(fInst.size()) +
                             " formula instances with " +
                             std::to_string(cInst.size()) +
                             " condition instances");
      }
    } else {
      throw ParseError(af.line,
                       "condition shares some but not all variables with the "
                       "formula; use triple brackets for a cross product");
    }
  } else {
    // triple brackets: full cross product of formula and condition
    // instances, variable sharing deliberately ignored
    std::vector<Formula> fInst;
    for (const auto& v : variants)
      collect_instances(v, binder, dom, af.line, fInst);
    std::sort(fInst.begin(), fInst.end(), formula_less);
    fInst.erase(std::unique(fInst.begin(), fInst.end()), fInst.end());

    std::vector<Formula> cInst;
    if (cond) {
      for (const auto& s : binder.enumerate(condVars, {}, to_string(*cond)))
        cInst.push_back(substitute(*cond, s));
      std::sort(cInst.begin(), cInst.end(), formula_less);
      cInst.erase(std::unique(cInst.begin(), cInst.end()), cInst.end());
    }
    if (cInst.empty()) {
      for (auto& g : fInst)
        out.push_back(make_inst(af, std::move(g),
                                instanceAnn(cond ? std::optional<Formula>(*cond)
                                                 : std::nullopt)));
    } else {
      for (const auto& c : cInst)
        for (const auto& g : fInst)
          out.push_back(make_inst(af, g, instanceAnn(c)));
    }
  }

  sort_instances(out);
  out.erase(std::unique(out.begin(), out.end(), af_eq), out.end());
  for (const auto& inst : out) ensure_ground(inst);
  return out;
}

GroundedProgram ground_program(const Program& prog) {
  GroundedProgram out;
  out.indepGroupCount = prog.indepGroupCount;
  out.pIndepGroupCount = prog.pIndepGroupCount;

  DomainMap dom = compute_domains(prog);
  for (const auto& af : prog.formulas) {
    auto insts = ground_statement(af, dom, prog.domainDecls);
    out.formulas.insert(out.formulas.end(),
                        std::make_move_iterator(insts.begin()),
                        std::make_move_iterator(insts.end()));
  }

  if (!prog.disjunctions.empty()) {
    // every helper fact of every ground disjunction instance lands in one
    // shared mutual-independence group
    out.adHelperGroup = out.indepGroupCount++;
    int adIndex = 0;
    for (const auto& ad : prog.disjunctions) {
      Binder binder{dom, prog.domainDecls, ad.line};
      std::vector<std::string> vars;
      for (const auto& [w, alt] : ad.alternatives)
        collect_variables(alt, vars);
      for (const auto& b : ad.body) collect_variables(b, vars);
      std::vector<const Formula*> bindingAtoms;
      for (const auto& b : ad.body)
        if (b.kind == FormulaKind::Atom) bindingAtoms.push_back(&b);

      std::string what = to_string(ad.alternatives.front().second);
      for (const auto& s : binder.enumerate(vars, bindingAtoms, what)) {
        AnnotatedDisjunction g;
        g.line = ad.line;
        bool alive = true;
        for (const auto& b : ad.body) {
          Formula lit = substitute(b, s);
          auto v = eval_literal(lit, dom, ad.line);
          if (!v)
            g.body.push_back(std::move(lit));
          else if (!*v) {
            alive = false;
            break;
          }
        }
        if (!alive) continue;
        for (const auto& [w, alt] : ad.alternatives)
          g.alternatives.emplace_back(w, substitute(alt, s));
        for (auto piece :
             desugar_annotated_disjunction(g, adIndex, out.adHelperGroup))
          out.formulas.push_back(std::move(piece));
        ++adIndex;
      }
    }
  }

  for (const auto& af : out.formulas) ensure_ground(af);
  return out;
}

std::vector<AnnotatedFormula> ground_aux_file(const Program& auxFile,
                                              const Program& background) {
  Program merged = background;
  merged.formulas.insert(merged.formulas.end(), auxFile.formulas.begin(),
                         auxFile.formulas.end());
  merged.domainDecls.insert(merged.domainDecls.end(),
                            auxFile.domainDecls.begin(),
                            auxFile.domainDecls.end());
  DomainMap dom = compute_domains(merged);

  std::vector<AnnotatedFormula> out;
  for (const auto& af : auxFile.formulas) {
    auto insts = ground_statement(af, dom, merged.domainDecls);
    out.insert(out.end(), std::make_move_iterator(insts.begin()),
               std::make_move_iterator(insts.end()));
  }
  return out;
}

}  // namespace prasp
