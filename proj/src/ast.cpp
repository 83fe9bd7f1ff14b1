#include "prasp/ast.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace prasp {

// ---------------------------------------------------------------- terms

Term Term::constant(std::string name) {
  Term t;
  t.kind = TermKind::Constant;
  t.text = std::move(name);
  return t;
}

Term Term::integer(long long v) {
  Term t;
  t.kind = TermKind::Integer;
  t.value = v;
  return t;
}

Term Term::variable(std::string name) {
  Term t;
  t.kind = TermKind::Variable;
  t.text = std::move(name);
  return t;
}

Term Term::interval(Term lo, Term hi) {
  Term t;
  t.kind = TermKind::Interval;
  t.args = {std::move(lo), std::move(hi)};
  return t;
}

Term Term::sequence(std::vector<Term> elems) {
  Term t;
  t.kind = TermKind::Sequence;
  t.args = std::move(elems);
  return t;
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  Term t;
  t.kind = TermKind::Compound;
  t.text = std::move(functor);
  t.args = std::move(args);
  return t;
}

bool Term::operator==(const Term& o) const {
  return kind == o.kind && text == o.text && value == o.value && args == o.args;
}

bool Term::isGround() const {
  switch (kind) {
    case TermKind::Variable: return false;
    case TermKind::Constant:
    case TermKind::Integer: return true;
    default:
      return std::all_of(args.begin(), args.end(),
                         [](const Term& a) { return a.isGround(); });
  }
}

std::string to_string(const Term& t) {
  switch (t.kind) {
    case TermKind::Constant:
    case TermKind::Variable: return t.text;
    case TermKind::Integer: return std::to_string(t.value);
    case TermKind::Interval:
      return to_string(t.args[0]) + ".." + to_string(t.args[1]);
    case TermKind::Sequence: {
      std::string s;
      for (size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += ";";
        s += to_string(t.args[i]);
      }
      return s;
    }
    case TermKind::Compound: {
      std::string s = t.text + "(";
      for (size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += ",";
        s += to_string(t.args[i]);
      }
      return s + ")";
    }
  }
  return "";
}

// ------------------------------------------------------------- formulas

Formula Formula::trueF() {
  Formula f;
  f.kind = FormulaKind::True;
  return f;
}

Formula Formula::falseF() {
  Formula f;
  f.kind = FormulaKind::False;
  return f;
}

Formula Formula::atom(std::string pred, std::vector<Term> args) {
  Formula f;
  f.kind = FormulaKind::Atom;
  f.pred = std::move(pred);
  f.args = std::move(args);
  return f;
}

Formula Formula::strongNeg(Formula a) {
  Formula f;
  f.kind = FormulaKind::StrongNeg;
  f.sub = {std::move(a)};
  return f;
}

Formula Formula::defaultNeg(Formula g) {
  Formula f;
  f.kind = FormulaKind::DefaultNeg;
  f.sub = {std::move(g)};
  return f;
}

Formula Formula::conj(std::vector<Formula> fs) {
  if (fs.size() == 1) return fs[0];
  Formula f;
  f.kind = FormulaKind::And;
  for (auto& g : fs) {
    if (g.kind == FormulaKind::And)
      for (auto& h : g.sub) f.sub.push_back(std::move(h));
    else
      f.sub.push_back(std::move(g));
  }
  return f;
}

Formula Formula::disj(std::vector<Formula> fs) {
  if (fs.size() == 1) return fs[0];
  Formula f;
  f.kind = FormulaKind::Or;
  for (auto& g : fs) {
    if (g.kind == FormulaKind::Or)
      for (auto& h : g.sub) f.sub.push_back(std::move(h));
    else
      f.sub.push_back(std::move(g));
  }
  return f;
}

Formula Formula::rule(Formula head, std::vector<Formula> body) {
  Formula f;
  f.kind = FormulaKind::Rule;
  f.sub.push_back(std::move(head));
  for (auto& b : body) f.sub.push_back(std::move(b));
  return f;
}

Formula Formula::count(int lo, std::vector<Formula> elems, int hi) {
  Formula f;
  f.kind = FormulaKind::Count;
  f.lo = lo;
  f.hi = hi;
  f.sub = std::move(elems);
  return f;
}

Formula Formula::compare(std::string op, Term lhs, Term rhs) {
  Formula f;
  f.kind = FormulaKind::Compare;
  f.pred = std::move(op);
  f.args = {std::move(lhs), std::move(rhs)};
  return f;
}

bool Formula::operator==(const Formula& o) const {
  return kind == o.kind && pred == o.pred && args == o.args && sub == o.sub &&
         lo == o.lo && hi == o.hi;
}

bool Formula::isGround() const {
  for (const auto& a : args)
    if (!a.isGround()) return false;
  for (const auto& s : sub)
    if (!s.isGround()) return false;
  return true;
}

namespace {

// Precedence: Rule 0 < Or 1 < And 2 < unary/atomic 3.
int prec(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::Rule: return 0;
    case FormulaKind::Or: return 1;
    case FormulaKind::And: return 2;
    default: return 3;
  }
}

void print(const Formula& f, int minPrec, std::string& out) {
  bool paren = prec(f) < minPrec;
  if (paren) out += "(";
  switch (f.kind) {
    case FormulaKind::True: out += "true"; break;
    case FormulaKind::False: out += "false"; break;
    case FormulaKind::Atom: {
      out += f.pred;
      if (!f.args.empty()) {
        out += "(";
        for (size_t i = 0; i < f.args.size(); ++i) {
          if (i) out += ",";
          out += to_string(f.args[i]);
        }
        out += ")";
      }
      break;
    }
    case FormulaKind::StrongNeg:
      out += "-";
      print(f.sub[0], 3, out);
      break;
    case FormulaKind::DefaultNeg:
      out += "not ";
      print(f.sub[0], 3, out);
      break;
    case FormulaKind::And:
      for (size_t i = 0; i < f.sub.size(); ++i) {
        if (i) out += " & ";
        print(f.sub[i], 2, out);
      }
      break;
    case FormulaKind::Or:
      for (size_t i = 0; i < f.sub.size(); ++i) {
        if (i) out += " | ";
        print(f.sub[i], 2, out);
      }
      break;
    case FormulaKind::Rule: {
      if (f.sub[0].kind != FormulaKind::False) print(f.sub[0], 1, out);
      out += " :- ";
      for (size_t i = 1; i < f.sub.size(); ++i) {
        if (i > 1) out += ", ";
        print(f.sub[i], 1, out);
      }
      break;
    }
    case FormulaKind::Count: {
      if (f.lo >= 0) out += std::to_string(f.lo);
      out += "{";
      for (size_t i = 0; i < f.sub.size(); ++i) {
        if (i) out += ",";
        print(f.sub[i], 1, out);
      }
      out += "}";
      if (f.hi >= 0) out += std::to_string(f.hi);
      break;
    }
    case FormulaKind::Compare:
      out += to_string(f.args[0]) + " " + f.pred + " " + to_string(f.args[1]);
      break;
  }
  if (paren) out += ")";
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  // A rule at top level prints without parentheses even though it binds loosest.
  print(f, 0, out);
  return out;
}

void collect_atoms(const Formula& f, std::vector<const Formula*>& out) {
  if (f.kind == FormulaKind::Atom) {
    out.push_back(&f);
    return;
  }
  for (const auto& s : f.sub) collect_atoms(s, out);
}

// --------------------------------------------------------- substitution

const Term* Substitution::lookup(const std::string& var) const {
  for (const auto& [k, v] : map)
    if (k == var) return &v;
  return nullptr;
}

void Substitution::bind(std::string var, Term value) {
  map.emplace_back(std::move(var), std::move(value));
}

Term substitute(const Term& t, const Substitution& s) {
  if (t.kind == TermKind::Variable) {
    if (const Term* v = s.lookup(t.text)) return *v;
    return t;
  }
  Term out = t;
  for (auto& a : out.args) a = substitute(a, s);
  return out;
}

Formula substitute(const Formula& f, const Substitution& s) {
  Formula out = f;
  for (auto& a : out.args) a = substitute(a, s);
  for (auto& g : out.sub) g = substitute(g, s);
  return out;
}

void collect_variables(const Term& t, std::vector<std::string>& out) {
  if (t.kind == TermKind::Variable) {
    if (std::find(out.begin(), out.end(), t.text) == out.end())
      out.push_back(t.text);
    return;
  }
  for (const auto& a : t.args) collect_variables(a, out);
}

void collect_variables(const Formula& f, std::vector<std::string>& out) {
  for (const auto& a : f.args) collect_variables(a, out);
  for (const auto& s : f.sub) collect_variables(s, out);
}

// ---------------------------------------------------------- annotations

namespace {

// Probabilities print with up to 16 significant digits, shortest form.
std::string format_prob(double p) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16g", p);
  return buf;
}

}  // namespace

std::string to_string(const Annotation& a) {
  std::string inner;
  switch (a.kind) {
    case AnnKind::Point: inner = format_prob(a.lo); break;
    case AnnKind::IntervalW:
      inner = format_prob(a.lo) + ";" + format_prob(a.hi);
      break;
    case AnnKind::Query: inner = "?"; break;
    case AnnKind::Span: inner = "."; break;
    case AnnKind::Distribute: inner = ":"; break;
  }
  if (a.cond) inner += "|" + to_string(*a.cond);
  std::string open, close;
  for (int i = 0; i < a.bracketLevel; ++i) {
    open += "[";
    close += "]";
  }
  return open + inner + close;
}

std::string to_string(const AnnotatedFormula& af) {
  std::string s;
  if (af.ann) s = to_string(*af.ann) + " ";
  return s + to_string(af.formula) + ".";
}

bool reserved_identifier(const std::string& name) {
  static const char* prefixes[] = {"hp__atom", "npred_atom", "_new_pred",
                                   "n_pred_",  "_NV_",       "___str",
                                   "condPr",   "lhPp",       "Hp__var"};
  for (const char* p : prefixes)
    if (name.rfind(p, 0) == 0) return true;
  // Internal helper namespaces (spanning, annotated disjunctions, weight
  // conversion) are reserved as well.
  return name.rfind("hp__", 0) == 0;
}

}  // namespace prasp
