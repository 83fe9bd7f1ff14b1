#pragma once

// Core syntax tree for weight-annotated logic programs: terms, formulas,
// annotations, and the program container produced by the parser.

#include <optional>
#include <string>
#include <vector>

namespace prasp {

// ---------------------------------------------------------------- terms

enum class TermKind { Constant, Integer, Variable, Interval, Sequence, Compound };

struct Term {
  TermKind kind = TermKind::Constant;
  std::string text;        // Constant/Variable name, Compound functor
  long long value = 0;     // Integer payload
  std::vector<Term> args;  // Compound args; Interval {lo,hi}; Sequence elements

  static Term constant(std::string name);
  static Term integer(long long v);
  static Term variable(std::string name);
  static Term interval(Term lo, Term hi);
  static Term sequence(std::vector<Term> elems);
  static Term compound(std::string functor, std::vector<Term> args);

  bool operator==(const Term& o) const;
  bool isGround() const;
};

std::string to_string(const Term& t);

// ------------------------------------------------------------- formulas

// Compare only occurs in rule bodies and is evaluated away during grounding.
enum class FormulaKind {
  True,
  False,
  Atom,
  StrongNeg,   // -a, classical negation on an atom
  DefaultNeg,  // not f
  And,
  Or,
  Rule,        // sub[0] = head (False for an integrity constraint), sub[1..] = body
  Count,       // lo { lit, ... } hi ; -1 bound = unbounded side
  Compare,     // pred holds the operator: == != < <= > >=
};

struct Formula {
  FormulaKind kind = FormulaKind::True;
  std::string pred;           // Atom predicate / Compare operator
  std::vector<Term> args;     // Atom arguments / Compare operands (2)
  std::vector<Formula> sub;
  int lo = -1, hi = -1;       // Count bounds

  static Formula trueF();
  static Formula falseF();
  static Formula atom(std::string pred, std::vector<Term> args = {});
  static Formula strongNeg(Formula a);
  static Formula defaultNeg(Formula f);
  static Formula conj(std::vector<Formula> fs);   // flattens nested And
  static Formula disj(std::vector<Formula> fs);   // flattens nested Or
  static Formula rule(Formula head, std::vector<Formula> body);
  static Formula count(int lo, std::vector<Formula> elems, int hi);
  static Formula compare(std::string op, Term lhs, Term rhs);

  bool operator==(const Formula& o) const;
  bool isGround() const;
  bool isAtom() const { return kind == FormulaKind::Atom; }
};

std::string to_string(const Formula& f);

// Collects predicate names of all atoms in f (including under negation).
void collect_atoms(const Formula& f, std::vector<const Formula*>& out);

// Applies a variable substitution; unmapped variables stay in place.
struct Substitution;
Term substitute(const Term& t, const Substitution& s);
Formula substitute(const Formula& f, const Substitution& s);

struct Substitution {
  std::vector<std::pair<std::string, Term>> map;
  const Term* lookup(const std::string& var) const;
  void bind(std::string var, Term value);
};

void collect_variables(const Term& t, std::vector<std::string>& out);
void collect_variables(const Formula& f, std::vector<std::string>& out);

// ---------------------------------------------------------- annotations

enum class AnnKind {
  Point,      // [w]
  IntervalW,  // [lo;hi]
  Query,      // [?]
  Span,       // [.]  nondeterminism without a weight
  Distribute  // [[:]] weight 1/n per ground instance
};

struct Annotation {
  AnnKind kind = AnnKind::Point;
  double lo = 0.0, hi = 0.0;      // Point stores lo == hi
  std::optional<Formula> cond;    // [w|c], [?|c]
  int bracketLevel = 1;           // 1, 2 or 3 square brackets

  bool isPoint() const { return kind == AnnKind::Point; }
  bool conditional() const { return cond.has_value(); }
  double weight() const { return lo; }  // Point only
};

std::string to_string(const Annotation& a);

struct AnnotatedFormula {
  std::optional<Annotation> ann;  // nullopt = certain knowledge
  Formula formula;
  int line = 0;
  int indepGroup = -1;    // mutual independence group, -1 = none
  int pIndepGroup = -1;   // pairwise independence group, -1 = none
  bool volatileOnly = false;  // contributes to grounding, dropped before spanning
};

std::string to_string(const AnnotatedFormula& af);

// ------------------------------------------------------ program container

struct AnnotatedDisjunction {
  // [p1] h1; [p2] h2; ... ::- body
  std::vector<std::pair<double, Formula>> alternatives;
  std::vector<Formula> body;
  int line = 0;
};

struct Program {
  std::vector<AnnotatedFormula> formulas;
  std::vector<AnnotatedDisjunction> disjunctions;
  // #domain pred(Var): variable name -> unary domain predicate
  std::vector<std::pair<std::string, std::string>> domainDecls;
  int indepGroupCount = 0;
  int pIndepGroupCount = 0;

  int freshIndepGroup() { return indepGroupCount++; }
  int freshPIndepGroup() { return pIndepGroupCount++; }
};

// Reserved atom/predicate prefixes; user input using them is rejected.
bool reserved_identifier(const std::string& name);

}  // namespace prasp
