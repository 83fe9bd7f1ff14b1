#include "prasp/spanning.hpp"

#include <unordered_set>

#include "prasp/parser.hpp"

namespace prasp {

namespace {

bool is_atomlike(const Formula& f) {
  return f.kind == FormulaKind::Atom || f.kind == FormulaKind::StrongNeg;
}

// A certain statement build_ground_program can take verbatim.
bool representable_certain(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Atom:
    case FormulaKind::StrongNeg:
    case FormulaKind::Count:
      return true;
    case FormulaKind::Rule: {
      const Formula& h = f.sub[0];
      return is_atomlike(h) || h.kind == FormulaKind::False ||
             h.kind == FormulaKind::Count;
    }
    default:
      return false;
  }
}

void collect_atomlike(const Formula& f, std::vector<Formula>& out) {
  if (is_atomlike(f)) {
    out.push_back(f);
    return;
  }
  for (const auto& s : f.sub) collect_atomlike(s, out);
}

Formula choice_over(const Formula& atom) {
  return Formula::count(0, {atom}, 1);
}

struct Builder {
  const GroundedProgram& in;
  SpanningProgram out;
  std::vector<AnnotatedFormula> certain;        // fed to build_ground_program
  std::unordered_set<std::string> defined;      // fact / rule head / choice elem
  std::unordered_set<std::string> choiced;      // already has a choice
  std::vector<Formula> pendingChoiceAtoms;      // encounter order, deduped
  std::unordered_set<std::string> pendingSeen;
  int guardCounter = 0;

  void note_defined(const Formula& atomlike) {
    defined.insert(atom_name(atomlike));
  }

  // Defining occurrences of a certain statement (facts, rule heads, choice
  // elements). Done for the whole program before any fragment is emitted so
  // the "undefined atom" test is order-independent.
  void scan_definitions(const AnnotatedFormula& af) {
    const Formula& f = af.formula;
    bool certainStmt = !af.ann || (af.ann->kind == AnnKind::Point &&
                                   af.ann->lo == 1.0 && af.ann->hi == 1.0 &&
                                   !af.ann->cond);
    if (af.volatileOnly) return;
    if (af.ann && af.ann->kind == AnnKind::Query) return;
    switch (f.kind) {
      case FormulaKind::Atom:
      case FormulaKind::StrongNeg:
        // weighted atoms get a choice, so they count as defined either way
        if (!af.ann || af.ann->kind == AnnKind::Point ||
            af.ann->kind == AnnKind::IntervalW || af.ann->kind == AnnKind::Span)
          if (!af.ann || !af.ann->cond) note_defined(f);
        break;
      case FormulaKind::Count:
        if (certainStmt)
          for (const auto& e : f.sub) {
            note_defined(e);
            choiced.insert(atom_name(e));  // already nondeterministic
          }
        break;
      case FormulaKind::Rule: {
        const Formula& h = f.sub[0];
        if (is_atomlike(h)) {
          // weighted rules still define their head (via the guarded rule)
          if (certainStmt || !af.ann->cond) note_defined(h);
        } else if (h.kind == FormulaKind::Count && certainStmt) {
          for (const auto& e : h.sub) {
            note_defined(e);
            choiced.insert(atom_name(e));
          }
        }
        break;
      }
      default:
        break;
    }
  }

  void request_choices(const Formula& f) {
    std::vector<Formula> atoms;
    collect_atomlike(f, atoms);
    for (auto& a : atoms) {
      std::string name = atom_name(a);
      if (defined.count(name) || pendingSeen.count(name)) continue;
      pendingSeen.insert(name);
      pendingChoiceAtoms.push_back(a);
    }
  }

  void emit(Formula f, int line) {
    AnnotatedFormula af;
    af.formula = std::move(f);
    af.line = line;
    out.statements.push_back(af);
    certain.push_back(std::move(af));
  }

  void add_row(const AnnotatedFormula& af, int sourceId) {
    WeightedEntry e;
    e.sourceId = sourceId;
    e.formula = af.formula;
    e.ann = *af.ann;
    e.indepGroup = af.indepGroup;
    e.pIndepGroup = af.pIndepGroup;
    e.line = af.line;
    out.weighted.push_back(std::move(e));
  }

  void atom_fragment(const Formula& a, int line) {
    std::string name = atom_name(a);
    if (choiced.count(name)) return;
    choiced.insert(name);
    emit(choice_over(a), line);
  }

  void rule_fragment(const AnnotatedFormula& af) {
    const Formula& f = af.formula;
    const Formula& head = f.sub[0];
    if (!is_atomlike(head))
      throw ParseError(af.line,
                       "weighted rule needs a single-atom head: " + to_string(f));
    Formula guard =
        Formula::atom("hp__span_" + std::to_string(guardCounter++));
    emit(choice_over(guard), af.line);
    choiced.insert(atom_name(guard));

    std::vector<Formula> body(f.sub.begin() + 1, f.sub.end());
    std::vector<Formula> guardedBody = body;
    guardedBody.push_back(guard);
    emit(Formula::rule(head, std::move(guardedBody)), af.line);

    // worlds without the guard are exactly "body true, head false"
    for (const auto& b : body)
      emit(Formula::rule(Formula::falseF(),
                         {Formula::defaultNeg(guard), Formula::defaultNeg(b)}),
           af.line);
    emit(Formula::rule(Formula::falseF(),
                       {Formula::defaultNeg(guard), head}),
         af.line);
  }

  void run() {
    out.indepGroupCount = in.indepGroupCount;
    out.pIndepGroupCount = in.pIndepGroupCount;

    for (const auto& af : in.formulas) scan_definitions(af);

    for (size_t i = 0; i < in.formulas.size(); ++i) {
      const AnnotatedFormula& af = in.formulas[i];
      const Formula& f = af.formula;
      int id = static_cast<int>(i);
      if (af.volatileOnly) continue;
      if (af.ann && af.ann->kind == AnnKind::Query) continue;

      if (!af.ann) {
        if (representable_certain(f)) {
          out.statements.push_back(af);
          certain.push_back(af);
        } else {
          // hard compound statement: pinned by a weight-1 row, its atoms
          // made nondeterministic below
          AnnotatedFormula hard = af;
          hard.ann = Annotation{AnnKind::Point, 1.0, 1.0, std::nullopt, 1};
          add_row(hard, id);
          request_choices(f);
        }
        continue;
      }

      const Annotation& ann = *af.ann;
      if (ann.kind == AnnKind::Span) {
        if (is_atomlike(f))
          atom_fragment(f, af.line);
        else
          request_choices(f);
        continue;
      }
      // Point / IntervalW (Distribute was rewritten during grounding)
      add_row(af, id);
      if (ann.cond) {
        request_choices(f);
        request_choices(*ann.cond);
        continue;
      }
      bool certainWeight =
          ann.kind == AnnKind::Point && ann.lo == 1.0 && ann.hi == 1.0;
      if (certainWeight && representable_certain(f)) {
        out.statements.push_back(af);
        AnnotatedFormula plain = af;
        plain.ann.reset();
        certain.push_back(std::move(plain));
        continue;
      }
      if (is_atomlike(f)) {
        atom_fragment(f, af.line);
      } else if (f.kind == FormulaKind::Rule &&
                 f.sub[0].kind != FormulaKind::False) {
        rule_fragment(af);
      } else {
        // compound formula (including weighted constraints `[w] :- b`):
        // probability handled by the row, truth value left open per atom
        request_choices(f);
      }
    }

    for (const auto& a : pendingChoiceAtoms) atom_fragment(a, 0);

    out.ground = build_ground_program(certain);
    for (const auto& name : out.ground.atoms)
      if (name.rfind("hp__", 0) == 0 ||
          (name.size() > 1 && name[0] == '-' && name.rfind("-hp__", 0) == 0))
        out.helperAtoms.insert(name);
  }
};

}  // namespace

SpanningProgram build_spanning_program(const GroundedProgram& g) {
  Builder b{g, {}, {}, {}, {}, {}, {}, 0};
  b.run();
  return std::move(b.out);
}

}  // namespace prasp
