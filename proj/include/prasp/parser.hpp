#pragma once

// Input-language front end: comment stripping, #include splicing, #def macro
// expansion, and the line-based statement parser producing a Program.
//
// Grammar notes that are easy to trip over:
//   - one statement per physical line, dot-terminated; meta markers
//     (#indep, #endIndep, ...) stand on their own lines without a dot;
//   - inside an annotation, the first '|' at bracket depth 0 separates the
//     weight from the condition, and the condition runs to the closing
//     bracket — so conditions may themselves contain '|' as disjunction;
//   - '|' outside annotations is plain disjunction;
//   - ',' separates rule-body conjuncts, count elements, and argument
//     slots; a bare "a, b" statement is not a formula (use "a & b").

#include <stdexcept>
#include <string>
#include <vector>

#include "prasp/ast.hpp"

namespace prasp {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg),
        line(line_) {}
};

// Removes % line comments and %* ... *% regions, replacing them with spaces
// so that byte/line positions of the remaining text are unchanged.
std::string strip_comments(const std::string& text);

// Reads a file, strips comments, and splices #include "file" lines
// recursively (paths resolved relative to the including file). Detects
// cycles via the visited list.
std::string resolve_includes(const std::string& path,
                             std::vector<std::string>& visited);

// Applies #def name = content substitutions to all lines below each
// definition. Definitions may reference earlier macros; their content is
// expanded at definition time, which also rules out cycles.
std::string expand_macros(const std::string& text);

enum class FileKind { Background, Query, Hypothesis, Examples };

// Parses preprocessed text (one statement per line). FileKind selects the
// annotation discipline: query/hypothesis files accept only [?]-style
// annotations, example files none at all.
Program parse_program(const std::string& text,
                      FileKind kind = FileKind::Background);

// Parses a single formula (no annotation, no trailing dot).
Formula parse_formula(const std::string& text);

// Expands a ground annotated disjunction into helper-atom weighted facts
// plus plain rules. adIndex keeps helper names unique across the program;
// indepGroup is the mutual-independence group all helper facts join.
// Alternative i fires via h_i & not h_1 & ... & not h_{i-1}, with helper
// weights q_1 = p_1, q_i = p_i / prod_{j<i}(1 - q_j) so the alternative
// probabilities come out as the annotated p_i.
std::vector<AnnotatedFormula> desugar_annotated_disjunction(
    const AnnotatedDisjunction& ad, int adIndex, int indepGroup);

}  // namespace prasp
