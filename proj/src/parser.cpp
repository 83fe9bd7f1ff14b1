#include "prasp/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace prasp {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool starts_with(const std::string& s, const char* p) {
  return s.rfind(p, 0) == 0;
}

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

// ------------------------------------------------------------ comments

std::string strip_comments(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  enum { Code, Line, Block } state = Code;
  int line = 1, blockStart = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    char n = i + 1 < text.size() ? text[i + 1] : '\0';
    if (c == '\n') ++line;
    switch (state) {
      case Code:
        if (c == '%' && n == '*') {
          state = Block;
          blockStart = line;
          out += "  ";
          ++i;
        } else if (c == '%') {
          state = Line;
          out += ' ';
        } else {
          out += c;
        }
        break;
      case Line:
        if (c == '\n') {
          state = Code;
          out += '\n';
        } else {
          out += ' ';
        }
        break;
      case Block:
        if (c == '*' && n == '%') {
          state = Code;
          out += "  ";
          ++i;
        } else {
          out += c == '\n' ? '\n' : ' ';
        }
        break;
    }
  }
  if (state == Block)
    throw ParseError(blockStart, "unterminated %* comment block");
  return out;
}

// ------------------------------------------------------------ includes

std::string resolve_includes(const std::string& path,
                             std::vector<std::string>& visited) {
  namespace fs = std::filesystem;
  std::string canon = fs::weakly_canonical(fs::path(path)).string();
  if (std::find(visited.begin(), visited.end(), canon) != visited.end())
    throw ParseError(0, "include cycle involving " + path);
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = strip_comments(buf.str());

  visited.push_back(canon);
  std::string out;
  std::istringstream lines(text);
  std::string lineText;
  int lineNo = 0;
  while (std::getline(lines, lineText)) {
    ++lineNo;
    std::string t = trim(lineText);
    if (!starts_with(t, "#include")) {
      out += lineText;
      out += '\n';
      continue;
    }
    std::string rest = trim(t.substr(8));
    if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"')
      throw ParseError(lineNo, "#include expects a quoted file name");
    std::string name = rest.substr(1, rest.size() - 2);
    std::string ext = fs::path(name).extension().string();
    if (ext != ".prasp" && ext != ".query" && ext != ".hypoth" &&
        ext != ".examples")
      throw ParseError(lineNo, "#include restricted to .prasp/.query/.hypoth/"
                               ".examples files: " + name);
    fs::path resolved = fs::path(path).parent_path() / name;
    out += resolve_includes(resolved.string(), visited);
    out += '\n';
  }
  visited.pop_back();
  return out;
}

// -------------------------------------------------------------- macros

namespace {

std::string replace_word(const std::string& line, const std::string& name,
                         const std::string& content) {
  std::string out;
  size_t i = 0;
  while (i < line.size()) {
    size_t hit = line.find(name, i);
    if (hit == std::string::npos) {
      out += line.substr(i);
      break;
    }
    bool leftOk = hit == 0 || !word_char(line[hit - 1]);
    size_t end = hit + name.size();
    bool rightOk = end >= line.size() || !word_char(line[end]);
    out += line.substr(i, hit - i);
    if (leftOk && rightOk) {
      out += content;
      i = end;
    } else {
      out += line[hit];
      i = hit + 1;
    }
  }
  return out;
}

}  // namespace

std::string expand_macros(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> macros;
  auto substitute_all = [&](std::string s) {
    for (const auto& [name, content] : macros) s = replace_word(s, name, content);
    return s;
  };
  std::string out;
  std::istringstream lines(text);
  std::string lineText;
  int lineNo = 0;
  while (std::getline(lines, lineText)) {
    ++lineNo;
    std::string t = trim(lineText);
    if (!starts_with(t, "#def")) {
      out += substitute_all(lineText);
      out += '\n';
      continue;
    }
    std::string rest = trim(t.substr(4));
    size_t w = 0;
    while (w < rest.size() && word_char(rest[w])) ++w;
    if (w == 0) throw ParseError(lineNo, "#def expects a macro name");
    std::string name = rest.substr(0, w);
    std::string after = trim(rest.substr(w));
    if (after.empty() || after[0] != '=')
      throw ParseError(lineNo, "#def expects '=' after the macro name");
    // Content referencing earlier macros expands now (transitive, acyclic).
    std::string content = substitute_all(trim(after.substr(1)));
    bool replaced = false;
    for (auto& m : macros)
      if (m.first == name) {
        m.second = content;  // redefinition: latest wins
        replaced = true;
      }
    if (!replaced) macros.emplace_back(name, content);
    out += '\n';  // keep line numbering stable
  }
  return out;
}

// --------------------------------------------------------------- lexer

namespace {

struct Token {
  enum Kind { Ident, Var, Int, Punct, End };
  Kind kind = End;
  std::string s;
  long long v = 0;
};

std::vector<Token> lex(const std::string& text, int line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    Token t;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
        ++j;
      t.kind = Token::Int;
      t.v = std::stoll(text.substr(i, j - i));
      i = j;
    } else if (std::islower(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && word_char(text[j])) ++j;
      t.kind = Token::Ident;
      t.s = text.substr(i, j - i);
      i = j;
    } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() && word_char(text[j])) ++j;
      t.kind = Token::Var;
      t.s = text.substr(i, j - i);
      i = j;
    } else if (c == '#') {
      size_t j = i + 1;
      while (j < text.size() && word_char(text[j])) ++j;
      t.kind = Token::Ident;
      t.s = text.substr(i, j - i);
      i = j;
    } else {
      auto two = text.substr(i, 2);
      auto three = text.substr(i, 3);
      t.kind = Token::Punct;
      if (three == "::-") {
        t.s = three;
        i += 3;
      } else if (two == ":-" || two == ".." || two == "==" || two == "!=" ||
                 two == "<=" || two == ">=") {
        t.s = two;
        i += 2;
      } else if (std::string("(){},;.|&<>-:=").find(c) != std::string::npos) {
        t.s = std::string(1, c);
        i += 1;
      } else {
        throw ParseError(line, std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Token::End;
  out.push_back(end);
  return out;
}

bool is_compare_op(const Token& t) {
  return t.kind == Token::Punct &&
         (t.s == "==" || t.s == "!=" || t.s == "<" || t.s == "<=" ||
          t.s == ">" || t.s == ">=");
}

// ----------------------------------------------------- formula parser

class FormulaParser {
 public:
  FormulaParser(std::vector<Token> toks, int line)
      : toks_(std::move(toks)), line_(line) {}

  Formula parseFull() {
    Formula f = parseTop(toks_.size() - 1);
    expectEnd();
    return f;
  }

  // Comma-separated rule-body conjuncts ("a, not b, N != 1").
  std::vector<Formula> parseBodyList() {
    std::vector<Formula> body;
    while (true) {
      body.push_back(parseUnary());
      if (isPunct(",")) {
        ++p_;
        continue;
      }
      break;
    }
    expectEnd();
    return body;
  }

 private:
  std::vector<Token> toks_;
  size_t p_ = 0;
  int line_;

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(line_, msg); }

  const Token& cur() const { return toks_[p_]; }
  const Token& peek(size_t k = 1) const {
    size_t i = p_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool isPunct(const char* s) const {
    return cur().kind == Token::Punct && cur().s == s;
  }
  bool isIdent(const char* s) const {
    return cur().kind == Token::Ident && cur().s == s;
  }
  void expectPunct(const char* s) {
    if (!isPunct(s)) fail(std::string("expected '") + s + "'");
    ++p_;
  }
  void expectEnd() {
    if (cur().kind != Token::End)
      fail("unexpected trailing tokens near '" + cur().s + "'");
  }

  // Parses tokens [p_, limit) as a full formula, handling ':-' at depth 0.
  Formula parseTop(size_t limit) {
    int depth = 0;
    size_t arrow = limit;
    for (size_t i = p_; i < limit; ++i) {
      const Token& t = toks_[i];
      if (t.kind != Token::Punct) continue;
      if (t.s == "(" || t.s == "{") ++depth;
      else if (t.s == ")" || t.s == "}") --depth;
      else if (t.s == ":-" && depth == 0) {
        arrow = i;
        break;
      }
    }
    if (arrow == limit) {
      Formula f = parseDisj();
      if (p_ != limit) fail("unexpected trailing tokens near '" + cur().s + "'");
      return f;
    }
    Formula head = Formula::falseF();
    if (arrow > p_) {
      head = parseDisj();
      if (p_ != arrow) fail("malformed rule head");
    }
    ++p_;  // ':-'
    std::vector<Formula> body;
    if (p_ == limit) fail("rule body is empty");
    while (true) {
      body.push_back(parseUnary());
      if (p_ < limit && isPunct(",")) {
        ++p_;
        continue;
      }
      break;
    }
    if (p_ != limit) fail("unexpected trailing tokens near '" + cur().s + "'");
    return Formula::rule(std::move(head), std::move(body));
  }

  Formula parseDisj() {
    std::vector<Formula> parts{parseConj()};
    while (isPunct("|")) {
      ++p_;
      parts.push_back(parseConj());
    }
    return Formula::disj(std::move(parts));
  }

  Formula parseConj() {
    std::vector<Formula> parts{parseUnary()};
    while (isPunct("&")) {
      ++p_;
      parts.push_back(parseUnary());
    }
    return Formula::conj(std::move(parts));
  }

  Formula parseUnary() {
    if (isIdent("not")) {
      ++p_;
      return Formula::defaultNeg(parseUnary());
    }
    if (isPunct("-")) {
      ++p_;
      Formula a = parsePrimary();
      if (a.kind != FormulaKind::Atom) fail("'-' applies to atoms only");
      return Formula::strongNeg(std::move(a));
    }
    return parsePrimary();
  }

  Formula parsePrimary() {
    if (isPunct("(")) {
      ++p_;
      size_t close = matchClose("(", ")");
      Formula f = parseTop(close);
      expectPunct(")");
      return f;
    }
    // Count atom: [lo] [#count] { elems } [hi]
    if (isPunct("{") || isIdent("#count") ||
        (cur().kind == Token::Int &&
         (peek().kind == Token::Punct ? peek().s == "{"
                                      : peek().kind == Token::Ident &&
                                            peek().s == "#count"))) {
      return parseCount();
    }
    if (cur().kind == Token::Int) {
      // Bare integer: only valid as the left side of a comparison.
      Term lhs = parseTerm();
      if (!is_compare_op(cur())) fail("unexpected integer");
      std::string op = cur().s;
      ++p_;
      return Formula::compare(op, std::move(lhs), parseTerm());
    }
    if (cur().kind == Token::Var) {
      Term lhs = parseTerm();
      if (!is_compare_op(cur()))
        fail("variable '" + lhs.text + "' is not a formula");
      std::string op = cur().s;
      ++p_;
      return Formula::compare(op, std::move(lhs), parseTerm());
    }
    if (cur().kind == Token::Ident) {
      if (isIdent("true")) {
        ++p_;
        return Formula::trueF();
      }
      if (isIdent("false")) {
        ++p_;
        return Formula::falseF();
      }
      Formula a = parseAtom();
      if (is_compare_op(cur())) {
        std::string op = cur().s;
        ++p_;
        Term lhs = a.args.empty() ? Term::constant(a.pred)
                                  : Term::compound(a.pred, a.args);
        return Formula::compare(op, std::move(lhs), parseTerm());
      }
      return a;
    }
    fail("unexpected token '" + cur().s + "'");
  }

  Formula parseAtom() {
    if (cur().kind != Token::Ident) fail("expected an atom");
    std::string pred = cur().s;
    ++p_;
    std::vector<Term> args;
    if (isPunct("(")) {
      ++p_;
      while (true) {
        args.push_back(parseTermSlot());
        if (isPunct(",")) {
          ++p_;
          continue;
        }
        break;
      }
      expectPunct(")");
    }
    return Formula::atom(std::move(pred), std::move(args));
  }

  Formula parseCount() {
    int lo = -1, hi = -1;
    if (cur().kind == Token::Int) {
      lo = static_cast<int>(cur().v);
      ++p_;
    }
    if (isIdent("#count")) ++p_;
    expectPunct("{");
    std::vector<Formula> elems;
    if (!isPunct("}")) {
      while (true) {
        elems.push_back(parseCountElem());
        if (isPunct(",") || isPunct(";")) {
          ++p_;
          continue;
        }
        break;
      }
    }
    expectPunct("}");
    if (cur().kind == Token::Int) {
      hi = static_cast<int>(cur().v);
      ++p_;
    }
    return Formula::count(lo, std::move(elems), hi);
  }

  Formula parseCountElem() {
    if (isIdent("not")) {
      ++p_;
      return Formula::defaultNeg(parseCountElem());
    }
    if (isPunct("-")) {
      ++p_;
      return Formula::strongNeg(parseAtom());
    }
    return parseAtom();
  }

  // One argument slot; a;b;c builds a Sequence term.
  Term parseTermSlot() {
    Term t = parseTerm();
    if (!isPunct(";")) return t;
    std::vector<Term> elems{std::move(t)};
    while (isPunct(";")) {
      ++p_;
      elems.push_back(parseTerm());
    }
    return Term::sequence(std::move(elems));
  }

  Term parseTerm() {
    Term t = parseBaseTerm();
    if (isPunct("..")) {
      ++p_;
      return Term::interval(std::move(t), parseBaseTerm());
    }
    return t;
  }

  Term parseBaseTerm() {
    if (cur().kind == Token::Int) {
      long long v = cur().v;
      ++p_;
      return Term::integer(v);
    }
    if (isPunct("-")) {
      ++p_;
      if (cur().kind != Token::Int) fail("expected an integer after '-'");
      long long v = cur().v;
      ++p_;
      return Term::integer(-v);
    }
    if (cur().kind == Token::Var) {
      std::string name = cur().s;
      ++p_;
      return Term::variable(name);
    }
    if (cur().kind == Token::Ident) {
      std::string name = cur().s;
      ++p_;
      if (isPunct("(")) {
        ++p_;
        std::vector<Term> args;
        while (true) {
          args.push_back(parseTermSlot());
          if (isPunct(",")) {
            ++p_;
            continue;
          }
          break;
        }
        expectPunct(")");
        return Term::compound(std::move(name), std::move(args));
      }
      return Term::constant(std::move(name));
    }
    fail("expected a term");
  }

  // Index of the token closing the bracket just consumed at p_-1.
  size_t matchClose(const char* open, const char* close) {
    int depth = 1;
    for (size_t i = p_; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind != Token::Punct) continue;
      if (t.s == open) ++depth;
      else if (t.s == close && --depth == 0) return i;
    }
    fail(std::string("missing '") + close + "'");
  }
};

Formula parse_formula_text(const std::string& text, int line) {
  return FormulaParser(lex(text, line), line).parseFull();
}

std::vector<Formula> parse_body_text(const std::string& text, int line) {
  return FormulaParser(lex(text, line), line).parseBodyList();
}

// ------------------------------------------------- annotation parsing

double parse_prob(const std::string& s, int line) {
  std::string t = trim(s);
  if (t.empty()) throw ParseError(line, "empty probability");
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw ParseError(line, "malformed probability '" + t + "'");
  if (v < 0.0 || v > 1.0)
    throw ParseError(line, "probability out of [0,1]: '" + t + "'");
  return v;
}

// Splits "[...]...": returns the annotation and the remaining formula text.
// Weight and condition separate at the first '|' at brace/paren depth 0.
std::pair<Annotation, std::string> parse_annotation(const std::string& stmt,
                                                    int line) {
  size_t level = 0;
  while (level < stmt.size() && stmt[level] == '[') ++level;
  if (level > 3) throw ParseError(line, "too many annotation brackets");
  size_t close = stmt.find(']', level);
  if (close == std::string::npos)
    throw ParseError(line, "missing ']' in annotation");
  for (size_t k = 1; k < level; ++k)
    if (close + k >= stmt.size() || stmt[close + k] != ']')
      throw ParseError(line, "mismatched annotation brackets");
  std::string content = stmt.substr(level, close - level);
  std::string rest = trim(stmt.substr(close + level));

  std::string weightPart = content, condPart;
  bool havePipe = false;
  int depth = 0;
  for (size_t i = 0; i < content.size(); ++i) {
    char c = content[i];
    if (c == '(' || c == '{') ++depth;
    else if (c == ')' || c == '}') --depth;
    else if (c == '|' && depth == 0) {
      weightPart = content.substr(0, i);
      condPart = content.substr(i + 1);
      havePipe = true;
      break;
    }
  }

  Annotation ann;
  ann.bracketLevel = static_cast<int>(level);
  std::string w = trim(weightPart);
  if (w == "?") {
    ann.kind = AnnKind::Query;
  } else if (w == ".") {
    ann.kind = AnnKind::Span;
  } else if (w == ":") {
    ann.kind = AnnKind::Distribute;
    if (level < 2)
      throw ParseError(line, "[:] requires double or triple brackets");
  } else if (size_t semi = w.find(';'); semi != std::string::npos) {
    ann.kind = AnnKind::IntervalW;
    ann.lo = parse_prob(w.substr(0, semi), line);
    ann.hi = parse_prob(w.substr(semi + 1), line);
    if (ann.hi < ann.lo)
      throw ParseError(line, "interval upper bound below lower bound");
  } else {
    ann.kind = AnnKind::Point;
    ann.lo = ann.hi = parse_prob(w, line);
  }
  if (havePipe) {
    if (trim(condPart).empty())
      throw ParseError(line, "empty condition after '|' in annotation");
    ann.cond = parse_formula_text(condPart, line);
  }
  return {ann, rest};
}

// --------------------------------------------------- name validation

bool is_condpr_name(const std::string& s) {
  return s == "condPr" || s == "condProb";
}

void validate_term_names(const Term& t, int line) {
  if ((t.kind == TermKind::Constant || t.kind == TermKind::Variable ||
       t.kind == TermKind::Compound) &&
      reserved_identifier(t.text))
    throw ParseError(line, "reserved identifier '" + t.text + "'");
  for (const auto& a : t.args) validate_term_names(a, line);
}

void validate_names(const Formula& f, int line) {
  if (f.kind == FormulaKind::Atom && reserved_identifier(f.pred))
    throw ParseError(line, "reserved identifier '" + f.pred + "'");
  for (const auto& a : f.args) validate_term_names(a, line);
  for (const auto& s : f.sub) validate_names(s, line);
}

// [[w]] condPr(f, c) [:- guards]: the one sanctioned use of the condPr /
// condProb keyword. f and c are atoms written as terms; guards must be
// evaluable at grounding time (comparisons or domain literals).
bool is_condpr_statement(const Formula& f) {
  const Formula* head = f.kind == FormulaKind::Rule ? &f.sub[0] : &f;
  return head->kind == FormulaKind::Atom && is_condpr_name(head->pred);
}

void validate_condpr(const AnnotatedFormula& af, int line) {
  const Formula* head =
      af.formula.kind == FormulaKind::Rule ? &af.formula.sub[0] : &af.formula;
  if (!af.ann || af.ann->kind != AnnKind::Point || af.ann->cond ||
      af.ann->bracketLevel != 2)
    throw ParseError(line, "condPr heads require a [[w]] point annotation");
  if (head->args.size() != 2)
    throw ParseError(line, "condPr expects exactly two arguments");
  for (const auto& arg : head->args) {
    if (arg.kind != TermKind::Compound && arg.kind != TermKind::Constant)
      throw ParseError(line, "condPr arguments must be atoms");
    validate_term_names(arg, line);
  }
  if (af.formula.kind == FormulaKind::Rule)
    for (size_t i = 1; i < af.formula.sub.size(); ++i) {
      const Formula& b = af.formula.sub[i];
      if (b.kind != FormulaKind::Compare && b.kind != FormulaKind::Atom)
        throw ParseError(line, "condPr guards must be comparisons or "
                               "domain literals");
      if (b.kind == FormulaKind::Atom) validate_names(b, line);
    }
}

// ------------------------------------------------- statement parsing

// Splits s on top-level ';' (depth counts all bracket kinds).
std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> parts;
  int depth = 0;
  size_t start = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '{' || c == '[') ++depth;
    else if (c == ')' || c == '}' || c == ']') --depth;
    else if (c == sep && depth == 0) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(s.substr(start));
  return parts;
}

AnnotatedDisjunction parse_ad(const std::string& stmt, size_t arrowPos,
                              int line) {
  AnnotatedDisjunction ad;
  ad.line = line;
  std::string headsPart = stmt.substr(0, arrowPos);
  std::string bodyPart = trim(stmt.substr(arrowPos + 3));
  for (const std::string& piece : split_top(headsPart, ';')) {
    std::string alt = trim(piece);
    if (alt.empty() || alt[0] != '[')
      throw ParseError(line, "each AD alternative needs a [w] annotation");
    auto [ann, rest] = parse_annotation(alt, line);
    if (ann.kind != AnnKind::Point || ann.cond || ann.bracketLevel != 1)
      throw ParseError(line,
                       "AD weights must be plain [w] numeric annotations");
    Formula head = parse_formula_text(rest, line);
    if (head.kind != FormulaKind::Atom)
      throw ParseError(line, "AD alternatives must be atoms");
    validate_names(head, line);
    ad.alternatives.emplace_back(ann.weight(), std::move(head));
  }
  double sum = 0;
  for (const auto& [w, h] : ad.alternatives) sum += w;
  if (sum > 1.0 + 1e-9)
    throw ParseError(line, "AD alternative weights sum to more than 1");
  if (bodyPart.empty()) throw ParseError(line, "AD body is empty");
  if (trim(bodyPart) != "true") ad.body = parse_body_text(bodyPart, line);
  for (const auto& b : ad.body) validate_names(b, line);
  return ad;
}

size_t find_ad_arrow(const std::string& stmt) {
  int depth = 0;
  for (size_t i = 0; i + 2 < stmt.size(); ++i) {
    char c = stmt[i];
    if (c == '(' || c == '{' || c == '[') ++depth;
    else if (c == ')' || c == '}' || c == ']') --depth;
    else if (depth == 0 && stmt.compare(i, 3, "::-") == 0) return i;
  }
  return std::string::npos;
}

}  // namespace

// -------------------------------------------------------- parse_program

Program parse_program(const std::string& text, FileKind kind) {
  Program prog;
  enum class Block { None, Indep, PIndep, IndepVolat, PIndepVolat, Volat };
  Block block = Block::None;
  int curGroup = -1;
  bool curVolatile = false;

  std::istringstream lines(text);
  std::string raw;
  int lineNo = 0;
  while (std::getline(lines, raw)) {
    ++lineNo;
    std::string line = trim(raw);
    if (line.empty()) continue;

    if (line[0] == '#' && !starts_with(line, "#count")) {
      auto openBlock = [&](Block b, bool volat, bool pairwise) {
        if (block != Block::None)
          throw ParseError(lineNo, "independence/volatile blocks do not nest");
        if (kind != FileKind::Background)
          throw ParseError(lineNo,
                           "meta blocks belong in background knowledge");
        block = b;
        curVolatile = volat;
        curGroup = pairwise ? prog.freshPIndepGroup() : prog.freshIndepGroup();
      };
      auto closeBlock = [&](Block b, const char* name) {
        if (block != b)
          throw ParseError(lineNo, std::string("unmatched ") + name);
        block = Block::None;
        curGroup = -1;
        curVolatile = false;
      };
      if (line == "#indep") openBlock(Block::Indep, false, false);
      else if (line == "#endIndep") closeBlock(Block::Indep, "#endIndep");
      else if (line == "#pIndep") openBlock(Block::PIndep, false, true);
      else if (line == "#endPIndep") closeBlock(Block::PIndep, "#endPIndep");
      else if (line == "#indepVolat") openBlock(Block::IndepVolat, true, false);
      else if (line == "#endIndepVolat")
        closeBlock(Block::IndepVolat, "#endIndepVolat");
      else if (line == "#pIndepVolat")
        openBlock(Block::PIndepVolat, true, true);
      else if (line == "#endPIndepVolat")
        closeBlock(Block::PIndepVolat, "#endPIndepVolat");
      else if (line == "#volat") {
        if (block != Block::None)
          throw ParseError(lineNo, "independence/volatile blocks do not nest");
        if (kind != FileKind::Background)
          throw ParseError(lineNo,
                           "meta blocks belong in background knowledge");
        block = Block::Volat;
        curVolatile = true;
      } else if (line == "#endVolat") {
        closeBlock(Block::Volat, "#endVolat");
      } else if (starts_with(line, "#domain")) {
        if (line.back() != '.')
          throw ParseError(lineNo, "#domain declaration must end with '.'");
        Formula a = parse_formula_text(
            trim(line.substr(7, line.size() - 8)), lineNo);
        if (a.kind != FormulaKind::Atom || a.args.size() != 1 ||
            a.args[0].kind != TermKind::Variable)
          throw ParseError(lineNo, "#domain expects pred(Variable)");
        prog.domainDecls.emplace_back(a.args[0].text, a.pred);
      } else if (starts_with(line, "#include")) {
        throw ParseError(lineNo, "#include must be resolved before parsing");
      } else if (starts_with(line, "#def")) {
        throw ParseError(lineNo, "#def must be expanded before parsing");
      } else {
        throw ParseError(lineNo, "unknown meta statement: " + line);
      }
      continue;
    }

    if (line.back() != '.')
      throw ParseError(lineNo, "statement must end with '.' on one line");
    std::string stmt = trim(line.substr(0, line.size() - 1));
    if (stmt.empty()) throw ParseError(lineNo, "empty statement");

    // Annotated disjunction?
    if (size_t arrow = find_ad_arrow(stmt); arrow != std::string::npos) {
      if (kind != FileKind::Background)
        throw ParseError(lineNo,
                         "annotated disjunctions belong in background files");
      if (block != Block::None)
        throw ParseError(lineNo, "annotated disjunctions cannot appear in "
                                 "independence/volatile blocks");
      prog.disjunctions.push_back(parse_ad(stmt, arrow, lineNo));
      continue;
    }

    AnnotatedFormula af;
    af.line = lineNo;
    std::string formulaText = stmt;
    if (stmt[0] == '[') {
      auto [ann, rest] = parse_annotation(stmt, lineNo);
      af.ann = std::move(ann);
      formulaText = rest;
    }
    if (formulaText.empty()) throw ParseError(lineNo, "annotation without a formula");
    af.formula = parse_formula_text(formulaText, lineNo);

    // File-kind discipline.
    bool isQueryAnn = af.ann && af.ann->kind == AnnKind::Query;
    switch (kind) {
      case FileKind::Background:
        if (isQueryAnn)
          throw ParseError(lineNo, "query annotations belong in query files");
        break;
      case FileKind::Query:
        if (af.ann && !isQueryAnn)
          throw ParseError(lineNo,
                           "numeric weights are not allowed in query files");
        break;
      case FileKind::Hypothesis:
        if (!isQueryAnn || af.ann->cond)
          throw ParseError(lineNo, "hypothesis entries must be plain [?] "
                                   "annotated formulas");
        break;
      case FileKind::Examples:
        if (af.ann)
          throw ParseError(lineNo,
                           "weighted example formulas are not yet supported");
        break;
    }

    if (is_condpr_statement(af.formula)) {
      if (kind != FileKind::Background)
        throw ParseError(lineNo, "condPr heads belong in background files");
      validate_condpr(af, lineNo);
    } else {
      validate_names(af.formula, lineNo);
      if (af.ann && af.ann->cond) validate_names(*af.ann->cond, lineNo);
    }

    if (block == Block::Indep || block == Block::PIndep ||
        block == Block::IndepVolat || block == Block::PIndepVolat) {
      if (!af.ann || (af.ann->kind != AnnKind::Point &&
                      af.ann->kind != AnnKind::IntervalW))
        throw ParseError(lineNo, "independence blocks require formulas with "
                                 "numeric weights");
      if (af.ann->cond)
        throw ParseError(lineNo, "conditional annotations cannot appear in "
                                 "independence blocks");
      if (block == Block::Indep || block == Block::IndepVolat)
        af.indepGroup = curGroup;
      else
        af.pIndepGroup = curGroup;
    }
    af.volatileOnly = curVolatile;

    prog.formulas.push_back(std::move(af));
  }
  if (block != Block::None)
    throw ParseError(lineNo, "unterminated meta block at end of input");
  return prog;
}

Formula parse_formula(const std::string& text) {
  return parse_formula_text(text, 0);
}

// ------------------------------------------- annotated disjunctions

std::vector<AnnotatedFormula> desugar_annotated_disjunction(
    const AnnotatedDisjunction& ad, int adIndex, int indepGroup) {
  std::vector<AnnotatedFormula> out;
  std::vector<std::string> helpers;
  double rem = 1.0;
  for (size_t i = 0; i < ad.alternatives.size(); ++i) {
    const auto& [p, head] = ad.alternatives[i];
    std::vector<Formula> body = ad.body;
    for (const auto& h : helpers)
      body.push_back(Formula::defaultNeg(Formula::atom(h)));

    if (rem < 1e-12) {
      // Earlier alternatives exhaust the probability mass; this one fires
      // only in the measure-zero "none selected" case. Emit it as a plain
      // rule and stop — later alternatives are unreachable.
      AnnotatedFormula rule;
      rule.line = ad.line;
      rule.formula =
          body.empty() ? head : Formula::rule(head, std::move(body));
      out.push_back(std::move(rule));
      break;
    }

    double q = std::min(p / rem, 1.0);
    if (i == 0 && q >= 1.0 - 1e-12) {
      // Certain first alternative: a plain rule, no helper needed.
      AnnotatedFormula rule;
      rule.line = ad.line;
      rule.formula =
          body.empty() ? head : Formula::rule(head, std::move(body));
      out.push_back(std::move(rule));
      break;
    }
    std::string helper =
        "hp__ad_" + std::to_string(adIndex) + "_" + std::to_string(i);
    AnnotatedFormula fact;
    fact.line = ad.line;
    Annotation ann;
    ann.kind = AnnKind::Point;
    ann.lo = ann.hi = q;
    fact.ann = ann;
    fact.formula = Formula::atom(helper);
    fact.indepGroup = indepGroup;
    out.push_back(std::move(fact));

    body.push_back(Formula::atom(helper));
    AnnotatedFormula rule;
    rule.line = ad.line;
    rule.formula = Formula::rule(head, std::move(body));
    out.push_back(std::move(rule));

    helpers.push_back(helper);
    rem *= 1.0 - q;
  }
  return out;
}

}  // namespace prasp
