#include "ccc/formula.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace ccc {

Lit Lit::from_dimacs(int value) {
  if (value == 0) throw std::invalid_argument("literal 0 is not a literal");
  const auto index = static_cast<std::uint32_t>(value < 0 ? -static_cast<long long>(value) : value);
  return Lit(Var{index}, value < 0);
}

std::ostream& operator<<(std::ostream& os, Lit l) {
  if (!l.valid()) return os << "undef";
  return os << l.to_dimacs();
}

bool Assignment::is_total() const {
  return std::none_of(values_.begin(), values_.end(),
                      [](LBool v) { return v == LBool::Undef; });
}

std::size_t Assignment::assigned_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(),
                    [](LBool v) { return v != LBool::Undef; }));
}

ParseError::ParseError(Kind kind, std::size_t line, std::size_t column,
                       const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + " at line " +
                         std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + what),
      kind_(kind),
      line_(line),
      column_(column) {}

const char* to_string(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::MalformedHeader: return "MalformedHeader";
    case ParseError::Kind::LiteralOutOfRange: return "LiteralOutOfRange";
    case ParseError::Kind::UnterminatedClause: return "UnterminatedClause";
    case ParseError::Kind::ClauseCountMismatch: return "ClauseCountMismatch";
    case ParseError::Kind::InvalidToken: return "InvalidToken";
  }
  return "ParseError";
}

bool canonicalize_clause(Clause& clause) {
  Clause out;
  out.reserve(clause.size());
  for (Lit l : clause) {
    if (std::find(out.begin(), out.end(), ~l) != out.end()) return false;
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  clause = std::move(out);
  return true;
}

CnfFormula make_formula(std::uint32_t num_vars,
                        const std::vector<std::vector<int>>& clauses) {
  CnfFormula f;
  f.num_vars = num_vars;
  for (const auto& ints : clauses) {
    Clause c;
    for (int v : ints) {
      Lit l = Lit::from_dimacs(v);
      if (l.var().index > num_vars)
        throw std::invalid_argument("literal " + std::to_string(v) +
                                    " exceeds variable count");
      c.push_back(l);
    }
    if (canonicalize_clause(c)) f.clauses.push_back(std::move(c));
  }
  return f;
}

Cube make_cube(const std::vector<int>& lits) {
  Cube c;
  c.reserve(lits.size());
  for (int v : lits) c.push_back(Lit::from_dimacs(v));
  return c;
}

namespace {

// Whitespace tokenizer that remembers where each token started.
class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  struct Token {
    std::string_view text;
    std::size_t line;
    std::size_t column;
  };

  // Skips whitespace; comment lines ('c' as first token on a line) are
  // swallowed whole.
  bool next(Token& tok) {
    for (;;) {
      while (pos_ < text_.size() && is_space(text_[pos_])) advance();
      if (pos_ >= text_.size()) return false;
      if (at_line_start_ && text_[pos_] == 'c' &&
          (pos_ + 1 == text_.size() || is_space(text_[pos_ + 1]))) {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        continue;
      }
      break;
    }
    const std::size_t start = pos_;
    tok.line = line_;
    tok.column = column_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) advance();
    tok.text = text_.substr(start, pos_ - start);
    return true;
  }

  std::size_t line() const { return line_; }

 private:
  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
      at_line_start_ = true;
    } else {
      ++column_;
      if (text_[pos_] != ' ' && text_[pos_] != '\t' && text_[pos_] != '\r')
        at_line_start_ = false;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  bool at_line_start_ = true;
};

bool parse_int(std::string_view s, long long& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

CnfFormula parse_dimacs(std::string_view text) {
  using K = ParseError::Kind;
  Scanner scanner(text);
  Scanner::Token tok;

  if (!scanner.next(tok)) throw ParseError(K::MalformedHeader, 1, 1, "missing header");
  if (tok.text != "p")
    throw ParseError(K::MalformedHeader, tok.line, tok.column,
                     "expected 'p cnf <vars> <clauses>'");
  const std::size_t header_line = tok.line;
  long long header[2] = {0, 0};
  if (!scanner.next(tok) || tok.text != "cnf" || tok.line != header_line)
    throw ParseError(K::MalformedHeader, tok.line, tok.column, "expected 'cnf'");
  for (long long& field : header) {
    if (!scanner.next(tok) || tok.line != header_line ||
        !parse_int(tok.text, field) || field < 0 ||
        field > std::numeric_limits<std::int32_t>::max())
      throw ParseError(K::MalformedHeader, tok.line, tok.column,
                       "expected non-negative count");
  }

  CnfFormula f;
  f.num_vars = static_cast<std::uint32_t>(header[0]);
  const auto declared = static_cast<std::size_t>(header[1]);
  std::size_t read = 0;
  Clause current;
  std::size_t clause_line = 0, clause_column = 0;

  while (scanner.next(tok)) {
    long long value = 0;
    if (!parse_int(tok.text, value))
      throw ParseError(K::InvalidToken, tok.line, tok.column,
                       "unexpected token '" + std::string(tok.text) + "'");
    if (value == 0) {
      ++read;
      if (read > declared)
        throw ParseError(K::ClauseCountMismatch, tok.line, tok.column,
                         "more clauses than declared (" +
                             std::to_string(declared) + ")");
      if (canonicalize_clause(current)) f.clauses.push_back(std::move(current));
      current.clear();
      continue;
    }
    const long long magnitude = value < 0 ? -value : value;
    if (magnitude > f.num_vars)
      throw ParseError(K::LiteralOutOfRange, tok.line, tok.column,
                       "literal " + std::string(tok.text) + " exceeds " +
                           std::to_string(f.num_vars) + " variables");
    if (current.empty()) {
      clause_line = tok.line;
      clause_column = tok.column;
    }
    current.push_back(Lit::from_dimacs(static_cast<int>(value)));
  }
  if (!current.empty())
    throw ParseError(K::UnterminatedClause, clause_line, clause_column,
                     "clause missing terminating 0");
  if (read != declared)
    throw ParseError(K::ClauseCountMismatch, scanner.line(), 1,
                     "declared " + std::to_string(declared) + " clauses, read " +
                         std::to_string(read));
  return f;
}

CnfFormula parse_dimacs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dimacs(buf.str());
}

std::string serialize_dimacs(const CnfFormula& formula) {
  std::string out = "p cnf " + std::to_string(formula.num_vars) + " " +
                    std::to_string(formula.clauses.size()) + "\n";
  for (const Clause& c : formula.clauses) {
    for (Lit l : c) {
      out += std::to_string(l.to_dimacs());
      out += ' ';
    }
    out += "0\n";
  }
  return out;
}

ClauseStatus eval_clause(const Clause& clause, const Assignment& assignment) {
  Lit unassigned;
  std::size_t open = 0;
  for (Lit l : clause) {
    switch (assignment.value(l)) {
      case LBool::True: return {ClauseStatus::Kind::Satisfied, Lit()};
      case LBool::Undef:
        ++open;
        unassigned = l;
        break;
      case LBool::False: break;
    }
  }
  if (open == 0) return {ClauseStatus::Kind::Falsified, Lit()};
  if (open == 1) return {ClauseStatus::Kind::Unit, unassigned};
  return {ClauseStatus::Kind::Unresolved, Lit()};
}

Clause negate_cube(const Cube& cube) {
  Clause c;
  c.reserve(cube.size());
  for (Lit l : cube) c.push_back(~l);
  return c;
}

bool cube_satisfied(const Cube& cube, const Assignment& assignment) {
  return std::all_of(cube.begin(), cube.end(), [&](Lit l) {
    return assignment.value(l) == LBool::True;
  });
}

TooManyVariables::TooManyVariables(std::uint32_t num_vars, std::uint32_t limit)
    : std::invalid_argument("enumeration over " + std::to_string(num_vars) +
                            " variables exceeds limit of " +
                            std::to_string(limit)) {}

bool dnf_is_tautology(const std::vector<Cube>& cubes, std::uint32_t num_vars) {
  if (num_vars > kMaxEnumerationVars)
    throw TooManyVariables(num_vars, kMaxEnumerationVars);
  // Each cube becomes (care mask, required bits); bit i is variable i+1.
  struct Mask {
    std::uint32_t care = 0;
    std::uint32_t bits = 0;
    bool contradictory = false;
  };
  std::vector<Mask> masks;
  masks.reserve(cubes.size());
  for (const Cube& cube : cubes) {
    Mask m;
    for (Lit l : cube) {
      if (l.var().index > num_vars)
        throw std::invalid_argument("cube literal outside variable range");
      const std::uint32_t bit = 1u << (l.var().index - 1);
      const std::uint32_t want = l.negative() ? 0u : bit;
      if ((m.care & bit) && (m.bits & bit) != want) m.contradictory = true;
      m.care |= bit;
      m.bits |= want;
    }
    if (!m.contradictory) masks.push_back(m);
  }
  const std::uint64_t total = std::uint64_t{1} << num_vars;
  for (std::uint64_t a = 0; a < total; ++a) {
    const auto bits = static_cast<std::uint32_t>(a);
    const bool covered = std::any_of(masks.begin(), masks.end(), [&](const Mask& m) {
      return (bits & m.care) == m.bits;
    });
    if (!covered) return false;
  }
  return true;
}

std::string to_dimacs_string(const Cube& lits) {
  std::string out;
  for (Lit l : lits) {
    if (!out.empty()) out += ' ';
    out += std::to_string(l.to_dimacs());
  }
  return out;
}

}  // namespace ccc
