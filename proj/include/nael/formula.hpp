#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nael/errors.hpp"

namespace nael {

// Propositional formulas over opinion-valued atoms, with a single-level
// standpoint wrapper From(id, f). Deontic modalities never occur inside a
// formula; they live at norm heads only.
class Formula {
 public:
  enum class Kind { Atom, Not, And, Or, Implies, From };

  struct Node {
    Kind kind;
    std::string name;  // atom name or stakeholder id
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
  };

  Formula() = default;

  static Formula atom(std::string name) {
    return Formula(std::make_shared<Node>(Node{Kind::Atom, std::move(name), nullptr, nullptr}));
  }
  static Formula negation(Formula f) {
    return Formula(std::make_shared<Node>(Node{Kind::Not, "", f.node_, nullptr}));
  }
  static Formula conjunction(Formula f, Formula g) {
    return Formula(std::make_shared<Node>(Node{Kind::And, "", f.node_, g.node_}));
  }
  static Formula disjunction(Formula f, Formula g) {
    return Formula(std::make_shared<Node>(Node{Kind::Or, "", f.node_, g.node_}));
  }
  static Formula implication(Formula f, Formula g) {
    return Formula(std::make_shared<Node>(Node{Kind::Implies, "", f.node_, g.node_}));
  }
  static Formula standpoint(std::string stakeholder, Formula f) {
    if (contains_from(*f.node_))
      throw ParseError(0, 0, "a standpoint-free formula", "nested From(...)");
    return Formula(
        std::make_shared<Node>(Node{Kind::From, std::move(stakeholder), f.node_, nullptr}));
  }

  const Node& root() const { return *node_; }
  bool valid() const { return node_ != nullptr; }

  bool operator==(const Formula& other) const { return equal(*node_, *other.node_); }

  // canonical text; parses back to an equal tree
  std::string print() const { return print_node(*node_, 0); }

  // every atom name occurring anywhere in the tree
  std::vector<std::string> atoms() const {
    std::vector<std::string> out;
    collect_atoms(*node_, out);
    return out;
  }

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static bool contains_from(const Node& n) {
    if (n.kind == Kind::From) return true;
    if (n.left && contains_from(*n.left)) return true;
    if (n.right && contains_from(*n.right)) return true;
    return false;
  }

  static bool equal(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.name != b.name) return false;
    if ((a.left == nullptr) != (b.left == nullptr)) return false;
    if ((a.right == nullptr) != (b.right == nullptr)) return false;
    if (a.left && !equal(*a.left, *b.left)) return false;
    if (a.right && !equal(*a.right, *b.right)) return false;
    return true;
  }

  static int precedence(Kind k) {
    switch (k) {
      case Kind::Implies: return 1;
      case Kind::Or: return 2;
      case Kind::And: return 3;
      case Kind::Not: return 4;
      default: return 5;
    }
  }

  // parent_prec: minimum precedence this position can hold without parens
  static std::string print_node(const Node& n, int parent_prec) {
    switch (n.kind) {
      case Kind::Atom:
        return n.name;
      case Kind::From:
        return "From(" + n.name + ", " + print_node(*n.left, 0) + ")";
      case Kind::Not: {
        std::string inner = print_node(*n.left, precedence(Kind::Not));
        return "not " + inner;
      }
      case Kind::And:
      case Kind::Or:
      case Kind::Implies: {
        int prec = precedence(n.kind);
        const char* op = n.kind == Kind::And ? " and " : n.kind == Kind::Or ? " or " : " implies ";
        // and/or associate left; implies associates right
        bool right_assoc = n.kind == Kind::Implies;
        std::string lhs = print_node(*n.left, right_assoc ? prec + 1 : prec);
        std::string rhs = print_node(*n.right, right_assoc ? prec : prec + 1);
        std::string text = lhs + op + rhs;
        if (prec < parent_prec) return "(" + text + ")";
        return text;
      }
    }
    return "";
  }

  static void collect_atoms(const Node& n, std::vector<std::string>& out) {
    if (n.kind == Kind::Atom) out.push_back(n.name);
    if (n.left) collect_atoms(*n.left, out);
    if (n.right) collect_atoms(*n.right, out);
  }

  std::shared_ptr<const Node> node_;
};

namespace detail {

// Token stream over the norm-language surface syntax. Atom names may embed
// parentheses (has_water(C1)), so identifier runs are scanned maximally and
// re-split when they begin with a reserved word directly followed by '('.
struct Token {
  enum class Type { Ident, Keyword, LParen, RParen, Comma, Colon, Number, End };
  Type type = Type::End;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text, int first_line = 1)
      : text_(text), line_(first_line) {}

  static bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool ident_char(char c) {
    return ident_start(c) || (c >= '0' && c <= '9') || c == '(' || c == ')';
  }

  static const std::vector<std::string>& keywords() {
    static const std::vector<std::string> kw = {"not",  "and",  "or",       "implies", "From",
                                                "norm", "weight", "when",   "then",
                                                "obligate", "permit", "forbid"};
    return kw;
  }

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = column();
    if (pos_ >= text_.size()) {
      t.type = Token::Type::End;
      return t;
    }
    char c = text_[pos_];
    if (c == '#') {  // comment to end of input line
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      return next();
    }
    if (c == '(') { ++pos_; t.type = Token::Type::LParen; t.text = "("; return t; }
    if (c == ')') { ++pos_; t.type = Token::Type::RParen; t.text = ")"; return t; }
    if (c == ',') { ++pos_; t.type = Token::Type::Comma; t.text = ","; return t; }
    if (c == ':') { ++pos_; t.type = Token::Type::Colon; t.text = ":"; return t; }
    if ((c >= '0' && c <= '9') || c == '.') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             ((text_[pos_] >= '0' && text_[pos_] <= '9') || text_[pos_] == '.'))
        ++pos_;
      t.type = Token::Type::Number;
      t.text = text_.substr(start, pos_ - start);
      return t;
    }
    if (ident_start(c)) {
      std::size_t start = pos_;
      int depth = 0;  // a ')' the atom itself never opened ends the token
      while (pos_ < text_.size() && ident_char(text_[pos_])) {
        if (text_[pos_] == '(') ++depth;
        if (text_[pos_] == ')') {
          if (depth == 0) break;
          --depth;
        }
        ++pos_;
      }
      std::string run = text_.substr(start, pos_ - start);
      for (const auto& kw : keywords()) {
        if (run == kw) {
          t.type = Token::Type::Keyword;
          t.text = run;
          return t;
        }
        // reserved word immediately followed by '(' starts a construct, not an atom
        if (run.size() > kw.size() && run.compare(0, kw.size(), kw) == 0 &&
            run[kw.size()] == '(') {
          pos_ = start + kw.size();
          t.type = Token::Type::Keyword;
          t.text = kw;
          return t;
        }
      }
      t.type = Token::Type::Ident;
      t.text = run;
      return t;
    }
    throw ParseError(line_, column(), "a token", std::string("'") + c + "'");
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r' ||
            text_[pos_] == '\n')) {
      if (text_[pos_] == '\n') {
        ++line_;
        line_start_ = pos_ + 1;
      }
      ++pos_;
    }
  }

  int column() const { return static_cast<int>(pos_ - line_start_) + 1; }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
};

class FormulaParser {
 public:
  FormulaParser(Lexer lexer) : lexer_(std::move(lexer)) { advance(); }

  // formula := or_expr ("implies" formula)?   (implies is right-associative)
  Formula parse_formula() {
    Formula lhs = parse_or();
    if (is_keyword("implies")) {
      advance();
      Formula rhs = parse_formula();
      return Formula::implication(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  const Token& current() const { return tok_; }
  void advance() { tok_ = lexer_.next(); }

  bool is_keyword(const std::string& kw) const {
    return tok_.type == Token::Type::Keyword && tok_.text == kw;
  }

 private:
  Formula parse_or() {
    Formula f = parse_and();
    while (is_keyword("or")) {
      advance();
      f = Formula::disjunction(std::move(f), parse_and());
    }
    return f;
  }

  Formula parse_and() {
    Formula f = parse_unary();
    while (is_keyword("and")) {
      advance();
      f = Formula::conjunction(std::move(f), parse_unary());
    }
    return f;
  }

  Formula parse_unary() {
    if (is_keyword("not")) {
      advance();
      return Formula::negation(parse_unary());
    }
    return parse_primary();
  }

  Formula parse_primary() {
    if (is_keyword("From")) {
      advance();
      expect(Token::Type::LParen, "'('");
      advance();
      if (tok_.type != Token::Type::Ident)
        throw ParseError(tok_.line, tok_.column, "a stakeholder id", describe(tok_));
      std::string id = tok_.text;
      advance();
      expect(Token::Type::Comma, "','");
      advance();
      Formula body = parse_from_body();
      expect(Token::Type::RParen, "')'");
      advance();
      return Formula::standpoint(std::move(id), std::move(body));
    }
    if (tok_.type == Token::Type::LParen) {
      advance();
      Formula f = parse_formula();
      expect(Token::Type::RParen, "')'");
      advance();
      return f;
    }
    if (tok_.type == Token::Type::Ident) {
      Formula f = Formula::atom(tok_.text);
      advance();
      return f;
    }
    throw ParseError(tok_.line, tok_.column, "an atom, 'not', 'From(' or '('", describe(tok_));
  }

  // body of From(...): full grammar minus nested standpoints
  Formula parse_from_body() {
    Formula f = parse_formula();
    if (contains_from_marker(f))
      throw ParseError(tok_.line, tok_.column, "a standpoint-free formula", "nested From(...)");
    return f;
  }

  static bool contains_from_marker(const Formula& f) {
    struct Walk {
      static bool has_from(const Formula::Node& n) {
        if (n.kind == Formula::Kind::From) return true;
        if (n.left && has_from(*n.left)) return true;
        if (n.right && has_from(*n.right)) return true;
        return false;
      }
    };
    return Walk::has_from(f.root());
  }

  void expect(Token::Type type, const std::string& what) const {
    if (tok_.type != type) throw ParseError(tok_.line, tok_.column, what, describe(tok_));
  }

  static std::string describe(const Token& t) {
    if (t.type == Token::Type::End) return "end of input";
    return "'" + t.text + "'";
  }

  Lexer lexer_;
  Token tok_;
};

}  // namespace detail

inline Formula parse_formula(const std::string& text) {
  detail::FormulaParser parser{detail::Lexer(text)};
  Formula f = parser.parse_formula();
  if (parser.current().type != detail::Token::Type::End)
    throw ParseError(parser.current().line, parser.current().column, "end of input",
                     "'" + parser.current().text + "'");
  return f;
}

}  // namespace nael
