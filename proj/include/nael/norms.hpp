#pragma once

#include <set>
#include <string>
#include <vector>

#include "nael/errors.hpp"
#include "nael/formula.hpp"

namespace nael {

enum class Modality { Obligation, Permission, Prohibition };

inline const char* modality_name(Modality m) {
  switch (m) {
    case Modality::Obligation: return "obligate";
    case Modality::Permission: return "permit";
    case Modality::Prohibition: return "forbid";
  }
  return "";
}

// One conditional deontic rule: when the condition holds, the modality applies
// to the action. The weight is the cost in nats charged for neglecting an
// obligation (or backing a prohibition in conflict resolution).
struct Norm {
  std::string id;
  Formula condition;
  Modality modality;
  std::string action;
  double weight = 1.0;
};

using NormSet = std::vector<Norm>;

// Parses one declaration per line:
//   norm <id> weight <positive-decimal>: when <formula> then (obligate|permit|forbid) <action>
// '#' starts a comment; blank lines are skipped. When known_actions is given,
// every referenced action must be declared there.
inline NormSet parse_norms(const std::string& text,
                           const std::set<std::string>* known_actions = nullptr) {
  NormSet norms;
  std::set<std::string> seen_ids;

  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    ++line_no;

    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (!blank) {
      detail::FormulaParser p{detail::Lexer(line, line_no)};
      auto expect_kw = [&](const char* kw) {
        if (!p.is_keyword(kw))
          throw ParseError(p.current().line, p.current().column, std::string("'") + kw + "'",
                           p.current().text.empty() ? "end of line" : "'" + p.current().text + "'");
        p.advance();
      };

      expect_kw("norm");
      if (p.current().type != detail::Token::Type::Ident)
        throw ParseError(p.current().line, p.current().column, "a norm id",
                         "'" + p.current().text + "'");
      Norm n;
      n.id = p.current().text;
      p.advance();
      expect_kw("weight");
      if (p.current().type != detail::Token::Type::Number)
        throw ParseError(p.current().line, p.current().column, "a positive decimal",
                         "'" + p.current().text + "'");
      n.weight = std::stod(p.current().text);
      if (!(n.weight > 0.0))
        throw ParseError(p.current().line, p.current().column, "a positive weight",
                         p.current().text);
      p.advance();
      if (p.current().type != detail::Token::Type::Colon)
        throw ParseError(p.current().line, p.current().column, "':'", "'" + p.current().text + "'");
      p.advance();
      expect_kw("when");
      n.condition = p.parse_formula();
      expect_kw("then");
      if (p.is_keyword("obligate")) n.modality = Modality::Obligation;
      else if (p.is_keyword("permit")) n.modality = Modality::Permission;
      else if (p.is_keyword("forbid")) n.modality = Modality::Prohibition;
      else
        throw ParseError(p.current().line, p.current().column,
                         "'obligate', 'permit' or 'forbid'", "'" + p.current().text + "'");
      p.advance();
      if (p.current().type != detail::Token::Type::Ident)
        throw ParseError(p.current().line, p.current().column, "an action label",
                         p.current().text.empty() ? "end of line" : "'" + p.current().text + "'");
      n.action = p.current().text;
      p.advance();
      if (p.current().type != detail::Token::Type::End)
        throw ParseError(p.current().line, p.current().column, "end of line",
                         "'" + p.current().text + "'");

      if (!seen_ids.insert(n.id).second)
        throw DuplicateNormId("duplicate norm id '" + n.id + "' at line " +
                              std::to_string(line_no));
      if (known_actions && known_actions->count(n.action) == 0)
        throw UnknownActionLabel("norm '" + n.id + "' references undeclared action '" + n.action +
                                 "'");
      norms.push_back(std::move(n));
    }

    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return norms;
}

}  // namespace nael
