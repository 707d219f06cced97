#pragma once

#include <functional>

#include "ctmck/expr.hpp"
#include "lexer.hpp"

namespace ctmck {

// Hooks that extend the expression grammar in property context.
struct ExprParseHooks {
  // Quoted "label" references become Expr::Label atoms.
  bool allow_labels = false;
  // Called at primary position when the next tokens could start a nested
  // P/S query; returns null when they do not.
  std::function<ExprPtr(Lexer&)> query_atom;
};

// Precedence-climbing parser shared by the model and property grammars:
//   |  <  &  <  !  <  comparisons  <  + -  <  * /  <  unary -  <  primary
ExprPtr parse_expr(Lexer& lx, const ExprParseHooks& hooks = {});

// All identifiers appearing in the expression (constants and variables).
void collect_idents(const Expr& e, std::vector<std::string>& out);

bool is_reserved_word(const std::string& name);

}  // namespace ctmck
