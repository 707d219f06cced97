#include <algorithm>
#include <map>

#include "parse_common.hpp"

namespace ctmck {

bool is_reserved_word(const std::string& name) {
  static const char* words[] = {
      "ctmc", "const", "int", "double", "module", "endmodule", "init",
      "rewards", "endrewards", "label", "true", "false",
      "ln", "log", "exp", "pow", "min", "max", "floor", "ceil",
  };
  return std::find_if(std::begin(words), std::end(words), [&](const char* w) {
           return name == w;
         }) != std::end(words);
}

namespace {

// name -> (min arity, max arity)
const std::map<std::string, std::pair<size_t, size_t>>& functions() {
  static const std::map<std::string, std::pair<size_t, size_t>> fns = {
      {"ln", {1, 1}},   {"log", {1, 1}},   {"exp", {1, 1}},
      {"pow", {2, 2}},  {"min", {2, 99}},  {"max", {2, 99}},
      {"floor", {1, 1}}, {"ceil", {1, 1}},
  };
  return fns;
}

ExprPtr parse_or(Lexer& lx, const ExprParseHooks& hooks);

ExprPtr parse_primary(Lexer& lx, const ExprParseHooks& hooks) {
  const Token& t = lx.peek();
  if (hooks.query_atom) {
    if (ExprPtr q = hooks.query_atom(lx)) return q;
  }
  switch (t.kind) {
    case Tok::Int: {
      Token tok = lx.next();
      return Expr::literal(Value::integer(tok.int_val), tok.pos);
    }
    case Tok::Real: {
      Token tok = lx.next();
      return Expr::literal(Value::real(tok.real_val), tok.pos);
    }
    case Tok::String: {
      Token tok = lx.next();
      if (!hooks.allow_labels)
        throw ParseError("quoted label references are only allowed in properties", tok.pos);
      return Expr::label(tok.text, tok.pos);
    }
    case Tok::LParen: {
      lx.next();
      ExprPtr e = parse_or(lx, hooks);
      lx.expect(Tok::RParen, "closing parenthesis");
      return e;
    }
    case Tok::Ident: {
      Token tok = lx.next();
      if (tok.text == "true") return Expr::literal(Value::boolean(true), tok.pos);
      if (tok.text == "false") return Expr::literal(Value::boolean(false), tok.pos);
      if (lx.at(Tok::LParen)) {
        auto fn = functions().find(tok.text);
        if (fn == functions().end())
          throw ParseError("unknown function '" + tok.text + "'", tok.pos);
        lx.next();
        std::vector<ExprPtr> args;
        if (!lx.at(Tok::RParen)) {
          args.push_back(parse_or(lx, hooks));
          while (lx.accept(Tok::Comma)) args.push_back(parse_or(lx, hooks));
        }
        lx.expect(Tok::RParen, "closing parenthesis of call");
        if (args.size() < fn->second.first || args.size() > fn->second.second)
          throw ParseError("wrong number of arguments for '" + tok.text + "'", tok.pos);
        return Expr::call(tok.text, std::move(args), tok.pos);
      }
      if (is_reserved_word(tok.text))
        throw ParseError("unexpected keyword '" + tok.text + "' in expression", tok.pos);
      return Expr::ident(tok.text, tok.pos);
    }
    default:
      throw ParseError(std::string("expected an expression, found ") + tok_name(t.kind),
                       t.pos);
  }
}

ExprPtr parse_unary_minus(Lexer& lx, const ExprParseHooks& hooks) {
  if (lx.at(Tok::Minus)) {
    Token tok = lx.next();
    return Expr::unary(Op::Neg, parse_unary_minus(lx, hooks), tok.pos);
  }
  return parse_primary(lx, hooks);
}

ExprPtr parse_muldiv(Lexer& lx, const ExprParseHooks& hooks) {
  ExprPtr e = parse_unary_minus(lx, hooks);
  while (lx.at(Tok::Star) || lx.at(Tok::Slash)) {
    Token tok = lx.next();
    Op op = tok.kind == Tok::Star ? Op::Mul : Op::Div;
    e = Expr::binary(op, e, parse_unary_minus(lx, hooks), tok.pos);
  }
  return e;
}

ExprPtr parse_addsub(Lexer& lx, const ExprParseHooks& hooks) {
  ExprPtr e = parse_muldiv(lx, hooks);
  while (lx.at(Tok::Plus) || lx.at(Tok::Minus)) {
    Token tok = lx.next();
    Op op = tok.kind == Tok::Plus ? Op::Add : Op::Sub;
    e = Expr::binary(op, e, parse_muldiv(lx, hooks), tok.pos);
  }
  return e;
}

ExprPtr parse_relational(Lexer& lx, const ExprParseHooks& hooks) {
  ExprPtr e = parse_addsub(lx, hooks);
  Op op;
  switch (lx.peek().kind) {
    case Tok::Eq: op = Op::Eq; break;
    case Tok::Ne: op = Op::Ne; break;
    case Tok::Lt: op = Op::Lt; break;
    case Tok::Le: op = Op::Le; break;
    case Tok::Gt: op = Op::Gt; break;
    case Tok::Ge: op = Op::Ge; break;
    default: return e;
  }
  Token tok = lx.next();
  // Relational operators do not chain; a=b=c is a syntax error downstream.
  return Expr::binary(op, e, parse_addsub(lx, hooks), tok.pos);
}

ExprPtr parse_not(Lexer& lx, const ExprParseHooks& hooks) {
  if (lx.at(Tok::Not)) {
    Token tok = lx.next();
    return Expr::unary(Op::Not, parse_not(lx, hooks), tok.pos);
  }
  return parse_relational(lx, hooks);
}

ExprPtr parse_and(Lexer& lx, const ExprParseHooks& hooks) {
  ExprPtr e = parse_not(lx, hooks);
  while (lx.at(Tok::And)) {
    Token tok = lx.next();
    e = Expr::binary(Op::And, e, parse_not(lx, hooks), tok.pos);
  }
  return e;
}

ExprPtr parse_or(Lexer& lx, const ExprParseHooks& hooks) {
  ExprPtr e = parse_and(lx, hooks);
  while (lx.at(Tok::Or)) {
    Token tok = lx.next();
    e = Expr::binary(Op::Or, e, parse_and(lx, hooks), tok.pos);
  }
  return e;
}

}  // namespace

ExprPtr parse_expr(Lexer& lx, const ExprParseHooks& hooks) {
  return parse_or(lx, hooks);
}

void collect_idents(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::Ident) out.push_back(e.name);
  for (const auto& a : e.args) collect_idents(*a, out);
}

}  // namespace ctmck
