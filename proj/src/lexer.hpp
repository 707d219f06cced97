#pragma once

#include <string>
#include <vector>

#include "ctmck/errors.hpp"

namespace ctmck {

enum class Tok {
  End,
  Ident,
  Int,
  Real,
  String,  // "quoted"
  LBracket, RBracket, LParen, RParen, LBrace, RBrace,
  Semi, Colon, Comma, Prime, DotDot,
  Arrow,                     // ->
  Or, And, Not,              // | & !
  Eq, Ne, Lt, Le, Gt, Ge,    // = != < <= > >=
  Plus, Minus, Star, Slash,
  EqQ,                       // =?
};

struct Token {
  Tok kind = Tok::End;
  std::string text;      // identifier or string body
  long long int_val = 0;
  double real_val = 0.0;
  SourcePos pos;
};

const char* tok_name(Tok t);

// Tokenizes the whole input up front; // comments run to end of line.
class Lexer {
 public:
  explicit Lexer(const std::string& text);

  const Token& peek(size_t ahead = 0) const;
  Token next();
  bool at(Tok kind) const { return peek().kind == kind; }
  // True when the next token is an identifier with exactly this text.
  bool at_ident(const char* text) const;
  Token expect(Tok kind, const char* what);
  // Consumes an identifier token with the given text or fails.
  void expect_ident(const char* text);
  bool accept(Tok kind);
  [[noreturn]] void fail(const std::string& msg) const;

 private:
  std::vector<Token> toks_;
  size_t at_ = 0;
};

}  // namespace ctmck
