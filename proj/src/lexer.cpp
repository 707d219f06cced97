#include "lexer.hpp"

#include <cctype>
#include <cstdlib>

namespace ctmck {

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Real: return "number";
    case Tok::String: return "quoted name";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::Prime: return "'''";
    case Tok::DotDot: return "'..'";
    case Tok::Arrow: return "'->'";
    case Tok::Or: return "'|'";
    case Tok::And: return "'&'";
    case Tok::Not: return "'!'";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::EqQ: return "'=?'";
  }
  return "?";
}

Lexer::Lexer(const std::string& text) {
  size_t i = 0;
  int line = 1, col = 1;
  auto bump = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (i < text.size() && text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto push = [&](Tok kind, SourcePos pos, std::string t = {}) {
    Token tok;
    tok.kind = kind;
    tok.text = std::move(t);
    tok.pos = pos;
    toks_.push_back(std::move(tok));
  };

  while (i < text.size()) {
    char c = text[i];
    SourcePos pos{line, col};
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      bump(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') bump(1);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      bool real = false;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && text[j] == '.' && j + 1 < text.size() &&
          std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        real = true;
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          real = true;
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      std::string num = text.substr(i, j - i);
      Token tok;
      tok.pos = pos;
      if (real) {
        tok.kind = Tok::Real;
        tok.real_val = std::strtod(num.c_str(), nullptr);
      } else {
        tok.kind = Tok::Int;
        errno = 0;
        tok.int_val = std::strtoll(num.c_str(), nullptr, 10);
        if (errno == ERANGE) throw ParseError("integer literal out of range", pos);
        tok.real_val = double(tok.int_val);
      }
      tok.text = num;
      toks_.push_back(std::move(tok));
      bump(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      push(Tok::Ident, pos, text.substr(i, j - i));
      bump(j - i);
      continue;
    }
    if (c == '"') {
      size_t j = i + 1;
      while (j < text.size() && text[j] != '"' && text[j] != '\n') ++j;
      if (j >= text.size() || text[j] != '"')
        throw ParseError("unterminated quoted name", pos);
      push(Tok::String, pos, text.substr(i + 1, j - i - 1));
      bump(j - i + 1);
      continue;
    }
    auto two = [&](char a, char b) {
      return c == a && i + 1 < text.size() && text[i + 1] == b;
    };
    if (two('-', '>')) { push(Tok::Arrow, pos); bump(2); continue; }
    if (two('.', '.')) { push(Tok::DotDot, pos); bump(2); continue; }
    if (two('!', '=')) { push(Tok::Ne, pos); bump(2); continue; }
    if (two('<', '=')) { push(Tok::Le, pos); bump(2); continue; }
    if (two('>', '=')) { push(Tok::Ge, pos); bump(2); continue; }
    if (two('=', '?')) { push(Tok::EqQ, pos); bump(2); continue; }
    switch (c) {
      case '[': push(Tok::LBracket, pos); break;
      case ']': push(Tok::RBracket, pos); break;
      case '(': push(Tok::LParen, pos); break;
      case ')': push(Tok::RParen, pos); break;
      case '{': push(Tok::LBrace, pos); break;
      case '}': push(Tok::RBrace, pos); break;
      case ';': push(Tok::Semi, pos); break;
      case ':': push(Tok::Colon, pos); break;
      case ',': push(Tok::Comma, pos); break;
      case '\'': push(Tok::Prime, pos); break;
      case '|': push(Tok::Or, pos); break;
      case '&': push(Tok::And, pos); break;
      case '!': push(Tok::Not, pos); break;
      case '=': push(Tok::Eq, pos); break;
      case '<': push(Tok::Lt, pos); break;
      case '>': push(Tok::Gt, pos); break;
      case '+': push(Tok::Plus, pos); break;
      case '-': push(Tok::Minus, pos); break;
      case '*': push(Tok::Star, pos); break;
      case '/': push(Tok::Slash, pos); break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }
    bump(1);
  }
  Token end;
  end.kind = Tok::End;
  end.pos = {line, col};
  toks_.push_back(std::move(end));
}

const Token& Lexer::peek(size_t ahead) const {
  size_t k = at_ + ahead;
  if (k >= toks_.size()) k = toks_.size() - 1;
  return toks_[k];
}

Token Lexer::next() {
  Token t = peek();
  if (at_ + 1 < toks_.size()) ++at_;
  return t;
}

bool Lexer::at_ident(const char* text) const {
  return at(Tok::Ident) && peek().text == text;
}

Token Lexer::expect(Tok kind, const char* what) {
  if (!at(kind))
    throw ParseError(std::string("expected ") + tok_name(kind) + " (" + what +
                         "), found " + tok_name(peek().kind),
                     peek().pos);
  return next();
}

void Lexer::expect_ident(const char* text) {
  if (!at_ident(text))
    throw ParseError(std::string("expected '") + text + "', found " +
                         (at(Tok::Ident) ? "'" + peek().text + "'" : tok_name(peek().kind)),
                     peek().pos);
  next();
}

bool Lexer::accept(Tok kind) {
  if (!at(kind)) return false;
  next();
  return true;
}

void Lexer::fail(const std::string& msg) const { throw ParseError(msg, peek().pos); }

}  // namespace ctmck
