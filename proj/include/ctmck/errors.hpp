#pragma once

#include <stdexcept>
#include <string>

namespace ctmck {

// Position inside a model or property source text. line/column are 1-based;
// 0 means the position is unknown (e.g. programmatically built ASTs).
struct SourcePos {
  int line = 0;
  int column = 0;
  std::string str() const {
    if (line == 0) return "?";
    return std::to_string(line) + ":" + std::to_string(column);
  }
};

// Syntax error in model or property text.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, SourcePos pos)
      : std::runtime_error(pos.str() + ": " + what), pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

// Semantic problem with a model, binding, or query: unknown identifiers,
// values out of range, ill-posed queries, state-space explosion.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver failed to converge or exceeded its iteration cap.
class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ctmck
