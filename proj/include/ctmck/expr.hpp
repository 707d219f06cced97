#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ctmck/errors.hpp"

namespace ctmck {

// Runtime value of an expression. Integers and reals are kept apart so that
// variable updates and range bounds can insist on integer typing; '/' always
// yields a real.
struct Value {
  enum class Kind { Bool, Int, Real };
  Kind kind = Kind::Int;
  bool b = false;
  long long i = 0;
  double d = 0.0;

  static Value boolean(bool v) { return {Kind::Bool, v, 0, 0.0}; }
  static Value integer(long long v) { return {Kind::Int, false, v, 0.0}; }
  static Value real(double v) { return {Kind::Real, false, 0, v}; }

  bool is_bool() const { return kind == Kind::Bool; }
  bool is_numeric() const { return kind != Kind::Bool; }
  double as_real() const { return kind == Kind::Int ? double(i) : d; }
  std::string str() const;
};

enum class Op {
  Or, And, Not,
  Eq, Ne, Lt, Le, Gt, Ge,
  Add, Sub, Mul, Div, Neg,
};

struct PropertyQuery;  // defined in property.hpp

// Expression node. Immutable once built; subtrees are shared between copies
// of an AST, which keeps constant rebinding cheap.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind {
    Literal,   // lit
    Ident,     // name (constant or variable, resolved at evaluation time)
    Unary,     // op in {Not, Neg}, args[0]
    Binary,    // op, args[0], args[1]
    Call,      // name in {ln, log, exp, pow, min, max, floor, ceil}, args
    Label,     // name, a quoted "label" reference (property context)
    Query,     // query, a nested P/S operator used as a state formula atom
  };

  Kind kind = Kind::Literal;
  Value lit;
  std::string name;
  Op op = Op::Add;
  std::vector<ExprPtr> args;
  std::shared_ptr<const PropertyQuery> query;
  SourcePos pos;

  static ExprPtr literal(Value v, SourcePos p = {});
  static ExprPtr ident(std::string n, SourcePos p = {});
  static ExprPtr unary(Op o, ExprPtr a, SourcePos p = {});
  static ExprPtr binary(Op o, ExprPtr a, ExprPtr b, SourcePos p = {});
  static ExprPtr call(std::string fn, std::vector<ExprPtr> as, SourcePos p = {});
  static ExprPtr label(std::string n, SourcePos p = {});
  static ExprPtr query_atom(std::shared_ptr<const PropertyQuery> q, SourcePos p = {});
};

// Evaluation environment. Constants are resolved name->value; variables are
// looked up through an index map into a state valuation. Labels and nested
// queries are expanded by the caller (see engine.hpp) before evaluation.
struct Env {
  const std::map<std::string, Value>* constants = nullptr;
  const std::map<std::string, int>* var_index = nullptr;
  const int* state = nullptr;  // valuation, indexed by var_index values
  // Optional hooks for property evaluation.
  std::function<Value(const std::string&, SourcePos)> label_lookup;
  std::function<Value(const PropertyQuery&, SourcePos)> query_lookup;
};

// Evaluates an expression; throws ModelError on unknown identifiers, type
// mismatches, or division by zero.
Value eval(const Expr& e, const Env& env);

// Static type of an expression given declared identifier types.
enum class Type { Bool, Int, Real };
struct TypeEnv {
  const std::map<std::string, Type>* idents = nullptr;
  bool labels_are_bool = false;  // property context: "label" and query atoms type as Bool
};
Type infer_type(const Expr& e, const TypeEnv& env);

// Canonical text form; parses back to a structurally identical expression.
std::string print_expr(const Expr& e);

// Canonical text of a query node (implemented with the property printer).
std::string print_query_text(const PropertyQuery& q);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace ctmck
