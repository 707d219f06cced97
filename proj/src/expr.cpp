#include "ctmck/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace ctmck {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string Value::str() const {
  switch (kind) {
    case Kind::Bool: return b ? "true" : "false";
    case Kind::Int: return std::to_string(i);
    case Kind::Real: return format_double(d);
  }
  return {};
}

ExprPtr Expr::literal(Value v, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Literal;
  e->lit = v;
  e->pos = p;
  return e;
}

ExprPtr Expr::ident(std::string n, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Ident;
  e->name = std::move(n);
  e->pos = p;
  return e;
}

ExprPtr Expr::unary(Op o, ExprPtr a, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Unary;
  e->op = o;
  e->args = {std::move(a)};
  e->pos = p;
  return e;
}

ExprPtr Expr::binary(Op o, ExprPtr a, ExprPtr b, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->op = o;
  e->args = {std::move(a), std::move(b)};
  e->pos = p;
  return e;
}

ExprPtr Expr::call(std::string fn, std::vector<ExprPtr> as, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Call;
  e->name = std::move(fn);
  e->args = std::move(as);
  e->pos = p;
  return e;
}

ExprPtr Expr::label(std::string n, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Label;
  e->name = std::move(n);
  e->pos = p;
  return e;
}

ExprPtr Expr::query_atom(std::shared_ptr<const PropertyQuery> q, SourcePos p) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Query;
  e->query = std::move(q);
  e->pos = p;
  return e;
}

namespace {

[[noreturn]] void fail(SourcePos pos, const std::string& msg) {
  throw ModelError(pos.str() + ": " + msg);
}

Value require_numeric(const Value& v, SourcePos pos, const char* ctx) {
  if (!v.is_numeric()) fail(pos, std::string(ctx) + " requires a numeric operand");
  return v;
}

bool require_bool(const Value& v, SourcePos pos, const char* ctx) {
  if (!v.is_bool()) fail(pos, std::string(ctx) + " requires a boolean operand");
  return v.b;
}

Value numeric_binary(Op op, const Value& a, const Value& b, SourcePos pos) {
  bool ints = a.kind == Value::Kind::Int && b.kind == Value::Kind::Int;
  switch (op) {
    case Op::Add: return ints ? Value::integer(a.i + b.i) : Value::real(a.as_real() + b.as_real());
    case Op::Sub: return ints ? Value::integer(a.i - b.i) : Value::real(a.as_real() - b.as_real());
    case Op::Mul: return ints ? Value::integer(a.i * b.i) : Value::real(a.as_real() * b.as_real());
    case Op::Div: {
      double d = b.as_real();
      if (d == 0.0) fail(pos, "division by zero");
      return Value::real(a.as_real() / d);
    }
    default: break;
  }
  fail(pos, "internal: bad numeric operator");
}

Value compare(Op op, const Value& a, const Value& b, SourcePos pos) {
  if (!a.is_numeric() || !b.is_numeric())
    fail(pos, "comparison requires numeric operands");
  double x = a.as_real(), y = b.as_real();
  // Int-int comparisons stay exact regardless of magnitude.
  if (a.kind == Value::Kind::Int && b.kind == Value::Kind::Int) {
    switch (op) {
      case Op::Eq: return Value::boolean(a.i == b.i);
      case Op::Ne: return Value::boolean(a.i != b.i);
      case Op::Lt: return Value::boolean(a.i < b.i);
      case Op::Le: return Value::boolean(a.i <= b.i);
      case Op::Gt: return Value::boolean(a.i > b.i);
      case Op::Ge: return Value::boolean(a.i >= b.i);
      default: break;
    }
  }
  switch (op) {
    case Op::Eq: return Value::boolean(x == y);
    case Op::Ne: return Value::boolean(x != y);
    case Op::Lt: return Value::boolean(x < y);
    case Op::Le: return Value::boolean(x <= y);
    case Op::Gt: return Value::boolean(x > y);
    case Op::Ge: return Value::boolean(x >= y);
    default: break;
  }
  fail(pos, "internal: bad comparison operator");
}

long long to_integer(double v, SourcePos pos, const char* fn) {
  if (!(v >= -9.0e18 && v <= 9.0e18))
    fail(pos, std::string(fn) + " result out of integer range");
  return static_cast<long long>(v);
}

}  // namespace

Value eval(const Expr& e, const Env& env) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      return e.lit;
    case Expr::Kind::Ident: {
      if (env.constants) {
        auto it = env.constants->find(e.name);
        if (it != env.constants->end()) return it->second;
      }
      if (env.var_index && env.state) {
        auto it = env.var_index->find(e.name);
        if (it != env.var_index->end()) return Value::integer(env.state[it->second]);
      }
      fail(e.pos, "unknown identifier '" + e.name + "'");
    }
    case Expr::Kind::Label: {
      if (!env.label_lookup) fail(e.pos, "label \"" + e.name + "\" referenced outside a property");
      return env.label_lookup(e.name, e.pos);
    }
    case Expr::Kind::Query: {
      if (!env.query_lookup) fail(e.pos, "nested query used outside a property");
      return env.query_lookup(*e.query, e.pos);
    }
    case Expr::Kind::Unary: {
      Value a = eval(*e.args[0], env);
      if (e.op == Op::Not) return Value::boolean(!require_bool(a, e.pos, "'!'"));
      require_numeric(a, e.pos, "unary '-'");
      if (a.kind == Value::Kind::Int) return Value::integer(-a.i);
      return Value::real(-a.d);
    }
    case Expr::Kind::Binary: {
      if (e.op == Op::And) {
        // Short-circuit keeps partially-defined guards usable.
        if (!require_bool(eval(*e.args[0], env), e.pos, "'&'")) return Value::boolean(false);
        return Value::boolean(require_bool(eval(*e.args[1], env), e.pos, "'&'"));
      }
      if (e.op == Op::Or) {
        if (require_bool(eval(*e.args[0], env), e.pos, "'|'")) return Value::boolean(true);
        return Value::boolean(require_bool(eval(*e.args[1], env), e.pos, "'|'"));
      }
      Value a = eval(*e.args[0], env);
      Value b = eval(*e.args[1], env);
      switch (e.op) {
        case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
          return compare(e.op, a, b, e.pos);
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div:
          require_numeric(a, e.pos, "arithmetic");
          require_numeric(b, e.pos, "arithmetic");
          return numeric_binary(e.op, a, b, e.pos);
        default:
          fail(e.pos, "internal: bad binary operator");
      }
    }
    case Expr::Kind::Call: {
      std::vector<Value> args;
      args.reserve(e.args.size());
      for (const auto& a : e.args) args.push_back(eval(*a, env));
      for (const auto& a : args) require_numeric(a, e.pos, ("'" + e.name + "'").c_str());
      const std::string& fn = e.name;
      if (fn == "ln" || fn == "log") {
        double x = args[0].as_real();
        if (x <= 0.0) fail(e.pos, fn + " of a non-positive value");
        return Value::real(std::log(x));
      }
      if (fn == "exp") return Value::real(std::exp(args[0].as_real()));
      if (fn == "pow") return Value::real(std::pow(args[0].as_real(), args[1].as_real()));
      if (fn == "min" || fn == "max") {
        Value acc = args[0];
        for (size_t i = 1; i < args.size(); ++i) {
          const Value& v = args[i];
          bool ints = acc.kind == Value::Kind::Int && v.kind == Value::Kind::Int;
          bool take = fn == "min" ? v.as_real() < acc.as_real() : v.as_real() > acc.as_real();
          if (ints) {
            acc = take ? v : acc;
          } else {
            acc = Value::real(take ? v.as_real() : acc.as_real());
          }
        }
        return acc;
      }
      if (fn == "floor") {
        if (args[0].kind == Value::Kind::Int) return args[0];
        return Value::integer(to_integer(std::floor(args[0].as_real()), e.pos, "floor"));
      }
      if (fn == "ceil") {
        if (args[0].kind == Value::Kind::Int) return args[0];
        return Value::integer(to_integer(std::ceil(args[0].as_real()), e.pos, "ceil"));
      }
      fail(e.pos, "unknown function '" + fn + "'");
    }
  }
  fail(e.pos, "internal: bad expression node");
}

Type infer_type(const Expr& e, const TypeEnv& env) {
  auto want_numeric = [&](Type t, SourcePos pos, const char* ctx) {
    if (t == Type::Bool) fail(pos, std::string(ctx) + " requires a numeric operand");
    return t;
  };
  auto want_bool = [&](Type t, SourcePos pos, const char* ctx) {
    if (t != Type::Bool) fail(pos, std::string(ctx) + " requires a boolean operand");
  };
  switch (e.kind) {
    case Expr::Kind::Literal:
      switch (e.lit.kind) {
        case Value::Kind::Bool: return Type::Bool;
        case Value::Kind::Int: return Type::Int;
        case Value::Kind::Real: return Type::Real;
      }
      return Type::Real;
    case Expr::Kind::Ident: {
      if (env.idents) {
        auto it = env.idents->find(e.name);
        if (it != env.idents->end()) return it->second;
      }
      fail(e.pos, "unknown identifier '" + e.name + "'");
    }
    case Expr::Kind::Label:
    case Expr::Kind::Query:
      if (!env.labels_are_bool)
        fail(e.pos, e.kind == Expr::Kind::Label
                        ? "label reference is only allowed in properties"
                        : "nested query is only allowed in properties");
      return Type::Bool;
    case Expr::Kind::Unary: {
      Type a = infer_type(*e.args[0], env);
      if (e.op == Op::Not) {
        want_bool(a, e.pos, "'!'");
        return Type::Bool;
      }
      return want_numeric(a, e.pos, "unary '-'");
    }
    case Expr::Kind::Binary: {
      Type a = infer_type(*e.args[0], env);
      Type b = infer_type(*e.args[1], env);
      switch (e.op) {
        case Op::And: case Op::Or:
          want_bool(a, e.pos, "'&'/'|'");
          want_bool(b, e.pos, "'&'/'|'");
          return Type::Bool;
        case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
          want_numeric(a, e.pos, "comparison");
          want_numeric(b, e.pos, "comparison");
          return Type::Bool;
        case Op::Div:
          want_numeric(a, e.pos, "'/'");
          want_numeric(b, e.pos, "'/'");
          return Type::Real;
        default:
          want_numeric(a, e.pos, "arithmetic");
          want_numeric(b, e.pos, "arithmetic");
          return (a == Type::Int && b == Type::Int) ? Type::Int : Type::Real;
      }
    }
    case Expr::Kind::Call: {
      std::vector<Type> ts;
      for (const auto& a : e.args)
        ts.push_back(want_numeric(infer_type(*a, env), e.pos, ("'" + e.name + "'").c_str()));
      const std::string& fn = e.name;
      if (fn == "ln" || fn == "log" || fn == "exp" || fn == "pow") return Type::Real;
      if (fn == "floor" || fn == "ceil") return Type::Int;
      if (fn == "min" || fn == "max") {
        for (Type t : ts)
          if (t != Type::Int) return Type::Real;
        return Type::Int;
      }
      fail(e.pos, "unknown function '" + fn + "'");
    }
  }
  fail(e.pos, "internal: bad expression node");
}

namespace {

// Larger binds tighter. Mirrors the grammar in parse_expr.
int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Binary:
      switch (e.op) {
        case Op::Or: return 1;
        case Op::And: return 2;
        case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
          return 4;
        case Op::Add: case Op::Sub: return 5;
        case Op::Mul: case Op::Div: return 6;
        default: return 8;
      }
    case Expr::Kind::Unary:
      return e.op == Op::Not ? 3 : 7;
    default:
      return 9;
  }
}

const char* op_text(Op op) {
  switch (op) {
    case Op::Or: return " | ";
    case Op::And: return " & ";
    case Op::Eq: return "=";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    default: return "?";
  }
}

void print_into(const Expr& e, std::string& out);

void print_child(const Expr& parent, const Expr& child, bool tight, std::string& out) {
  bool parens = precedence(child) < precedence(parent) ||
                (tight && precedence(child) == precedence(parent));
  if (parens) out += '(';
  print_into(child, out);
  if (parens) out += ')';
}

void print_into(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      out += e.lit.str();
      return;
    case Expr::Kind::Ident:
      out += e.name;
      return;
    case Expr::Kind::Label:
      out += '"';
      out += e.name;
      out += '"';
      return;
    case Expr::Kind::Query:
      out += print_query_text(*e.query);
      return;
    case Expr::Kind::Unary:
      out += e.op == Op::Not ? "!" : "-";
      print_child(e, *e.args[0], /*tight=*/false, out);
      return;
    case Expr::Kind::Binary: {
      // Right operand of - and / needs parens at equal precedence.
      bool tight_rhs = e.op == Op::Sub || e.op == Op::Div;
      print_child(e, *e.args[0], /*tight=*/false, out);
      out += op_text(e.op);
      print_child(e, *e.args[1], tight_rhs, out);
      return;
    }
    case Expr::Kind::Call: {
      out += e.name;
      out += '(';
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print_into(*e.args[i], out);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

}  // namespace ctmck
