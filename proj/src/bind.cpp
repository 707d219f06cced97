#include <cmath>
#include <functional>
#include <set>

#include "ctmck/model.hpp"
#include "parse_common.hpp"

namespace ctmck {

namespace {

Value coerce_constant(const ConstantDecl& decl, const Value& v) {
  if (v.kind == Value::Kind::Bool)
    throw ModelError("constant '" + decl.name + "' must be numeric");
  if (decl.is_int) {
    if (v.kind == Value::Kind::Int) return v;
    // Sweep grids and -c overrides hand integer constants double values;
    // accept them when they are exact.
    if (v.d == std::floor(v.d) && std::abs(v.d) <= 9.0e18)
      return Value::integer(static_cast<long long>(v.d));
    throw ModelError("constant '" + decl.name + "' is declared int but gets " +
                     v.str());
  }
  if (v.kind == Value::Kind::Int) return Value::real(double(v.i));
  return v;
}

struct Validator {
  const ModelAst& ast;
  const std::map<std::string, Value>& resolved;
  std::map<std::string, Type> ident_types;
  std::set<std::string> variable_names;

  explicit Validator(const ModelAst& a, const std::map<std::string, Value>& r)
      : ast(a), resolved(r) {
    for (const auto& c : ast.constants)
      ident_types[c.name] = c.is_int ? Type::Int : Type::Real;
    for (const auto& mod : ast.modules)
      for (const auto& var : mod.variables) {
        ident_types[var.name] = Type::Int;
        variable_names.insert(var.name);
      }
  }

  TypeEnv type_env() const { return TypeEnv{&ident_types, false}; }

  void forbid_variables(const ExprPtr& e, const std::string& what,
                        SourcePos pos) const {
    if (!e) return;
    std::vector<std::string> idents;
    collect_idents(*e, idents);
    for (const auto& id : idents)
      if (variable_names.count(id))
        throw ModelError(pos.str() + ": " + what +
                         " must not reference variables (found '" + id + "')");
  }

  long long eval_range_int(const ExprPtr& e, const std::string& what,
                           SourcePos pos) const {
    Env env;
    env.constants = &resolved;
    Value v = eval(*e, env);
    if (v.kind != Value::Kind::Int)
      throw ModelError(pos.str() + ": " + what + " must be an integer");
    return v.i;
  }

  void check_variables() const {
    for (const auto& mod : ast.modules)
      for (const auto& var : mod.variables) {
        forbid_variables(var.lo, "range of '" + var.name + "'", var.pos);
        forbid_variables(var.hi, "range of '" + var.name + "'", var.pos);
        forbid_variables(var.init, "initial value of '" + var.name + "'", var.pos);
        long long lo = eval_range_int(var.lo, "lower bound of '" + var.name + "'", var.pos);
        long long hi = eval_range_int(var.hi, "upper bound of '" + var.name + "'", var.pos);
        if (lo > hi)
          throw ModelError(var.pos.str() + ": variable '" + var.name +
                           "' has an empty range [" + std::to_string(lo) + ".." +
                           std::to_string(hi) + "]");
        long long init = var.init
                             ? eval_range_int(var.init, "initial value of '" + var.name + "'", var.pos)
                             : lo;
        if (init < lo || init > hi)
          throw ModelError(var.pos.str() + ": initial value " + std::to_string(init) +
                           " of '" + var.name + "' lies outside [" + std::to_string(lo) +
                           ".." + std::to_string(hi) + "]");
      }
  }

  bool references_variable(const Expr& e) const {
    std::vector<std::string> idents;
    collect_idents(e, idents);
    for (const auto& id : idents)
      if (variable_names.count(id)) return true;
    return false;
  }

  void check_commands() const {
    TypeEnv tenv = type_env();
    for (const auto& mod : ast.modules) {
      std::set<std::string> own;
      for (const auto& var : mod.variables) own.insert(var.name);
      for (const auto& cmd : mod.commands) {
        if (infer_type(*cmd.guard, tenv) != Type::Bool)
          throw ModelError(cmd.pos.str() + ": guard must be a boolean expression");
        for (const auto& alt : cmd.alternatives) {
          if (infer_type(*alt.rate, tenv) == Type::Bool)
            throw ModelError(cmd.pos.str() + ": rate must be a numeric expression");
          // State-dependent rates are checked per state during the build;
          // constant rates fail fast here.
          if (!references_variable(*alt.rate)) {
            Env env;
            env.constants = &resolved;
            double rate = eval(*alt.rate, env).as_real();
            if (!(rate > 0.0) || !std::isfinite(rate))
              throw ModelError(cmd.pos.str() + ": rate '" + print_expr(*alt.rate) +
                               "' is not strictly positive (value " +
                               format_double(rate) + ")");
          }
          for (const auto& assign : alt.assigns) {
            if (!variable_names.count(assign.var))
              throw ModelError(assign.pos.str() + ": update assigns unknown variable '" +
                               assign.var + "'");
            if (!own.count(assign.var))
              throw ModelError(assign.pos.str() + ": module '" + mod.name +
                               "' may not update variable '" + assign.var +
                               "' owned by another module");
            if (infer_type(*assign.value, tenv) != Type::Int)
              throw ModelError(assign.pos.str() + ": update of '" + assign.var +
                               "' must be an integer expression");
          }
        }
      }
    }
  }

  void check_rewards() const {
    TypeEnv tenv = type_env();
    for (const auto& block : ast.rewards)
      for (const auto& item : block.items) {
        if (infer_type(*item.guard, tenv) != Type::Bool)
          throw ModelError(item.pos.str() + ": reward guard must be a boolean expression");
        if (infer_type(*item.value, tenv) == Type::Bool)
          throw ModelError(item.pos.str() + ": reward value must be numeric");
        if (!item.on_transition) continue;
        bool found = false;
        for (const auto& mod : ast.modules)
          for (const auto& cmd : mod.commands)
            if (cmd.action == item.action) found = true;
        if (!found)
          throw ModelError(item.pos.str() + ": reward item [" + item.action +
                           "] in \"" + block.name + "\" matches no " +
                           (item.action.empty() ? "unlabeled command"
                                                : "command with that action"));
      }
  }

  void check_labels() const {
    TypeEnv tenv = type_env();
    for (const auto& l : ast.labels)
      if (infer_type(*l.expr, tenv) != Type::Bool)
        throw ModelError(l.pos.str() + ": label \"" + l.name +
                         "\" must be a boolean expression");
  }
};

}  // namespace

std::map<std::string, Value> parse_overrides(const std::vector<std::string>& defs) {
  std::map<std::string, Value> out;
  for (const auto& def : defs) {
    try {
      Lexer lx(def);
      Token name = lx.expect(Tok::Ident, "constant name");
      lx.expect(Tok::Eq, "'=' in override");
      bool neg = lx.accept(Tok::Minus);
      Value v;
      if (lx.at(Tok::Int)) {
        v = Value::integer(lx.next().int_val);
        if (neg) v.i = -v.i;
      } else if (lx.at(Tok::Real)) {
        v = Value::real(lx.next().real_val);
        if (neg) v.d = -v.d;
      } else {
        lx.fail("expected a numeric value");
      }
      if (!lx.at(Tok::End)) lx.fail("trailing text after the value");
      if (!out.emplace(name.text, v).second)
        throw ModelError("constant '" + name.text + "' set twice");
    } catch (const ParseError& e) {
      throw ModelError("bad override '" + def + "': " + e.what());
    }
  }
  return out;
}

ModelAst bind_constants(const ModelAst& ast,
                        const std::map<std::string, Value>& overrides) {
  ModelAst out = ast;  // expression nodes are shared, so this copy is cheap
  out.resolved_constants.clear();

  for (const auto& [name, value] : overrides) {
    (void)value;
    if (!out.find_constant(name))
      throw ModelError("unknown constant '" + name + "'");
  }

  // Resolve in dependency order; visiting set detects cycles.
  std::map<std::string, Value>& resolved = out.resolved_constants;
  std::set<std::string> visiting;
  std::function<void(const ConstantDecl&)> resolve = [&](const ConstantDecl& decl) {
    if (resolved.count(decl.name)) return;
    auto ov = overrides.find(decl.name);
    if (ov != overrides.end()) {
      resolved[decl.name] = coerce_constant(decl, ov->second);
      return;
    }
    if (!decl.value)
      throw ModelError("constant '" + decl.name +
                       "' has no value; provide one with -c " + decl.name +
                       "=<value>");
    if (!visiting.insert(decl.name).second)
      throw ModelError("constant definitions form a cycle involving '" +
                       decl.name + "'");
    std::vector<std::string> deps;
    collect_idents(*decl.value, deps);
    for (const auto& dep : deps) {
      const ConstantDecl* d = out.find_constant(dep);
      if (!d)
        throw ModelError(decl.pos.str() + ": constant '" + decl.name +
                         "' references '" + dep + "', which is not a constant");
      resolve(*d);
    }
    Env env;
    env.constants = &resolved;
    resolved[decl.name] = coerce_constant(decl, eval(*decl.value, env));
    visiting.erase(decl.name);
  };
  for (const auto& decl : out.constants) resolve(decl);

  Validator v(out, resolved);
  v.check_variables();
  v.check_commands();
  v.check_rewards();
  v.check_labels();

  out.bound = true;
  return out;
}

}  // namespace ctmck
