#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctmck/expr.hpp"

namespace ctmck {

// Abstract syntax for the guarded-command modeling language:
//
//   ctmc                                   // optional header
//   const double lambda = -ln(r) / MTBF;   // constants may reference others
//   const double r;                        // deferred, must be bound later
//   module m
//     x : [0..7] init 0;
//     [act] guard -> rate : (x'=e) + rate2 : (x'=e2);
//   endmodule
//   rewards "name"
//     guard : value;                       // state reward
//     [act] guard : value;                 // transition reward
//   endrewards
//   label "name" = expr;                   // extension, documented in README

struct ConstantDecl {
  std::string name;
  bool is_int = false;
  ExprPtr value;  // null for deferred constants (bind before building)
  SourcePos pos;
};

struct VariableDecl {
  std::string name;
  ExprPtr lo, hi;
  ExprPtr init;  // null means the range lower bound
  SourcePos pos;
};

struct UpdateAssign {
  std::string var;
  ExprPtr value;
  SourcePos pos;
};

struct CommandAlternative {
  ExprPtr rate;
  std::vector<UpdateAssign> assigns;  // empty means self-loop ("true" update)
};

struct Command {
  std::string action;  // empty for unlabeled commands
  ExprPtr guard;
  std::vector<CommandAlternative> alternatives;
  SourcePos pos;
};

struct ModuleDecl {
  std::string name;
  std::vector<VariableDecl> variables;
  std::vector<Command> commands;
  SourcePos pos;
};

struct RewardItem {
  bool on_transition = false;
  std::string action;  // for transition items; empty matches unlabeled commands
  ExprPtr guard;
  ExprPtr value;
  SourcePos pos;
};

struct RewardBlock {
  std::string name;
  std::vector<RewardItem> items;
  SourcePos pos;
};

struct LabelDecl {
  std::string name;
  ExprPtr expr;
  SourcePos pos;
};

struct ModelAst {
  std::vector<ConstantDecl> constants;
  std::vector<ModuleDecl> modules;
  std::vector<RewardBlock> rewards;
  std::vector<LabelDecl> labels;

  // Filled by bind_constants.
  bool bound = false;
  std::map<std::string, Value> resolved_constants;

  const ConstantDecl* find_constant(const std::string& name) const;
};

// Parses model source text. Performs purely syntactic checks plus duplicate
// identifier detection; value-level validation happens in bind_constants.
ModelAst parse_model(const std::string& text);

// Resolves every constant (applying overrides on top of declared values) and
// validates the model: constants must be acyclic and fully defined, variable
// ranges and initial values must be consistent, identifiers must resolve,
// guards must be boolean, updates integer-typed, reward actions must exist,
// and constant rate expressions must be strictly positive.
//
// Overrides name constants declared in the model; unknown names are errors.
ModelAst bind_constants(const ModelAst& ast,
                        const std::map<std::string, Value>& overrides);

// Parses "name=value" strings (CLI -c and sweep points) into override maps.
std::map<std::string, Value> parse_overrides(const std::vector<std::string>& defs);

// Canonical source form. parse_model(pretty_print(ast)) is structurally
// identical to ast; pretty_print is a fixed point over parse.
std::string pretty_print(const ModelAst& ast);

}  // namespace ctmck
