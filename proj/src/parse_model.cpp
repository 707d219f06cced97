#include "ctmck/model.hpp"

#include <optional>
#include <set>

#include "parse_common.hpp"

namespace ctmck {

const ConstantDecl* ModelAst::find_constant(const std::string& name) const {
  for (const auto& c : constants)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

class ModelParser {
 public:
  explicit ModelParser(const std::string& text) : lx_(text) {}

  ModelAst parse() {
    if (lx_.at_ident("ctmc")) lx_.next();
    while (!lx_.at(Tok::End)) {
      if (lx_.at_ident("const")) {
        parse_const();
      } else if (lx_.at_ident("module")) {
        parse_module();
      } else if (lx_.at_ident("rewards")) {
        parse_rewards();
      } else if (lx_.at_ident("label")) {
        parse_label();
      } else {
        lx_.fail("expected const, module, rewards, or label");
      }
    }
    check_literal_ranges();
    return std::move(ast_);
  }

 private:
  Lexer lx_;
  ModelAst ast_;
  // Constants and variables resolve through one namespace, so their names
  // must be unique against each other, model-wide.
  std::set<std::string> value_names_;
  std::set<std::string> module_names_, reward_names_, label_names_;

  Token name_token(const char* what) {
    Token t = lx_.expect(Tok::Ident, what);
    if (is_reserved_word(t.text))
      throw ParseError("'" + t.text + "' is a reserved word", t.pos);
    return t;
  }

  void declare_value_name(const Token& t) {
    if (!value_names_.insert(t.text).second)
      throw ParseError("duplicate identifier '" + t.text + "'", t.pos);
  }

  void parse_const() {
    lx_.next();  // const
    ConstantDecl decl;
    if (lx_.at_ident("int")) {
      lx_.next();
      decl.is_int = true;
    } else if (lx_.at_ident("double")) {
      lx_.next();
    } else {
      lx_.fail("expected 'int' or 'double' after 'const'");
    }
    Token name = name_token("constant name");
    declare_value_name(name);
    decl.name = name.text;
    decl.pos = name.pos;
    if (lx_.accept(Tok::Eq)) decl.value = parse_expr(lx_);
    lx_.expect(Tok::Semi, "';' after constant declaration");
    ast_.constants.push_back(std::move(decl));
  }

  void parse_module() {
    Token kw = lx_.next();  // module
    ModuleDecl mod;
    mod.pos = kw.pos;
    Token name = name_token("module name");
    if (!module_names_.insert(name.text).second)
      throw ParseError("duplicate module '" + name.text + "'", name.pos);
    mod.name = name.text;
    while (!lx_.at_ident("endmodule")) {
      if (lx_.at(Tok::LBracket)) {
        mod.commands.push_back(parse_command());
      } else if (lx_.at(Tok::Ident)) {
        mod.variables.push_back(parse_variable());
      } else {
        lx_.fail("expected a variable declaration, a command, or 'endmodule'");
      }
    }
    lx_.next();  // endmodule
    ast_.modules.push_back(std::move(mod));
  }

  VariableDecl parse_variable() {
    Token name = name_token("variable name");
    declare_value_name(name);
    VariableDecl var;
    var.name = name.text;
    var.pos = name.pos;
    lx_.expect(Tok::Colon, "':' after variable name");
    lx_.expect(Tok::LBracket, "'[' opening the variable range");
    var.lo = parse_expr(lx_);
    lx_.expect(Tok::DotDot, "'..' between range bounds");
    var.hi = parse_expr(lx_);
    lx_.expect(Tok::RBracket, "']' closing the variable range");
    if (lx_.at_ident("init")) {
      lx_.next();
      var.init = parse_expr(lx_);
    }
    lx_.expect(Tok::Semi, "';' after variable declaration");
    return var;
  }

  Command parse_command() {
    Command cmd;
    cmd.pos = lx_.peek().pos;
    lx_.expect(Tok::LBracket, "'[' opening the action label");
    if (lx_.at(Tok::Ident)) cmd.action = name_token("action label").text;
    lx_.expect(Tok::RBracket, "']' closing the action label");
    cmd.guard = parse_expr(lx_);
    lx_.expect(Tok::Arrow, "'->' between guard and updates");
    cmd.alternatives.push_back(parse_alternative());
    while (lx_.accept(Tok::Plus)) cmd.alternatives.push_back(parse_alternative());
    lx_.expect(Tok::Semi, "';' after command");
    return cmd;
  }

  CommandAlternative parse_alternative() {
    CommandAlternative alt;
    alt.rate = parse_expr(lx_);
    lx_.expect(Tok::Colon, "':' between rate and update");
    if (lx_.at_ident("true")) {
      lx_.next();  // explicit self-loop, no assignments
      return alt;
    }
    std::set<std::string> seen;
    alt.assigns.push_back(parse_assign(seen));
    while (lx_.accept(Tok::And)) alt.assigns.push_back(parse_assign(seen));
    return alt;
  }

  UpdateAssign parse_assign(std::set<std::string>& seen) {
    lx_.expect(Tok::LParen, "'(' opening an assignment");
    Token var = name_token("variable name");
    if (!seen.insert(var.text).second)
      throw ParseError("variable '" + var.text + "' assigned twice in one update",
                       var.pos);
    UpdateAssign assign;
    assign.var = var.text;
    assign.pos = var.pos;
    lx_.expect(Tok::Prime, "''' after the assigned variable");
    lx_.expect(Tok::Eq, "'=' in assignment");
    assign.value = parse_expr(lx_);
    lx_.expect(Tok::RParen, "')' closing the assignment");
    return assign;
  }

  void parse_rewards() {
    Token kw = lx_.next();  // rewards
    RewardBlock block;
    block.pos = kw.pos;
    Token name = lx_.expect(Tok::String, "quoted reward structure name");
    if (!reward_names_.insert(name.text).second)
      throw ParseError("duplicate reward structure \"" + name.text + "\"", name.pos);
    block.name = name.text;
    while (!lx_.at_ident("endrewards")) {
      RewardItem item;
      item.pos = lx_.peek().pos;
      if (lx_.accept(Tok::LBracket)) {
        item.on_transition = true;
        if (lx_.at(Tok::Ident)) item.action = name_token("action label").text;
        lx_.expect(Tok::RBracket, "']' closing the action label");
      }
      item.guard = parse_expr(lx_);
      lx_.expect(Tok::Colon, "':' between guard and reward value");
      item.value = parse_expr(lx_);
      lx_.expect(Tok::Semi, "';' after reward item");
      block.items.push_back(std::move(item));
    }
    lx_.next();  // endrewards
    ast_.rewards.push_back(std::move(block));
  }

  void parse_label() {
    Token kw = lx_.next();  // label
    LabelDecl decl;
    decl.pos = kw.pos;
    Token name = lx_.expect(Tok::String, "quoted label name");
    if (!label_names_.insert(name.text).second)
      throw ParseError("duplicate label \"" + name.text + "\"", name.pos);
    decl.name = name.text;
    lx_.expect(Tok::Eq, "'=' after the label name");
    decl.expr = parse_expr(lx_);
    lx_.expect(Tok::Semi, "';' after label definition");
    ast_.labels.push_back(std::move(decl));
  }

  // Evaluates an expression that contains no identifiers; empty otherwise.
  static std::optional<long long> literal_int(const ExprPtr& e) {
    if (!e) return std::nullopt;
    std::vector<std::string> idents;
    collect_idents(*e, idents);
    if (!idents.empty()) return std::nullopt;
    try {
      Value v = eval(*e, Env{});
      if (v.kind == Value::Kind::Int) return v.i;
    } catch (const ModelError&) {
    }
    return std::nullopt;
  }

  // Range sanity for fully literal declarations; constant-dependent ranges
  // are re-checked in bind_constants once values are known.
  void check_literal_ranges() const {
    for (const auto& mod : ast_.modules) {
      for (const auto& var : mod.variables) {
        auto lo = literal_int(var.lo), hi = literal_int(var.hi);
        if (lo && hi && *lo > *hi)
          throw ParseError("variable '" + var.name + "' has an empty range", var.pos);
        auto init = literal_int(var.init);
        if (init && ((lo && *init < *lo) || (hi && *init > *hi)))
          throw ParseError("initial value of '" + var.name +
                               "' lies outside its declared range",
                           var.pos);
      }
    }
  }
};

void print_alternative(const CommandAlternative& alt, std::string& out) {
  out += print_expr(*alt.rate);
  out += " : ";
  if (alt.assigns.empty()) {
    out += "true";
    return;
  }
  for (size_t i = 0; i < alt.assigns.size(); ++i) {
    if (i) out += " & ";
    out += "(";
    out += alt.assigns[i].var;
    out += "'=";
    out += print_expr(*alt.assigns[i].value);
    out += ")";
  }
}

}  // namespace

ModelAst parse_model(const std::string& text) { return ModelParser(text).parse(); }

std::string pretty_print(const ModelAst& ast) {
  std::string out = "ctmc\n";
  if (!ast.constants.empty()) out += "\n";
  for (const auto& c : ast.constants) {
    out += "const ";
    out += c.is_int ? "int " : "double ";
    out += c.name;
    if (c.value) {
      out += " = ";
      out += print_expr(*c.value);
    }
    out += ";\n";
  }
  for (const auto& mod : ast.modules) {
    out += "\nmodule ";
    out += mod.name;
    out += "\n";
    for (const auto& var : mod.variables) {
      out += "  ";
      out += var.name;
      out += " : [";
      out += print_expr(*var.lo);
      out += "..";
      out += print_expr(*var.hi);
      out += "]";
      if (var.init) {
        out += " init ";
        out += print_expr(*var.init);
      }
      out += ";\n";
    }
    if (!mod.variables.empty() && !mod.commands.empty()) out += "\n";
    for (const auto& cmd : mod.commands) {
      out += "  [";
      out += cmd.action;
      out += "] ";
      out += print_expr(*cmd.guard);
      out += " -> ";
      for (size_t i = 0; i < cmd.alternatives.size(); ++i) {
        if (i) out += " + ";
        print_alternative(cmd.alternatives[i], out);
      }
      out += ";\n";
    }
    out += "endmodule\n";
  }
  for (const auto& block : ast.rewards) {
    out += "\nrewards \"";
    out += block.name;
    out += "\"\n";
    for (const auto& item : block.items) {
      out += "  ";
      if (item.on_transition) {
        out += "[";
        out += item.action;
        out += "] ";
      }
      out += print_expr(*item.guard);
      out += " : ";
      out += print_expr(*item.value);
      out += ";\n";
    }
    out += "endrewards\n";
  }
  if (!ast.labels.empty()) out += "\n";
  for (const auto& l : ast.labels) {
    out += "label \"";
    out += l.name;
    out += "\" = ";
    out += print_expr(*l.expr);
    out += ";\n";
  }
  return out;
}

}  // namespace ctmck
