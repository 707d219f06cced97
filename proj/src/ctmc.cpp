#include "ctmck/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>

#include "ctmck/format.hpp"

namespace ctmck {

std::string Ctmc::state_str(uint32_t s) const {
  if (n_vars() == 0) return "#" + std::to_string(s);
  std::string out;
  const int* vals = valuation(s);
  for (size_t i = 0; i < n_vars(); ++i) {
    if (i) out += ",";
    out += var_names[i];
    out += "=";
    out += std::to_string(vals[i]);
  }
  return out;
}

int Ctmc::var(const std::string& name) const {
  for (size_t i = 0; i < var_names.size(); ++i)
    if (var_names[i] == name) return int(i);
  return -1;
}

double Ctmc::jump_probability(uint32_t s, uint32_t t) const {
  double e = exit[s];
  if (e <= 0.0) return 0.0;
  double rate = 0.0;
  for (uint32_t k = row_begin[s]; k < row_begin[s + 1]; ++k)
    if (transitions[k].dst == t) rate += transitions[k].rate;
  return rate / e;
}

double Ctmc::timed_jump_probability(uint32_t s, uint32_t t, double time) const {
  if (time <= 0.0) return 0.0;
  double e = exit[s];
  if (e <= 0.0) return 0.0;
  return jump_probability(s, t) * (1.0 - std::exp(-e * time));
}

const CompiledRewards* Ctmc::find_rewards(const std::string& name) const {
  for (const auto& r : rewards)
    if (r.name == name) return &r;
  return nullptr;
}

std::map<std::pair<uint32_t, uint32_t>, double> Ctmc::rate_matrix() const {
  std::map<std::pair<uint32_t, uint32_t>, double> m;
  for (const auto& tr : transitions) m[{tr.src, tr.dst}] += tr.rate;
  return m;
}

std::map<std::pair<std::vector<int>, std::vector<int>>, double>
Ctmc::rate_matrix_by_valuation() const {
  std::map<std::pair<std::vector<int>, std::vector<int>>, double> m;
  size_t nv = n_vars();
  auto tuple = [&](uint32_t s) {
    const int* v = valuation(s);
    return std::vector<int>(v, v + nv);
  };
  for (const auto& tr : transitions) m[{tuple(tr.src), tuple(tr.dst)}] += tr.rate;
  return m;
}

bool Ctmc::strongly_connected() const {
  size_t n = n_states();
  if (n <= 1) return true;
  // Forward reachability from 0 holds by construction, but cheap to verify.
  auto reach = [&](const std::vector<std::vector<uint32_t>>& adj) {
    std::vector<uint8_t> seen(n, 0);
    std::deque<uint32_t> q{0};
    seen[0] = 1;
    size_t count = 1;
    while (!q.empty()) {
      uint32_t s = q.front();
      q.pop_front();
      for (uint32_t t : adj[s])
        if (!seen[t]) {
          seen[t] = 1;
          ++count;
          q.push_back(t);
        }
    }
    return count == n;
  };
  std::vector<std::vector<uint32_t>> fwd(n), rev(n);
  for (const auto& tr : transitions) {
    if (tr.src == tr.dst) continue;
    fwd[tr.src].push_back(tr.dst);
    rev[tr.dst].push_back(tr.src);
  }
  return reach(fwd) && reach(rev);
}

namespace {

struct PreparedAlternative {
  ExprPtr rate;
  std::vector<std::pair<int, ExprPtr>> assigns;  // variable index, value
};

struct PreparedCommand {
  int32_t module_idx, command_idx;
  int32_t action = -1;
  SourcePos pos;
  ExprPtr guard;
  std::vector<PreparedAlternative> alternatives;
};

class Builder {
 public:
  Builder(const ModelAst& ast, const BuildOptions& options)
      : ast_(ast), options_(options) {}

  Ctmc build() {
    if (!ast_.bound)
      throw ModelError("model constants are not bound; call bind_constants first");
    c_.constants = ast_.resolved_constants;
    for (const auto& l : ast_.labels) c_.labels.emplace_back(l.name, l.expr);
    declare_variables();
    prepare_commands();
    explore();
    compile_rewards();
    return std::move(c_);
  }

 private:
  const ModelAst& ast_;
  const BuildOptions& options_;
  Ctmc c_;
  std::map<std::string, int> var_index_;
  std::vector<PreparedCommand> commands_;
  // Commands grouped per action, per module, for synchronized firing.
  struct SyncGroup {
    int32_t action;
    std::vector<std::vector<const PreparedCommand*>> per_module;
  };
  std::vector<SyncGroup> sync_groups_;
  std::map<std::vector<int>, uint32_t> state_index_;
  std::deque<std::vector<int>> frontier_;

  void declare_variables() {
    Env env;
    env.constants = &c_.constants;
    for (const auto& mod : ast_.modules)
      for (const auto& var : mod.variables) {
        var_index_[var.name] = int(c_.var_names.size());
        c_.var_names.push_back(var.name);
        c_.var_lo.push_back(int(eval(*var.lo, env).i));
        c_.var_hi.push_back(int(eval(*var.hi, env).i));
      }
  }

  void prepare_commands() {
    std::map<std::string, int32_t> action_index;
    for (size_t mi = 0; mi < ast_.modules.size(); ++mi) {
      const auto& mod = ast_.modules[mi];
      for (size_t ci = 0; ci < mod.commands.size(); ++ci) {
        const Command& cmd = mod.commands[ci];
        PreparedCommand pc;
        pc.module_idx = int32_t(mi);
        pc.command_idx = int32_t(ci);
        pc.pos = cmd.pos;
        pc.guard = cmd.guard;
        if (!cmd.action.empty()) {
          auto it = action_index.find(cmd.action);
          if (it == action_index.end()) {
            it = action_index.emplace(cmd.action, int32_t(c_.actions.size())).first;
            c_.actions.push_back(cmd.action);
          }
          pc.action = it->second;
        }
        for (const auto& alt : cmd.alternatives) {
          PreparedAlternative pa;
          pa.rate = alt.rate;
          for (const auto& a : alt.assigns)
            pa.assigns.emplace_back(var_index_.at(a.var), a.value);
          pc.alternatives.push_back(std::move(pa));
        }
        commands_.push_back(std::move(pc));
      }
    }
    // Synchronization groups: one per action, listing each participating
    // module's commands. A module with any command on the action gates the
    // joint firing; all participating modules must be enabled.
    for (int32_t a = 0; a < int32_t(c_.actions.size()); ++a) {
      SyncGroup g;
      g.action = a;
      for (size_t mi = 0; mi < ast_.modules.size(); ++mi) {
        std::vector<const PreparedCommand*> cmds;
        for (const auto& pc : commands_)
          if (pc.action == a && pc.module_idx == int32_t(mi)) cmds.push_back(&pc);
        if (!cmds.empty()) g.per_module.push_back(std::move(cmds));
      }
      sync_groups_.push_back(std::move(g));
    }
  }

  uint32_t intern(const std::vector<int>& vals) {
    auto it = state_index_.find(vals);
    if (it != state_index_.end()) return it->second;
    if (state_index_.size() >= options_.state_cap)
      throw ModelError("state space exceeds the cap of " +
                       std::to_string(options_.state_cap) +
                       " states; raise the cap or shrink variable ranges");
    uint32_t idx = uint32_t(state_index_.size());
    state_index_.emplace(vals, idx);
    c_.valuations.insert(c_.valuations.end(), vals.begin(), vals.end());
    frontier_.push_back(vals);
    return idx;
  }

  double eval_rate(const ExprPtr& rate, const Env& env, const PreparedCommand& pc,
                   uint32_t src) {
    Value v = eval(*rate, env);
    double r = v.as_real();
    if (!(r > 0.0) || !std::isfinite(r))
      throw ModelError(pc.pos.str() + ": rate '" + print_expr(*rate) +
                       "' is not strictly positive in state " + c_.state_str(src) +
                       " (value " + format_double(r) + ")");
    return r;
  }

  std::vector<int> apply(const std::vector<std::pair<int, ExprPtr>>& assigns,
                         const std::vector<int>& state, const Env& env,
                         const PreparedCommand& pc) {
    std::vector<int> next = state;
    for (const auto& [vi, value] : assigns) {
      Value v = eval(*value, env);
      if (v.kind != Value::Kind::Int)
        throw ModelError(pc.pos.str() + ": update of '" + c_.var_names[vi] +
                         "' is not an integer");
      if (v.i < c_.var_lo[vi] || v.i > c_.var_hi[vi])
        throw ModelError(pc.pos.str() + ": update sets '" + c_.var_names[vi] +
                         "' to " + std::to_string(v.i) + ", outside [" +
                         std::to_string(c_.var_lo[vi]) + ".." +
                         std::to_string(c_.var_hi[vi]) + "], from state " +
                         c_.state_str(state_index_.at(state)));
      next[vi] = int(v.i);
    }
    return next;
  }

  void explore() {
    std::vector<int> init;
    {
      Env env;
      env.constants = &c_.constants;
      for (const auto& mod : ast_.modules)
        for (const auto& var : mod.variables)
          init.push_back(var.init ? int(eval(*var.init, env).i)
                                  : c_.var_lo[var_index_.at(var.name)]);
    }
    intern(init);

    std::vector<uint8_t> absorbing_note;
    for (uint32_t src = 0; src < state_index_.size(); ++src) {
      const std::vector<int> state = frontier_[src];
      Env env;
      env.constants = &c_.constants;
      env.var_index = &var_index_;
      env.state = state.data();

      c_.row_begin.push_back(uint32_t(c_.transitions.size()));

      // Unlabeled commands interleave: each fires on its own.
      for (const auto& pc : commands_) {
        if (pc.action >= 0) continue;
        if (!eval(*pc.guard, env).b) continue;
        for (const auto& alt : pc.alternatives) {
          double rate = eval_rate(alt.rate, env, pc, src);
          uint32_t dst = intern(apply(alt.assigns, state, env, pc));
          c_.transitions.push_back({src, dst, rate, -1, pc.module_idx, pc.command_idx});
        }
      }
      // Labeled commands fire jointly across every participating module,
      // one enabled command per module, rate = product of the parts.
      for (const auto& g : sync_groups_) {
        std::vector<std::vector<const PreparedCommand*>> enabled;
        bool blocked = false;
        for (const auto& module_cmds : g.per_module) {
          std::vector<const PreparedCommand*> en;
          for (const PreparedCommand* pc : module_cmds)
            if (eval(*pc->guard, env).b) en.push_back(pc);
          if (en.empty()) {
            blocked = true;
            break;
          }
          enabled.push_back(std::move(en));
        }
        if (blocked) continue;
        // Cartesian product over modules of (command, alternative) choices.
        struct Choice {
          const PreparedCommand* pc;
          const PreparedAlternative* alt;
        };
        std::vector<Choice> choice(enabled.size());
        std::function<void(size_t, double, std::vector<int>)> emit =
            [&](size_t level, double rate, std::vector<int> target) {
              if (level == enabled.size()) {
                uint32_t dst = intern(target);
                c_.transitions.push_back({src, dst, rate, g.action,
                                          choice[0].pc->module_idx,
                                          choice[0].pc->command_idx});
                return;
              }
              for (const PreparedCommand* pc : enabled[level])
                for (const auto& alt : pc->alternatives) {
                  choice[level] = {pc, &alt};
                  double r = eval_rate(alt.rate, env, *pc, src);
                  // Writes touch only the owning module's variables, so the
                  // per-module updates are disjoint; apply still reads the
                  // pre-state through env.
                  emit(level + 1, rate * r, apply(alt.assigns, target, env, *pc));
                }
            };
        emit(0, 1.0, state);
      }

      bool dead = c_.transitions.size() == c_.row_begin.back();
      absorbing_note.push_back(dead ? 1 : 0);
    }
    c_.row_begin.push_back(uint32_t(c_.transitions.size()));

    c_.exit.assign(c_.n_states(), 0.0);
    for (const auto& tr : c_.transitions) c_.exit[tr.src] += tr.rate;

    for (uint32_t s = 0; s < absorbing_note.size(); ++s)
      if (absorbing_note[s])
        c_.warnings.push_back("state " + c_.state_str(s) +
                              " has no outgoing transitions (deadlock, kept absorbing)");
  }

  void compile_rewards() {
    for (const auto& block : ast_.rewards) {
      CompiledRewards cr;
      cr.name = block.name;
      cr.state.assign(c_.n_states(), 0.0);
      cr.transition.assign(c_.transitions.size(), 0.0);
      for (uint32_t s = 0; s < c_.n_states(); ++s) {
        Env env;
        env.constants = &c_.constants;
        env.var_index = &var_index_;
        env.state = c_.valuation(s);
        for (const auto& item : block.items) {
          if (item.on_transition) continue;
          if (!eval(*item.guard, env).b) continue;
          double v = eval(*item.value, env).as_real();
          if (!(v >= 0.0) || !std::isfinite(v))
            throw ModelError(item.pos.str() + ": reward \"" + block.name +
                             "\" is negative in state " + c_.state_str(s));
          cr.state[s] += v;
        }
      }
      for (size_t k = 0; k < c_.transitions.size(); ++k) {
        const Transition& tr = c_.transitions[k];
        Env env;
        env.constants = &c_.constants;
        env.var_index = &var_index_;
        env.state = c_.valuation(tr.src);  // guards read the source state
        for (const auto& item : block.items) {
          if (!item.on_transition) continue;
          int32_t want = -1;
          if (!item.action.empty()) {
            want = -2;
            for (int32_t a = 0; a < int32_t(c_.actions.size()); ++a)
              if (c_.actions[a] == item.action) want = a;
          }
          if (tr.action != want) continue;
          if (!eval(*item.guard, env).b) continue;
          double v = eval(*item.value, env).as_real();
          if (!(v >= 0.0) || !std::isfinite(v))
            throw ModelError(item.pos.str() + ": reward \"" + block.name +
                             "\" is negative on a transition from " +
                             c_.state_str(tr.src));
          cr.transition[k] += v;
        }
      }
      c_.rewards.push_back(std::move(cr));
    }
  }
};

}  // namespace

Ctmc build_state_space(const ModelAst& ast, const BuildOptions& options) {
  return Builder(ast, options).build();
}

std::string export_dot(const Ctmc& c) {
  std::string out = "digraph ctmc {\n  rankdir=LR;\n  node [shape=ellipse];\n";
  for (uint32_t s = 0; s < c.n_states(); ++s) {
    out += "  " + std::to_string(s) + " [label=\"" + c.state_str(s) + "\"";
    if (s == c.initial_state()) out += ", peripheries=2";
    out += "];\n";
  }
  for (const auto& tr : c.transitions) {
    out += "  " + std::to_string(tr.src) + " -> " + std::to_string(tr.dst) +
           " [label=\"";
    if (tr.action >= 0) {
      out += c.actions[tr.action];
      out += ": ";
    }
    out += format_double(tr.rate);
    out += "\"];\n";
  }
  out += "}\n";
  return out;
}

std::string export_csv(const Ctmc& c) {
  std::string out = "source,target,rate,action\n";
  for (const auto& tr : c.transitions) {
    out += csv_row({std::to_string(tr.src), std::to_string(tr.dst),
                    format_sig(tr.rate, 17),
                    tr.action >= 0 ? c.actions[tr.action] : ""});
  }
  return out;
}

}  // namespace ctmck
