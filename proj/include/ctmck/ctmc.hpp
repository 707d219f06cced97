#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ctmck/model.hpp"

namespace ctmck {

// One rate entry of the transition function. Parallel edges between the same
// state pair are kept separate so that each retains its action label and
// originating command; rate summation (race semantics) happens in the
// numerical routines and in jump_probability.
struct Transition {
  uint32_t src = 0;
  uint32_t dst = 0;
  double rate = 0.0;
  int32_t action = -1;    // index into Ctmc::actions, -1 for unlabeled
  int32_t module_idx = -1;
  int32_t command_idx = -1;  // command position within its module
};

// Reward structure compiled against a concrete state space: one value per
// state plus one value per transition entry (aligned with Ctmc::transitions).
struct CompiledRewards {
  std::string name;
  std::vector<double> state;
  std::vector<double> transition;
};

struct BuildOptions {
  uint64_t state_cap = 10'000'000;
};

// Explicit-state CTMC produced from a bound ModelAst. States are tuples of
// variable values, indexed in BFS discovery order; index 0 is the initial
// state. Transitions are grouped by source (CSR layout).
class Ctmc {
 public:
  std::vector<std::string> var_names;
  std::vector<int> var_lo, var_hi;
  std::vector<int> valuations;  // n_states * n_vars, row per state
  std::vector<Transition> transitions;
  std::vector<uint32_t> row_begin;  // n_states + 1 offsets into transitions
  std::vector<double> exit;         // E(s), includes self-loop rates
  std::vector<std::string> actions;
  std::vector<CompiledRewards> rewards;
  std::map<std::string, Value> constants;          // resolved, for queries
  std::vector<std::pair<std::string, ExprPtr>> labels;
  std::vector<std::string> warnings;  // deadlock notices and similar

  size_t n_states() const { return row_begin.empty() ? 0 : row_begin.size() - 1; }
  size_t n_vars() const { return var_names.size(); }
  uint32_t initial_state() const { return 0; }

  const int* valuation(uint32_t s) const { return valuations.data() + size_t(s) * n_vars(); }
  std::string state_str(uint32_t s) const;  // "s=3" / "x=1,y=0"
  int var(const std::string& name) const;   // index, -1 when absent

  // E(s): total outgoing rate including self-loops.
  double exit_rate(uint32_t s) const { return exit[s]; }
  // Embedded jump probability R(s,s')/E(s); 0 for absorbing s.
  double jump_probability(uint32_t s, uint32_t t) const;
  // Probability of jumping to s' within time t: R(s,s')/E(s) * (1-e^{-E(s)t}).
  double timed_jump_probability(uint32_t s, uint32_t t, double time) const;

  const CompiledRewards* find_rewards(const std::string& name) const;

  // Summed rate matrix keyed by state index pairs.
  std::map<std::pair<uint32_t, uint32_t>, double> rate_matrix() const;
  // Summed rate matrix keyed by valuation tuples; invariant under command
  // reordering, unlike state indices which follow BFS discovery.
  std::map<std::pair<std::vector<int>, std::vector<int>>, double>
  rate_matrix_by_valuation() const;

  // True when every state can reach every other through positive-rate edges.
  bool strongly_connected() const;
};

// Explores the reachable state space of a bound model. Throws ModelError on
// unbound input, update range violations (naming variable and command),
// nonpositive rates under enabled guards, or exceeding options.state_cap.
// Deadlock states are permitted, kept absorbing, and reported in warnings.
Ctmc build_state_space(const ModelAst& ast, const BuildOptions& options = {});

// Serializes the chain as a DOT digraph (one edge per transition entry,
// labeled "action: rate" with shortest round-trip numbers).
std::string export_dot(const Ctmc& c);

// Serializes transitions as CSV "source,target,rate,action" with rates
// printed to 17 significant digits.
std::string export_csv(const Ctmc& c);

}  // namespace ctmck
