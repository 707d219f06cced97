#pragma once

#include <string>
#include <vector>

#include "ctmck/ctmc.hpp"
#include "ctmck/numerics.hpp"
#include "ctmck/property.hpp"

namespace ctmck {

// Result of checking one query. Numeric queries (=?) carry a scalar for the
// initial state plus per-state values where the algorithm produces them;
// threshold queries additionally carry the satisfaction set.
struct QueryResult {
  std::string text;
  bool numeric = true;
  double value = 0.0;              // initial-state value after post-processing
  bool satisfied = false;          // threshold queries, at the initial state
  std::vector<double> per_state;   // probabilities before thresholding/ratio
  std::vector<uint8_t> sat;        // threshold queries only
  double tolerance = 0.0;          // solver tolerance that applied
  double seconds = 0.0;
};

// States satisfying a boolean state formula. Resolves quoted labels and
// nested threshold queries (running the solvers they need); a nested numeric
// =? query is a ModelError.
std::vector<uint8_t> sat_states(const Ctmc& c, const Expr& formula,
                                const SolverOptions& opt = {});

// Per-state probability of the path formula.
std::vector<double> prob_next(const Ctmc& c, const PathFormula& f,
                              const SolverOptions& opt = {});
std::vector<double> prob_until(const Ctmc& c, const PathFormula& f,
                               const SolverOptions& opt = {});

// Long-run probability of a state formula; requires an irreducible chain.
double steady_query(const Ctmc& c, const Expr& formula,
                    const SolverOptions& opt = {});

// Expected accumulated reward R{"name"}=?[C<=t] from the initial state.
double reward_query(const Ctmc& c, const std::string& reward_name, double t,
                    const SolverOptions& opt = {});

// Full query evaluation, including the optional ratio post-processing.
QueryResult check(const Ctmc& c, const Property& p, const SolverOptions& opt = {});

std::vector<QueryResult> check_all(const Ctmc& c, const std::vector<Property>& ps,
                                   const SolverOptions& opt = {});

}  // namespace ctmck
