#pragma once

#include <cstdint>
#include <vector>

#include "ctmck/ctmc.hpp"

namespace ctmck {

struct SolverOptions {
  // Truncation error budget for uniformization (Poisson tail mass).
  double eps = 1e-10;
  // Residual bound ||pi Q||_inf for the steady-state solver.
  double steady_tol = 1e-10;
  // Convergence bound for the unbounded-until linear system.
  double linear_tol = 1e-10;
  // Cap on uniformization steps per call; exceeding it is a NumericsError
  // suggesting a larger eps or a smaller horizon.
  uint64_t max_iterations = 50'000'000;
  // Cap on steady-state iterations.
  uint64_t max_steady_iterations = 200'000'000;
};

// Truncated Poisson distribution for uniformization: true pmf values for
// k in [left, right] with total retained mass >= 1 - eps. Computed with a
// scaled mode-outward recurrence, safe for rates up to 1e6 and beyond.
struct PoissonWeights {
  uint64_t left = 0;
  uint64_t right = 0;
  std::vector<double> weights;  // weights[k - left] = pmf(k)
  double total = 1.0;           // sum of retained weights
  double left_tail = 0.0;       // estimated mass below `left`
  double pmf(uint64_t k) const {
    return (k < left || k > right) ? 0.0 : weights[k - left];
  }
};

// Requires lambda_hat >= 0 and eps in (0, 1e-3].
PoissonWeights poisson_weights(double lambda_hat, double eps);

// Uniformized jump chain P~ = I + Q/q with q = 1.02 * max exit rate.
// Rows marked absorbing are replaced by identity rows. Row-major CSR with
// merged (summed) column entries; rows sum to 1 within 1e-12.
struct Uniformized {
  double q = 0.0;  // 0 when every state is absorbing
  size_t n = 0;
  std::vector<uint32_t> row_begin;
  std::vector<uint32_t> col;
  std::vector<double> val;

  // y <- P~ y (right multiply, used by backward value iteration).
  void apply_right(const std::vector<double>& y, std::vector<double>& out) const;
  // out <- x P~ (left multiply, used by forward distribution iteration).
  void apply_left(const std::vector<double>& x, std::vector<double>& out) const;
};

Uniformized uniformize(const Ctmc& c, const std::vector<uint8_t>& absorbing = {});

// Distribution at time t from `initial` (defaults to a point mass on state 0).
// Sums to 1 within eps + 1e-10. Uses a steady-state detection shortcut: once
// successive uniformized iterates differ by less than eps/steps_total in the
// max norm, the remaining Poisson mass is applied to the frozen vector.
std::vector<double> transient_distribution(const Ctmc& c, double t,
                                           const SolverOptions& opt = {},
                                           const std::vector<double>* initial = nullptr,
                                           const std::vector<uint8_t>* absorbing = nullptr);

// Backward analogue: E[value(X_t) | X_0 = s] for every s, on the chain with
// the given rows made absorbing. This is the workhorse for bounded until.
std::vector<double> transient_values(const Ctmc& c, double t,
                                     const std::vector<double>& value,
                                     const std::vector<uint8_t>& absorbing,
                                     const SolverOptions& opt = {});

// Expected reward accumulated over [0, t] from state 0: state rewards weighted
// by occupation time plus transition rewards weighted by expected firings,
//   sum_k c_k (u_k . g)  with  c_k = (1/q)(1 - sum_{j<=k} pmf(j; qt))
// where g(s) = rho_state(s) + sum_e rate(e) * rho_trans(e) over edges leaving s.
// With the all-ones state reward this telescopes to t (within eps * t).
double cumulative_reward(const Ctmc& c, const CompiledRewards& rewards, double t,
                         const SolverOptions& opt = {},
                         const std::vector<double>* initial = nullptr);

// Stationary distribution of an irreducible chain: pi Q = 0, sum pi = 1, by
// power iteration on the uniformized chain until ||pi Q||_inf <= steady_tol.
// Callers are expected to have checked strong connectivity; the iteration cap
// still guards non-convergence.
std::vector<double> steady_state(const Ctmc& c, const SolverOptions& opt = {});

}  // namespace ctmck
