#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ctmck/ctmc.hpp"
#include "ctmck/property.hpp"

namespace ctmck {

struct SimConfig {
  uint64_t replications = 1'000'000;
  uint64_t seed = 1;
  double confidence = 0.99;  // normal-approximation CI level
};

struct Estimate {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double stddev = 0.0;  // sample standard deviation
  uint64_t replications = 0;
  uint64_t seed = 0;
  double confidence = 0.0;
};

// One replication's RNG. Every replication gets its own engine seeded from a
// splitmix64 hash of (master seed, replication index), so streams are
// independent, reproducible, and independent of execution order. Raw engine
// output is turned into uniforms and exponentials by hand; the standard
// distributions are implementation-defined and would break cross-platform
// reproducibility.
class SimStream {
 public:
  SimStream(uint64_t master_seed, uint64_t replication);
  double uniform();                 // [0, 1)
  double exponential(double rate);  // mean 1/rate
  uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// One sampled jump: the transition entry taken and the sojourn that preceded
// it. For absorbing states sample_jump returns transition = -1.
struct Jump {
  int64_t transition = -1;
  double sojourn = 0.0;
};
Jump sample_jump(const Ctmc& c, uint32_t state, SimStream& rng);

// Walks one trajectory from the initial state until `horizon`, invoking
// visit(state, t_enter, t_leave, transition_taken) per sojourn; the final
// segment is reported with t_leave == horizon and transition -1 if the clock
// runs out (or the state is absorbing). Returns the number of jumps taken.
template <class Visitor>
uint64_t simulate_path(const Ctmc& c, double horizon, SimStream& rng,
                       Visitor&& visit) {
  uint32_t state = c.initial_state();
  double now = 0.0;
  uint64_t jumps = 0;
  while (true) {
    Jump j = sample_jump(c, state, rng);
    if (j.transition < 0 || now + j.sojourn >= horizon) {
      visit(state, now, horizon, int64_t(-1));
      return jumps;
    }
    double leave = now + j.sojourn;
    visit(state, now, leave, j.transition);
    state = c.transitions[size_t(j.transition)].dst;
    now = leave;
    ++jumps;
  }
}

// Monte Carlo estimators. All run `cfg.replications` independent paths and
// return a normal-approximation CI at cfg.confidence.
//
// Probability that the state at time t satisfies the target set.
Estimate estimate_occupancy(const Ctmc& c, const std::vector<uint8_t>& target,
                            double t, const SimConfig& cfg);
// Probability of a path formula (Until with any interval, or Next).
Estimate estimate_path_probability(const Ctmc& c, const PathFormula& f,
                                   const SimConfig& cfg);
// Expected reward accumulated up to t.
Estimate estimate_reward(const Ctmc& c, const CompiledRewards& rewards,
                         double t, const SimConfig& cfg);

// Estimates the value of a full query (P=?[...] or R{..}=?[C<=t], with the
// optional ratio divisor applied to mean and CI). Steady-state queries are
// not simulable and raise ModelError.
Estimate estimate_query(const Ctmc& c, const Property& p, const SimConfig& cfg);

// z such that the two-sided normal CI at `confidence` is mean +- z*stderr.
double normal_quantile_two_sided(double confidence);

}  // namespace ctmck
