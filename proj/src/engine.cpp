#include "ctmck/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>

namespace ctmck {

namespace {

bool cmp_holds(double value, Cmp cmp, double threshold) {
  switch (cmp) {
    case Cmp::Ge: return value >= threshold;
    case Cmp::Gt: return value > threshold;
    case Cmp::Le: return value <= threshold;
    case Cmp::Lt: return value < threshold;
  }
  return false;
}

struct Evaluator {
  const Ctmc& c;
  const SolverOptions& opt;
  std::map<std::string, int> var_index;
  // Nested threshold queries are state formulas; each distinct node is
  // solved once per top-level check.
  std::map<const PropertyQuery*, std::vector<uint8_t>> nested_cache;

  Evaluator(const Ctmc& chain, const SolverOptions& options)
      : c(chain), opt(options) {
    for (size_t i = 0; i < c.var_names.size(); ++i)
      var_index[c.var_names[i]] = int(i);
  }

  double constant_number(const Expr& e, const char* what) const {
    Env env;
    env.constants = &c.constants;
    Value v = eval(e, env);
    if (!v.is_numeric())
      throw ModelError(std::string(what) + " must be numeric");
    return v.as_real();
  }

  double time_bound(const ExprPtr& e, const char* what) const {
    double t = constant_number(*e, what);
    if (!(t >= 0.0) || !std::isfinite(t))
      throw ModelError(std::string(what) + " must be finite and nonnegative, got " +
                       format_double(t));
    return t;
  }

  // [a, b] with b = +inf when the interval is right-open.
  std::pair<double, double> interval(const TimeInterval& iv) const {
    double a = iv.lo ? time_bound(iv.lo, "interval lower bound") : 0.0;
    double b = iv.hi ? time_bound(iv.hi, "interval upper bound")
                     : std::numeric_limits<double>::infinity();
    if (a > b)
      throw ModelError("time interval is empty: lower bound " + format_double(a) +
                       " exceeds upper bound " + format_double(b));
    return {a, b};
  }

  std::vector<uint8_t> sat(const Expr& formula) {
    size_t current = 0;
    Env env;
    env.constants = &c.constants;
    env.var_index = &var_index;
    env.label_lookup = [&](const std::string& name, SourcePos pos) -> Value {
      for (const auto& [lname, lexpr] : c.labels)
        if (lname == name) return eval(*lexpr, env);
      throw ModelError(pos.str() + ": unknown label \"" + name + "\"");
    };
    env.query_lookup = [&](const PropertyQuery& q, SourcePos pos) -> Value {
      auto it = nested_cache.find(&q);
      if (it == nested_cache.end()) {
        if (!q.cmp)
          throw ModelError(pos.str() +
                           ": a nested query used as a state formula needs a "
                           "probability bound, not =?");
        std::vector<double> values = numeric_vector(q);
        std::vector<uint8_t> sat_set(values.size());
        for (size_t s = 0; s < values.size(); ++s)
          sat_set[s] = cmp_holds(values[s], *q.cmp, q.threshold) ? 1 : 0;
        it = nested_cache.emplace(&q, std::move(sat_set)).first;
      }
      return Value::boolean(it->second[current] != 0);
    };

    std::vector<uint8_t> out(c.n_states(), 0);
    for (size_t s = 0; s < c.n_states(); ++s) {
      current = s;
      env.state = c.valuation(uint32_t(s));
      Value v = eval(formula, env);
      if (v.kind != Value::Kind::Bool)
        throw ModelError("state formula must be boolean: " + print_expr(formula));
      out[s] = v.b ? 1 : 0;
    }
    return out;
  }

  // Per-state value of a nested query, used before thresholding.
  std::vector<double> numeric_vector(const PropertyQuery& q) {
    size_t n = c.n_states();
    switch (q.kind) {
      case PropertyQuery::Kind::Prob:
        return path_probability(*q.path);
      case PropertyQuery::Kind::Steady: {
        double v = steady_scalar(*q.state_formula);
        return std::vector<double>(n, v);
      }
      case PropertyQuery::Kind::Reward: {
        const CompiledRewards* rw = find_rewards(q.reward_name);
        double t = time_bound(q.time_bound, "reward time bound");
        std::vector<double> out(n, 0.0);
        for (size_t s = 0; s < n; ++s) {
          std::vector<double> point(n, 0.0);
          point[s] = 1.0;
          out[s] = cumulative_reward(c, *rw, t, opt, &point);
        }
        return out;
      }
    }
    throw ModelError("internal: bad query kind");
  }

  const CompiledRewards* find_rewards(const std::string& name) const {
    const CompiledRewards* rw = c.find_rewards(name);
    if (!rw)
      throw ModelError("unknown reward structure \"" + name +
                       "\"; the model declares none by that name");
    return rw;
  }

  std::vector<double> path_probability(const PathFormula& f) {
    if (f.kind == PathFormula::Kind::Next) return next_probability(f);
    return until_probability(f);
  }

  std::vector<double> next_probability(const PathFormula& f) {
    auto [a, b] = interval(f.interval);
    std::vector<uint8_t> target = sat(*f.rhs);
    size_t n = c.n_states();
    std::vector<double> out(n, 0.0);
    for (uint32_t s = 0; s < n; ++s) {
      double e = c.exit_rate(s);
      if (e <= 0.0) continue;
      double mass = 0.0;
      for (uint32_t k = c.row_begin[s]; k < c.row_begin[s + 1]; ++k)
        if (target[c.transitions[k].dst]) mass += c.transitions[k].rate;
      double window = std::exp(-e * a) -
                      (std::isinf(b) ? 0.0 : std::exp(-e * b));
      out[s] = (mass / e) * window;
    }
    return out;
  }

  std::vector<double> until_probability(const PathFormula& f) {
    auto [a, b] = interval(f.interval);
    std::vector<uint8_t> phi1 = sat(*f.lhs);
    std::vector<uint8_t> phi2 = sat(*f.rhs);
    size_t n = c.n_states();

    // Phase 2 value: probability of reaching phi2 through phi1 states within
    // the remaining budget, per starting state.
    std::vector<double> y2;
    if (std::isinf(b)) {
      y2 = unbounded_until(phi1, phi2);
    } else {
      std::vector<uint8_t> frozen(n);
      std::vector<double> hit(n, 0.0);
      for (size_t s = 0; s < n; ++s) {
        frozen[s] = (phi2[s] || !phi1[s]) ? 1 : 0;  // success and dead lock in place
        hit[s] = phi2[s] ? 1.0 : 0.0;
      }
      y2 = transient_values(c, b - a, hit, frozen, opt);
    }
    if (a == 0.0) return y2;

    // Phase 1: propagate the phase-2 value backward over [0, a] through the
    // chain where leaving phi1 is fatal. At time a the path must still sit in
    // a phi1 state (jumps land exactly at a with probability zero).
    std::vector<uint8_t> not_phi1(n);
    std::vector<double> masked(n, 0.0);
    for (size_t s = 0; s < n; ++s) {
      not_phi1[s] = phi1[s] ? 0 : 1;
      masked[s] = phi1[s] ? y2[s] : 0.0;
    }
    return transient_values(c, a, masked, not_phi1, opt);
  }

  // Least solution of the reachability system on the embedded jump chain.
  std::vector<double> unbounded_until(const std::vector<uint8_t>& phi1,
                                      const std::vector<uint8_t>& phi2) {
    size_t n = c.n_states();
    // Backward search marks every state with a phi1-path to phi2; the rest
    // have probability exactly zero, which also pins the linear system's
    // unique solution.
    std::vector<std::vector<uint32_t>> pred(n);
    for (const auto& tr : c.transitions)
      if (tr.src != tr.dst) pred[tr.dst].push_back(tr.src);
    std::vector<uint8_t> can_reach(n, 0);
    std::vector<uint32_t> stack;
    for (uint32_t s = 0; s < n; ++s)
      if (phi2[s]) {
        can_reach[s] = 1;
        stack.push_back(s);
      }
    while (!stack.empty()) {
      uint32_t s = stack.back();
      stack.pop_back();
      for (uint32_t p : pred[s])
        if (!can_reach[p] && phi1[p] && !phi2[p]) {
          can_reach[p] = 1;
          stack.push_back(p);
        }
    }

    std::vector<double> x(n, 0.0);
    std::vector<uint32_t> unknowns;
    for (uint32_t s = 0; s < n; ++s) {
      if (phi2[s]) {
        x[s] = 1.0;
      } else if (phi1[s] && can_reach[s]) {
        unknowns.push_back(s);
      }
    }
    if (unknowns.empty()) return x;

    // Gauss-Seidel on x_s = sum_t P(s,t) x_t over the embedded chain, with
    // the diagonal term folded into the update so self-loops are exact.
    for (uint64_t sweep = 0; sweep < opt.max_iterations; ++sweep) {
      double delta = 0.0;
      for (uint32_t s : unknowns) {
        double e = c.exit_rate(s);
        double acc = 0.0, self = 0.0;
        for (uint32_t k = c.row_begin[s]; k < c.row_begin[s + 1]; ++k) {
          const Transition& tr = c.transitions[k];
          if (tr.dst == s)
            self += tr.rate / e;
          else
            acc += (tr.rate / e) * x[tr.dst];
        }
        double nv = acc / (1.0 - self);
        delta = std::max(delta, std::abs(nv - x[s]));
        x[s] = nv;
      }
      if (delta <= opt.linear_tol) return x;
    }
    throw NumericsError("unbounded-until solve did not converge within " +
                        std::to_string(opt.max_iterations) + " sweeps");
  }

  double steady_scalar(const Expr& formula) {
    if (!c.strongly_connected())
      throw ModelError(
          "steady-state requires an irreducible chain; this one is not "
          "strongly connected");
    std::vector<uint8_t> target = sat(formula);
    std::vector<double> pi = steady_state(c, opt);
    double sum = 0.0;
    for (size_t s = 0; s < pi.size(); ++s)
      if (target[s]) sum += pi[s];
    return sum;
  }
};

}  // namespace

std::vector<uint8_t> sat_states(const Ctmc& c, const Expr& formula,
                                const SolverOptions& opt) {
  Evaluator ev(c, opt);
  return ev.sat(formula);
}

std::vector<double> prob_next(const Ctmc& c, const PathFormula& f,
                              const SolverOptions& opt) {
  Evaluator ev(c, opt);
  return ev.next_probability(f);
}

std::vector<double> prob_until(const Ctmc& c, const PathFormula& f,
                               const SolverOptions& opt) {
  Evaluator ev(c, opt);
  return ev.until_probability(f);
}

double steady_query(const Ctmc& c, const Expr& formula, const SolverOptions& opt) {
  Evaluator ev(c, opt);
  return ev.steady_scalar(formula);
}

double reward_query(const Ctmc& c, const std::string& reward_name, double t,
                    const SolverOptions& opt) {
  Evaluator ev(c, opt);
  const CompiledRewards* rw = ev.find_rewards(reward_name);
  return cumulative_reward(c, *rw, t, opt);
}

QueryResult check(const Ctmc& c, const Property& p, const SolverOptions& opt) {
  auto start = std::chrono::steady_clock::now();
  Evaluator ev(c, opt);
  const PropertyQuery& q = *p.query;

  QueryResult r;
  r.text = p.text;
  r.tolerance = opt.eps;
  switch (q.kind) {
    case PropertyQuery::Kind::Prob: {
      r.per_state = ev.path_probability(*q.path);
      r.value = r.per_state.empty() ? 0.0 : r.per_state[0];
      if (q.path->kind == PathFormula::Kind::Until && q.path->interval.hi == nullptr)
        r.tolerance = opt.linear_tol;
      break;
    }
    case PropertyQuery::Kind::Steady:
      r.value = ev.steady_scalar(*q.state_formula);
      r.tolerance = opt.steady_tol;
      break;
    case PropertyQuery::Kind::Reward: {
      const CompiledRewards* rw = ev.find_rewards(q.reward_name);
      double t = ev.time_bound(q.time_bound, "reward time bound");
      r.value = cumulative_reward(c, *rw, t, opt);
      break;
    }
  }

  if (q.cmp) {
    r.numeric = false;
    r.satisfied = cmp_holds(r.value, *q.cmp, q.threshold);
    if (!r.per_state.empty()) {
      r.sat.resize(r.per_state.size());
      for (size_t s = 0; s < r.per_state.size(); ++s)
        r.sat[s] = cmp_holds(r.per_state[s], *q.cmp, q.threshold) ? 1 : 0;
    }
  }
  if (p.divisor) {
    double d = ev.constant_number(*p.divisor, "query divisor");
    if (d == 0.0) throw ModelError("query divisor evaluates to zero");
    r.value /= d;
  }

  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                  .count();
  return r;
}

std::vector<QueryResult> check_all(const Ctmc& c, const std::vector<Property>& ps,
                                   const SolverOptions& opt) {
  std::vector<QueryResult> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(check(c, p, opt));
  return out;
}

}  // namespace ctmck
