#include "ctmck/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "ctmck/errors.hpp"

namespace ctmck {

PoissonWeights poisson_weights(double lambda_hat, double eps) {
  if (!(lambda_hat >= 0.0) || !std::isfinite(lambda_hat))
    throw NumericsError("poisson: rate must be finite and nonnegative");
  if (!(eps > 0.0) || eps > 1e-3)
    throw NumericsError("poisson: eps must lie in (0, 1e-3]");

  PoissonWeights pw;
  if (lambda_hat == 0.0) {
    pw.weights = {1.0};
    return pw;
  }

  // pmf at the mode, computed in extended precision: the three terms of the
  // log cancel from ~lambda*ln(lambda) down to ~ -ln(2 pi lambda)/2, so plain
  // doubles would lose ~1e-10 of relative accuracy for lambda ~ 1e5.
  uint64_t mode = uint64_t(std::floor(lambda_hat));
  long double ll = (long double)lambda_hat;
  long double lp = -ll + (long double)mode * std::log(ll) - std::lgamma((long double)mode + 1);
  double pm = double(std::exp(lp));

  double budget = eps / 4.0;  // each omitted tail stays below this

  // Walk right from the mode. Beyond the mode the pmf decays by factors
  // lambda/(k+1) < 1, so the whole remaining tail is bounded by a geometric
  // series; stop once that bound fits the budget.
  std::vector<double> right_part;  // pmf(mode), pmf(mode+1), ...
  {
    uint64_t k = mode;
    double w = pm;
    for (;;) {
      right_part.push_back(w);
      double next = w * lambda_hat / double(k + 1);
      double ratio = lambda_hat / double(k + 2);
      if (double(k + 1) > lambda_hat && ratio < 1.0 &&
          next / (1.0 - ratio) <= budget) {
        pw.right = k;
        break;
      }
      w = next;
      ++k;
    }
  }

  // Walk left from the mode. Below the mode the pmf decays by factors
  // k/lambda < 1 going down, bounding the discarded head the same way.
  std::vector<double> left_part;  // pmf(mode-1), pmf(mode-2), ...
  {
    uint64_t k = mode;
    double v = pm;
    while (k > 0) {
      double prev = v * double(k) / lambda_hat;  // pmf(k-1)
      double sigma = double(k - 1) / lambda_hat;
      double below = prev / (1.0 - sigma);  // bound on pmf(k-1) + everything under it
      if (below <= budget) {
        pw.left = k;
        pw.left_tail = below;
        break;
      }
      left_part.push_back(prev);
      v = prev;
      --k;
    }
    if (k == 0) {
      pw.left = 0;
      pw.left_tail = 0.0;
    }
  }

  pw.weights.assign(left_part.rbegin(), left_part.rend());
  pw.weights.insert(pw.weights.end(), right_part.begin(), right_part.end());
  pw.total = 0.0;
  for (double w : pw.weights) pw.total += w;
  return pw;
}

void Uniformized::apply_right(const std::vector<double>& y,
                              std::vector<double>& out) const {
  out.assign(n, 0.0);
  for (size_t s = 0; s < n; ++s) {
    double acc = 0.0;
    for (uint32_t k = row_begin[s]; k < row_begin[s + 1]; ++k)
      acc += val[k] * y[col[k]];
    out[s] = acc;
  }
}

void Uniformized::apply_left(const std::vector<double>& x,
                             std::vector<double>& out) const {
  out.assign(n, 0.0);
  for (size_t s = 0; s < n; ++s) {
    double xs = x[s];
    if (xs == 0.0) continue;
    for (uint32_t k = row_begin[s]; k < row_begin[s + 1]; ++k)
      out[col[k]] += xs * val[k];
  }
}

Uniformized uniformize(const Ctmc& c, const std::vector<uint8_t>& absorbing) {
  size_t n = c.n_states();
  Uniformized u;
  u.n = n;
  auto masked = [&](size_t s) { return !absorbing.empty() && absorbing[s]; };

  double max_exit = 0.0;
  for (size_t s = 0; s < n; ++s)
    if (!masked(s)) max_exit = std::max(max_exit, c.exit[s]);
  u.q = 1.02 * max_exit;

  u.row_begin.reserve(n + 1);
  u.row_begin.push_back(0);
  std::vector<double> dense(n, 0.0);  // scratch row, columns are sparse
  std::vector<uint32_t> touched;
  for (size_t s = 0; s < n; ++s) {
    if (masked(s) || u.q == 0.0) {
      u.col.push_back(uint32_t(s));
      u.val.push_back(1.0);
      u.row_begin.push_back(uint32_t(u.col.size()));
      continue;
    }
    touched.clear();
    // Self-loop entries land on the diagonal and cancel the matching part of
    // the exit rate, so the row still sums to one.
    dense[s] = 1.0 - c.exit[s] / u.q;
    touched.push_back(uint32_t(s));
    for (uint32_t k = c.row_begin[s]; k < c.row_begin[s + 1]; ++k) {
      uint32_t d = c.transitions[k].dst;
      if (dense[d] == 0.0 && d != s) touched.push_back(d);
      dense[d] += c.transitions[k].rate / u.q;
    }
    std::sort(touched.begin(), touched.end());
    for (uint32_t d : touched) {
      u.col.push_back(d);
      u.val.push_back(dense[d]);
      dense[d] = 0.0;
    }
    u.row_begin.push_back(uint32_t(u.col.size()));
  }
  return u;
}

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void check_cap(const PoissonWeights& pw, const SolverOptions& opt) {
  if (pw.right + 1 > opt.max_iterations)
    throw NumericsError("uniformization needs " + std::to_string(pw.right + 1) +
                        " steps, above the cap of " +
                        std::to_string(opt.max_iterations) +
                        "; increase eps or reduce the horizon");
}

}  // namespace

std::vector<double> transient_distribution(const Ctmc& c, double t,
                                           const SolverOptions& opt,
                                           const std::vector<double>* initial,
                                           const std::vector<uint8_t>* absorbing) {
  size_t n = c.n_states();
  std::vector<double> x0;
  if (initial) {
    if (initial->size() != n)
      throw NumericsError("initial distribution has the wrong dimension");
    x0 = *initial;
  } else {
    x0.assign(n, 0.0);
    if (n) x0[0] = 1.0;
  }
  if (!(t >= 0.0) || !std::isfinite(t))
    throw NumericsError("time bound must be finite and nonnegative");
  if (t == 0.0 || n == 0) return x0;

  Uniformized uni = uniformize(c, absorbing ? *absorbing : std::vector<uint8_t>{});
  if (uni.q == 0.0) return x0;

  PoissonWeights pw = poisson_weights(uni.q * t, opt.eps);
  check_cap(pw, opt);
  double freeze_thr = opt.eps / double(pw.right + 1);

  std::vector<double> result(n, 0.0), u = x0, next;
  double used = 0.0;
  for (uint64_t k = 0;; ++k) {
    double w = pw.pmf(k);
    if (w > 0.0) {
      for (size_t i = 0; i < n; ++i) result[i] += w * u[i];
      used += w;
    }
    if (k == pw.right) break;
    uni.apply_left(u, next);
    if (max_abs_diff(u, next) < freeze_thr) {
      // Iterates have stabilized; the rest of the Poisson mass lands on the
      // frozen vector.
      double remaining = pw.total - used;
      if (remaining > 0.0)
        for (size_t i = 0; i < n; ++i) result[i] += remaining * next[i];
      break;
    }
    u.swap(next);
  }
  return result;
}

std::vector<double> transient_values(const Ctmc& c, double t,
                                     const std::vector<double>& value,
                                     const std::vector<uint8_t>& absorbing,
                                     const SolverOptions& opt) {
  size_t n = c.n_states();
  if (value.size() != n) throw NumericsError("value vector has the wrong dimension");
  if (!(t >= 0.0) || !std::isfinite(t))
    throw NumericsError("time bound must be finite and nonnegative");
  if (t == 0.0 || n == 0) return value;

  Uniformized uni = uniformize(c, absorbing);
  if (uni.q == 0.0) return value;

  PoissonWeights pw = poisson_weights(uni.q * t, opt.eps);
  check_cap(pw, opt);
  double freeze_thr = opt.eps / double(pw.right + 1);

  std::vector<double> result(n, 0.0), y = value, next;
  double used = 0.0;
  for (uint64_t k = 0;; ++k) {
    double w = pw.pmf(k);
    if (w > 0.0) {
      for (size_t i = 0; i < n; ++i) result[i] += w * y[i];
      used += w;
    }
    if (k == pw.right) break;
    uni.apply_right(y, next);
    if (max_abs_diff(y, next) < freeze_thr) {
      double remaining = pw.total - used;
      if (remaining > 0.0)
        for (size_t i = 0; i < n; ++i) result[i] += remaining * next[i];
      break;
    }
    y.swap(next);
  }
  return result;
}

double cumulative_reward(const Ctmc& c, const CompiledRewards& rewards, double t,
                         const SolverOptions& opt,
                         const std::vector<double>* initial) {
  size_t n = c.n_states();
  if (!(t >= 0.0) || !std::isfinite(t))
    throw NumericsError("time bound must be finite and nonnegative");
  if (t == 0.0 || n == 0) return 0.0;

  // Rate of reward accumulation per state: the state reward plus every
  // outgoing transition reward weighted by its firing rate.
  std::vector<double> g(n, 0.0);
  for (size_t s = 0; s < n; ++s) g[s] = rewards.state[s];
  for (size_t k = 0; k < c.transitions.size(); ++k)
    g[c.transitions[k].src] += c.transitions[k].rate * rewards.transition[k];

  std::vector<double> u;
  if (initial) {
    if (initial->size() != n)
      throw NumericsError("initial distribution has the wrong dimension");
    u = *initial;
  } else {
    u.assign(n, 0.0);
    u[0] = 1.0;
  }

  auto dot_g = [&](const std::vector<double>& x) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += x[i] * g[i];
    return acc;
  };

  Uniformized uni = uniformize(c, {});
  if (uni.q == 0.0) return dot_g(u) * t;  // nothing moves; reward is linear in t

  PoissonWeights pw = poisson_weights(uni.q * t, opt.eps);
  check_cap(pw, opt);
  double freeze_thr = opt.eps / double(pw.right + 1);

  // result = sum_k c_k (u_k . g) with c_k = (1/q)(1 - cumulative pmf). The
  // c_k sum telescopes to t, so once the occupancy vector stops changing the
  // remainder is (t - sum of used c_k) times the frozen accumulation rate;
  // the same correction applied at the truncation point absorbs the tail.
  double result = 0.0;
  double cumulative = 0.0;  // pmf mass at or below k; the skipped head is
                            // bounded by pw.left_tail <= eps/4
  double c_used = 0.0;
  std::vector<double> next;
  for (uint64_t k = 0;; ++k) {
    cumulative += pw.pmf(k);
    double ck = (1.0 - cumulative) / uni.q;
    if (ck < 0.0) ck = 0.0;
    result += ck * dot_g(u);
    c_used += ck;
    if (k == pw.right) break;
    uni.apply_left(u, next);
    if (max_abs_diff(u, next) < freeze_thr) {
      u.swap(next);
      break;
    }
    u.swap(next);
  }
  double c_rest = t - c_used;
  if (c_rest > 0.0) result += c_rest * dot_g(u);
  return result;
}

std::vector<double> steady_state(const Ctmc& c, const SolverOptions& opt) {
  size_t n = c.n_states();
  if (n == 0) return {};
  if (n == 1) return {1.0};

  Uniformized uni = uniformize(c, {});
  if (uni.q == 0.0)
    throw NumericsError("steady state of a chain with no transitions");

  // Power iteration on P~. Every diagonal of P~ is at least 1 - 1/1.02 > 0,
  // so the chain is aperiodic and the iteration converges geometrically.
  // ||pi Q||_inf equals q * ||pi P~ - pi||_inf, which is the stop test.
  std::vector<double> pi(n, 1.0 / double(n)), next;
  for (uint64_t it = 0; it < opt.max_steady_iterations; ++it) {
    uni.apply_left(pi, next);
    double residual = uni.q * max_abs_diff(pi, next);
    pi.swap(next);
    if (residual <= opt.steady_tol) {
      double sum = 0.0;
      for (double v : pi) sum += v;
      for (double& v : pi) v /= sum;
      return pi;
    }
  }
  throw NumericsError(
      "steady-state power iteration did not reach the residual tolerance " +
      format_double(opt.steady_tol) + " within " +
      std::to_string(opt.max_steady_iterations) + " iterations");
}

}  // namespace ctmck
