#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Return estimators: k-step values, lambda-returns, particle returns,
// ensemble statistics, the UCB acquisition objective and the beta schedule.
// Everything here is a pure function of its arguments.

namespace love {

template <typename S>
struct ImaginedTrajectory {
  std::vector<S> rewards;  // rewards[n] is collected stepping from state n
  std::vector<S> values;   // values[n] is the value head output at state n
  S discount = S(0.99);
  S lambda = S(0.95);

  // Horizon H: states are indexed 0..H.
  std::size_t horizon() const { return values.size() - 1; }

  void validate() const {
    if (rewards.size() != values.size())
      throw std::invalid_argument("trajectory: rewards/values length mismatch");
    if (values.size() < 2)
      throw std::invalid_argument("trajectory: need at least two states");
    if (!(discount >= S(0) && discount < S(1)))
      throw std::invalid_argument("trajectory: discount outside [0, 1)");
    if (!(lambda >= S(0) && lambda <= S(1)))
      throw std::invalid_argument("trajectory: lambda outside [0, 1]");
  }
};

template <typename S>
struct ReturnStatistics {
  std::vector<S> particle_returns;
  S mean = S(0);
  S stddev = S(0);
};

enum class BetaMode { linear, multiplicative };

// Per-episode schedule for the UCB trade-off parameter. In linear mode the
// multiplicative factor is ignored and vice versa.
template <typename S>
struct BetaSchedule {
  S beta_initial = S(0);
  S additive_delta = S(1e-3);
  S multiplicative_factor = S(1.01);
  BetaMode mode = BetaMode::linear;
};

// k-step bootstrapped value estimate from state tau:
//   sum_{n=tau}^{h-1} gamma^{n-tau} r_n + gamma^{h-tau} v(s_h),
// with h = min(tau + k, H).
template <typename S>
S k_step_value(const ImaginedTrajectory<S>& traj, std::size_t tau, std::size_t k) {
  traj.validate();
  const std::size_t H = traj.horizon();
  if (tau > H) throw std::out_of_range("k_step_value: tau out of range");
  if (k < 1) throw std::invalid_argument("k_step_value: k must be >= 1");
  const std::size_t h = std::min(tau + k, H);
  S acc = S(0);
  S disc = S(1);
  for (std::size_t n = tau; n < h; ++n) {
    acc += disc * traj.rewards[n];
    disc *= traj.discount;
  }
  return acc + disc * traj.values[h];
}

// Lambda-return at every state of the trajectory:
//   V_lambda(s_tau) = (1-lambda) sum_{n=1}^{H-1} lambda^{n-1} V^n(s_tau)
//                     + lambda^{H-1} V^H(s_tau).
// Computed by the usual backward recursion, which reproduces the direct
// weighted sum exactly (the oracle tests check this to 1e-8).
template <typename S>
std::vector<S> lambda_return(const ImaginedTrajectory<S>& traj) {
  traj.validate();
  const std::size_t H = traj.horizon();
  std::vector<S> out(H + 1);
  out[H] = traj.values[H];
  for (std::size_t i = H; i-- > 0;) {
    out[i] = traj.rewards[i] +
             traj.discount * ((S(1) - traj.lambda) * traj.values[i + 1] +
                              traj.lambda * out[i + 1]);
  }
  return out;
}

// Predicted infinite-horizon trajectory return: plain sum of the
// lambda-returns along the imagined trajectory.
template <typename S>
S particle_return(const std::vector<S>& value_lambda) {
  if (value_lambda.empty())
    throw std::invalid_argument("particle_return: empty lambda-return array");
  S acc = S(0);
  for (S v : value_lambda) acc += v;
  return acc;
}

// Ensemble mean and population standard deviation (1/M, no Bessel
// correction). A single-particle ensemble has stddev 0.
template <typename S>
ReturnStatistics<S> ensemble_stats(const std::vector<S>& particle_returns) {
  if (particle_returns.empty())
    throw std::invalid_argument("ensemble_stats: empty ensemble");
  const S m = static_cast<S>(particle_returns.size());
  ReturnStatistics<S> stats;
  stats.particle_returns = particle_returns;
  S sum = S(0);
  for (S g : particle_returns) sum += g;
  stats.mean = sum / m;
  S sq = S(0);
  for (S g : particle_returns) sq += (g - stats.mean) * (g - stats.mean);
  stats.stddev = S(std::sqrt(double(sq / m)));
  return stats;
}

// UCB objective: mean + beta * std. beta > 0 is optimistic, beta < 0 is the
// safe-interaction objective, beta = 0 the evaluation objective.
template <typename S>
S ucb(const ReturnStatistics<S>& stats, S beta) {
  return stats.mean + beta * stats.stddev;
}

template <typename S>
S beta_at(const BetaSchedule<S>& schedule, long episode) {
  if (episode < 0) throw std::invalid_argument("beta_at: negative episode");
  if (schedule.mode == BetaMode::linear)
    return schedule.beta_initial + S(episode) * schedule.additive_delta;
  return schedule.beta_initial *
         S(std::pow(double(schedule.multiplicative_factor), double(episode)));
}

}  // namespace love
