#pragma once

#include <stdexcept>
#include <vector>

#include "love/nn/layers.hpp"
#include "love/nn/tensor.hpp"
#include "love/rng.hpp"
#include "love/wm/world_model.hpp"

// Tanh-squashed Gaussian action model and the actor/critic objectives over
// the particle ensemble.

namespace love {

enum class PolicyRole { acquisition, evaluation };

struct PolicyConfig {
  int action_dim = 1;
  int units = 400;
  int layers = 4;
  double mean_scale = 5.0;   // mean is rescaled and passed through tanh
  double init_std = 5.0;     // softplus offset so the initial std is wide
  double min_std = 1e-4;
  nn::InitSpec init;
};

// Squashed-Gaussian action model: mean = ms * tanh(raw / ms),
// std = softplus(raw + softplus_inverse(init_std)) + min_std,
// action = tanh(mean + std * eps).
template <typename S>
class ActionModel {
 public:
  ActionModel() = default;
  ActionModel(Rng& rng, int feature_dim, const PolicyConfig& cfg) : cfg_(cfg) {
    net_ = nn::Mlp<S>(rng, feature_dim, cfg.units, cfg.layers, 2 * cfg.action_dim,
                      nn::Act::elu, cfg.init);
    raw_init_std_ = S(std::log(std::exp(cfg.init_std) - 1.0));
  }

  struct Dist {
    nn::Tensor<S> mean;  // pre-tanh mean
    nn::Tensor<S> std;
  };

  Dist dist(const nn::Tensor<S>& features) const {
    auto out = net_(features);
    auto mean_raw = nn::slice_cols(out, 0, cfg_.action_dim);
    auto std_raw = nn::slice_cols(out, cfg_.action_dim, cfg_.action_dim);
    Dist d;
    const S ms = S(cfg_.mean_scale);
    d.mean = nn::scale(nn::tanh(nn::scale(mean_raw, S(1) / ms)), ms);
    d.std = nn::add_scalar(nn::softplus(nn::add_scalar(std_raw, raw_init_std_)),
                           S(cfg_.min_std));
    return d;
  }

  // Pre-tanh sample; tanh(u) is the executed action.
  nn::Tensor<S> sample_pre_tanh(const Dist& d, Rng& rng) const {
    nn::Mat<S> eps(d.mean.rows(), d.mean.cols());
    for (Eigen::Index j = 0; j < eps.cols(); ++j)
      for (Eigen::Index i = 0; i < eps.rows(); ++i) eps(i, j) = S(rng.normal());
    return nn::add(d.mean, nn::mul(d.std, nn::Tensor<S>::constant(std::move(eps))));
  }

  // Log-density of the squashed action given its pre-tanh value, including
  // the tanh change-of-variables correction.
  nn::Tensor<S> log_prob_pre_tanh(const Dist& d, const nn::Tensor<S>& u) const {
    const S log_2pi = S(std::log(2.0 * 3.14159265358979323846));
    auto z = nn::div(nn::sub(u, d.mean), d.std);
    auto normal_term = nn::add_scalar(
        nn::add(nn::square(z), nn::scale(nn::log(d.std), S(2))), log_2pi);
    auto gauss = nn::scale(nn::rowwise_sum(normal_term), S(-0.5));
    // log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u))
    auto correction = nn::scale(
        nn::add_scalar(nn::add(nn::neg(u), nn::neg(nn::softplus(nn::scale(u, S(-2))))),
                       S(std::log(2.0))),
        S(2));
    return nn::sub(gauss, nn::rowwise_sum(correction));
  }

  void collect(nn::ParamList<S>& out, const std::string& prefix) const {
    net_.collect(out, prefix + "/net");
  }

  const PolicyConfig& config() const { return cfg_; }

 private:
  nn::Mlp<S> net_;
  PolicyConfig cfg_;
  S raw_init_std_ = S(0);
};

template <typename S>
struct Policy {
  PolicyRole role = PolicyRole::acquisition;
  ActionModel<S> net;
};

// tanh squash scaled epsilon-inside the interval so saturated samples stay
// strictly within (-1, 1) in finite precision.
template <typename S>
nn::Tensor<S> squash(const nn::Tensor<S>& pre_tanh) {
  return nn::scale(nn::tanh(pre_tanh), S(1) - S(1e-6));
}

// Action in (-1, 1)^n. Stochastic mode reparameterizes then squashes;
// deterministic mode returns tanh of the mean.
template <typename S>
nn::Tensor<S> sample_action(const ActionModel<S>& model, const LatentState<S>& state,
                            Rng& rng, bool deterministic = false) {
  if (!state.deter.value().allFinite())
    throw std::invalid_argument("sample_action: non-finite state");
  auto d = model.dist(state.feature());
  if (deterministic) return squash(d.mean);
  return squash(model.sample_pre_tanh(d, rng));
}

// Differentiable lambda-return along a rollout. rewards has H entries
// (rewards[t] steps t -> t+1), values has H+1. Matches the scalar
// lambda_return in returns.hpp elementwise.
template <typename S>
std::vector<nn::Tensor<S>> lambda_return_graph(const std::vector<nn::Tensor<S>>& rewards,
                                               const std::vector<nn::Tensor<S>>& values,
                                               S gamma, S lambda) {
  if (values.size() != rewards.size() + 1)
    throw std::invalid_argument("lambda_return_graph: need H rewards, H+1 values");
  const std::size_t H = rewards.size();
  std::vector<nn::Tensor<S>> out(H + 1);
  out[H] = values[H];
  for (std::size_t t = H; t-- > 0;) {
    auto mix = nn::add(nn::scale(values[t + 1], (S(1) - lambda)),
                       nn::scale(out[t + 1], lambda));
    out[t] = nn::add(rewards[t], nn::scale(mix, gamma));
  }
  return out;
}

// Lambda-return targets for critic regression: this particle's value head on
// the (already imagined) rollout, no graph attached.
template <typename S>
std::vector<nn::Mat<S>> build_value_targets(const Ensemble<S>& ensemble, int i,
                                            const Rollout<S>& rollout, S gamma,
                                            S lambda) {
  nn::NoGradScope<S> ng;
  std::vector<nn::Tensor<S>> values;
  values.reserve(rollout.states.size());
  for (const auto& s : rollout.states) values.push_back(ensemble.predict_value(i, s));
  std::vector<nn::Tensor<S>> rewards;
  rewards.reserve(rollout.rewards.size());
  for (const auto& r : rollout.rewards) rewards.push_back(nn::detach(r));
  auto lam = lambda_return_graph(rewards, values, gamma, lambda);
  std::vector<nn::Mat<S>> out;
  out.reserve(lam.size());
  for (const auto& l : lam) out.push_back(l.value());
  return out;
}

// Critic objective: 0.5 * mean (v(s) - target)^2 over states and time.
// States and targets are treated as constants; only the value head of
// particle i receives gradient.
template <typename S>
nn::Tensor<S> critic_loss(const Ensemble<S>& ensemble, int i,
                          const std::vector<LatentState<S>>& states,
                          const std::vector<nn::Mat<S>>& targets) {
  if (states.size() != targets.size() || states.empty())
    throw std::invalid_argument("critic_loss: states/targets mismatch");
  const Eigen::Index B = states[0].batch();
  const Eigen::Index feat_dim = states[0].deter.cols() + states[0].stoch_sample.cols();
  nn::Mat<S> feats(B * Eigen::Index(states.size()), feat_dim);
  nn::Mat<S> targ(B * Eigen::Index(states.size()), 1);
  for (std::size_t k = 0; k < states.size(); ++k) {
    nn::NoGradScope<S> ng;
    feats.middleRows(Eigen::Index(k) * B, B) = states[k].feature().value();
    targ.middleRows(Eigen::Index(k) * B, B) = targets[k];
  }
  auto v = ensemble.predict_value_features(i, nn::Tensor<S>::constant(std::move(feats)));
  auto err = nn::sub(v, nn::Tensor<S>::constant(std::move(targ)));
  return nn::scale(nn::mean(nn::square(err)), S(0.5));
}

// Plan2Explore-style disagreement: mean over latent dimensions of the
// population variance of the particles' prior stochastic means at
// (state, action). Requires at least two particles.
template <typename S>
nn::Tensor<S> curiosity_bonus(const Ensemble<S>& ensemble, const LatentState<S>& state,
                              const nn::Tensor<S>& action) {
  const int M = ensemble.size();
  if (M < 2) throw std::invalid_argument("curiosity_bonus: need >= 2 particles");
  std::vector<nn::Tensor<S>> means;
  means.reserve(std::size_t(M));
  for (int j = 0; j < M; ++j) means.push_back(ensemble.prior_mean(j, state, action));
  nn::Tensor<S> sum;
  for (const auto& m : means) sum = sum.defined() ? nn::add(sum, m) : m;
  auto mu = nn::scale(sum, S(1) / S(M));
  nn::Tensor<S> var_sum;
  for (const auto& m : means) {
    auto sq = nn::square(nn::sub(m, mu));
    var_sum = var_sum.defined() ? nn::add(var_sum, sq) : sq;
  }
  auto var = nn::scale(var_sum, S(1) / S(M));
  return nn::scale(nn::rowwise_sum(var), S(1) / S(var.cols()));
}

template <typename S>
struct ActorLossResult {
  nn::Tensor<S> loss;
  double mean_return = 0;  // batch-mean of mu_G
  double std_return = 0;   // batch-mean of sigma_G (population)
};

// UCB actor objective: -mean over start states of (mu_G + beta * sigma_G),
// fully differentiable through dynamics, rewards, values and action
// sampling. Each particle rolls out from its own posterior of the shared
// batch with common random numbers, so sigma_G reflects parameter
// disagreement only. With beta == 0 the sigma term is skipped entirely and
// the objective reduces to the ensemble mean.
template <typename S>
ActorLossResult<S> actor_loss(const Ensemble<S>& ensemble,
                              const std::vector<LatentState<S>>& starts,
                              const ActionModel<S>& policy, S beta, int horizon,
                              S gamma, S lambda, Rng& rng,
                              S curiosity_weight = S(0)) {
  const int M = ensemble.size();
  if (M < 1) throw std::invalid_argument("actor_loss: empty ensemble");
  if (int(starts.size()) != M)
    throw std::invalid_argument("actor_loss: need one start-state batch per particle");

  std::vector<nn::Tensor<S>> particle_returns;
  particle_returns.reserve(std::size_t(M));
  // One fresh noise stream per call, replayed for every particle (common
  // random numbers): sigma_G then measures parameter disagreement only.
  Rng common(rng.raw());
  for (int i = 0; i < M; ++i) {
    Rng noise = common;
    auto act = [&](const LatentState<S>& s) {
      auto d = policy.dist(s.feature());
      return squash(policy.sample_pre_tanh(d, noise));
    };
    Rollout<S> ro = ensemble.imagine_rollout(i, starts[std::size_t(i)], act, horizon,
                                             noise, true);
    if (curiosity_weight != S(0)) {
      for (std::size_t t = 0; t < ro.rewards.size(); ++t) {
        auto bonus = curiosity_bonus(ensemble, ro.states[t], ro.actions[t]);
        ro.rewards[t] = nn::add(ro.rewards[t], nn::scale(bonus, curiosity_weight));
      }
    }
    std::vector<nn::Tensor<S>> values;
    values.reserve(ro.states.size());
    for (const auto& s : ro.states) values.push_back(ensemble.predict_value(i, s));
    auto lam = lambda_return_graph(ro.rewards, values, gamma, lambda);
    nn::Tensor<S> g;
    for (const auto& l : lam) g = g.defined() ? nn::add(g, l) : l;
    particle_returns.push_back(g);
  }

  nn::Tensor<S> sum;
  for (const auto& g : particle_returns) sum = sum.defined() ? nn::add(sum, g) : g;
  auto mu = nn::scale(sum, S(1) / S(M));

  nn::Tensor<S> objective = mu;
  if (beta != S(0)) {
    nn::Tensor<S> var_sum;
    for (const auto& g : particle_returns) {
      auto sq = nn::square(nn::sub(g, mu));
      var_sum = var_sum.defined() ? nn::add(var_sum, sq) : sq;
    }
    auto sigma = nn::sqrt_guarded(nn::scale(var_sum, S(1) / S(M)));
    objective = nn::add(mu, nn::scale(sigma, beta));
  }

  ActorLossResult<S> out;
  out.loss = nn::neg(nn::mean(objective));

  // Diagnostics computed the same way in every mode.
  {
    nn::NoGradScope<S> ng;
    const Eigen::Index R = particle_returns[0].rows();
    nn::Mat<S> gs(R, M);
    for (int i = 0; i < M; ++i) gs.col(i) = particle_returns[std::size_t(i)].value();
    nn::Mat<S> mu_d = gs.rowwise().mean();
    double sig_acc = 0;
    for (Eigen::Index r = 0; r < R; ++r) {
      double var = 0;
      for (int i = 0; i < M; ++i) {
        const double d = double(gs(r, i)) - double(mu_d(r, 0));
        var += d * d;
      }
      sig_acc += std::sqrt(var / double(M));
    }
    out.mean_return = double(mu_d.mean());
    out.std_return = sig_acc / double(R);
  }
  return out;
}

// Per-particle value-head outputs at a state: B x M (column i = particle i).
template <typename S>
nn::Mat<S> ensemble_value_estimate(const Ensemble<S>& ensemble,
                                   const LatentState<S>& state) {
  nn::NoGradScope<S> ng;
  nn::Mat<S> out(state.batch(), ensemble.size());
  for (int i = 0; i < ensemble.size(); ++i)
    out.col(i) = ensemble.predict_value(i, state).value();
  return out;
}

}  // namespace love
