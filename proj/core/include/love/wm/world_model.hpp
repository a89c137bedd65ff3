#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "love/nn/adam.hpp"
#include "love/nn/conv.hpp"
#include "love/nn/layers.hpp"
#include "love/nn/tensor.hpp"
#include "love/obs_spec.hpp"
#include "love/rng.hpp"

// Shared encoder/decoder plus per-particle recurrent state-space transition,
// reward and value heads. Each particle is an independent hypothesis on
// environment behavior; all particles operate in the one latent space defined
// by the shared encoder.

namespace love {

struct WorldModelConfig {
  ObservationSpec obs;
  int action_dim = 1;
  int deter_dim = 200;   // recurrent component
  int stoch_dim = 30;    // diagonal-Gaussian component
  int units = 400;       // reward/value/action hidden width
  int reward_layers = 2;
  int value_layers = 3;
  int vector_enc_layers = 2;
  int vector_enc_units = 256;
  int channel_base = 32;
  double std_floor = 1e-4;
  double free_nats = 3.0;
  double kl_scale = 1.0;
  nn::InitSpec init;
};

template <typename S>
struct LatentState {
  nn::Tensor<S> deter;        // B x deter_dim
  nn::Tensor<S> stoch_mean;   // B x stoch_dim
  nn::Tensor<S> stoch_std;    // B x stoch_dim, strictly positive
  nn::Tensor<S> stoch_sample; // B x stoch_dim

  Eigen::Index batch() const { return deter.rows(); }

  nn::Tensor<S> feature() const { return nn::concat_cols(deter, stoch_sample); }

  static LatentState initial(Eigen::Index batch, int deter_dim, int stoch_dim) {
    LatentState s;
    s.deter = nn::Tensor<S>::constant(nn::Mat<S>::Zero(batch, deter_dim));
    s.stoch_mean = nn::Tensor<S>::constant(nn::Mat<S>::Zero(batch, stoch_dim));
    s.stoch_std = nn::Tensor<S>::constant(nn::Mat<S>::Ones(batch, stoch_dim));
    s.stoch_sample = nn::Tensor<S>::constant(nn::Mat<S>::Zero(batch, stoch_dim));
    return s;
  }

  // Value-only copy with no graph attached.
  LatentState detached() const {
    LatentState s;
    s.deter = nn::detach(deter);
    s.stoch_mean = nn::detach(stoch_mean);
    s.stoch_std = nn::detach(stoch_std);
    s.stoch_sample = nn::detach(stoch_sample);
    return s;
  }
};

// Stack several states (e.g. the posteriors of a filtered batch) into one
// batch of start states, cut off from the upstream graph.
template <typename S>
LatentState<S> flatten_detached(const std::vector<LatentState<S>>& states) {
  if (states.empty()) throw std::invalid_argument("flatten_detached: empty");
  Eigen::Index rows = 0;
  for (const auto& s : states) rows += s.batch();
  auto stack = [&](auto getter) {
    nn::Mat<S> m(rows, getter(states[0]).cols());
    Eigen::Index r = 0;
    for (const auto& s : states) {
      m.middleRows(r, s.batch()) = getter(s).value();
      r += s.batch();
    }
    return nn::Tensor<S>::constant(std::move(m));
  };
  LatentState<S> out;
  out.deter = stack([](const LatentState<S>& s) -> const nn::Tensor<S>& { return s.deter; });
  out.stoch_mean = stack([](const LatentState<S>& s) -> const nn::Tensor<S>& { return s.stoch_mean; });
  out.stoch_std = stack([](const LatentState<S>& s) -> const nn::Tensor<S>& { return s.stoch_std; });
  out.stoch_sample = stack([](const LatentState<S>& s) -> const nn::Tensor<S>& { return s.stoch_sample; });
  return out;
}

// Training subsequences in step-major layout: obs[k] holds the k-th
// observation of every sequence in the batch, actions[k] the action that led
// into it, rewards[k] the reward collected on that transition (zero at k=0
// when the window starts an episode).
template <typename S>
struct SequenceBatch {
  std::vector<nn::Mat<S>> obs;      // L entries, B x obs_flat
  std::vector<nn::Mat<S>> actions;  // L entries, B x action_dim
  std::vector<nn::Mat<S>> rewards;  // L entries, B x 1

  std::size_t length() const { return obs.size(); }
  Eigen::Index batch() const { return obs.empty() ? 0 : obs[0].rows(); }
};

template <typename S>
class Encoder {
 public:
  Encoder() = default;
  Encoder(Rng& rng, const WorldModelConfig& cfg) : spec_(cfg.obs) {
    if (spec_.mode == ObsMode::image) {
      for (const auto& g : encoder_chain(spec_.height, spec_.width, spec_.channels,
                                         cfg.channel_base))
        conv_.emplace_back(rng, g, nn::Act::relu, cfg.init);
    } else {
      int d = spec_.dim;
      for (int i = 0; i < cfg.vector_enc_layers; ++i) {
        dense_.emplace_back(rng, d, cfg.vector_enc_units, nn::Act::elu, cfg.init);
        d = cfg.vector_enc_units;
      }
    }
  }

  // Pixels arrive in [0, 1] and are shifted to [-0.5, 0.5] before the stack.
  nn::Tensor<S> operator()(const nn::Tensor<S>& obs) const {
    if (obs.cols() != spec_.flat_dim())
      throw std::invalid_argument("encode: observation shape mismatch");
    if (spec_.mode == ObsMode::image) {
      auto x = nn::add_scalar(obs, S(-0.5));
      for (const auto& l : conv_) x = l(x);
      return x;
    }
    auto x = obs;
    for (const auto& l : dense_) x = l(x);
    return x;
  }

  void collect(nn::ParamList<S>& out) const {
    for (std::size_t i = 0; i < conv_.size(); ++i)
      conv_[i].collect(out, "enc/conv" + std::to_string(i));
    for (std::size_t i = 0; i < dense_.size(); ++i)
      dense_[i].collect(out, "enc/dense" + std::to_string(i));
  }

 private:
  ObservationSpec spec_;
  std::vector<nn::Conv2dLayer<S>> conv_;
  std::vector<nn::Dense<S>> dense_;
};

template <typename S>
class Decoder {
 public:
  Decoder() = default;
  Decoder(Rng& rng, const WorldModelConfig& cfg) : spec_(cfg.obs) {
    const int feat = cfg.deter_dim + cfg.stoch_dim;
    if (spec_.mode == ObsMode::vector) {
      int d = feat;
      for (int i = 0; i < cfg.vector_enc_layers; ++i) {
        dense_.emplace_back(rng, d, cfg.vector_enc_units, nn::Act::elu, cfg.init);
        d = cfg.vector_enc_units;
      }
      dense_.emplace_back(rng, d, spec_.dim, nn::Act::none, cfg.init);
      return;
    }
    const int base = cfg.channel_base;
    if (spec_.height == 64 && spec_.width == 64) {
      // Reference chain: dense to 1x1x(32*base), then 5/5/6/6 kernels.
      start_h_ = start_w_ = 1;
      start_c_ = 32 * base;
      struct Step { int out, k, ch; };
      const Step steps[] = {{5, 5, 4 * base}, {13, 5, 2 * base}, {30, 6, base},
                            {64, 6, spec_.channels}};
      int in = 1, in_c = start_c_;
      for (const auto& st : steps) {
        nn::ConvGeom g;
        g.in_h = g.in_w = in; g.in_c = in_c;
        g.kernel = st.k; g.stride = 2;
        g.out_h = g.out_w = st.out; g.out_c = st.ch;
        const bool last = (st.out == 64);
        deconv_.emplace_back(rng, g, last ? nn::Act::none : nn::Act::relu, cfg.init);
        in = st.out; in_c = st.ch;
      }
    } else {
      // Mirror the encoder's spatial sizes; kernels land in {4, 5}.
      auto chain = encoder_chain(spec_.height, spec_.width, spec_.channels, base);
      start_h_ = chain.back().out_h;
      start_w_ = chain.back().out_w;
      start_c_ = chain.back().out_c;
      for (std::size_t i = chain.size(); i-- > 0;) {
        const auto& e = chain[i];
        nn::ConvGeom g;
        g.in_h = e.out_h; g.in_w = e.out_w; g.in_c = e.out_c;
        g.kernel = e.in_h - 2 * (e.out_h - 1);
        g.stride = 2;
        g.out_h = e.in_h; g.out_w = e.in_w; g.out_c = e.in_c;
        const bool last = (i == 0);
        deconv_.emplace_back(rng, g, last ? nn::Act::none : nn::Act::relu, cfg.init);
      }
    }
    dense_.emplace_back(rng, feat, start_h_ * start_w_ * start_c_, nn::Act::none,
                        cfg.init);
  }

  // Returns the reconstruction mean in model space: for images this is the
  // [-0.5, 0.5] pixel range, for vectors the observation itself.
  nn::Tensor<S> mean(const nn::Tensor<S>& features) const {
    if (spec_.mode == ObsMode::vector) {
      auto x = features;
      for (const auto& l : dense_) x = l(x);
      return x;
    }
    auto x = dense_.back()(features);
    for (const auto& l : deconv_) x = l(x);
    return x;
  }

  void collect(nn::ParamList<S>& out) const {
    for (std::size_t i = 0; i < dense_.size(); ++i)
      dense_[i].collect(out, "dec/dense" + std::to_string(i));
    for (std::size_t i = 0; i < deconv_.size(); ++i)
      deconv_[i].collect(out, "dec/deconv" + std::to_string(i));
  }

 private:
  ObservationSpec spec_;
  std::vector<nn::Dense<S>> dense_;
  std::vector<nn::Deconv2dLayer<S>> deconv_;
  int start_h_ = 0, start_w_ = 0, start_c_ = 0;
};

// One ensemble member: transition + reward + value parameters. The encoder
// and decoder are owned by the Ensemble and shared by reference.
template <typename S>
class Particle {
 public:
  Particle() = default;
  Particle(Rng& rng, const WorldModelConfig& cfg, int id) : id_(id) {
    const int feat = cfg.deter_dim + cfg.stoch_dim;
    pre_gru_ = nn::Dense<S>(rng, cfg.stoch_dim + cfg.action_dim, cfg.deter_dim,
                            nn::Act::elu, cfg.init);
    gru_ = nn::GruCell<S>(rng, cfg.deter_dim, cfg.deter_dim, cfg.init);
    prior_hidden_ = nn::Dense<S>(rng, cfg.deter_dim, cfg.deter_dim, nn::Act::elu, cfg.init);
    prior_out_ = nn::Dense<S>(rng, cfg.deter_dim, 2 * cfg.stoch_dim, nn::Act::none, cfg.init);
    post_hidden_ = nn::Dense<S>(rng, cfg.deter_dim + cfg.obs.embedding_dim,
                                cfg.deter_dim, nn::Act::elu, cfg.init);
    post_out_ = nn::Dense<S>(rng, cfg.deter_dim, 2 * cfg.stoch_dim, nn::Act::none, cfg.init);
    reward_ = nn::Mlp<S>(rng, feat, cfg.units, cfg.reward_layers, 1, nn::Act::elu, cfg.init);
    value_ = nn::Mlp<S>(rng, feat, cfg.units, cfg.value_layers, 1, nn::Act::elu, cfg.init);
  }

  int id() const { return id_; }

  const nn::Dense<S>& pre_gru() const { return pre_gru_; }
  const nn::GruCell<S>& gru() const { return gru_; }
  const nn::Dense<S>& prior_hidden() const { return prior_hidden_; }
  const nn::Dense<S>& prior_out() const { return prior_out_; }
  const nn::Dense<S>& post_hidden() const { return post_hidden_; }
  const nn::Dense<S>& post_out() const { return post_out_; }
  const nn::Mlp<S>& reward_head() const { return reward_; }
  const nn::Mlp<S>& value_head() const { return value_; }

  void collect_transition(nn::ParamList<S>& out, const std::string& prefix) const {
    pre_gru_.collect(out, prefix + "/pre_gru");
    gru_.collect(out, prefix + "/gru");
    prior_hidden_.collect(out, prefix + "/prior_hidden");
    prior_out_.collect(out, prefix + "/prior_out");
    post_hidden_.collect(out, prefix + "/post_hidden");
    post_out_.collect(out, prefix + "/post_out");
  }
  void collect_reward(nn::ParamList<S>& out, const std::string& prefix) const {
    reward_.collect(out, prefix + "/reward");
  }
  void collect_value(nn::ParamList<S>& out, const std::string& prefix) const {
    value_.collect(out, prefix + "/value");
  }

 private:
  int id_ = 0;
  nn::Dense<S> pre_gru_;
  nn::GruCell<S> gru_;
  nn::Dense<S> prior_hidden_, prior_out_;
  nn::Dense<S> post_hidden_, post_out_;
  nn::Mlp<S> reward_, value_;
};

template <typename S>
struct RepresentationLoss {
  nn::Tensor<S> total;
  double reconstruction_nll = 0;
  double reward_nll = 0;
  double kl = 0;  // raw KL before the free-nats floor
};

template <typename S>
struct Rollout {
  std::vector<LatentState<S>> states;  // H+1 entries
  std::vector<nn::Tensor<S>> rewards;  // H entries; rewards[t] steps t -> t+1
  std::vector<nn::Tensor<S>> actions;  // H entries
};

// Unit-variance Gaussian negative log-likelihood of `target` under `mean`,
// summed over dimensions: B x 1.
template <typename S>
nn::Tensor<S> unit_gaussian_nll(const nn::Tensor<S>& mean, const nn::Mat<S>& target) {
  const S half_log_2pi = S(0.5 * std::log(2.0 * 3.14159265358979323846));
  auto err = nn::sub(mean, nn::Tensor<S>::constant(target));
  return nn::add_scalar(nn::scale(nn::rowwise_sum(nn::square(err)), S(0.5)),
                        S(mean.cols()) * half_log_2pi);
}

// Diagonal-Gaussian KL(q || p), summed over dimensions: B x 1.
template <typename S>
nn::Tensor<S> gaussian_kl(const nn::Tensor<S>& mean_q, const nn::Tensor<S>& std_q,
                          const nn::Tensor<S>& mean_p, const nn::Tensor<S>& std_p) {
  auto log_ratio = nn::log(nn::div(std_p, std_q));
  auto var_p2 = nn::scale(nn::square(std_p), S(2));
  auto num = nn::add(nn::square(std_q), nn::square(nn::sub(mean_q, mean_p)));
  auto per_dim = nn::add_scalar(nn::add(log_ratio, nn::div(num, var_p2)), S(-0.5));
  return nn::rowwise_sum(per_dim);
}

template <typename S>
class Ensemble {
 public:
  Ensemble() = default;

  Ensemble(const WorldModelConfig& cfg, int n_particles, Rng init_rng)
      : cfg_(cfg) {
    cfg_.obs.validate();
    if (n_particles < 1) throw std::invalid_argument("ensemble: need >= 1 particle");
    Rng enc_rng = init_rng.spawn(1);
    encoder_ = Encoder<S>(enc_rng, cfg_);
    Rng dec_rng = init_rng.spawn(2);
    decoder_ = Decoder<S>(dec_rng, cfg_);
    for (int i = 0; i < n_particles; ++i) {
      Rng p_rng = init_rng.spawn(100 + std::uint64_t(i));
      particles_.emplace_back(p_rng, cfg_, i);
    }
  }

  const WorldModelConfig& config() const { return cfg_; }
  int size() const { return int(particles_.size()); }
  const Particle<S>& particle(int i) const { return particles_.at(std::size_t(i)); }

  nn::Tensor<S> encode(const nn::Tensor<S>& obs) const { return encoder_(obs); }

  // Reconstruction in observation units (pixels back in [0, 1]).
  nn::Tensor<S> decode(const LatentState<S>& state) const {
    auto m = decoder_.mean(state.feature());
    if (cfg_.obs.mode == ObsMode::image) return nn::add_scalar(m, S(0.5));
    return m;
  }

  nn::Tensor<S> decode_mean_model_space(const nn::Tensor<S>& features) const {
    return decoder_.mean(features);
  }

  // One prior step of particle i's transition model.
  LatentState<S> imagine_step(int i, const LatentState<S>& state,
                              const nn::Tensor<S>& action, Rng& rng,
                              bool sample = true) const {
    check_finite(state.deter, "imagine_step state");
    check_finite(action, "imagine_step action");
    const auto& p = particles_.at(std::size_t(i));
    auto x = p.pre_gru()(nn::concat_cols(state.stoch_sample, action));
    auto deter = p.gru()(x, state.deter);
    auto hidden = p.prior_hidden()(deter);
    auto out = p.prior_out()(hidden);
    LatentState<S> next;
    next.deter = deter;
    next.stoch_mean = nn::slice_cols(out, 0, cfg_.stoch_dim);
    next.stoch_std = make_std(nn::slice_cols(out, cfg_.stoch_dim, cfg_.stoch_dim));
    next.stoch_sample = draw(next.stoch_mean, next.stoch_std, rng, sample);
    return next;
  }

  // Posterior update: keeps the prior's deterministic component, replaces the
  // stochastic belief using the observation embedding.
  LatentState<S> observe_step(int i, const LatentState<S>& prior,
                              const nn::Tensor<S>& embedding, Rng& rng,
                              bool sample = true) const {
    check_finite(embedding, "observe_step embedding");
    const auto& p = particles_.at(std::size_t(i));
    auto hidden = p.post_hidden()(nn::concat_cols(prior.deter, embedding));
    auto out = p.post_out()(hidden);
    LatentState<S> post;
    post.deter = prior.deter;
    post.stoch_mean = nn::slice_cols(out, 0, cfg_.stoch_dim);
    post.stoch_std = make_std(nn::slice_cols(out, cfg_.stoch_dim, cfg_.stoch_dim));
    post.stoch_sample = draw(post.stoch_mean, post.stoch_std, rng, sample);
    return post;
  }

  // Alternating imagine/observe over an embedded sequence. actions[k] is the
  // action that preceded obs[k].
  std::pair<std::vector<LatentState<S>>, std::vector<LatentState<S>>> filter_sequence(
      int i, const std::vector<nn::Tensor<S>>& embeddings,
      const std::vector<nn::Tensor<S>>& actions, const LatentState<S>& initial,
      Rng& rng, bool sample = true) const {
    if (embeddings.size() != actions.size())
      throw std::invalid_argument("filter_sequence: length mismatch");
    if (embeddings.empty())
      throw std::invalid_argument("filter_sequence: empty sequence");
    std::vector<LatentState<S>> posts, priors;
    posts.reserve(embeddings.size());
    priors.reserve(embeddings.size());
    LatentState<S> state = initial;
    for (std::size_t k = 0; k < embeddings.size(); ++k) {
      LatentState<S> prior = imagine_step(i, state, actions[k], rng, sample);
      LatentState<S> post = observe_step(i, prior, embeddings[k], rng, sample);
      priors.push_back(prior);
      posts.push_back(post);
      state = post;
    }
    return {posts, priors};
  }

  nn::Tensor<S> predict_reward(int i, const LatentState<S>& state) const {
    return particles_.at(std::size_t(i)).reward_head()(state.feature());
  }

  // Prior stochastic mean of particle i's transition model for (state,
  // action), without sampling. Used by the disagreement bonus.
  nn::Tensor<S> prior_mean(int i, const LatentState<S>& state,
                           const nn::Tensor<S>& action) const {
    const auto& p = particles_.at(std::size_t(i));
    auto x = p.pre_gru()(nn::concat_cols(state.stoch_sample, action));
    auto deter = p.gru()(x, state.deter);
    auto out = p.prior_out()(p.prior_hidden()(deter));
    return nn::slice_cols(out, 0, cfg_.stoch_dim);
  }

  nn::Tensor<S> predict_value(int i, const LatentState<S>& state) const {
    return particles_.at(std::size_t(i)).value_head()(state.feature());
  }

  nn::Tensor<S> predict_value_features(int i, const nn::Tensor<S>& features) const {
    return particles_.at(std::size_t(i)).value_head()(features);
  }

  // Representation objective for particle i on a filtered batch:
  //   reconstruction NLL + reward NLL + kl_scale * max(KL - free_nats, 0),
  // averaged over batch and time. The free-nats floor applies per element.
  RepresentationLoss<S> representation_loss(int i, const SequenceBatch<S>& batch,
                                            Rng& rng) const {
    const std::size_t L = batch.length();
    if (L == 0) throw std::invalid_argument("representation_loss: empty batch");
    const Eigen::Index B = batch.batch();
    LatentState<S> state = LatentState<S>::initial(B, cfg_.deter_dim, cfg_.stoch_dim);

    nn::Tensor<S> recon_sum, reward_sum, kl_sum, kl_raw_sum;
    for (std::size_t k = 0; k < L; ++k) {
      auto action = nn::Tensor<S>::constant(batch.actions[k]);
      auto embed = encoder_(nn::Tensor<S>::constant(batch.obs[k]));
      LatentState<S> prior = imagine_step(i, state, action, rng, true);
      LatentState<S> post = observe_step(i, prior, embed, rng, true);
      state = post;

      nn::Mat<S> target_obs = batch.obs[k];
      if (cfg_.obs.mode == ObsMode::image) target_obs.array() -= S(0.5);
      auto recon_nll = unit_gaussian_nll(decoder_.mean(post.feature()), target_obs);
      auto reward_nll = unit_gaussian_nll(predict_reward(i, post), batch.rewards[k]);

      auto kl = gaussian_kl(post.stoch_mean, post.stoch_std, prior.stoch_mean,
                            prior.stoch_std);
      auto kl_clamped = nn::relu(nn::add_scalar(kl, S(-cfg_.free_nats)));

      recon_sum = acc(recon_sum, nn::sum(recon_nll));
      reward_sum = acc(reward_sum, nn::sum(reward_nll));
      kl_sum = acc(kl_sum, nn::sum(kl_clamped));
      kl_raw_sum = acc(kl_raw_sum, nn::sum(kl));
    }
    const S inv = S(1) / S(double(L) * double(batch.batch()));
    RepresentationLoss<S> out;
    auto recon_mean_all = nn::scale(recon_sum, inv);
    auto reward_mean_all = nn::scale(reward_sum, inv);
    auto kl_mean_all = nn::scale(kl_sum, S(double(cfg_.kl_scale)) * inv);
    out.total = nn::add(nn::add(recon_mean_all, reward_mean_all), kl_mean_all);
    out.reconstruction_nll = double(recon_mean_all.item());
    out.reward_nll = double(reward_mean_all.item());
    out.kl = double(kl_raw_sum.item()) * double(inv);
    return out;
  }

  // Closed-loop imagination: actions come from `policy`, rewards from this
  // particle's reward head evaluated at the arrived-at state.
  template <typename PolicyFn>
  Rollout<S> imagine_rollout(int i, const LatentState<S>& start, PolicyFn&& policy,
                             int horizon, Rng& rng, bool sample = true) const {
    if (horizon < 1) throw std::invalid_argument("imagine_rollout: horizon >= 1");
    Rollout<S> r;
    r.states.push_back(start);
    for (int t = 0; t < horizon; ++t) {
      auto action = policy(r.states.back());
      LatentState<S> next = imagine_step(i, r.states.back(), action, rng, sample);
      r.rewards.push_back(predict_reward(i, next));
      r.actions.push_back(action);
      r.states.push_back(next);
    }
    return r;
  }

  // Open-loop imagination along a fixed action sequence.
  Rollout<S> imagine_with_actions(int i, const LatentState<S>& start,
                                  const std::vector<nn::Tensor<S>>& actions, Rng& rng,
                                  bool sample = true) const {
    Rollout<S> r;
    r.states.push_back(start);
    for (const auto& action : actions) {
      LatentState<S> next = imagine_step(i, r.states.back(), action, rng, sample);
      r.rewards.push_back(predict_reward(i, next));
      r.actions.push_back(action);
      r.states.push_back(next);
    }
    return r;
  }

  // Appendix-C style open-loop prediction: filter a short context, then
  // imagine the future actions and decode per particle. Deterministic
  // (mean) latents; no graph is recorded.
  std::vector<std::vector<nn::Mat<S>>> open_loop_prediction(
      const std::vector<nn::Mat<S>>& context_obs,
      const std::vector<nn::Mat<S>>& context_actions,
      const std::vector<nn::Mat<S>>& future_actions) const {
    if (context_obs.empty()) throw std::invalid_argument("open_loop: empty context");
    if (context_obs.size() != context_actions.size())
      throw std::invalid_argument("open_loop: context length mismatch");
    nn::NoGradScope<S> ng;
    Rng rng(0);  // unused in deterministic mode
    std::vector<std::vector<nn::Mat<S>>> out;
    for (int i = 0; i < size(); ++i) {
      std::vector<nn::Tensor<S>> embeds, actions;
      for (std::size_t k = 0; k < context_obs.size(); ++k) {
        embeds.push_back(encoder_(nn::Tensor<S>::constant(context_obs[k])));
        actions.push_back(nn::Tensor<S>::constant(context_actions[k]));
      }
      auto initial = LatentState<S>::initial(context_obs[0].rows(), cfg_.deter_dim,
                                             cfg_.stoch_dim);
      auto [posts, priors] = filter_sequence(i, embeds, actions, initial, rng, false);
      LatentState<S> state = posts.back();
      std::vector<nn::Mat<S>> frames;
      for (const auto& a : future_actions) {
        state = imagine_step(i, state, nn::Tensor<S>::constant(a), rng, false);
        frames.push_back(decode(state).value());
      }
      out.push_back(std::move(frames));
    }
    return out;
  }

  // Parameter groups.
  nn::ParamList<S> encoder_decoder_params() const {
    nn::ParamList<S> out;
    encoder_.collect(out);
    decoder_.collect(out);
    return out;
  }
  nn::ParamList<S> transition_params(int i) const {
    nn::ParamList<S> out;
    particles_.at(std::size_t(i)).collect_transition(out, particle_prefix(i));
    return out;
  }
  nn::ParamList<S> model_params(int i) const {
    // Everything the representation loss trains: shared encoder/decoder plus
    // particle i's transition and reward heads.
    nn::ParamList<S> out = encoder_decoder_params();
    particles_.at(std::size_t(i)).collect_transition(out, particle_prefix(i));
    particles_.at(std::size_t(i)).collect_reward(out, particle_prefix(i));
    return out;
  }
  nn::ParamList<S> value_params(int i) const {
    nn::ParamList<S> out;
    particles_.at(std::size_t(i)).collect_value(out, particle_prefix(i));
    return out;
  }
  nn::ParamList<S> all_params() const {
    nn::ParamList<S> out = encoder_decoder_params();
    for (int i = 0; i < size(); ++i) {
      particles_[std::size_t(i)].collect_transition(out, particle_prefix(i));
      particles_[std::size_t(i)].collect_reward(out, particle_prefix(i));
      particles_[std::size_t(i)].collect_value(out, particle_prefix(i));
    }
    return out;
  }

  static std::string particle_prefix(int i) { return "p" + std::to_string(i); }

 private:
  static void check_finite(const nn::Tensor<S>& t, const char* what) {
    if (!t.value().allFinite())
      throw std::invalid_argument(std::string(what) + ": non-finite input");
  }

  nn::Tensor<S> make_std(const nn::Tensor<S>& raw) const {
    return nn::add_scalar(nn::softplus(raw), S(cfg_.std_floor));
  }

  nn::Tensor<S> draw(const nn::Tensor<S>& mean, const nn::Tensor<S>& std, Rng& rng,
                     bool sample) const {
    if (!sample) return mean;
    nn::Mat<S> eps(mean.rows(), mean.cols());
    for (Eigen::Index j = 0; j < eps.cols(); ++j)
      for (Eigen::Index i = 0; i < eps.rows(); ++i) eps(i, j) = S(rng.normal());
    return nn::add(mean, nn::mul(std, nn::Tensor<S>::constant(std::move(eps))));
  }

  static nn::Tensor<S> acc(const nn::Tensor<S>& sum, const nn::Tensor<S>& term) {
    return sum.defined() ? nn::add(sum, term) : term;
  }

  WorldModelConfig cfg_;
  Encoder<S> encoder_;
  Decoder<S> decoder_;
  std::vector<Particle<S>> particles_;
};

}  // namespace love
