#include "love/agent/trainer.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "love/env/registry.hpp"
#include "love/harness/npy.hpp"
#include "love/harness/run_dir.hpp"

namespace love {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

WorldModelConfig world_model_config(const RunConfig& c, const ObservationSpec& spec,
                                    int action_dim) {
  WorldModelConfig wm;
  wm.obs = spec;
  wm.action_dim = action_dim;
  wm.deter_dim = c.deter_dim;
  wm.stoch_dim = c.stoch_dim;
  wm.units = c.units;
  wm.reward_layers = c.reward_layers;
  wm.value_layers = c.value_layers;
  wm.vector_enc_layers = c.vector_enc_layers;
  wm.vector_enc_units = c.vector_enc_units;
  wm.channel_base = c.channel_base;
  wm.std_floor = c.std_floor;
  wm.free_nats = c.free_nats;
  wm.kl_scale = c.kl_scale;
  wm.init.kernel = c.kernel_init == "variance_scaling" ? nn::KernelInit::variance_scaling
                                                       : nn::KernelInit::glorot_uniform;
  wm.init.bias = c.bias_init == "variance_scaling" ? nn::BiasInit::variance_scaling
                                                   : nn::BiasInit::zeros;
  wm.init.vs_scale = c.vs_scale;
  return wm;
}

PolicyConfig policy_config(const RunConfig& c, int action_dim) {
  PolicyConfig pc;
  pc.action_dim = action_dim;
  pc.units = c.units;
  pc.layers = c.policy_layers;
  pc.mean_scale = c.policy_mean_scale;
  pc.init_std = c.policy_init_std;
  pc.min_std = c.policy_min_std;
  pc.init.kernel = c.kernel_init == "variance_scaling" ? nn::KernelInit::variance_scaling
                                                       : nn::KernelInit::glorot_uniform;
  pc.init.bias = c.bias_init == "variance_scaling" ? nn::BiasInit::variance_scaling
                                                   : nn::BiasInit::zeros;
  pc.init.vs_scale = c.vs_scale;
  return pc;
}

}  // namespace

Trainer::Trainer(RunConfig config) : cfg_(std::move(config)), buffer_(config.buffer_capacity) {
  cfg_.validate();
  buffer_ = ReplayBuffer(cfg_.buffer_capacity);

  env::EnvOptions opts;
  opts.image_size = cfg_.image_size;
  opts.walls_file = cfg_.walls_file;
  opts.params = cfg_.env_params;
  env_ = env::action_repeat_wrap(env::make_env(cfg_.env_name, opts), cfg_.action_repeat);

  obs_spec_ = env_->observation_spec();
  if (obs_spec_.mode == ObsMode::vector) obs_spec_.embedding_dim = cfg_.vector_enc_units;
  if (obs_spec_.mode == ObsMode::image)
    obs_spec_ = ObservationSpec::image_obs(obs_spec_.height, obs_spec_.width,
                                           obs_spec_.channels, cfg_.channel_base);

  Rng root(cfg_.seed);
  Rng init_rng = root.spawn(1);
  action_stream_ = root.spawn(2);
  policy_stream_ = root.spawn(3);
  rollout_stream_ = root.spawn(4);
  misc_stream_ = root.spawn(5);
  for (int i = 0; i < cfg_.particles; ++i)
    particle_streams_.push_back(root.spawn(10 + std::uint64_t(i)));

  const auto wm_cfg = world_model_config(cfg_, obs_spec_, env_->action_dim());
  ensemble_ = Ensemble<Real>(wm_cfg, cfg_.particles, init_rng.spawn(1));

  const auto pc = policy_config(cfg_, env_->action_dim());
  const int feat = cfg_.deter_dim + cfg_.stoch_dim;
  Rng aq_rng = init_rng.spawn(2);
  aq_ = Policy<Real>{PolicyRole::acquisition, ActionModel<Real>(aq_rng, feat, pc)};
  Rng ev_rng = init_rng.spawn(3);
  ev_ = Policy<Real>{PolicyRole::evaluation, ActionModel<Real>(ev_rng, feat, pc)};

  for (int i = 0; i < cfg_.particles; ++i) {
    model_opts_.emplace_back(ensemble_.model_params(i), Real(cfg_.model_lr),
                             Real(cfg_.grad_clip));
    value_opts_.emplace_back(ensemble_.value_params(i), Real(cfg_.value_lr),
                             Real(cfg_.grad_clip));
  }
  nn::ParamList<Real> aq_params, ev_params;
  aq_.net.collect(aq_params, "aq");
  ev_.net.collect(ev_params, "ev");
  aq_opt_ = nn::Adam<Real>(aq_params, Real(cfg_.policy_lr), Real(cfg_.grad_clip));
  ev_opt_ = nn::Adam<Real>(ev_params, Real(cfg_.policy_lr), Real(cfg_.grad_clip));
}

double Trainer::current_beta(int episode) const {
  BetaSchedule<double> s;
  s.beta_initial = cfg_.beta_initial;
  s.additive_delta = cfg_.beta_delta;
  s.multiplicative_factor = cfg_.beta_factor;
  s.mode = cfg_.beta_mode == "multiplicative" ? BetaMode::multiplicative : BetaMode::linear;
  return beta_at(s, episode);
}

Eigen::VectorXd Trainer::act_online(const LatentState<Real>& state, bool random_actions) {
  const int na = env_->action_dim();
  Eigen::VectorXd action(na);
  if (random_actions) {
    for (int i = 0; i < na; ++i) action[i] = action_stream_.uniform(-1.0, 1.0);
    return action;
  }
  // No additive exploration noise: the policy's own stochasticity is the
  // only randomness. With interleave_prob > 0 an evaluation-policy action is
  // drawn with that probability.
  const ActionModel<Real>* model = &aq_.net;
  if (cfg_.interleave_prob > 0 &&
      action_stream_.uniform() < cfg_.interleave_prob) {
    model = &ev_.net;
  }
  auto a = sample_action(*model, state, action_stream_, false);
  for (int i = 0; i < na; ++i) action[i] = double(a.value()(0, i));
  return action;
}

EpisodeRecord Trainer::collect_episode(bool random_actions) {
  nn::NoGradScope<Real> ng;
  const int N = cfg_.stored_steps_per_episode();
  const int na = env_->action_dim();

  if (cfg_.online_filter == "random")
    online_particle_ = int(misc_stream_.uniform_int(std::uint64_t(cfg_.particles)));
  else
    online_particle_ = 0;

  auto first = env_->reset();
  const int state_dim = int(first.true_state.size());

  EpisodeRecord ep;
  ep.obs.resize(N + 1, obs_spec_.flat_dim());
  ep.actions = Eigen::MatrixXf::Zero(N + 1, na);
  ep.rewards = Eigen::VectorXf::Zero(N + 1);
  ep.true_state.resize(N + 1, state_dim);

  ep.obs.row(0) = first.observation.transpose();
  for (int d = 0; d < state_dim; ++d) ep.true_state(0, d) = first.true_state[std::size_t(d)];

  // Posterior for row 0: prior from the initial state under a zero action.
  auto obs_t = nn::Tensor<Real>::constant(Eigen::MatrixXf(first.observation.transpose()));
  auto zero_action = nn::Tensor<Real>::constant(Eigen::MatrixXf::Zero(1, na));
  LatentState<Real> state = LatentState<Real>::initial(1, cfg_.deter_dim, cfg_.stoch_dim);
  {
    auto prior = ensemble_.imagine_step(online_particle_, state, zero_action,
                                        action_stream_, true);
    state = ensemble_.observe_step(online_particle_, prior, ensemble_.encode(obs_t),
                                   action_stream_, true);
  }

  for (int k = 1; k <= N; ++k) {
    const Eigen::VectorXd action = act_online(state, random_actions);
    auto result = env_->step(action);

    ep.obs.row(k) = result.observation.transpose();
    for (int i = 0; i < na; ++i) ep.actions(k, i) = float(action[i]);
    ep.rewards(k) = float(result.reward);
    for (int d = 0; d < state_dim; ++d)
      ep.true_state(k, d) = result.true_state[std::size_t(d)];

    auto act_t = nn::Tensor<Real>::constant(Eigen::MatrixXf(ep.actions.row(k)));
    auto next_obs = nn::Tensor<Real>::constant(Eigen::MatrixXf(result.observation.transpose()));
    auto prior = ensemble_.imagine_step(online_particle_, state, act_t, action_stream_, true);
    state = ensemble_.observe_step(online_particle_, prior, ensemble_.encode(next_obs),
                                   action_stream_, true);
  }
  return ep;
}

std::vector<LatentState<Real>> Trainer::filter_batch(int particle,
                                                     const SequenceBatch<Real>& batch,
                                                     Rng& rng) {
  std::vector<nn::Tensor<Real>> embeds, actions;
  embeds.reserve(batch.length());
  actions.reserve(batch.length());
  for (std::size_t k = 0; k < batch.length(); ++k) {
    embeds.push_back(ensemble_.encode(nn::Tensor<Real>::constant(batch.obs[k])));
    actions.push_back(nn::Tensor<Real>::constant(batch.actions[k]));
  }
  auto initial = LatentState<Real>::initial(batch.batch(), cfg_.deter_dim, cfg_.stoch_dim);
  auto [posts, priors] = ensemble_.filter_sequence(particle, embeds, actions, initial,
                                                   rng, true);
  (void)priors;
  return posts;
}

LatentState<Real> Trainer::gather_starts(const std::vector<LatentState<Real>>& posts) {
  LatentState<Real> all = flatten_detached(posts);
  const int cap = cfg_.imagination_starts;
  if (cap <= 0 || all.batch() <= cap) return all;
  // Deterministic stride subsample, identical across particles.
  const Eigen::Index total = all.batch();
  auto pick = [&](const nn::Tensor<Real>& t) {
    Eigen::MatrixXf m(cap, t.cols());
    for (int j = 0; j < cap; ++j)
      m.row(j) = t.value().row(Eigen::Index(j) * total / cap);
    return nn::Tensor<Real>::constant(std::move(m));
  };
  LatentState<Real> out;
  out.deter = pick(all.deter);
  out.stoch_mean = pick(all.stoch_mean);
  out.stoch_std = pick(all.stoch_std);
  out.stoch_sample = pick(all.stoch_sample);
  return out;
}

ParticleLossRecord Trainer::train_particle(int i) {
  if (buffer_.size() == 0) throw std::runtime_error("train_particle: buffer is empty");
  Rng& stream = particle_streams_.at(std::size_t(i));
  const auto batch = buffer_.sample(cfg_.batch_size, cfg_.seq_len, stream);

  ParticleLossRecord rec;

  // Value targets from an acquisition-policy rollout at the pre-update
  // parameters, as in the algorithm's update ordering.
  std::vector<nn::Mat<Real>> targets;
  Rollout<Real> target_rollout;
  {
    nn::NoGradScope<Real> ng;
    auto posts = filter_batch(i, batch, stream);
    auto starts = gather_starts(posts);
    auto act = [&](const LatentState<Real>& s) {
      auto d = aq_.net.dist(s.feature());
      return squash(aq_.net.sample_pre_tanh(d, stream));
    };
    target_rollout = ensemble_.imagine_rollout(i, starts, act, cfg_.horizon, stream, true);
    targets = build_value_targets(ensemble_, i, target_rollout, Real(cfg_.discount),
                                  Real(cfg_.lambda));
  }

  // Representation step on this particle plus the shared encoder/decoder.
  {
    model_opts_[std::size_t(i)].zero_grad();
    nn::GradTape<Real> tape;
    auto loss = ensemble_.representation_loss(i, batch, stream);
    tape.backward(loss.total);
    model_opts_[std::size_t(i)].step();
    rec.model_total = double(loss.total.item());
    rec.reconstruction = loss.reconstruction_nll;
    rec.reward = loss.reward_nll;
    rec.kl = loss.kl;
  }

  // Critic regression on detached lambda-targets.
  {
    value_opts_[std::size_t(i)].zero_grad();
    nn::GradTape<Real> tape;
    auto loss = critic_loss(ensemble_, i, target_rollout.states, targets);
    tape.backward(loss);
    value_opts_[std::size_t(i)].step();
    rec.value = double(loss.item());
  }
  return rec;
}

PolicyLossRecord Trainer::train_policies(double beta) {
  if (buffer_.size() == 0) throw std::runtime_error("train_policies: buffer is empty");
  const auto batch = buffer_.sample(cfg_.batch_size, cfg_.seq_len, policy_stream_);

  // Every particle filters the same sequences; the filtering noise is also
  // shared so start states differ only through model parameters.
  std::vector<LatentState<Real>> starts;
  {
    nn::NoGradScope<Real> ng;
    Rng filter_noise(policy_stream_.raw());
    for (int i = 0; i < cfg_.particles; ++i) {
      Rng noise = filter_noise;
      auto posts = filter_batch(i, batch, noise);
      starts.push_back(gather_starts(posts));
    }
  }

  const Real curiosity =
      cfg_.mode == AgentMode::dreamer_curious ? Real(cfg_.curiosity_weight) : Real(0);

  PolicyLossRecord rec;
  {
    aq_opt_.zero_grad();
    nn::GradTape<Real> tape;
    auto res = actor_loss(ensemble_, starts, aq_.net, Real(beta), cfg_.horizon,
                          Real(cfg_.discount), Real(cfg_.lambda), rollout_stream_,
                          curiosity);
    tape.backward(res.loss);
    aq_opt_.step();
    rec.actor_aq = double(res.loss.item());
    rec.imagined_mean = res.mean_return;
    rec.imagined_std = res.std_return;
  }
  {
    ev_opt_.zero_grad();
    nn::GradTape<Real> tape;
    auto res = actor_loss(ensemble_, starts, ev_.net, Real(0), cfg_.horizon,
                          Real(cfg_.discount), Real(cfg_.lambda), rollout_stream_,
                          curiosity);
    tape.backward(res.loss);
    ev_opt_.step();
    rec.actor_ev = double(res.loss.item());
  }
  return rec;
}

std::vector<double> Trainer::evaluate(int episodes) {
  nn::NoGradScope<Real> ng;
  std::vector<double> returns;
  Rng eval_rng = misc_stream_.spawn(77);
  const int N = cfg_.stored_steps_per_episode();
  const int na = env_->action_dim();
  for (int e = 0; e < episodes; ++e) {
    auto first = env_->reset();
    LatentState<Real> state = LatentState<Real>::initial(1, cfg_.deter_dim, cfg_.stoch_dim);
    auto zero_action = nn::Tensor<Real>::constant(Eigen::MatrixXf::Zero(1, na));
    {
      auto obs_t = nn::Tensor<Real>::constant(Eigen::MatrixXf(first.observation.transpose()));
      auto prior = ensemble_.imagine_step(0, state, zero_action, eval_rng, false);
      state = ensemble_.observe_step(0, prior, ensemble_.encode(obs_t), eval_rng, false);
    }
    double total = 0;
    Eigen::MatrixXf last_action = Eigen::MatrixXf::Zero(1, na);
    for (int k = 1; k <= N; ++k) {
      auto a = sample_action(ev_.net, state, eval_rng, true);
      Eigen::VectorXd action(na);
      for (int i = 0; i < na; ++i) action[i] = double(a.value()(0, i));
      auto result = env_->step(action);
      total += result.reward;
      last_action = a.value();
      auto act_t = nn::Tensor<Real>::constant(last_action);
      auto obs_t = nn::Tensor<Real>::constant(Eigen::MatrixXf(result.observation.transpose()));
      auto prior = ensemble_.imagine_step(0, state, act_t, eval_rng, false);
      state = ensemble_.observe_step(0, prior, ensemble_.encode(obs_t), eval_rng, false);
    }
    returns.push_back(total);
  }
  return returns;
}

nn::ParamList<Real> Trainer::checkpoint_params() {
  nn::ParamList<Real> params = ensemble_.all_params();
  aq_.net.collect(params, "aq");
  ev_.net.collect(params, "ev");
  return params;
}

void Trainer::save_to(const std::string& path, long episode) {
  CheckpointMeta meta;
  meta.config_hash = cfg_.hash();
  meta.episode = episode;
  meta.rng_states = {action_stream_.serialize(), policy_stream_.serialize(),
                     rollout_stream_.serialize(), misc_stream_.serialize()};
  for (const auto& s : particle_streams_) meta.rng_states.push_back(s.serialize());
  auto params = checkpoint_params();
  save_checkpoint(path, params, meta);
}

CheckpointMeta Trainer::load_from(const std::string& path) {
  auto params = checkpoint_params();
  CheckpointMeta meta = load_checkpoint(path, params);
  if (meta.rng_states.size() >= 4 + std::size_t(cfg_.particles)) {
    action_stream_ = Rng::deserialize(meta.rng_states[0]);
    policy_stream_ = Rng::deserialize(meta.rng_states[1]);
    rollout_stream_ = Rng::deserialize(meta.rng_states[2]);
    misc_stream_ = Rng::deserialize(meta.rng_states[3]);
    for (int i = 0; i < cfg_.particles; ++i)
      particle_streams_[std::size_t(i)] = Rng::deserialize(meta.rng_states[4 + std::size_t(i)]);
  }
  return meta;
}

std::string Trainer::metrics_header(int particles) {
  std::string h = "episode,env_steps,beta";
  for (int i = 0; i < particles; ++i) {
    h += ",model_loss_" + std::to_string(i);
    h += ",value_loss_" + std::to_string(i);
  }
  h += ",actor_aq_loss,actor_ev_loss,imagined_return_mean,imagined_return_std,episode_return";
  return h;
}

std::string Trainer::metrics_row(const EpisodeMetrics& m) {
  std::string row = std::to_string(m.episode) + "," + std::to_string(m.env_steps) + "," +
                    fmt(m.beta);
  for (const auto& p : m.particles) {
    row += "," + fmt(p.model_total);
    row += "," + fmt(p.value);
  }
  row += "," + fmt(m.policy.actor_aq) + "," + fmt(m.policy.actor_ev) + "," +
         fmt(m.policy.imagined_mean) + "," + fmt(m.policy.imagined_std) + "," +
         fmt(m.episode_return);
  return row;
}

void Trainer::run() {
  ensure_dir(cfg_.out_dir);
  ensure_dir(cfg_.out_dir + "/episodes");
  ensure_dir(cfg_.out_dir + "/checkpoints");
  ensure_dir(cfg_.out_dir + "/plots");
  cfg_.to_kv().save(cfg_.out_dir + "/config.toml");

  std::ofstream metrics(cfg_.out_dir + "/metrics.csv");
  if (!metrics) throw std::runtime_error("cannot write metrics.csv");
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(cfg_.hash()));
  metrics << "# love-metrics v1\n# config_hash " << hash_hex << "\n"
          << metrics_header(cfg_.particles) << "\n";

  try {
    for (int ep = 0; ep < cfg_.episodes; ++ep) {
      const double beta = current_beta(ep);
      const bool random_phase = ep < cfg_.seed_episodes;

      EpisodeRecord record = collect_episode(random_phase);
      const double ep_return = record.episode_return();

      // Episode log.
      {
        char name[32];
        std::snprintf(name, sizeof(name), "ep_%05d", ep);
        const std::string dir = cfg_.out_dir + "/episodes/" + name;
        ensure_dir(dir);
        save_npy(dir + "/obs.npy", record.obs);
        save_npy(dir + "/actions.npy", record.actions);
        save_npy(dir + "/rewards.npy", Eigen::MatrixXf(record.rewards));
        save_npy(dir + "/true_state.npy", record.true_state);
      }
      buffer_.add(std::move(record));

      EpisodeMetrics m;
      m.episode = ep;
      m.env_steps = long(ep + 1) * cfg_.episode_steps;
      m.beta = beta;
      m.episode_return = ep_return;
      m.particles.assign(std::size_t(cfg_.particles), ParticleLossRecord{});

      if (!random_phase) {
        for (int s = 0; s < cfg_.train_steps; ++s) {
          for (int i = 0; i < cfg_.particles; ++i) {
            auto rec = train_particle(i);
            auto& agg = m.particles[std::size_t(i)];
            agg.model_total += rec.model_total / cfg_.train_steps;
            agg.reconstruction += rec.reconstruction / cfg_.train_steps;
            agg.reward += rec.reward / cfg_.train_steps;
            agg.kl += rec.kl / cfg_.train_steps;
            agg.value += rec.value / cfg_.train_steps;
          }
          auto pol = train_policies(beta);
          m.policy.actor_aq += pol.actor_aq / cfg_.train_steps;
          m.policy.actor_ev += pol.actor_ev / cfg_.train_steps;
          m.policy.imagined_mean += pol.imagined_mean / cfg_.train_steps;
          m.policy.imagined_std += pol.imagined_std / cfg_.train_steps;
        }
      }

      metrics << metrics_row(m) << "\n";
      metrics.flush();

      if (cfg_.checkpoint_every > 0 && (ep + 1) % cfg_.checkpoint_every == 0) {
        char name[48];
        std::snprintf(name, sizeof(name), "checkpoints/ep_%05d.ckpt", ep);
        save_to(cfg_.out_dir + "/" + name, ep);
        save_to(cfg_.out_dir + "/checkpoints/latest.ckpt", ep);
      }
    }
    save_to(cfg_.out_dir + "/checkpoints/latest.ckpt", cfg_.episodes - 1);
  } catch (const std::exception& e) {
    write_text_file(cfg_.out_dir + "/ABORTED.txt", e.what());
    throw;
  }
}

void run_experiment(const RunConfig& config) {
  Trainer trainer(config);
  trainer.run();
}

}  // namespace love
