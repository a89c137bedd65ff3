#include <benchmark/benchmark.h>

#include "love/policy.hpp"
#include "love/wm/world_model.hpp"

namespace {

love::WorldModelConfig desk_config() {
  love::WorldModelConfig cfg;
  cfg.obs = love::ObservationSpec::vector_obs(4, 64);
  cfg.action_dim = 2;
  cfg.deter_dim = 64;
  cfg.stoch_dim = 16;
  cfg.units = 64;
  cfg.reward_layers = 2;
  cfg.value_layers = 2;
  cfg.vector_enc_layers = 2;
  cfg.vector_enc_units = 64;
  return cfg;
}

love::SequenceBatch<float> desk_batch(const love::WorldModelConfig& cfg, int B, int L) {
  love::Rng rng(3);
  love::SequenceBatch<float> batch;
  for (int k = 0; k < L; ++k) {
    Eigen::MatrixXf obs(B, cfg.obs.dim), act(B, cfg.action_dim), rew(B, 1);
    for (Eigen::Index i = 0; i < obs.size(); ++i) obs(i) = float(rng.normal());
    for (Eigen::Index i = 0; i < act.size(); ++i) act(i) = float(rng.uniform(-1, 1));
    rew.setZero();
    batch.obs.push_back(obs);
    batch.actions.push_back(act);
    batch.rewards.push_back(rew);
  }
  return batch;
}

void BM_RepresentationLossStep(benchmark::State& state) {
  auto cfg = desk_config();
  love::Ensemble<float> ens(cfg, 1, love::Rng(4));
  auto batch = desk_batch(cfg, 8, 10);
  love::nn::Adam<float> opt(ens.model_params(0), 1e-3f);
  for (auto _ : state) {
    opt.zero_grad();
    love::nn::GradTape<float> tape;
    love::Rng noise(5);
    auto parts = ens.representation_loss(0, batch, noise);
    tape.backward(parts.total);
    opt.step();
    benchmark::DoNotOptimize(parts.reconstruction_nll);
  }
}
BENCHMARK(BM_RepresentationLossStep);

void BM_ActorLossStep(benchmark::State& state) {
  auto cfg = desk_config();
  const int particles = int(state.range(0));
  love::Ensemble<float> ens(cfg, particles, love::Rng(6));
  love::Rng init(7);
  love::PolicyConfig pc;
  pc.action_dim = cfg.action_dim;
  pc.units = 64;
  pc.layers = 2;
  love::ActionModel<float> policy(init, cfg.deter_dim + cfg.stoch_dim, pc);
  love::nn::ParamList<float> params;
  policy.collect(params, "pi");
  love::nn::Adam<float> opt(params, 1e-4f);

  std::vector<love::LatentState<float>> starts;
  love::Rng rng(8);
  for (int i = 0; i < particles; ++i) {
    auto st = love::LatentState<float>::initial(64, cfg.deter_dim, cfg.stoch_dim);
    Eigen::MatrixXf d(64, cfg.deter_dim);
    for (Eigen::Index j = 0; j < d.size(); ++j) d(j) = float(0.3 * rng.normal());
    st.deter = love::nn::Tensor<float>::constant(d);
    starts.push_back(st);
  }
  love::Rng noise(9);
  for (auto _ : state) {
    opt.zero_grad();
    love::nn::GradTape<float> tape;
    auto res = love::actor_loss(ens, starts, policy, 0.3f, 10, 0.99f, 0.95f, noise);
    tape.backward(res.loss);
    opt.step();
    benchmark::DoNotOptimize(res.mean_return);
  }
}
BENCHMARK(BM_ActorLossStep)->Arg(1)->Arg(3)->Arg(5);

}  // namespace
