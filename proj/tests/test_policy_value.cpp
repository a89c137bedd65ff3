#include <doctest.h>

#include <cmath>

#include "love/policy.hpp"
#include "love/returns.hpp"
#include "test_helpers.hpp"

namespace nn = love::nn;
using love::ActionModel;
using love::Ensemble;
using love::LatentState;
using love::PolicyConfig;

namespace {

PolicyConfig tiny_policy_config(int action_dim = 2) {
  PolicyConfig pc;
  pc.action_dim = action_dim;
  pc.units = 16;
  pc.layers = 2;
  return pc;
}

template <typename S>
LatentState<S> random_state(const love::WorldModelConfig& cfg, int batch, love::Rng& rng) {
  auto st = LatentState<S>::initial(batch, cfg.deter_dim, cfg.stoch_dim);
  nn::Mat<S> d(batch, cfg.deter_dim), m(batch, cfg.stoch_dim);
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = S(0.5 * rng.normal());
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = S(0.5 * rng.normal());
  st.deter = nn::Tensor<S>::constant(d);
  st.stoch_sample = nn::Tensor<S>::constant(m);
  st.stoch_mean = st.stoch_sample;
  return st;
}

}  // namespace

TEST_CASE("sample_action: strictly inside (-1, 1), deterministic mode repeats") {
  auto cfg = test_helpers::tiny_vector_config();
  love::Rng init(40);
  ActionModel<float> model(init, cfg.deter_dim + cfg.stoch_dim, tiny_policy_config());
  love::Rng rng(41);
  auto state = random_state<float>(cfg, 64, rng);

  love::Rng noise(42);
  auto a = love::sample_action(model, state, noise, false);
  CHECK(a.value().cwiseAbs().maxCoeff() < 1.0f);

  auto d1 = love::sample_action(model, state, noise, true);
  auto d2 = love::sample_action(model, state, noise, true);
  CHECK((d1.value() - d2.value()).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("sample_action: Monte Carlo mean approaches the deterministic action") {
  auto cfg = test_helpers::tiny_vector_config();
  love::Rng init(43);
  auto pc = tiny_policy_config(1);
  pc.init_std = 0.01;  // small noise keeps the tanh curvature bias negligible
  ActionModel<float> model(init, cfg.deter_dim + cfg.stoch_dim, pc);
  love::Rng rng(44);
  const int n = 10000;
  auto one = random_state<float>(cfg, 1, rng);
  // Replicate the single state across the batch so each row samples its own
  // noise.
  LatentState<float> many;
  many.deter = nn::Tensor<float>::constant(one.deter.value().replicate(n, 1));
  many.stoch_mean = nn::Tensor<float>::constant(one.stoch_mean.value().replicate(n, 1));
  many.stoch_std = nn::Tensor<float>::constant(one.stoch_std.value().replicate(n, 1));
  many.stoch_sample = nn::Tensor<float>::constant(one.stoch_sample.value().replicate(n, 1));

  love::Rng noise(45);
  auto samples = love::sample_action(model, many, noise, false);
  auto det = love::sample_action(model, one, noise, true);

  const double mean = double(samples.value().col(0).mean());
  double var = 0;
  for (int i = 0; i < n; ++i) {
    const double d = double(samples.value()(i, 0)) - mean;
    var += d * d;
  }
  const double se = std::sqrt(var / n / n);
  CHECK(std::abs(mean - double(det.value()(0, 0))) < 3.0 * se + 1e-4);
}

TEST_CASE("squashed log-density integrates to one over the action interval") {
  auto cfg = test_helpers::tiny_vector_config();
  love::Rng init(46);
  auto pc = tiny_policy_config(1);
  pc.init_std = 0.5;  // moderate spread so the quadrature grid resolves it
  ActionModel<double> model(init, cfg.deter_dim + cfg.stoch_dim, pc);
  love::Rng rng(47);
  auto state = random_state<double>(cfg, 1, rng);
  auto dist = model.dist(state.feature());

  // Integrate p(a) da over (-1, 1) with the tanh change of variables.
  const int n = 20000;
  double integral = 0;
  for (int i = 0; i < n; ++i) {
    const double a = -1.0 + 2.0 * (i + 0.5) / n;
    const double u = std::atanh(a);
    nn::Mat<double> um(1, 1);
    um(0, 0) = u;
    auto logp = model.log_prob_pre_tanh(dist, nn::Tensor<double>::constant(um));
    integral += std::exp(logp.value()(0, 0)) * (2.0 / n);
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(2e-3));

  // Sampled entropy estimate is finite.
  love::Rng noise(48);
  auto u = model.sample_pre_tanh(dist, noise);
  auto logp = model.log_prob_pre_tanh(dist, u);
  CHECK(std::isfinite(double(logp.value()(0, 0))));
}

TEST_CASE("critic_loss: zero at the fixed point and exact quadratic away from it") {
  auto cfg = test_helpers::tiny_vector_config();
  Ensemble<float> ens(cfg, 1, love::Rng(49));
  love::Rng rng(50);
  auto state = random_state<float>(cfg, 1, rng);

  const float v = ens.predict_value(0, state).value()(0, 0);
  std::vector<nn::Mat<float>> exact{nn::Mat<float>::Constant(1, 1, v)};
  auto zero_loss = love::critic_loss(ens, 0, {state}, exact);
  CHECK(double(zero_loss.item()) == doctest::Approx(0.0).epsilon(1e-10));

  // Prediction v against target v - 2 is 0.5 * 2^2 = 2.
  std::vector<nn::Mat<float>> off{nn::Mat<float>::Constant(1, 1, v - 2.0f)};
  auto two = love::critic_loss(ens, 0, {state}, off);
  CHECK(double(two.item()) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("critic_loss: gradient reaches only the value head and matches FD") {
  auto cfg = test_helpers::tiny_vector_config();
  Ensemble<double> ens(cfg, 2, love::Rng(51));
  love::Rng rng(52);
  auto state = random_state<double>(cfg, 3, rng);
  std::vector<nn::Mat<double>> targets{nn::Mat<double>::Constant(3, 1, 0.7)};

  auto params = ens.value_params(0);
  for (auto& p : params) p.tensor.grad().resize(0, 0);
  {
    nn::GradTape<double> tape;
    auto loss = love::critic_loss(ens, 0, {state}, targets);
    tape.backward(loss);
  }
  for (auto& p : ens.transition_params(0)) CHECK(p.tensor.grad().size() == 0);
  for (auto& p : ens.value_params(1)) CHECK(p.tensor.grad().size() == 0);

  auto loss_value = [&]() {
    nn::NoGradScope<double> ng;
    return double(love::critic_loss(ens, 0, {state}, targets).item());
  };
  const double h = 1e-6;
  int checked = 0;
  for (auto& p : params) {
    REQUIRE(p.tensor.grad().size() > 0);
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(2, p.tensor.value().size()); ++i) {
      const double orig = p.tensor.value()(i);
      p.tensor.value()(i) = orig + h;
      const double lp = loss_value();
      p.tensor.value()(i) = orig - h;
      const double lm = loss_value();
      p.tensor.value()(i) = orig;
      const double fd = (lp - lm) / (2 * h);
      const double g = p.tensor.grad()(i);
      CHECK(std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-6}) < 1e-3);
      ++checked;
    }
  }
  CHECK(checked >= 8);
}

TEST_CASE("lambda_return_graph: matches the scalar recursion elementwise") {
  love::Rng rng(53);
  const int H = 6, B = 4;
  std::vector<nn::Tensor<double>> rewards, values;
  for (int t = 0; t < H; ++t) {
    nn::Mat<double> r(B, 1);
    for (int b = 0; b < B; ++b) r(b, 0) = rng.uniform(-1, 1);
    rewards.push_back(nn::Tensor<double>::constant(r));
  }
  for (int t = 0; t <= H; ++t) {
    nn::Mat<double> v(B, 1);
    for (int b = 0; b < B; ++b) v(b, 0) = rng.uniform(-1, 1);
    values.push_back(nn::Tensor<double>::constant(v));
  }
  const double gamma = 0.97, lambda = 0.9;
  auto graph = love::lambda_return_graph(rewards, values, gamma, lambda);
  REQUIRE(graph.size() == std::size_t(H + 1));

  for (int b = 0; b < B; ++b) {
    love::ImaginedTrajectory<double> traj;
    traj.discount = gamma;
    traj.lambda = lambda;
    for (int t = 0; t < H; ++t) traj.rewards.push_back(rewards[std::size_t(t)].value()(b, 0));
    traj.rewards.push_back(0.0);  // index H is never read
    for (int t = 0; t <= H; ++t) traj.values.push_back(values[std::size_t(t)].value()(b, 0));
    auto scalar = love::lambda_return(traj);
    for (int t = 0; t <= H; ++t)
      CHECK(graph[std::size_t(t)].value()(b, 0) ==
            doctest::Approx(scalar[std::size_t(t)]).epsilon(1e-12));
  }
}

TEST_CASE("lambda_return_graph: lambda 1 with zero rewards discounts the bootstrap") {
  const int H = 5;
  const double gamma = 0.9, c = 1.7;
  std::vector<nn::Tensor<double>> rewards, values;
  for (int t = 0; t < H; ++t)
    rewards.push_back(nn::Tensor<double>::constant(nn::Mat<double>::Zero(1, 1)));
  for (int t = 0; t <= H; ++t)
    values.push_back(nn::Tensor<double>::constant(nn::Mat<double>::Constant(1, 1, c)));
  auto out = love::lambda_return_graph(rewards, values, gamma, 1.0);
  for (int tau = 0; tau <= H; ++tau)
    CHECK(out[std::size_t(tau)].value()(0, 0) ==
          doctest::Approx(std::pow(gamma, H - tau) * c).epsilon(1e-12));

  // H = 1 collapses to the one-step bootstrap.
  auto one = love::lambda_return_graph({rewards[0]}, {values[0], values[1]}, gamma, 0.5);
  CHECK(one[0].value()(0, 0) == doctest::Approx(gamma * c).epsilon(1e-12));
}

TEST_CASE("build_value_targets: agrees with the scalar returns module") {
  auto cfg = test_helpers::tiny_vector_config();
  Ensemble<float> ens(cfg, 1, love::Rng(54));
  love::Rng rng(55);
  auto start = random_state<float>(cfg, 3, rng);
  auto policy = [&](const LatentState<float>& s) {
    return nn::Tensor<float>::constant(nn::Mat<float>::Zero(s.batch(), cfg.action_dim));
  };
  nn::NoGradScope<float> ng;
  auto rollout = ens.imagine_rollout(0, start, policy, 5, rng, true);
  const float gamma = 0.98f, lambda = 0.92f;
  auto targets = love::build_value_targets(ens, 0, rollout, gamma, lambda);
  REQUIRE(targets.size() == rollout.states.size());

  for (int b = 0; b < 3; ++b) {
    love::ImaginedTrajectory<double> traj;
    traj.discount = double(gamma);
    traj.lambda = double(lambda);
    for (const auto& r : rollout.rewards) traj.rewards.push_back(double(r.value()(b, 0)));
    traj.rewards.push_back(0.0);
    for (const auto& s : rollout.states)
      traj.values.push_back(double(ens.predict_value(0, s).value()(b, 0)));
    auto scalar = love::lambda_return(traj);
    for (std::size_t t = 0; t < scalar.size(); ++t)
      CHECK(double(targets[t](b, 0)) == doctest::Approx(scalar[t]).epsilon(1e-4));
  }
}

TEST_CASE("actor_loss: beta 0 equals the negative mean particle return") {
  auto cfg = test_helpers::tiny_vector_config();
  Ensemble<float> ens(cfg, 2, love::Rng(56));
  love::Rng init(57);
  ActionModel<float> policy(init, cfg.deter_dim + cfg.stoch_dim, tiny_policy_config());
  love::Rng rng(58);
  std::vector<LatentState<float>> starts{random_state<float>(cfg, 4, rng),
                                         random_state<float>(cfg, 4, rng)};
  const float gamma = 0.99f, lambda = 0.95f;

  love::Rng noise_a(60);
  auto res = love::actor_loss(ens, starts, policy, 0.0f, 4, gamma, lambda, noise_a);

  // Recompute through the scalar returns module: replay the same rollouts
  // with the same derived noise stream.
  love::Rng noise_b(60);
  love::Rng common(noise_b.raw());
  double mean_g = 0;
  for (int i = 0; i < 2; ++i) {
    love::Rng noise = common;
    auto act = [&](const LatentState<float>& s) {
      auto d = policy.dist(s.feature());
      return love::squash(policy.sample_pre_tanh(d, noise));
    };
    nn::NoGradScope<float> ng;
    auto ro = ens.imagine_rollout(i, starts[std::size_t(i)], act, 4, noise, true);
    for (int b = 0; b < 4; ++b) {
      love::ImaginedTrajectory<double> traj;
      traj.discount = double(gamma);
      traj.lambda = double(lambda);
      for (const auto& r : ro.rewards) traj.rewards.push_back(double(r.value()(b, 0)));
      traj.rewards.push_back(0.0);
      for (const auto& s : ro.states)
        traj.values.push_back(double(ens.predict_value(i, s).value()(b, 0)));
      mean_g += love::particle_return(love::lambda_return(traj)) / (2.0 * 4.0);
    }
  }
  CHECK(double(res.loss.item()) == doctest::Approx(-mean_g).epsilon(2e-4));
  CHECK(res.mean_return == doctest::Approx(mean_g).epsilon(2e-4));
}

TEST_CASE("actor_loss: single particle at beta 0 is the single-model objective") {
  auto cfg = test_helpers::tiny_vector_config();
  Ensemble<float> ens(cfg, 1, love::Rng(61));
  love::Rng init(62);
  ActionModel<float> policy(init, cfg.deter_dim + cfg.stoch_dim, tiny_policy_config());
  love::Rng rng(63);
  std::vector<LatentState<float>> starts{random_state<float>(cfg, 3, rng)};

  love::Rng noise_a(64);
  auto res = love::actor_loss(ens, starts, policy, 0.0f, 3, 0.99f, 0.95f, noise_a);

  // The ensemble mean over one particle is that particle's return: the
  // objective is exactly the summed lambda-returns of its own rollout.
  love::Rng noise_b(64);
  love::Rng common(noise_b.raw());
  love::Rng noise = common;
  auto act = [&](const LatentState<float>& s) {
    auto d = policy.dist(s.feature());
    return love::squash(policy.sample_pre_tanh(d, noise));
  };
  nn::NoGradScope<float> ng;
  auto ro = ens.imagine_rollout(0, starts[0], act, 3, noise, true);
  std::vector<nn::Tensor<float>> values;
  for (const auto& s : ro.states) values.push_back(ens.predict_value(0, s));
  auto lam = love::lambda_return_graph(ro.rewards, values, 0.99f, 0.95f);
  double objective = 0;
  for (const auto& l : lam) objective += double(l.value().mean());
  CHECK(double(res.loss.item()) == doctest::Approx(-objective).epsilon(1e-4));
}

TEST_CASE("actor_loss: identical particles give bitwise-equal losses across betas") {
  auto cfg = test_helpers::tiny_vector_config();
  Ensemble<float> ens(cfg, 2, love::Rng(65));
  test_helpers::clone_particle(ens, 0, 1);
  love::Rng init(66);
  ActionModel<float> policy(init, cfg.deter_dim + cfg.stoch_dim, tiny_policy_config());
  love::Rng rng(67);
  auto s0 = random_state<float>(cfg, 4, rng);
  std::vector<LatentState<float>> starts{s0, s0};

  love::Rng na(70);
  auto with_ucb = love::actor_loss(ens, starts, policy, 0.5f, 4, 0.99f, 0.95f, na);
  love::Rng nb(70);
  auto mean_only = love::actor_loss(ens, starts, policy, 0.0f, 4, 0.99f, 0.95f, nb);
  CHECK(with_ucb.loss.item() == mean_only.loss.item());  // sigma_G is exactly 0
  CHECK(with_ucb.std_return == 0.0);

  CHECK_THROWS_AS(love::actor_loss(ens, {}, policy, 0.0f, 4, 0.99f, 0.95f, na),
                  std::invalid_argument);
}

TEST_CASE("actor and critic steps touch only their own parameters") {
  auto cfg = test_helpers::tiny_vector_config();
  Ensemble<float> ens(cfg, 2, love::Rng(71));
  love::Rng init(72);
  ActionModel<float> policy(init, cfg.deter_dim + cfg.stoch_dim, tiny_policy_config());
  love::Rng rng(73);
  std::vector<LatentState<float>> starts{random_state<float>(cfg, 3, rng),
                                         random_state<float>(cfg, 3, rng)};

  auto snapshot = [](const nn::ParamList<float>& ps) {
    std::vector<nn::Mat<float>> out;
    for (const auto& p : ps) out.push_back(p.tensor.value());
    return out;
  };
  auto unchanged = [](const nn::ParamList<float>& ps,
                      const std::vector<nn::Mat<float>>& snap) {
    for (std::size_t i = 0; i < ps.size(); ++i)
      if ((ps[i].tensor.value() - snap[i]).cwiseAbs().maxCoeff() != 0.0f) return false;
    return true;
  };

  nn::ParamList<float> policy_params;
  policy.collect(policy_params, "pi");
  nn::Adam<float> policy_opt(policy_params, 1e-3f);

  auto model_snap = snapshot(ens.model_params(0));
  auto value_snap = snapshot(ens.value_params(0));

  // Actor-only step.
  policy_opt.zero_grad();
  {
    nn::GradTape<float> tape;
    love::Rng noise(74);
    auto res = love::actor_loss(ens, starts, policy, 0.3f, 3, 0.99f, 0.95f, noise);
    tape.backward(res.loss);
  }
  policy_opt.step();
  CHECK(unchanged(ens.model_params(0), model_snap));
  CHECK(unchanged(ens.value_params(0), value_snap));

  // Critic-only step leaves the policy untouched.
  auto policy_snap = snapshot(policy_params);
  nn::Adam<float> value_opt(ens.value_params(0), 1e-3f);
  std::vector<nn::Mat<float>> targets{nn::Mat<float>::Zero(3, 1)};
  value_opt.zero_grad();
  {
    nn::GradTape<float> tape;
    auto loss = love::critic_loss(ens, 0, {starts[0]}, targets);
    tape.backward(loss);
  }
  value_opt.step();
  CHECK(unchanged(policy_params, policy_snap));
  CHECK_FALSE(unchanged(ens.value_params(0), value_snap));
}

TEST_CASE("actor_loss: analytic gradients match finite differences on a tiny config") {
  auto cfg = test_helpers::tiny_image_config(1);
  Ensemble<double> ens(cfg, 2, love::Rng(75));
  love::Rng init(76);
  auto pc = tiny_policy_config(1);
  pc.units = 8;
  ActionModel<double> policy(init, cfg.deter_dim + cfg.stoch_dim, pc);
  love::Rng rng(77);
  std::vector<LatentState<double>> starts;
  for (int i = 0; i < 2; ++i) {
    auto st = LatentState<double>::initial(2, cfg.deter_dim, cfg.stoch_dim);
    nn::Mat<double> d(2, cfg.deter_dim), m(2, cfg.stoch_dim);
    for (Eigen::Index j = 0; j < d.size(); ++j) d(j) = 0.3 * rng.normal();
    for (Eigen::Index j = 0; j < m.size(); ++j) m(j) = 0.3 * rng.normal();
    st.deter = nn::Tensor<double>::constant(d);
    st.stoch_sample = nn::Tensor<double>::constant(m);
    st.stoch_mean = st.stoch_sample;
    starts.push_back(st);
  }

  nn::ParamList<double> params;
  policy.collect(params, "pi");
  auto loss_value = [&]() {
    nn::NoGradScope<double> ng;
    love::Rng noise(555);
    return double(
        love::actor_loss(ens, starts, policy, 0.4, 3, 0.99, 0.95, noise).loss.item());
  };
  for (auto& p : params) p.tensor.grad().resize(0, 0);
  {
    nn::GradTape<double> tape;
    love::Rng noise(555);
    auto res = love::actor_loss(ens, starts, policy, 0.4, 3, 0.99, 0.95, noise);
    tape.backward(res.loss);
  }
  const double h = 1e-6;
  int checked = 0;
  for (auto& p : params) {
    if (p.tensor.grad().size() == 0) continue;
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(2, p.tensor.value().size()); ++i) {
      const double orig = p.tensor.value()(i);
      p.tensor.value()(i) = orig + h;
      const double lp = loss_value();
      p.tensor.value()(i) = orig - h;
      const double lm = loss_value();
      p.tensor.value()(i) = orig;
      const double fd = (lp - lm) / (2 * h);
      const double g = p.tensor.grad()(i);
      CHECK(std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-6}) < 1e-3);
      ++checked;
    }
  }
  CHECK(checked >= 8);
}

TEST_CASE("curiosity_bonus: zero for clones, exact on a crafted example") {
  auto cfg = test_helpers::tiny_vector_config();
  love::Rng rng(78);

  {
    Ensemble<float> ens(cfg, 2, love::Rng(79));
    test_helpers::clone_particle(ens, 0, 1);
    auto state = random_state<float>(cfg, 3, rng);
    auto action = nn::Tensor<float>::constant(nn::Mat<float>::Zero(3, cfg.action_dim));
    auto bonus = love::curiosity_bonus(ens, state, action);
    CHECK(bonus.value().cwiseAbs().maxCoeff() == 0.0f);
  }

  // Force prior means [0, 0] and [2, 0]: population variance 1 in the first
  // dimension, 0 in the second, bonus 0.5.
  {
    auto cfg2 = test_helpers::tiny_vector_config();
    cfg2.stoch_dim = 2;
    Ensemble<float> ens(cfg2, 2, love::Rng(80));
    for (int i = 0; i < 2; ++i) {
      for (auto& p : ens.transition_params(i)) {
        if (p.name.find("prior_out") != std::string::npos ||
            p.name.find("prior_hidden") != std::string::npos) {
          p.tensor.value().setZero();
        }
      }
    }
    // prior_out bias: first stoch_dim entries are the mean head.
    for (auto& p : ens.transition_params(1)) {
      if (p.name.find("prior_out/b") != std::string::npos) p.tensor.value()(0, 0) = 2.0f;
    }
    auto state = LatentState<float>::initial(1, cfg2.deter_dim, cfg2.stoch_dim);
    auto action = nn::Tensor<float>::constant(nn::Mat<float>::Zero(1, cfg2.action_dim));
    auto bonus = love::curiosity_bonus(ens, state, action);
    CHECK(double(bonus.value()(0, 0)) == doctest::Approx(0.5).epsilon(1e-6));

    // Permutation invariance: swapping the particles leaves the bonus alone.
    Ensemble<float> swapped(cfg2, 2, love::Rng(80));
    for (int i = 0; i < 2; ++i) {
      for (auto& p : swapped.transition_params(i)) {
        if (p.name.find("prior_out") != std::string::npos ||
            p.name.find("prior_hidden") != std::string::npos)
          p.tensor.value().setZero();
      }
    }
    for (auto& p : swapped.transition_params(0)) {
      if (p.name.find("prior_out/b") != std::string::npos) p.tensor.value()(0, 0) = 2.0f;
    }
    auto bonus2 = love::curiosity_bonus(swapped, state, action);
    CHECK(double(bonus2.value()(0, 0)) == doctest::Approx(0.5).epsilon(1e-6));
  }

  {
    Ensemble<float> single(cfg, 1, love::Rng(81));
    auto state = random_state<float>(cfg, 1, rng);
    auto action = nn::Tensor<float>::constant(nn::Mat<float>::Zero(1, cfg.action_dim));
    CHECK_THROWS_AS(love::curiosity_bonus(single, state, action), std::invalid_argument);
  }
}
