#include "love/harness/heatmap.hpp"

#include <cmath>
#include <vector>

namespace love {

ValueHeatmap value_heatmap(const Ensemble<float>& ensemble,
                           const env::PendulumParams& params,
                           const ObservationSpec& obs_spec, int n_angle, int n_velocity,
                           int context_length) {
  nn::NoGradScope<float> ng;
  ValueHeatmap map;
  map.velocity_min = -params.max_speed;
  map.velocity_max = params.max_speed;
  map.mean_values.resize(n_velocity, n_angle);
  map.std_values.resize(n_velocity, n_angle);

  const int cells = n_angle * n_velocity;

  // Backward-integrated context for every cell, batched: context[k] is the
  // (cells x obs) observation matrix at context step k (k = 0 oldest).
  env::PendulumParams reversed = params;
  reversed.dt = -params.dt;
  const std::size_t ctx_len = std::size_t(context_length);
  std::vector<Eigen::MatrixXf> context(ctx_len);
  for (auto& m : context) m.resize(cells, obs_spec.flat_dim());

  const std::size_t n_cells = std::size_t(cells);
  std::vector<env::PendulumState> states(n_cells);
  int c = 0;
  for (int vy = 0; vy < n_velocity; ++vy) {
    for (int ax = 0; ax < n_angle; ++ax, ++c) {
      const double angle = map.angle_min + (map.angle_max - map.angle_min) *
                                               (ax + 0.5) / n_angle;
      const double vel = map.velocity_min + (map.velocity_max - map.velocity_min) *
                                                (vy + 0.5) / n_velocity;
      states[std::size_t(c)] = env::PendulumState{angle, vel};
    }
  }

  // Walk each state backward, recording the trajectory oldest-first.
  for (int cell = 0; cell < cells; ++cell) {
    env::PendulumState s = states[std::size_t(cell)];
    std::vector<env::PendulumState> trail(ctx_len);
    trail[ctx_len - 1] = s;
    for (int k = context_length - 2; k >= 0; --k) {
      env::pendulum_step(s, 0.0, reversed, obs_spec);
      trail[std::size_t(k)] = s;
    }
    for (int k = 0; k < context_length; ++k) {
      context[std::size_t(k)].row(cell) =
          env::pendulum_observation(trail[std::size_t(k)], params, obs_spec).transpose();
    }
  }

  const auto& cfg = ensemble.config();
  Eigen::MatrixXf values(cells, ensemble.size());
  Rng rng(0);  // unused, deterministic latents
  for (int i = 0; i < ensemble.size(); ++i) {
    std::vector<nn::Tensor<float>> embeds, actions;
    for (int k = 0; k < context_length; ++k) {
      embeds.push_back(ensemble.encode(nn::Tensor<float>::constant(context[std::size_t(k)])));
      actions.push_back(
          nn::Tensor<float>::constant(Eigen::MatrixXf::Zero(cells, cfg.action_dim)));
    }
    auto initial = LatentState<float>::initial(cells, cfg.deter_dim, cfg.stoch_dim);
    auto [posts, priors] = ensemble.filter_sequence(i, embeds, actions, initial, rng, false);
    (void)priors;
    values.col(i) = ensemble.predict_value(i, posts.back()).value();
  }

  c = 0;
  const double m = double(ensemble.size());
  for (int vy = 0; vy < n_velocity; ++vy) {
    for (int ax = 0; ax < n_angle; ++ax, ++c) {
      double mean = 0;
      for (int i = 0; i < ensemble.size(); ++i) mean += double(values(c, i));
      mean /= m;
      double var = 0;
      for (int i = 0; i < ensemble.size(); ++i) {
        const double d = double(values(c, i)) - mean;
        var += d * d;
      }
      map.mean_values(vy, ax) = mean;
      map.std_values(vy, ax) = std::sqrt(var / m);
    }
  }
  return map;
}

namespace {

void draw_panel(Image& img, const Eigen::MatrixXd& data, int x0, int upscale) {
  const double lo = data.minCoeff(), hi = data.maxCoeff();
  const double span = hi - lo > 1e-12 ? hi - lo : 1.0;
  for (int y = 0; y < data.rows(); ++y) {
    for (int x = 0; x < data.cols(); ++x) {
      float r, g, b;
      colormap_heat((data(y, x) - lo) / span, r, g, b);
      img.fill_rect(x0 + x * upscale, y * upscale, x0 + (x + 1) * upscale,
                    (y + 1) * upscale, r, g, b);
    }
  }
}

}  // namespace

Image heatmap_image(const ValueHeatmap& map, int upscale) {
  const int w = int(map.mean_values.cols()) * upscale;
  const int h = int(map.mean_values.rows()) * upscale;
  Image img(2 * w + upscale, h, 0.1f, 0.1f, 0.1f);
  draw_panel(img, map.mean_values, 0, upscale);
  draw_panel(img, map.std_values, w + upscale, upscale);
  return img;
}

}  // namespace love
