#include "love/harness/strip.hpp"

#include <cmath>
#include <stdexcept>

namespace love {

PredictionStrip prediction_strip(const Ensemble<float>& ensemble,
                                 const EpisodeRecord& episode, int t0,
                                 int context_length, int pred_length) {
  const auto& spec = ensemble.config().obs;
  if (spec.mode != ObsMode::image)
    throw std::invalid_argument("prediction_strip: requires an image-observation run");
  if (t0 < 0 || t0 + context_length + pred_length > int(episode.rewards.size()))
    throw std::out_of_range("prediction_strip: window exceeds the episode");

  std::vector<Eigen::MatrixXf> ctx_obs, ctx_act, fut_act;
  for (int k = 0; k < context_length; ++k) {
    ctx_obs.push_back(episode.obs.row(t0 + k));
    ctx_act.push_back(episode.actions.row(t0 + k));
  }
  for (int k = 0; k < pred_length; ++k)
    fut_act.push_back(episode.actions.row(t0 + context_length + k));

  const auto preds = ensemble.open_loop_prediction(ctx_obs, ctx_act, fut_act);
  const int M = int(preds.size());
  const int res = spec.height;

  PredictionStrip out;
  for (int k = 0; k < pred_length; ++k)
    out.truth.push_back(episode.obs.row(t0 + context_length + k).transpose());

  const int pad = 1;
  out.grid = Image(pred_length * (res + pad), (M + 1) * (res + pad), 0.3f, 0.3f, 0.3f);
  for (int k = 0; k < pred_length; ++k)
    out.grid.blit(out.truth[std::size_t(k)], res, k * (res + pad), 0);
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < pred_length; ++k) {
      Eigen::VectorXf frame = preds[std::size_t(i)][std::size_t(k)].row(0).transpose();
      out.grid.blit(frame, res, k * (res + pad), (i + 1) * (res + pad));
    }

  // Per-pixel population std across particles, averaged over pixels/frames.
  double acc = 0;
  long n = 0;
  for (int k = 0; k < pred_length; ++k) {
    const Eigen::Index dim = preds[0][std::size_t(k)].cols();
    for (Eigen::Index px = 0; px < dim; ++px) {
      double mean = 0;
      for (int i = 0; i < M; ++i) mean += double(preds[std::size_t(i)][std::size_t(k)](0, px));
      mean /= M;
      double var = 0;
      for (int i = 0; i < M; ++i) {
        const double d = double(preds[std::size_t(i)][std::size_t(k)](0, px)) - mean;
        var += d * d;
      }
      acc += std::sqrt(var / M);
      ++n;
    }
  }
  out.mean_pixel_std = n > 0 ? acc / double(n) : 0.0;
  return out;
}

}  // namespace love
