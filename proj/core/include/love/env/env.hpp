#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <vector>

#include "love/obs_spec.hpp"

namespace love::env {

struct StepResult {
  Eigen::VectorXf observation;
  double reward = 0;
  bool done = false;
  std::vector<double> true_state;  // diagnostic ground truth
};

// Environment protocol: reset/step/spec. Episodes are fixed-horizon; the
// caller decides when to stop, `done` is never set by the built-in tasks.
class Env {
 public:
  virtual ~Env() = default;
  virtual StepResult reset() = 0;
  virtual StepResult step(const Eigen::VectorXd& action) = 0;
  virtual ObservationSpec observation_spec() const = 0;
  virtual int action_dim() const = 0;
};

// Reward below the threshold is zeroed; the boundary survives. Rewards are
// expected in [0, 1].
inline double sparsify(double reward, double threshold) {
  return reward >= threshold ? reward : 0.0;
}

class SparsifyWrapper final : public Env {
 public:
  SparsifyWrapper(std::unique_ptr<Env> inner, double threshold)
      : inner_(std::move(inner)), threshold_(threshold) {}

  StepResult reset() override { return inner_->reset(); }
  StepResult step(const Eigen::VectorXd& action) override {
    StepResult r = inner_->step(action);
    r.reward = sparsify(r.reward, threshold_);
    return r;
  }
  ObservationSpec observation_spec() const override { return inner_->observation_spec(); }
  int action_dim() const override { return inner_->action_dim(); }

 private:
  std::unique_ptr<Env> inner_;
  double threshold_;
};

// Repeats each action k times, sums rewards, returns the last observation.
class ActionRepeatWrapper final : public Env {
 public:
  ActionRepeatWrapper(std::unique_ptr<Env> inner, int repeat)
      : inner_(std::move(inner)), repeat_(repeat) {
    if (repeat_ < 1) throw std::invalid_argument("action repeat must be >= 1");
  }

  StepResult reset() override { return inner_->reset(); }

  StepResult step(const Eigen::VectorXd& action) override {
    StepResult out;
    double total = 0;
    for (int k = 0; k < repeat_; ++k) {
      out = inner_->step(action);
      total += out.reward;
    }
    out.reward = total;
    return out;
  }

  ObservationSpec observation_spec() const override { return inner_->observation_spec(); }
  int action_dim() const override { return inner_->action_dim(); }
  int repeat() const { return repeat_; }

 private:
  std::unique_ptr<Env> inner_;
  int repeat_;
};

inline std::unique_ptr<Env> action_repeat_wrap(std::unique_ptr<Env> inner, int repeat) {
  return std::make_unique<ActionRepeatWrapper>(std::move(inner), repeat);
}

}  // namespace love::env
