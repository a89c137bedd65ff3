#pragma once

#include <cmath>
#include <vector>

#include "love/nn/layers.hpp"
#include "love/nn/tensor.hpp"

namespace love::nn {

// Adam with global-norm gradient clipping over the parameter group.
template <typename S>
class Adam {
 public:
  Adam() = default;
  Adam(ParamList<S> params, S lr, S clip_norm = S(100), S beta1 = S(0.9),
       S beta2 = S(0.999), S eps = S(1e-8))
      : params_(std::move(params)), lr_(lr), clip_(clip_norm), b1_(beta1), b2_(beta2),
        eps_(eps) {
    slots_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& v = params_[i].tensor.value();
      slots_[i].m = Mat<S>::Zero(v.rows(), v.cols());
      slots_[i].v = Mat<S>::Zero(v.rows(), v.cols());
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.tensor.grad().resize(0, 0);
  }

  // Current global gradient norm (pre-clip), useful for diagnostics.
  S grad_norm() const {
    double sq = 0;
    for (const auto& p : params_) {
      if (p.tensor.grad().size() != 0) sq += double(p.tensor.grad().squaredNorm());
    }
    return S(std::sqrt(sq));
  }

  void step() {
    ++t_;
    S norm = grad_norm();
    S scale = norm > clip_ ? clip_ / norm : S(1);
    const S bc1 = S(1) - S(std::pow(double(b1_), double(t_)));
    const S bc2 = S(1) - S(std::pow(double(b2_), double(t_)));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& g = params_[i].tensor.grad();
      if (g.size() == 0) continue;
      auto& slot = slots_[i];
      Mat<S> gc = g * scale;
      slot.m = b1_ * slot.m + (S(1) - b1_) * gc;
      slot.v = (b2_ * slot.v.array() + (S(1) - b2_) * gc.array().square()).matrix();
      auto m_hat = slot.m.array() / bc1;
      auto v_hat = slot.v.array() / bc2;
      params_[i].tensor.value().array() -= lr_ * m_hat / (v_hat.sqrt() + eps_);
    }
  }

  const ParamList<S>& params() const { return params_; }
  long steps_taken() const { return t_; }
  void set_lr(S lr) { lr_ = lr; }

 private:
  struct Slot {
    Mat<S> m, v;
  };
  ParamList<S> params_;
  std::vector<Slot> slots_;
  S lr_ = S(1e-3), clip_ = S(100), b1_ = S(0.9), b2_ = S(0.999), eps_ = S(1e-8);
  long t_ = 0;
};

}  // namespace love::nn
