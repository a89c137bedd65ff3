#pragma once

#include <string>
#include <vector>

#include "love/nn/tensor.hpp"
#include "love/rng.hpp"

namespace love::nn {

enum class Act { none, relu, elu, tanh, sigmoid, softplus };

template <typename S>
Tensor<S> activate(const Tensor<S>& x, Act act) {
  switch (act) {
    case Act::none: return x;
    case Act::relu: return relu(x);
    case Act::elu: return elu(x);
    case Act::tanh: return tanh(x);
    case Act::sigmoid: return sigmoid(x);
    case Act::softplus: return softplus(x);
  }
  return x;
}

enum class KernelInit { glorot_uniform, variance_scaling };
enum class BiasInit { zeros, variance_scaling };

struct InitSpec {
  KernelInit kernel = KernelInit::glorot_uniform;
  BiasInit bias = BiasInit::zeros;
  double vs_scale = 0.333;
};

template <typename S>
Mat<S> init_kernel(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out,
                   Eigen::Index rows, Eigen::Index cols, const InitSpec& init) {
  Mat<S> w(rows, cols);
  if (init.kernel == KernelInit::glorot_uniform) {
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = S(rng.uniform(-limit, limit));
  } else {
    const double std = std::sqrt(init.vs_scale / double(fan_in));
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = S(std * rng.truncated_normal());
  }
  return w;
}

template <typename S>
Mat<S> init_bias(Rng& rng, Eigen::Index fan_in, Eigen::Index n, const InitSpec& init) {
  Mat<S> b = Mat<S>::Zero(1, n);
  if (init.bias == BiasInit::variance_scaling) {
    const double std = std::sqrt(init.vs_scale / double(fan_in));
    for (Eigen::Index j = 0; j < n; ++j) b(0, j) = S(std * rng.truncated_normal());
  }
  return b;
}

// Named parameter, as stored in checkpoints.
template <typename S>
struct NamedParam {
  std::string name;
  Tensor<S> tensor;
};

template <typename S>
using ParamList = std::vector<NamedParam<S>>;

template <typename S>
class Dense {
 public:
  Dense() = default;
  Dense(Rng& rng, Eigen::Index in, Eigen::Index out, Act act, const InitSpec& init)
      : act_(act) {
    W_ = Tensor<S>::leaf(init_kernel<S>(rng, in, out, in, out, init), true);
    b_ = Tensor<S>::leaf(init_bias<S>(rng, in, out, init), true);
  }

  Tensor<S> operator()(const Tensor<S>& x) const {
    return activate(linear(x, W_, b_), act_);
  }

  void collect(ParamList<S>& out, const std::string& prefix) const {
    out.push_back({prefix + "/W", W_});
    out.push_back({prefix + "/b", b_});
  }

  Eigen::Index in_dim() const { return W_.rows(); }
  Eigen::Index out_dim() const { return W_.cols(); }

 private:
  Tensor<S> W_, b_;
  Act act_ = Act::none;
};

// Plain fully connected stack: n_hidden layers of `units` with `hidden_act`,
// then a linear output layer.
template <typename S>
class Mlp {
 public:
  Mlp() = default;
  Mlp(Rng& rng, Eigen::Index in, Eigen::Index units, int n_hidden, Eigen::Index out,
      Act hidden_act, const InitSpec& init) {
    Eigen::Index d = in;
    for (int i = 0; i < n_hidden; ++i) {
      layers_.emplace_back(rng, d, units, hidden_act, init);
      d = units;
    }
    layers_.emplace_back(rng, d, out, Act::none, init);
  }

  Tensor<S> operator()(Tensor<S> x) const {
    for (const auto& l : layers_) x = l(x);
    return x;
  }

  void collect(ParamList<S>& out, const std::string& prefix) const {
    for (std::size_t i = 0; i < layers_.size(); ++i)
      layers_[i].collect(out, prefix + "/d" + std::to_string(i));
  }

 private:
  std::vector<Dense<S>> layers_;
};

// GRU cell with tanh candidate activation.
template <typename S>
class GruCell {
 public:
  GruCell() = default;
  GruCell(Rng& rng, Eigen::Index in, Eigen::Index hidden, const InitSpec& init) {
    auto mk = [&](Eigen::Index r, Eigen::Index c) {
      return Tensor<S>::leaf(init_kernel<S>(rng, r, c, r, c, init), true);
    };
    Wz_ = mk(in, hidden); Uz_ = mk(hidden, hidden);
    Wr_ = mk(in, hidden); Ur_ = mk(hidden, hidden);
    Wc_ = mk(in, hidden); Uc_ = mk(hidden, hidden);
    bz_ = Tensor<S>::leaf(init_bias<S>(rng, in + hidden, hidden, init), true);
    br_ = Tensor<S>::leaf(init_bias<S>(rng, in + hidden, hidden, init), true);
    bc_ = Tensor<S>::leaf(init_bias<S>(rng, in + hidden, hidden, init), true);
  }

  Tensor<S> operator()(const Tensor<S>& x, const Tensor<S>& h) const {
    auto z = sigmoid(add(add(matmul(x, Wz_), matmul(h, Uz_)), bz_));
    auto r = sigmoid(add(add(matmul(x, Wr_), matmul(h, Ur_)), br_));
    auto c = nn::tanh(add(add(matmul(x, Wc_), matmul(mul(r, h), Uc_)), bc_));
    // h' = (1 - z) * h + z * c
    auto one_minus_z = add_scalar(neg(z), S(1));
    return add(mul(one_minus_z, h), mul(z, c));
  }

  void collect(ParamList<S>& out, const std::string& prefix) const {
    out.push_back({prefix + "/Wz", Wz_}); out.push_back({prefix + "/Uz", Uz_});
    out.push_back({prefix + "/bz", bz_});
    out.push_back({prefix + "/Wr", Wr_}); out.push_back({prefix + "/Ur", Ur_});
    out.push_back({prefix + "/br", br_});
    out.push_back({prefix + "/Wc", Wc_}); out.push_back({prefix + "/Uc", Uc_});
    out.push_back({prefix + "/bc", bc_});
  }

 private:
  Tensor<S> Wz_, Uz_, bz_, Wr_, Ur_, br_, Wc_, Uc_, bc_;
};

}  // namespace love::nn
