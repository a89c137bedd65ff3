#include <doctest.h>

#include <cmath>
#include <functional>

#include "love/nn/adam.hpp"
#include "love/nn/conv.hpp"
#include "love/nn/layers.hpp"
#include "love/nn/tensor.hpp"
#include "love/obs_spec.hpp"
#include "love/rng.hpp"

namespace nn = love::nn;
using T = nn::Tensor<double>;
using M = nn::Mat<double>;

namespace {

M random_mat(love::Rng& rng, int r, int c, double scale = 0.7) {
  M m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = scale * rng.normal();
  return m;
}

// Central finite differences of `loss` with respect to `leaf`, against the
// analytic gradient recorded on a tape.
double max_rel_error(T leaf, const std::function<T()>& loss) {
  M analytic;
  leaf.grad().resize(0, 0);
  {
    nn::GradTape<double> tape;
    auto l = loss();
    tape.backward(l);
    REQUIRE(leaf.grad().size() > 0);
    analytic = leaf.grad();
    leaf.grad().resize(0, 0);
  }
  double worst = 0;
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < leaf.value().size(); ++i) {
    const double orig = leaf.value()(i);
    double lp, lm;
    {
      nn::NoGradScope<double> ng;
      leaf.value()(i) = orig + h;
      lp = loss().item();
      leaf.value()(i) = orig - h;
      lm = loss().item();
      leaf.value()(i) = orig;
    }
    const double fd = (lp - lm) / (2 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic(i)), 1e-6});
    worst = std::max(worst, std::abs(fd - analytic(i)) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("elementwise and reduction ops match finite differences") {
  love::Rng rng(101);
  auto x = T::leaf(random_mat(rng, 3, 4), true);
  auto y = T::constant(random_mat(rng, 3, 4));
  auto b = T::constant(random_mat(rng, 1, 4));

  auto check = [&](const std::function<T()>& f) { CHECK(max_rel_error(x, f) < 1e-6); };

  check([&] { return nn::sum(nn::mul(x, y)); });
  check([&] { return nn::mean(nn::div(y, nn::add_scalar(nn::square(x), 2.0))); });
  check([&] { return nn::sum(nn::add(x, b)); });
  check([&] { return nn::sum(nn::sub(nn::tanh(x), nn::sigmoid(x))); });
  check([&] { return nn::mean(nn::elu(nn::scale(x, 1.7))); });
  check([&] { return nn::sum(nn::softplus(nn::neg(x))); });
  check([&] { return nn::sum(nn::exp(nn::scale(x, 0.3))); });
  check([&] { return nn::sum(nn::log(nn::add_scalar(nn::square(x), 1.0))); });
  check([&] { return nn::sum(nn::sqrt_guarded(nn::add_scalar(nn::square(x), 0.5))); });
  check([&] { return nn::mean(nn::rowwise_sum(nn::mul(x, x))); });
  check([&] { return nn::sum(nn::slice_cols(nn::concat_cols(x, nn::mul(x, y)), 2, 4)); });
  check([&] { return nn::sum(nn::relu(nn::add_scalar(x, 0.003))); });
}

TEST_CASE("matmul gradients match finite differences") {
  love::Rng rng(102);
  auto a = T::leaf(random_mat(rng, 3, 5), true);
  auto w = T::leaf(random_mat(rng, 5, 2), true);
  auto check_a = max_rel_error(a, [&] { return nn::sum(nn::square(nn::matmul(a, w))); });
  auto check_w = max_rel_error(w, [&] { return nn::sum(nn::square(nn::matmul(a, w))); });
  CHECK(check_a < 1e-6);
  CHECK(check_w < 1e-6);
}

TEST_CASE("gru cell BPTT gradients match finite differences") {
  love::Rng rng(103);
  nn::InitSpec init;
  nn::GruCell<double> gru(rng, 3, 4, init);
  auto h0 = T::leaf(random_mat(rng, 2, 4, 0.3), true);
  auto u = T::constant(random_mat(rng, 2, 3));
  auto loss = [&] {
    auto h = h0;
    for (int s = 0; s < 5; ++s) h = gru(u, h);
    return nn::mean(nn::square(h));
  };
  CHECK(max_rel_error(h0, loss) < 1e-6);
}

TEST_CASE("conv2d and deconv2d gradients match finite differences") {
  love::Rng rng(104);
  nn::InitSpec init;
  nn::ConvGeom g;
  g.in_h = g.in_w = 6; g.in_c = 2; g.kernel = 3; g.stride = 2;
  g.out_h = g.out_w = nn::conv_out_size(6, 3, 2); g.out_c = 3;
  nn::Conv2dLayer<double> conv(rng, g, nn::Act::elu, init);

  nn::ConvGeom d;
  d.in_h = d.in_w = g.out_h; d.in_c = 3; d.kernel = 3; d.stride = 2;
  d.out_h = d.out_w = nn::deconv_out_size(g.out_h, 3, 2); d.out_c = 2;
  nn::Deconv2dLayer<double> dec(rng, d, nn::Act::none, init);

  auto img = T::leaf(random_mat(rng, 2, 6 * 6 * 2, 0.4), true);
  auto loss = [&] { return nn::mean(nn::square(dec(conv(img)))); };
  CHECK(max_rel_error(img, loss) < 1e-5);
}

TEST_CASE("detach cuts the graph") {
  love::Rng rng(105);
  auto x = T::leaf(random_mat(rng, 2, 2), true);
  nn::GradTape<double> tape;
  auto l = nn::sum(nn::square(nn::detach(nn::scale(x, 3.0))));
  tape.backward(l);
  CHECK(x.grad().size() == 0);
}

TEST_CASE("no-grad scope records nothing") {
  love::Rng rng(106);
  auto x = T::leaf(random_mat(rng, 2, 2), true);
  nn::GradTape<double> tape;
  std::size_t before = tape.size();
  {
    nn::NoGradScope<double> ng;
    auto y = nn::tanh(nn::scale(x, 2.0));
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(tape.size() == before);
}

TEST_CASE("adam minimizes a quadratic and respects zero_grad") {
  auto w = T::leaf(M::Constant(1, 1, -4.0), true);
  nn::Adam<double> opt({{"w", w}}, 0.05);
  for (int it = 0; it < 2000; ++it) {
    opt.zero_grad();
    nn::GradTape<double> tape;
    auto loss = nn::square(nn::add_scalar(w, -3.0));
    tape.backward(loss);
    opt.step();
  }
  CHECK(w.value()(0, 0) == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("adam clips by global norm") {
  auto w = T::leaf(M::Zero(1, 1), true);
  nn::Adam<double> opt({{"w", w}}, 1.0, /*clip=*/1.0);
  opt.zero_grad();
  {
    nn::GradTape<double> tape;
    auto loss = nn::scale(w, 1e9);
    tape.backward(loss);
  }
  CHECK(opt.grad_norm() == doctest::Approx(1e9));
  opt.step();
  // First Adam step magnitude is lr regardless, but the clipped gradient
  // keeps the moment estimates bounded.
  CHECK(std::abs(w.value()(0, 0)) <= 1.0 + 1e-9);
}

TEST_CASE("rng determinism, stream independence and serialization") {
  love::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

  love::Rng s1 = a.spawn(1), s2 = a.spawn(2);
  bool differ = false;
  for (int i = 0; i < 10; ++i) differ = differ || (s1.raw() != s2.raw());
  CHECK(differ);

  love::Rng c(7);
  c.normal();
  const std::string state = c.serialize();
  love::Rng d = love::Rng::deserialize(state);
  for (int i = 0; i < 50; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("rng normal moments") {
  love::Rng rng(1234);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(double(n)));
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("glorot uniform stays inside its bound, biases start at zero") {
  love::Rng rng(9);
  nn::InitSpec init;
  auto w = nn::init_kernel<double>(rng, 30, 20, 30, 20, init);
  const double limit = std::sqrt(6.0 / 50.0);
  CHECK(w.maxCoeff() <= limit);
  CHECK(w.minCoeff() >= -limit);
  auto b = nn::init_bias<double>(rng, 30, 20, init);
  CHECK(b.cwiseAbs().maxCoeff() == 0.0);

  nn::InitSpec vs;
  vs.kernel = nn::KernelInit::variance_scaling;
  vs.bias = nn::BiasInit::variance_scaling;
  auto w2 = nn::init_kernel<double>(rng, 300, 300, 300, 300, vs);
  CHECK(std::abs(w2.mean()) < 0.01);
  auto b2 = nn::init_bias<double>(rng, 300, 300, vs);
  CHECK(b2.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("encoder chain reproduces the reference geometry") {
  auto chain = love::encoder_chain(64, 64, 3, 32);
  REQUIRE(chain.size() == 4);
  CHECK(chain[0].out_h == 31);
  CHECK(chain[1].out_h == 14);
  CHECK(chain[2].out_h == 6);
  CHECK(chain[3].out_h == 2);
  CHECK(chain[3].out_c == 256);
  CHECK(love::ObservationSpec::image_obs(64, 64, 3).embedding_dim == 1024);
  CHECK(love::ObservationSpec::image_obs(16, 16, 3).embedding_dim == 256);
}
