#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "love/env/pendulum.hpp"
#include "love/env/pointmass.hpp"
#include "love/env/registry.hpp"
#include "love/env/render.hpp"
#include "love/rng.hpp"

using namespace love::env;
using love::ObservationSpec;
using love::ObsMode;

namespace {

// Open arena with a single vertical wall at x = 5 for reflection tests.
ArenaGeometry single_wall_arena() {
  ArenaGeometry g;
  g.size = 10.0;
  g.walls = {{5.0, 0.0, 5.0, 10.0}};
  g.start_x = 2.0;
  g.start_y = 5.0;
  return g;
}

}  // namespace

TEST_CASE("pointmass: zero action and zero velocity stay put, reward always 0") {
  PointmassParams p;
  auto g = bugtrap_geometry(p);
  auto spec = ObservationSpec::vector_obs(4);
  PointmassState s{g.start_x, g.start_y, 0.0, 0.0};
  auto r = bugtrap_step(s, {0.0, 0.0}, p, g, spec);
  CHECK(s.px == doctest::Approx(g.start_x));
  CHECK(s.py == doctest::Approx(g.start_y));
  CHECK(r.reward == 0.0);

  love::Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    auto rr = bugtrap_step(s, {rng.uniform(-1, 1), rng.uniform(-1, 1)}, p, g, spec);
    CHECK(rr.reward == 0.0);
  }
}

TEST_CASE("pointmass: head-on wall hit rebounds at restitution times the speed") {
  PointmassParams p;
  p.drag = 0.0;  // keep the approach speed exact
  auto g = single_wall_arena();
  auto spec = ObservationSpec::vector_obs(4);
  PointmassState s{4.80, 5.0, 2.0, 0.0};
  pointmass_step(s, {0.0, 0.0}, p, g);
  CHECK(s.vx == doctest::Approx(-p.restitution * 2.0).epsilon(1e-9));
  CHECK(s.vy == doctest::Approx(0.0));
  CHECK(s.px == doctest::Approx(5.0 - p.radius).epsilon(1e-9));
}

TEST_CASE("pointmass: oblique hits keep the tangential component") {
  PointmassParams p;
  p.drag = 0.0;
  auto g = single_wall_arena();
  love::Rng rng(2);
  for (int it = 0; it < 50; ++it) {
    const double vx = rng.uniform(0.5, 4.0);
    const double vy = rng.uniform(-3.0, 3.0);
    PointmassState s{5.0 - p.radius - vx * p.dt + 1e-4, 5.0, vx, vy};
    pointmass_step(s, {0.0, 0.0}, p, g);
    // Reflection oracle for a vertical wall: normal is -x, tangent is y.
    CHECK(s.vx == doctest::Approx(-p.restitution * vx).epsilon(1e-6));
    CHECK(s.vy == doctest::Approx(vy).epsilon(1e-6));
  }
}

TEST_CASE("bugtrap geometry: passage width is diameter / 0.9") {
  PointmassParams p;
  auto g = bugtrap_geometry(p);
  const double passage = 2.0 * p.radius / 0.9;
  // The two right-wall segments leave exactly one gap of `passage`.
  double gap_lo = 0, gap_hi = 0;
  for (const auto& w : g.walls) {
    if (w.x1 == 6.5 && w.x2 == 6.5) {
      if (w.y1 < w.y2) { gap_lo = std::max(gap_lo, 0.0); }
    }
  }
  // Locate the gap as the free interval on the right wall.
  std::vector<std::pair<double, double>> spans;
  for (const auto& w : g.walls)
    if (w.x1 == 6.5 && w.x2 == 6.5)
      spans.push_back({std::min(w.y1, w.y2), std::max(w.y1, w.y2)});
  REQUIRE(spans.size() == 2);
  const double lo = std::min(spans[0].second, spans[1].second);
  const double hi = std::max(spans[0].first, spans[1].first);
  CHECK(hi - lo == doctest::Approx(passage).epsilon(1e-12));
  CHECK(g.has_trap);
  CHECK(g.escaped(9.5, 5.0));
  CHECK_FALSE(g.escaped(g.start_x, g.start_y));
}

TEST_CASE("maze geometry: corridor width is diameter / 0.33") {
  PointmassParams p;
  auto g = maze_geometry(p);
  const double corridor = 2.0 * p.radius / 0.33;
  // Interior walls are vertical lines spaced exactly one corridor apart.
  std::vector<double> xs;
  for (const auto& w : g.walls)
    if (w.x1 == w.x2 && w.x1 > 0 && w.x1 < g.size) xs.push_back(w.x1);
  std::sort(xs.begin(), xs.end());
  REQUIRE(xs.size() >= 2);
  for (std::size_t i = 1; i < xs.size(); ++i)
    CHECK(xs[i] - xs[i - 1] == doctest::Approx(corridor).epsilon(1e-12));
  CHECK(xs.front() == doctest::Approx(corridor).epsilon(1e-12));
}

TEST_CASE("pendulum: starts down with no reward, upright at rest is rewarded") {
  PendulumParams p;
  auto spec = ObservationSpec::vector_obs(3);
  PendulumEnv env(p, ObsMode::vector);
  auto first = env.reset();
  CHECK(first.true_state[0] == doctest::Approx(0.0));
  CHECK(first.reward == 0.0);
  Eigen::VectorXd zero(1);
  zero << 0.0;
  auto r = env.step(zero);
  CHECK(r.reward == 0.0);

  PendulumState top{M_PI, 0.0};
  auto rr = pendulum_step(top, 0.0, p, spec);
  CHECK(rr.reward == 1.0);
}

TEST_CASE("pendulum: torque limit cannot reach the top directly") {
  PendulumParams p;
  auto spec = ObservationSpec::vector_obs(3);
  PendulumState s{0.0, 0.0};
  double best = 0;
  for (int k = 0; k < 200; ++k) {
    pendulum_step(s, p.torque_limit, p, spec);
    best = std::max(best, M_PI - std::abs(M_PI - std::abs(s.angle)));
  }
  // The swing stalls well below upright without energy pumping.
  CHECK(best < M_PI - 0.5);
}

TEST_CASE("pendulum: undamped unactuated energy is conserved") {
  PendulumParams p;
  p.damping = 0.0;
  p.dt = 0.01;
  auto spec = ObservationSpec::vector_obs(3);
  PendulumState s{2.0, 0.0};
  const double e0 = pendulum_energy(s, p);
  for (int k = 0; k < 100; ++k) {
    pendulum_step(s, 0.0, p, spec);
    CHECK(std::abs(pendulum_energy(s, p) - e0) < 1e-3);
  }
}

TEST_CASE("pendulum: angle stays wrapped to (-pi, pi]") {
  PendulumParams p;
  auto spec = ObservationSpec::vector_obs(3);
  PendulumState s{3.0, 7.9};
  love::Rng rng(3);
  for (int k = 0; k < 500; ++k) {
    pendulum_step(s, rng.uniform(-2, 2), p, spec);
    CHECK(s.angle > -M_PI);
    CHECK(s.angle <= M_PI);
  }
  CHECK(wrap_angle(3 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-3 * M_PI) == doctest::Approx(M_PI));
}

TEST_CASE("sparsify: zeroes below the threshold, boundary survives") {
  CHECK(sparsify(0.2, 0.25) == 0.0);
  CHECK(sparsify(0.7, 0.7) == doctest::Approx(0.7));
  CHECK(sparsify(1.0, 0.7) == doctest::Approx(1.0));
}

TEST_CASE("render_topdown: agent disk area matches the analytic value") {
  ArenaGeometry g;
  g.size = 10.0;
  g.walls = {};
  const double radius = 1.5;
  const int res = 64;
  auto img = render_topdown(g, 5.0, 5.0, radius, res);
  int red = 0;
  for (int i = 0; i < res * res; ++i)
    if (img[i * 3] > 0.5f && img[i * 3 + 1] < 0.5f) ++red;
  const double expected = M_PI * radius * radius * (res / g.size) * (res / g.size);
  CHECK(double(red) > 0.8 * expected);
  CHECK(double(red) < 1.2 * expected);

  auto img2 = render_topdown(g, 5.0, 5.0, radius, res);
  CHECK((img - img2).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("render_topdown: wall pixels do not depend on agent position") {
  PointmassParams p;
  auto g = bugtrap_geometry(p);
  const int res = 64;
  auto a = render_topdown(g, 4.0, 5.0, p.radius, res);
  auto b = render_topdown(g, 5.5, 4.2, p.radius, res);
  for (int i = 0; i < res * res; ++i) {
    const bool wall_a = a[i * 3] > 0.9f && a[i * 3 + 1] > 0.9f && a[i * 3 + 2] > 0.9f;
    const bool wall_b = b[i * 3] > 0.9f && b[i * 3 + 1] > 0.9f && b[i * 3 + 2] > 0.9f;
    CHECK(wall_a == wall_b);
  }
}

namespace {

// Constant-reward stub for wrapper arithmetic.
class ConstantRewardEnv final : public Env {
 public:
  StepResult reset() override {
    steps_ = 0;
    return make(0);
  }
  StepResult step(const Eigen::VectorXd&) override {
    ++steps_;
    return make(1.0);
  }
  ObservationSpec observation_spec() const override {
    return ObservationSpec::vector_obs(1);
  }
  int action_dim() const override { return 1; }
  int steps() const { return steps_; }

 private:
  StepResult make(double reward) {
    StepResult r;
    r.observation = Eigen::VectorXf::Constant(1, float(steps_));
    r.reward = reward;
    r.true_state = {double(steps_)};
    return r;
  }
  int steps_ = 0;
};

}  // namespace

TEST_CASE("action_repeat_wrap: identity at k=1, reward summing at k=2") {
  {
    auto env = std::make_unique<ConstantRewardEnv>();
    auto* raw = env.get();
    auto wrapped = action_repeat_wrap(std::move(env), 1);
    wrapped->reset();
    auto r = wrapped->step(Eigen::VectorXd::Zero(1));
    CHECK(r.reward == doctest::Approx(1.0));
    CHECK(raw->steps() == 1);
  }
  {
    auto env = std::make_unique<ConstantRewardEnv>();
    auto* raw = env.get();
    auto wrapped = action_repeat_wrap(std::move(env), 2);
    wrapped->reset();
    auto r = wrapped->step(Eigen::VectorXd::Zero(1));
    CHECK(r.reward == doctest::Approx(2.0));     // rewards summed
    CHECK(raw->steps() == 2);                    // two raw interactions
    CHECK(r.true_state[0] == doctest::Approx(2.0));  // last observation returned
  }
  CHECK_THROWS_AS(action_repeat_wrap(std::make_unique<ConstantRewardEnv>(), 0),
                  std::invalid_argument);
}

TEST_CASE("observation modes expose identical underlying transitions") {
  EnvOptions opts;
  opts.image_size = 16;
  auto vec_env = make_env("bugtrap", opts);
  auto img_env = make_env("bugtrap_pixels", opts);
  vec_env->reset();
  img_env->reset();
  love::Rng rng(4);
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd a(2);
    a << rng.uniform(-1, 1), rng.uniform(-1, 1);
    auto rv = vec_env->step(a);
    auto ri = img_env->step(a);
    REQUIRE(rv.true_state.size() == ri.true_state.size());
    for (std::size_t i = 0; i < rv.true_state.size(); ++i)
      CHECK(rv.true_state[i] == doctest::Approx(ri.true_state[i]).epsilon(1e-12));
  }
}

TEST_CASE("registry: all names build, bad input is rejected") {
  for (const auto& name : registered_envs()) {
    if (name.rfind("pointmass_file", 0) == 0) continue;
    EnvOptions opts;
    opts.image_size = 16;
    auto env = make_env(name, opts);
    auto first = env->reset();
    CHECK(first.observation.size() == env->observation_spec().flat_dim());
  }
  CHECK_THROWS_AS(make_env("nonexistent"), std::invalid_argument);
  CHECK_THROWS_AS(make_env("pointmass_file"), std::invalid_argument);
}

TEST_CASE("registry: wall files define pointmass arenas") {
  const std::string path = "test_walls.txt";
  {
    std::ofstream out(path);
    out << "# box with a diagonal\n";
    out << "0 0 8 0\n8 0 8 8\n8 8 0 8\n0 8 0 0\n";
    out << "2 2 6 6  # diagonal\n";
  }
  EnvOptions opts;
  opts.walls_file = path;
  auto env = make_env("pointmass_file", opts);
  auto g = geometry_from_file(path);
  CHECK(g.walls.size() == 5);
  CHECK(g.size == doctest::Approx(8.0));
  env->reset();
  auto r = env->step(Eigen::Vector2d(0.3, 0.1));
  CHECK(r.reward == 0.0);
  std::remove(path.c_str());
}
