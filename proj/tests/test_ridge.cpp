#include <doctest.h>

#include <cmath>
#include <random>

#include "fifd/oracles.hpp"
#include "fifd/ridge.hpp"
#include "fifd/simharness.hpp"

using namespace fifd;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

struct Window {
  WindowBuffer buf;
  GramState gram;
  Window(std::size_t s, Index d) : buf(s), gram(GramState::empty(d)) {}
};

Window gaussian_window(std::size_t s, Index d, std::size_t n, unsigned seed, double noise = 1.0) {
  std::seed_seq seq{seed};
  Rng rng(seq);
  std::normal_distribution<double> z(0.0, noise);
  Window w(s, d);
  for (std::size_t i = 0; i < n; ++i) push(w.buf, w.gram, {gen_context(Design::gaussian_normalized, d, rng), z(rng)});
  return w;
}

}  // namespace

TEST_CASE("estimate_sigma") {
  const std::vector<double> flat{3, 3, 3, 3};
  CHECK(estimate_sigma(flat) == 0.0);
  const std::vector<double> two{0, 2};
  CHECK(estimate_sigma(two) == doctest::Approx(std::sqrt(2.0)));
  const std::vector<double> one{1};
  CHECK_THROWS_AS(estimate_sigma(one), ConfigError);

  std::seed_seq seq{31u};
  Rng rng(seq);
  std::normal_distribution<double> z(0.0, 2.0);
  std::vector<double> ys(1000);
  for (auto& y : ys) y = z(rng);
  const double s = estimate_sigma(ys);
  CHECK(s >= 1.9);
  CHECK(s <= 2.1);
}

TEST_CASE("adaptive_lambda") {
  CHECK(adaptive_lambda(0.0, 1.0, 40, 100, 0.05) == 0.0);
  CHECK(adaptive_lambda(1.0, 1.0, 2, 1, 2.0 / std::exp(1.0)) == doctest::Approx(2.0));
  CHECK(adaptive_lambda(1.0, 1.0, 100, 100, 0.05) == doctest::Approx(40.73).epsilon(1e-4));
  CHECK(adaptive_lambda(1.0, 1.0, 100, 100, 0.05, 0.5) ==
        doctest::Approx(2.0 * adaptive_lambda(1.0, 1.0, 100, 100, 0.05)));
  CHECK_THROWS_AS(adaptive_lambda(1.0, 1.0, 10, 10, 0.05, 0.0), ConfigError);
  CHECK_THROWS_AS(adaptive_lambda(1.0, 1.0, 10, 10, 1.0), ConfigError);
}

TEST_CASE("wpssr bound") {
  CHECK(wpssr_bound(100, 110, 0.05, 30) == doctest::Approx(1.018).epsilon(1e-3));
  const TruthProfile one_hot = TruthProfile::from(vec({0, 0.8, 0, -0.6}));
  const auto c = wpssr_check(one_hot, 40, 4, 0.05);
  CHECK(c.applicable);
  CHECK(c.ratio == doctest::Approx(1.0));
  const auto none = wpssr_check(TruthProfile::from(vec({-1, 0})), 40, 2, 0.05);
  CHECK_FALSE(none.applicable);
  CHECK_FALSE(none.holds);

  for (std::size_t s : {10u, 40u, 100u, 400u}) {
    for (Index d : {10, 100, 1000}) {
      for (int p : {1, 5, 50}) {
        const double b = wpssr_bound(s, d, 0.05, p);
        CHECK(wpssr_bound(s * 2, d, 0.05, p) > b);
        CHECK(wpssr_bound(s, d, 0.05, p + 1) > b);
        CHECK(wpssr_bound(s, d * 2, 0.05, p) < b);
      }
    }
  }
}

TEST_CASE("truth profile") {
  const TruthProfile t = TruthProfile::from(vec({0.3, -0.1, 0.7, -0.5, 0.0}));
  CHECK(t.p_count == 2);
  CHECK(t.n_count == 2);
  CHECK(t.p_min == doctest::Approx(0.3));
  CHECK(t.n_max == doctest::Approx(-0.1));
  CHECK(t.inf_norm == doctest::Approx(0.7));
}

TEST_CASE("ridge_estimate") {
  Window w = gaussian_window(20, 8, 20, 32);
  set_ridge_lambda(w.gram, w.buf, 1e12);
  CHECK(ridge_estimate(w.gram).norm() <= 1e-6);

  Window full = gaussian_window(30, 6, 30, 33);
  const Vector ols = ols_estimate(full.gram);
  set_ridge_lambda(full.gram, full.buf, 0.0);
  CHECK((ridge_estimate(full.gram) - ols).cwiseAbs().maxCoeff() <= 1e-9);

  Window under = gaussian_window(5, 10, 5, 34);
  set_ridge_lambda(under.gram, under.buf, 1.0);
  CHECK((ridge_estimate(under.gram) - oracle::batch_ridge(under.buf, 10, 1.0)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("ridge_ellipsoid_radius") {
  GramState g = GramState::empty(8);
  g.x_inf_norm = 1.0;
  g.min_eig = 4.0;  // phi^2 = 1 at s = 4, and d = 2s
  auto r = ridge_ellipsoid_radius(g, 1.0, nullptr, 0.05, 4, 8);
  CHECK(r.radius == doctest::Approx(1.0));
  CHECK_FALSE(r.valid);
  CHECK(ridge_ellipsoid_radius(g, 2.0, nullptr, 0.05, 4, 8).radius == doctest::Approx(2.0));

  Window w = gaussian_window(40, 100, 40, 35);
  const double lambda = adaptive_lambda(estimate_sigma(w.buf.responses()), w.gram.x_inf_norm, 40, 100, 0.05);
  set_ridge_lambda(w.gram, w.buf, lambda);
  std::seed_seq seq{36u};
  Rng rng(seq);
  const TruthProfile truth = gen_truth(100, rng);
  const auto e = ridge_ellipsoid_radius(w.gram, 1.0, &truth, 0.05, 40, 100);
  const long double kappa = std::log(6.0L * truth.p_count / 0.05L) / std::sqrt(std::log(200.0L / 0.05L));
  const long double nu = static_cast<long double>(truth.inf_norm) / truth.p_min;
  const long double q = static_cast<long double>(w.gram.x_inf_norm) / (static_cast<long double>(w.gram.min_eig) / 40.0L);
  const long double expect = kappa * nu * q * std::sqrt(100.0L / 80.0L);
  CHECK(std::abs(e.radius - static_cast<double>(expect)) <= 1e-12 * static_cast<double>(expect));
  CHECK(e.valid);
}

TEST_CASE("adaptive ridge with constant responses reduces to OLS") {
  SimConfig c;
  c.d = 5;
  c.s = 12;
  c.t_horizon = 60;
  Stream stream = make_stream(c, 0);
  for (auto& o : stream.obs) o.y = 0.0;
  const RunTrace ridge = run_on_stream(c, AlgorithmSpec::parse("fifd_adaptive_ridge"), stream, 0);
  const RunTrace ols = run_on_stream(c, AlgorithmSpec::parse("fifd_ols"), stream, 0);
  for (std::size_t i = 0; i < ridge.steps.size(); ++i) {
    CHECK(ridge.steps[i].lambda == 0.0);
    CHECK(ridge.steps[i].y_hat == doctest::Approx(ols.steps[i].y_hat));
  }
}

TEST_CASE("adaptive lambda trace matches per-step re-derivation") {
  SimConfig c;
  c.d = 100;
  c.s = 40;
  c.t_horizon = 300;
  const Stream stream = make_stream(c, 4);
  WindowBuffer buf(c.s);
  GramState gram = GramState::empty(c.d);
  update_window(buf, gram, std::span(stream.obs).first(c.s), 0);
  RidgeState state;
  RidgeParams params;
  params.theta_inf_norm = stream.truth.inf_norm;
  double worst = 0.0;
  double worst_min_eig = 0.0;
  for (std::size_t i = c.s; i < stream.obs.size(); ++i) {
    const long double expect = oracle::window_lambda(buf, c.d, c.delta, params.theta_inf_norm);
    const StepRecord r = fifd_ridge_step(buf, gram, state, std::span(stream.obs).subspan(i, 1), 0,
                                         stream.truth, params);
    worst = std::max(worst, std::abs(r.lambda - static_cast<double>(expect)) / static_cast<double>(expect));
    worst_min_eig = std::max(worst_min_eig, r.lambda - r.min_eig);
  }
  CHECK(worst <= 1e-10);
  CHECK(worst_min_eig <= 1e-9);
}

TEST_CASE("adaptive lambda is flat for iid data") {
  SimConfig c;
  c.algorithms = {AlgorithmSpec::parse("fifd_adaptive_ridge")};
  const RunTrace tr = run_schedule(c, c.algorithms[0], 0);
  double mean = 0.0;
  for (const auto& r : tr.steps) mean += r.lambda;
  mean /= static_cast<double>(tr.steps.size());
  double var = 0.0;
  for (const auto& r : tr.steps) var += (r.lambda - mean) * (r.lambda - mean);
  const double sd = std::sqrt(var / static_cast<double>(tr.steps.size() - 1));
  CHECK(sd / mean < 0.5);
}

TEST_CASE("doubling responses doubles lambda") {
  Window w = gaussian_window(30, 10, 45, 37);
  const auto ys = w.buf.responses();
  std::vector<double> doubled(ys);
  for (auto& y : doubled) y *= 2.0;
  const double l1 = adaptive_lambda(estimate_sigma(ys), w.gram.x_inf_norm, 30, 10, 0.05);
  const double l2 = adaptive_lambda(estimate_sigma(doubled), w.gram.x_inf_norm, 30, 10, 0.05);
  CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(1e-12));
}

TEST_CASE("fixed ridge") {
  for (double sigma : {1.0, 2.0, 3.0}) {
    for (double m : {1.0, 10.0, 100.0}) {
      AlgorithmSpec a;
      a.kind = AlgorithmSpec::Kind::fixed_ridge;
      a.lambda = m;
      a.lambda_per_sigma = true;
      CHECK(a.resolved_lambda(sigma) == doctest::Approx(m * sigma));
    }
  }

  SimConfig c;
  c.d = 20;
  c.s = 30;
  c.t_horizon = 200;
  const Stream stream = make_stream(c, 2);
  const RunTrace adaptive = run_on_stream(c, AlgorithmSpec::parse("fifd_adaptive_ridge"), stream, 2);
  AlgorithmSpec frozen;
  frozen.kind = AlgorithmSpec::Kind::fixed_ridge;
  frozen.lambda = adaptive.steps.front().lambda;
  const RunTrace fixed = run_on_stream(c, frozen, stream, 2);
  CHECK(fixed.steps.front().y_hat == doctest::Approx(adaptive.steps.front().y_hat).epsilon(1e-12));
  for (const auto& r : fixed.steps) {
    CHECK(r.lambda_delta == 0.0);
    CHECK(r.lambda == frozen.lambda);
  }
  CHECK_THROWS_AS(AlgorithmSpec::parse("fixed_ridge(-1)"), ConfigError);
}

TEST_CASE("switching_step") {
  CHECK(switching_step(SwitchMode::ridge, 200, 100) == SwitchMode::ridge);
  CHECK(switching_step(SwitchMode::ridge, 201, 100) == SwitchMode::ols);
  CHECK(switching_step(SwitchMode::ols, 3, 100) == SwitchMode::ols);
  CHECK(switching_step(SwitchMode::ridge, 3000, 100000) == SwitchMode::ridge);

  SimConfig c;
  c.d = 100;
  c.s = 40;
  c.t_horizon = 400;
  c.schedule = Schedule{Schedule::Kind::add_k_delete_1, 2};
  const RunTrace tr = run_schedule(c, AlgorithmSpec::parse("switching_ridge"), 0);
  REQUIRE(tr.switch_t > 0);
  const auto idx = static_cast<std::size_t>(tr.switch_t - static_cast<long>(c.s) - 1);
  CHECK(tr.steps[idx].window_size == 201);
  CHECK(tr.steps[idx - 1].window_size == 200);
  CHECK(tr.steps[idx].lambda == 0.0);
  CHECK(tr.steps[idx - 1].lambda > 0.0);
}

TEST_CASE("ridge gram never drops below lambda") {
  SimConfig c;
  c.d = 50;
  c.s = 20;
  c.t_horizon = 400;
  c.design = Design::basis_uniform;
  const RunTrace tr = run_schedule(c, AlgorithmSpec::parse("fifd_adaptive_ridge"), 1);
  for (const auto& r : tr.steps) CHECK(r.min_eig >= r.lambda - 1e-9);
}
