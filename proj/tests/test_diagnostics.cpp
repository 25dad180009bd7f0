#include <doctest.h>

#include <cmath>
#include <random>

#include "fifd/diagnostics.hpp"
#include "fifd/oracles.hpp"
#include "fifd/simharness.hpp"

using namespace fifd;

namespace {

Vector e(Index d, Index i) { return Vector::Unit(d, i); }

GramState window_of(Index d, std::initializer_list<Vector> xs) {
  GramState g = GramState::empty(d);
  for (const auto& x : xs) g.phi += x * x.transpose();
  recompute_pseudo_inverse(g);
  return g;
}

}  // namespace

TEST_CASE("frt on the basis windows") {
  const GramState full = window_of(4, {e(4, 0), e(4, 1), e(4, 2), e(4, 3)});
  const FrtRecord m2 = frt(full.inv, e(4, 0), e(4, 1));
  CHECK(m2.frt == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m2.sin_sq == doctest::Approx(1.0));
  CHECK(m2.in_range);

  const GramState dup = window_of(4, {e(4, 0), e(4, 1), e(4, 1), e(4, 3)});
  const FrtRecord m3 = frt(dup.inv, e(4, 0), e(4, 0));
  CHECK(m3.sin_sq == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m3.cos_sq == doctest::Approx(1.0));
  CHECK(m3.frt == doctest::Approx(1.0));

  const FrtRecord m4 = frt(dup.inv, e(4, 0), e(4, 2));
  CHECK(m4.incoming_norm_sq == 0.0);
  CHECK(m4.frt == doctest::Approx(1.0));

  const FrtRecord zero = frt(dup.inv, e(4, 2), e(4, 0));
  CHECK(zero.deleted_norm_sq == 0.0);
  CHECK(zero.frt == 0.0);
  CHECK(zero.cos_sq == 0.0);
  CHECK(zero.sin_sq == 0.0);
}

TEST_CASE("frt formula and angle identities") {
  std::seed_seq seq{41u};
  Rng rng(seq);
  for (int i = 0; i < 200; ++i) {
    const Index d = 6;
    GramState g = GramState::empty(d);
    for (int k = 0; k < 12; ++k) {
      const Vector x = gen_context(Design::gaussian_normalized, d, rng);
      g.phi += x * x.transpose();
    }
    recompute_pseudo_inverse(g);
    const Vector a = gen_context(Design::gaussian_normalized, d, rng);
    const Vector b = gen_context(Design::gaussian_normalized, d, rng);
    const FrtRecord r = frt(g.inv, a, b);
    CHECK(r.frt == doctest::Approx(r.deleted_norm_sq * (r.incoming_norm_sq * r.sin_sq + 1.0)).epsilon(1e-10));
    CHECK(r.cos_sq + r.sin_sq == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.cos_sq >= 0.0);
    CHECK(r.cos_sq <= 1.0 + 1e-12);
    const double ab = a.dot(g.inv * b);
    CHECK(r.cos_sq == doctest::Approx(ab * ab / (r.deleted_norm_sq * r.incoming_norm_sq)).epsilon(1e-10));
  }
}

TEST_CASE("frt invariants hold along harness runs") {
  SimConfig c;
  c.d = 10;
  c.s = 15;
  c.t_horizon = 400;
  for (auto design : {Design::gaussian_normalized, Design::basis_uniform}) {
    c.design = design;
    const RunTrace tr = run_schedule(c, AlgorithmSpec::parse("fifd_ols"), 0);
    for (const auto& r : tr.steps) {
      CHECK(r.frt == doctest::Approx(r.deleted_norm_sq * (r.incoming_norm_sq * r.sin_sq + 1.0)).epsilon(1e-10));
      if (r.deleted_norm_sq == 0.0) CHECK(r.frt == 0.0);
      CHECK(r.frt_in_range == (r.frt >= 0.0 && r.frt <= 2.0 + 1e-9));
    }
  }
}

TEST_CASE("rank_transition") {
  CHECK(rank_transition(4, 3, 4) == RankCase::decrease);
  CHECK(rank_transition(3, 4, 4) == RankCase::increase);
  CHECK(rank_transition(4, 4, 4) == RankCase::full);
  CHECK(rank_transition(2, 2, 4) == RankCase::unchanged);
  CHECK_THROWS_AS(rank_transition(1, 3, 4), StructuralError);
  CHECK_THROWS_AS(rank_transition(5, 4, 4), StructuralError);
  CHECK(to_string(RankCase::full) == "full");
}

TEST_CASE("det_update_identity") {
  const Vector a = (Vector(3) << 0.2, -0.4, 0.1).finished();
  const DetIdentity same = det_update_identity(a, a);
  CHECK(same.lhs == doctest::Approx(1.0));
  CHECK(same.rhs == doctest::Approx(1.0));

  const Vector b = (Vector(3) << 0.5, 0.3, -0.7).finished();
  const DetIdentity pure = det_update_identity(Vector::Zero(3), b);
  CHECK(pure.rhs == doctest::Approx(1.0 + b.squaredNorm()));
  CHECK(pure.lhs == doctest::Approx(pure.rhs));

  std::seed_seq seq{42u};
  Rng rng(seq);
  std::normal_distribution<double> z(0.0, 0.5);
  for (int i = 0; i < 500; ++i) {
    Vector x(4);
    Vector y(4);
    for (Index k = 0; k < 4; ++k) {
      x(k) = z(rng);
      y(k) = z(rng);
    }
    const DetIdentity id = det_update_identity(x, y);
    const Matrix m = Matrix::Identity(4, 4) - x * x.transpose() + y * y.transpose();
    CHECK(std::abs(id.lhs - id.rhs) <= 1e-10);
    CHECK(std::fabs(oracle::determinant(m) - id.rhs) <= 1e-10L);
  }
}

TEST_CASE("ols_bound on an empty horizon") {
  const std::vector<StepRecord> none;
  const BoundReport b = ols_bound(none, BoundConfig{10, 40, 1.0, 0.05, 1.0});
  CHECK(b.regret_actual == 0.0);
  CHECK(b.bound_value == 0.0);
  CHECK(b.holds);
}

TEST_CASE("ols_bound on a full-rank run") {
  SimConfig c;
  c.d = 10;
  c.s = 40;
  c.t_horizon = 500;
  const RunTrace tr = run_schedule(c, AlgorithmSpec::parse("fifd_ols"), 3);
  const BoundReport b = ols_bound(tr.steps, BoundConfig{c.d, c.s, c.sigma, c.delta, c.L});
  CHECK(b.conditions_met);
  CHECK(b.regret_actual <= b.bound_value);
  CHECK(b.holds);
  CHECK(b.decomposition.holds);
  CHECK(b.decomposition.min_slack >= 0.0);
  CHECK(b.det_trace_cap_holds);
  double sum = 0.0;
  for (const auto& r : tr.steps) sum += r.abs_loss;
  CHECK(b.regret_actual == doctest::Approx(sum));
}

TEST_CASE("ols_bound flags rank-deficient runs") {
  SimConfig c;
  c.d = 30;
  c.s = 20;
  c.t_horizon = 200;
  const RunTrace tr = run_schedule(c, AlgorithmSpec::parse("fifd_ols"), 0);
  CHECK_FALSE(ols_bound(tr.steps, BoundConfig{c.d, c.s, c.sigma, c.delta, c.L}).conditions_met);
}

TEST_CASE("ridge_bound with fixed lambda") {
  SimConfig c;
  c.d = 20;
  c.s = 30;
  c.t_horizon = 300;
  const RunTrace tr = run_schedule(c, AlgorithmSpec::parse("fixed_ridge(5)"), 1);
  const BoundConfig cfg{c.d, c.s, c.sigma, c.delta, c.L};
  const BoundReport b = ridge_bound(tr.steps, cfg, &tr.truth);
  CHECK(b.c2_phi == 1.0);
  CHECK(b.c2_reliable);
  CHECK(b.eta_ridge == doctest::Approx(20.0 * std::log(30.0 / 20.0 + 5.0)));
  CHECK(b.decomposition.holds);

  BoundConfig doubled = cfg;
  doubled.sigma = 2.0;
  CHECK(ridge_bound(tr.steps, doubled, &tr.truth).bound_value == doctest::Approx(2.0 * b.bound_value));

  const BoundReport free = ridge_bound(tr.steps, cfg, nullptr);
  CHECK(free.kappa == 1.0);
  CHECK(free.nu == 1.0);
  CHECK_FALSE(free.conditions_met);
}

TEST_CASE("decomposition holds on adaptive ridge prefixes") {
  SimConfig c;
  c.d = 50;
  c.s = 30;
  c.t_horizon = 600;
  const RunTrace tr = run_schedule(c, AlgorithmSpec::parse("fifd_adaptive_ridge"), 2);
  const DecompositionCheck chk = decomposition_check(tr.steps);
  CHECK(chk.holds);
  CHECK(chk.min_slack >= 0.0);
  const BoundReport b = ridge_bound(tr.steps, BoundConfig{c.d, c.s, c.sigma, c.delta, c.L}, &tr.truth);
  CHECK(b.c2_phi > 0.0);
}
