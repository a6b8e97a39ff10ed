#include "doctest.h"

#include <cmath>

#include "ptq/hawkes.hpp"
#include "ptq/quadrature.hpp"
#include "ptq/rng.hpp"

using namespace ptq;

namespace {

HawkesParams two_mark_params() {
  HawkesParams p;
  p.mu = Vector(2);
  p.mu << 0.5, 0.3;
  p.alpha = Matrix(2, 2);
  p.alpha << 0.4, 0.1, 0.2, 0.3;
  p.beta = Matrix(2, 2);
  p.beta << 1.5, 2.0, 1.0, 2.5;
  return p;
}

// spectral radius by power iteration, independent of Eigen's solver
double power_iteration_radius(const Matrix& m) {
  Vector v = Vector::Ones(m.rows());
  double lambda = 0.0;
  for (int it = 0; it < 20000; ++it) {
    v = m * v;
    lambda = v.norm();
    if (lambda == 0.0) return 0.0;
    v /= lambda;
  }
  return lambda;
}

}  // namespace

TEST_CASE("parameter validation") {
  HawkesParams p = two_mark_params();
  CHECK_NOTHROW(p.validate());
  p.mu[0] = -0.1;
  CHECK_THROWS_AS(p.validate(), BadArgument);
  p = two_mark_params();
  p.beta(1, 0) = 0.0;
  CHECK_THROWS_AS(p.validate(), BadArgument);
  p = two_mark_params();
  p.alpha.resize(1, 2);
  CHECK_THROWS_AS(p.validate(), BadArgument);

  PoissonParams pp;
  pp.rates = Vector(2);
  pp.rates << 1.0, 0.0;
  CHECK_THROWS_AS(pp.validate(), BadArgument);
}

TEST_CASE("single-event intensity closed form") {
  const HawkesModel model(two_mark_params());
  const HawkesParams& p = model.params();
  EventSequence h{{{1.0, 1}}, 1.0};

  const double t = 1.7, dt = t - 1.0;
  const Vector lam = model.intensity(t, h);
  CHECK(lam[0] == doctest::Approx(p.mu[0] +
                                  p.alpha(0, 1) * std::exp(-p.beta(0, 1) * dt))
                      .epsilon(1e-14));
  CHECK(lam[1] == doctest::Approx(p.mu[1] +
                                  p.alpha(1, 1) * std::exp(-p.beta(1, 1) * dt))
                      .epsilon(1e-14));
}

TEST_CASE("compensator matches a dense trapezoid oracle") {
  const HawkesModel model(two_mark_params());
  EventSequence h{{{0.3, 0}, {0.9, 1}, {1.4, 0}}, 1.5};

  for (const MarkSet& set :
       {MarkSet::all(2), MarkSet(2, {0}), MarkSet(2, {1})}) {
    const double a = 1.5, b = 3.25;
    const double closed = model.compensator(a, b, h, set);
    const double numeric = trapezoid(
        [&](double t) { return set.select_sum(model.intensity(t, h)); }, a, b,
        100001);
    CHECK(closed == doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("unit-rate compensator over one decay constant") {
  // one mark, one event at 0, mu=1, alpha=0.9, beta=1:
  // integral_0^1 (1 + 0.9 e^{-t}) dt = 1 + 0.9 (1 - e^{-1})
  HawkesParams p;
  p.mu = Vector::Ones(1);
  p.alpha = Matrix::Constant(1, 1, 0.9);
  p.beta = Matrix::Ones(1, 1);
  const HawkesModel model(p);
  EventSequence h{{{0.0, 0}}, 0.0};
  const double val = model.compensator(0.0, 1.0, h, MarkSet::all(1));
  CHECK(val == doctest::Approx(1.0 + 0.9 * (1.0 - std::exp(-1.0)))
                   .epsilon(1e-14));
  // frozen: 1 + 0.9 (1 - 1/e) = 1.5689085029457019
  CHECK(val == doctest::Approx(1.5689085029457019).epsilon(1e-14));
}

TEST_CASE("compensator is additive over marks and intervals") {
  const HawkesModel model(two_mark_params());
  EventSequence h{{{0.5, 1}}, 0.6};
  const double whole = model.compensator(0.6, 2.0, h, MarkSet::all(2));
  const double split_marks = model.compensator(0.6, 2.0, h, MarkSet(2, {0})) +
                             model.compensator(0.6, 2.0, h, MarkSet(2, {1}));
  const double split_time = model.compensator(0.6, 1.1, h, MarkSet::all(2)) +
                            model.compensator(1.1, 2.0, h, MarkSet::all(2));
  CHECK(whole == doctest::Approx(split_marks).epsilon(1e-13));
  CHECK(whole == doctest::Approx(split_time).epsilon(1e-13));
}

TEST_CASE("compensator derivative recovers the intensity") {
  const HawkesModel model(two_mark_params());
  EventSequence h{{{0.2, 0}, {0.8, 1}}, 1.0};
  const MarkSet all = MarkSet::all(2);
  for (double t : {1.0, 1.3, 2.7}) {
    const double eps = 1e-6;
    const double fd =
        (model.compensator(1.0, t + eps, h, all) -
         model.compensator(1.0, t, h, all)) / eps;
    CHECK(fd ==
          doctest::Approx(model.intensity(t, h).sum()).epsilon(1e-5));
  }
}

TEST_CASE("thinning bound dominates between events") {
  const HawkesModel model(two_mark_params());
  EventSequence h{{{0.1, 0}, {0.4, 1}, {0.45, 0}}, 0.5};
  const ThinningBound tb = model.thinning_bound(0.5, h);
  CHECK(tb.horizon == kInf);
  RngStream rng(11);
  for (int i = 0; i < 500; ++i) {
    const double t = 0.5 + 5.0 * rng.uniform();
    CHECK(model.intensity(t, h).sum() <= tb.bound * (1.0 + 1e-12));
  }
}

TEST_CASE("ExcitationState tracks the replayed intensity") {
  const HawkesParams p = random_hawkes(3, 1.5, 404);
  const HawkesModel model(p);
  RngStream rng(21);
  EventSequence h;
  ExcitationState ex(3);
  double t = 0.0;
  for (int i = 0; i < 200; ++i) {
    t += 0.05 + 0.3 * rng.uniform();
    const MarkId k = static_cast<MarkId>(rng.uniform() * 3);
    ex.decay_to(p, t);
    // probe a few times past the event prefix
    for (int probe = 0; probe < 5; ++probe) {
      const double tp = t + rng.uniform();
      const Vector fast = ex.intensity(p, tp);
      const Vector slow = model.intensity(tp, h);
      for (int m = 0; m < 3; ++m)
        CHECK(fast[m] == doctest::Approx(slow[m]).epsilon(1e-10));
    }
    ex.add_event(k);
    h.events.push_back({t, k});
  }
  CHECK_THROWS_AS(ex.decay_to(p, t - 1.0), TimeBeforeHistory);
}

TEST_CASE("incremental state agrees with the history contract") {
  const HawkesParams p = random_hawkes(4, 2.0, 505);
  const HawkesModel model(p);
  EventSequence h{{{0.2, 3}, {0.7, 0}}, 1.0};
  auto state = model.start(h, 1.0);
  state->add_event({1.5, 2});
  state->add_event({1.9, 1});
  EventSequence full = h;
  full.events.push_back({1.5, 2});
  full.events.push_back({1.9, 1});
  full.window_end = 1.9;
  const MarkSet set(4, {0, 2});
  CHECK(state->compensator(2.0, 3.5, set) ==
        doctest::Approx(model.compensator(2.0, 3.5, full, set)).epsilon(1e-12));
  const Vector a = state->intensity(2.3);
  const Vector b = model.intensity(2.3, full);
  for (int k = 0; k < 4; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
}

TEST_CASE("branching radius agrees with power iteration; random draws stable") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 99ULL}) {
    const HawkesParams p = random_hawkes(5, 3.0, seed);
    const double r = branching_spectral_radius(p);
    const Matrix branching = p.alpha.array() / p.beta.array();
    CHECK(r == doctest::Approx(power_iteration_radius(branching)).epsilon(1e-8));
    CHECK(r < 0.95 * (1.0 + 1e-12));
    CHECK((p.mu.array() >= 0.1).all());
    CHECK((p.mu.array() <= 1.0).all());
    CHECK((p.beta.array() >= 1.0).all());
    CHECK((p.beta.array() <= 3.0).all());
  }
  // identical seeds give identical models
  const HawkesParams a = random_hawkes(3, 1.0, 7);
  const HawkesParams b = random_hawkes(3, 1.0, 7);
  CHECK(a.mu == b.mu);
  CHECK(a.alpha == b.alpha);
  CHECK(a.beta == b.beta);
}

TEST_CASE("poisson model basics") {
  PoissonParams pp;
  pp.rates = Vector(3);
  pp.rates << 0.5, 1.0, 1.5;
  const PoissonModel model(pp);
  EventSequence h{{{0.5, 0}}, 1.0};
  CHECK(model.intensity(10.0, h).sum() == doctest::Approx(3.0));
  CHECK(model.compensator(1.0, 3.0, h, MarkSet(3, {1, 2})) ==
        doctest::Approx(5.0).epsilon(1e-14));
  CHECK(model.thinning_bound(0.0, h).bound == doctest::Approx(3.0));
}
