#include "doctest.h"

#include <cmath>

#include "ptq/hawkes.hpp"
#include "ptq/sampling.hpp"
#include "ptq/stats.hpp"

using namespace ptq;

namespace {

PoissonModel make_poisson() {
  PoissonParams p;
  p.rates = Vector(3);
  p.rates << 0.5, 1.0, 1.5;
  return PoissonModel(p);
}

HawkesModel make_hawkes() { return HawkesModel(random_hawkes(3, 1.5, 31)); }

}  // namespace

TEST_CASE("poisson thinning reproduces count moments and mark frequencies") {
  const PoissonModel model = make_poisson();
  const double horizon = 2.0;
  const int n = 20000;
  double mean = 0.0, m2 = 0.0;
  long mark_counts[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) {
    RngStream rng = RngStream::derive(5, i);
    const SampleResult s =
        sample_thinning(model, 0.0, horizon, EventSequence{}, rng);
    CHECK_FALSE(s.budget_exceeded);
    CHECK(s.seq.window_end == horizon);
    mean += s.seq.size();
    m2 += static_cast<double>(s.seq.size()) * s.seq.size();
    for (const auto& ev : s.seq.events) ++mark_counts[ev.mark];
    CHECK_NOTHROW(validate_sequence(s.seq, 3));
  }
  mean /= n;
  m2 /= n;
  const double lam = 3.0 * horizon;  // Poisson(6)
  CHECK(std::abs(mean - lam) < 4.0 * std::sqrt(lam / n));
  CHECK(std::abs((m2 - mean * mean) - lam) < 0.15);
  const double total = mark_counts[0] + mark_counts[1] + mark_counts[2];
  CHECK(mark_counts[0] / total == doctest::Approx(0.5 / 3.0).epsilon(0.05));
  CHECK(mark_counts[2] / total == doctest::Approx(1.5 / 3.0).epsilon(0.05));
}

TEST_CASE("time-rescaled gaps are unit exponential") {
  const HawkesModel model = make_hawkes();
  const MarkSet all = MarkSet::all(3);
  std::vector<double> rescaled;
  // fixed event count per trajectory: a fixed time window would
  // length-bias the completed gaps
  for (int i = 0; i < 400; ++i) {
    RngStream rng = RngStream::derive(77, i);
    const SampleResult s =
        sample_until_nth_event(model, 0.0, 10, EventSequence{}, rng);
    auto state = model.start({}, 0.0);
    double prev = 0.0;
    for (const auto& ev : s.seq.events) {
      rescaled.push_back(state->compensator(prev, ev.time, all));
      state->add_event(ev);
      prev = ev.time;
    }
  }
  REQUIRE(rescaled.size() > 2000);
  CHECK(ks_test_exp1(rescaled) > 0.01);
}

TEST_CASE("zero-intensity model produces empty sequences") {
  HawkesParams p;
  p.mu = Vector::Zero(2);
  p.alpha = Matrix::Zero(2, 2);
  p.beta = Matrix::Ones(2, 2);
  const HawkesModel model(p);
  RngStream rng(1);
  const SampleResult s = sample_thinning(model, 0.0, 50.0, EventSequence{}, rng);
  CHECK(s.seq.empty());
  CHECK_FALSE(s.budget_exceeded);
}

TEST_CASE("budget flags are reported") {
  const PoissonModel model = make_poisson();
  RngStream rng(3);
  TrajectoryBudget tiny;
  tiny.max_events = 2;
  const SampleResult s =
      sample_thinning(model, 0.0, 100.0, EventSequence{}, rng, tiny);
  CHECK(s.budget_exceeded);
  CHECK(s.seq.size() == 2);

  RngStream rng2(3);
  CHECK_THROWS_AS(
      sample_thinning(model, 0.0, kInf, EventSequence{}, rng2),
      BadArgument);  // infinite horizon needs a finite budget
}

TEST_CASE("restricted sampling never emits masked marks") {
  const HawkesModel model = make_hawkes();
  RestrictionSchedule sched;
  sched.boundaries = {1.0, 3.0};
  sched.restricted = {MarkSet(3, {0}), MarkSet(3, {1, 2})};
  for (int i = 0; i < 2000; ++i) {
    RngStream rng = RngStream::derive(13, i);
    const SampleResult s =
        sample_restricted(model, sched, 0.0, 4.0, EventSequence{}, rng);
    CHECK(in_query_space(s.seq, sched, 0.0));
  }
}

TEST_CASE("importance weight equals the proposal/target likelihood ratio") {
  const HawkesModel model = make_hawkes();
  RestrictionSchedule sched;
  sched.boundaries = {1.2, 2.0};
  sched.restricted = {MarkSet(3, {1}), MarkSet(3, {0, 2})};
  const MaskedModel proposal(model, sched, 0.0);
  for (int i = 0; i < 100; ++i) {
    RngStream rng = RngStream::derive(29, i);
    const SampleResult s =
        sample_restricted(model, sched, 0.0, 2.0, EventSequence{}, rng);
    const double log_p = log_likelihood(model, s.seq, 0.0, 2.0, {});
    const double log_q = log_likelihood(proposal, s.seq, 0.0, 2.0, {});
    // log q - log p = sum of masked-span compensators under the target;
    // the event terms cancel because the proposal never masks its own events
    double masked = 0.0;
    {
      auto state = model.start({}, 0.0);
      double prev = 0.0;
      std::size_t next = 0;
      for (std::size_t span = 0; span < sched.span_count(); ++span) {
        const double hi = sched.boundaries[span];
        while (next < s.seq.size() && s.seq[next].time <= hi) {
          masked += state->compensator(prev, s.seq[next].time,
                                       sched.restricted[span]);
          prev = s.seq[next].time;
          state->add_event(s.seq[next]);
          ++next;
        }
        masked += state->compensator(prev, hi, sched.restricted[span]);
        prev = hi;
      }
    }
    CHECK(log_q - log_p == doctest::Approx(masked).epsilon(1e-9));
  }
}

TEST_CASE("sample_until helpers") {
  const HawkesModel model = make_hawkes();
  for (int i = 0; i < 200; ++i) {
    RngStream rng = RngStream::derive(59, i);
    const SampleResult s =
        sample_until_nth_event(model, 0.0, 5, EventSequence{}, rng);
    CHECK_FALSE(s.budget_exceeded);
    CHECK(s.seq.size() == 5);

    RngStream rng2 = RngStream::derive(60, i);
    const MarkSet target(3, {2});
    const SampleResult m =
        sample_until_mark(model, 0.0, target, EventSequence{}, rng2);
    CHECK_FALSE(m.budget_exceeded);
    REQUIRE(!m.seq.empty());
    CHECK(m.seq.events.back().mark == 2);
    for (std::size_t j = 0; j + 1 < m.seq.size(); ++j)
      CHECK_FALSE(target.contains(m.seq[j].mark));
  }
}

TEST_CASE("sampling is reproducible under identical derived streams") {
  const HawkesModel model = make_hawkes();
  for (int i = 0; i < 20; ++i) {
    RngStream a = RngStream::derive(91, i);
    RngStream b = RngStream::derive(91, i);
    const SampleResult ra = sample_thinning(model, 0.0, 3.0, EventSequence{}, a);
    const SampleResult rb = sample_thinning(model, 0.0, 3.0, EventSequence{}, b);
    REQUIRE(ra.seq.size() == rb.seq.size());
    for (std::size_t j = 0; j < ra.seq.size(); ++j) {
      CHECK(ra.seq[j].time == rb.seq[j].time);
      CHECK(ra.seq[j].mark == rb.seq[j].mark);
    }
  }
}

TEST_CASE("poisson log-likelihood closed form") {
  const PoissonModel model = make_poisson();
  EventSequence seq{{{0.5, 0}, {1.25, 2}}, 2.0};
  const double expected =
      std::log(0.5) + std::log(1.5) - 3.0 * 2.0;
  CHECK(log_likelihood(model, seq, 0.0, 2.0, {}) ==
        doctest::Approx(expected).epsilon(1e-13));

  EventSequence outside{{{2.5, 0}}, 3.0};
  CHECK_THROWS_AS(log_likelihood(model, outside, 0.0, 2.0, {}),
                  HorizonViolation);
}
