#pragma once

#include "ptq/core.hpp"
#include "ptq/rng.hpp"

namespace ptq {

// Guards non-terminating simulation; at least one bound must be finite when
// the sampling horizon itself is infinite.
struct TrajectoryBudget {
  long max_events = 10000;
  double max_time = kInf;
};

struct SampleResult {
  EventSequence seq;
  bool budget_exceeded = false;
};

// Zeroes the restricted marked intensities of a base model over the spans of
// a schedule, exposing the same contract. The thinning bound is inherited
// unchanged from the base model (it still dominates the masked total).
class MaskedModel final : public IntensityModel {
 public:
  MaskedModel(const IntensityModel& base, RestrictionSchedule schedule,
              double origin);

  const IntensityModel& base() const { return base_; }
  const RestrictionSchedule& schedule() const { return schedule_; }

  int mark_count() const override { return base_.mark_count(); }
  Vector intensity(double t, const EventSequence& history) const override;
  double compensator(double a, double b, const EventSequence& history,
                     const MarkSet& set) const override;
  ThinningBound thinning_bound(double t,
                               const EventSequence& history) const override;
  std::unique_ptr<ModelState> start(const EventSequence& history,
                                    double origin) const override;

 private:
  const IntensityModel& base_;
  RestrictionSchedule schedule_;
  double origin_;
};

// Exact simulation over (origin, horizon] by thinning, conditioned on
// `history` (all events at or before origin).
SampleResult sample_thinning(const IntensityModel& model, double origin,
                             double horizon, const EventSequence& history,
                             RngStream& rng, const TrajectoryBudget& budget = {});

// Thinning under the masked proposal; every returned sequence satisfies
// in_query_space(seq, schedule, origin).
SampleResult sample_restricted(const IntensityModel& model,
                               const RestrictionSchedule& schedule,
                               double origin, double horizon,
                               const EventSequence& history, RngStream& rng,
                               const TrajectoryBudget& budget = {});

// Simulates past origin until exactly n events have been accepted.
SampleResult sample_until_nth_event(const IntensityModel& model, double origin,
                                    long n, const EventSequence& history,
                                    RngStream& rng,
                                    const TrajectoryBudget& budget = {});

// Simulates past origin until the first event whose mark lies in `target`;
// that event is the last one of the returned sequence unless the budget ran
// out first.
SampleResult sample_until_mark(const IntensityModel& model, double origin,
                               const MarkSet& target,
                               const EventSequence& history, RngStream& rng,
                               const TrajectoryBudget& budget = {});

// Sequence log-likelihood over (origin, horizon]:
//   sum_i log lambda*_{k_i}(t_i) - integral_origin^horizon lambda*(s) ds,
// composed interval by interval between events.
double log_likelihood(const IntensityModel& model, const EventSequence& seq,
                      double origin, double horizon,
                      const EventSequence& history);

}  // namespace ptq
