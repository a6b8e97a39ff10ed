#include "ptq/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace ptq {

namespace {

// Spans of [a, b] clipped against a schedule, open on the left. Calls
// fn(sub_a, sub_b, restricted-or-null) in time order.
template <typename Fn>
void for_each_span(const RestrictionSchedule& schedule, double origin, double a,
                   double b, Fn&& fn) {
  double lo = a;
  for (std::size_t i = 0; i < schedule.boundaries.size() && lo < b; ++i) {
    const double span_lo = i == 0 ? origin : schedule.boundaries[i - 1];
    const double span_hi = schedule.boundaries[i];
    if (span_hi <= lo) continue;
    const double hi = std::min(b, span_hi);
    if (std::max(lo, span_lo) < hi)
      fn(std::max(lo, span_lo), hi, &schedule.restricted[i]);
    lo = hi;
  }
  if (lo < b) fn(lo, b, static_cast<const MarkSet*>(nullptr));
}

Vector mask_vector(Vector lambda, const MarkSet* restricted) {
  if (restricted != nullptr)
    for (MarkId k : restricted->members()) lambda[k] = 0.0;
  return lambda;
}

MarkSet without(const MarkSet& set, const MarkSet* restricted) {
  if (restricted == nullptr) return set;
  MarkSet out(set.mark_count());
  for (int k = 0; k < set.mark_count(); ++k)
    if (set.contains(k) && !restricted->contains(k)) out.set(k);
  return out;
}

class MaskedState final : public ModelState {
 public:
  MaskedState(std::unique_ptr<ModelState> base, const RestrictionSchedule& sched,
              double origin)
      : base_(std::move(base)), schedule_(sched), origin_(origin) {}

  int mark_count() const override { return base_->mark_count(); }
  double anchor() const override { return base_->anchor(); }

  Vector intensity(double t) const override {
    return mask_vector(base_->intensity(t), schedule_.active_at(t, origin_));
  }

  double compensator(double a, double b, const MarkSet& set) const override {
    if (a > b) throw InvalidInterval("compensator requires a <= b");
    double total = 0.0;
    for_each_span(schedule_, origin_, a, b,
                  [&](double lo, double hi, const MarkSet* restricted) {
                    total += base_->compensator(lo, hi, without(set, restricted));
                  });
    return total;
  }

  ThinningBound thinning_bound(double t) const override {
    return base_->thinning_bound(t);
  }

  void add_event(const MarkedEvent& ev) override { base_->add_event(ev); }

 private:
  std::unique_ptr<ModelState> base_;
  const RestrictionSchedule& schedule_;
  double origin_;
};

// Core thinning loop. Stops at `horizon`, the budget, or (when
// target_events >= 0) after that many acceptances.
SampleResult run_thinning(ModelState& state, double origin, double horizon,
                          RngStream& rng, const TrajectoryBudget& budget,
                          long target_events,
                          const MarkSet* target_marks = nullptr) {
  SampleResult result;
  const double eff_horizon = std::min(horizon, budget.max_time);
  double t = origin;
  long accepted = 0;
  while (true) {
    if (target_events >= 0 && accepted >= target_events) break;
    if (t >= eff_horizon) break;
    const ThinningBound tb = state.thinning_bound(t);
    if (!(tb.bound >= 0.0) || !std::isfinite(tb.bound))
      throw DominationViolation("thinning bound not finite and non-negative");
    if (tb.bound == 0.0) {
      if (tb.horizon == kInf) {
        t = eff_horizon;
        break;
      }
      t += tb.horizon;
      continue;
    }
    const double gap = rng.exponential(tb.bound);
    if (gap > tb.horizon) {
      // bound expired before the candidate; refresh from the expiry point
      t += tb.horizon;
      continue;
    }
    const double cand = t + gap;
    if (cand >= eff_horizon) {
      t = eff_horizon;
      break;
    }
    const Vector lambda = state.intensity(cand);
    const double total = lambda.sum();
    if (total > tb.bound * (1.0 + 1e-9))
      throw DominationViolation("intensity " + std::to_string(total) +
                                " exceeds bound " + std::to_string(tb.bound));
    const double u = rng.uniform() * tb.bound;
    if (u < total) {
      // accepted; assign the mark proportionally to the components
      double acc = 0.0;
      MarkId mark = static_cast<MarkId>(lambda.size()) - 1;
      for (int k = 0; k < lambda.size(); ++k) {
        acc += lambda[k];
        if (u < acc) {
          mark = k;
          break;
        }
      }
      const MarkedEvent ev{cand, mark};
      result.seq.events.push_back(ev);
      state.add_event(ev);
      ++accepted;
      if (target_marks != nullptr && target_marks->contains(mark)) {
        result.seq.window_end = cand;
        return result;
      }
      if (accepted >= budget.max_events &&
          (target_events < 0 || accepted < target_events)) {
        result.budget_exceeded = true;
        t = cand;
        break;
      }
    }
    t = cand;
  }
  if (t >= budget.max_time && t < horizon &&
      (target_events < 0 || accepted < target_events))
    result.budget_exceeded = true;
  result.seq.window_end = t;
  return result;
}

}  // namespace

MaskedModel::MaskedModel(const IntensityModel& base, RestrictionSchedule schedule,
                         double origin)
    : base_(base), schedule_(std::move(schedule)), origin_(origin) {
  schedule_.validate(origin);
  for (const MarkSet& m : schedule_.restricted)
    if (m.mark_count() != base.mark_count())
      throw BadMark("schedule mark-space size differs from the model's");
}

Vector MaskedModel::intensity(double t, const EventSequence& history) const {
  return mask_vector(base_.intensity(t, history),
                     schedule_.active_at(t, origin_));
}

double MaskedModel::compensator(double a, double b, const EventSequence& history,
                                const MarkSet& set) const {
  if (a > b) throw InvalidInterval("compensator requires a <= b");
  double total = 0.0;
  for_each_span(schedule_, origin_, a, b,
                [&](double lo, double hi, const MarkSet* restricted) {
                  total += base_.compensator(lo, hi, history,
                                             without(set, restricted));
                });
  return total;
}

ThinningBound MaskedModel::thinning_bound(double t,
                                          const EventSequence& history) const {
  return base_.thinning_bound(t, history);
}

std::unique_ptr<ModelState> MaskedModel::start(const EventSequence& history,
                                               double origin) const {
  return std::make_unique<MaskedState>(base_.start(history, origin), schedule_,
                                       origin_);
}

SampleResult sample_thinning(const IntensityModel& model, double origin,
                             double horizon, const EventSequence& history,
                             RngStream& rng, const TrajectoryBudget& budget) {
  if (origin > horizon) throw InvalidInterval("origin must be <= horizon");
  if (horizon == kInf && budget.max_time == kInf)
    throw BadArgument("infinite horizon requires a finite max_time budget");
  auto state = model.start(history, origin);
  return run_thinning(*state, origin, horizon, rng, budget, -1);
}

SampleResult sample_restricted(const IntensityModel& model,
                               const RestrictionSchedule& schedule,
                               double origin, double horizon,
                               const EventSequence& history, RngStream& rng,
                               const TrajectoryBudget& budget) {
  const MaskedModel masked(model, schedule, origin);
  return sample_thinning(masked, origin, horizon, history, rng, budget);
}

SampleResult sample_until_nth_event(const IntensityModel& model, double origin,
                                    long n, const EventSequence& history,
                                    RngStream& rng,
                                    const TrajectoryBudget& budget) {
  if (n < 0) throw BadArgument("n must be >= 0");
  auto state = model.start(history, origin);
  SampleResult result = run_thinning(*state, origin, kInf, rng, budget, n);
  if (static_cast<long>(result.seq.size()) < n) result.budget_exceeded = true;
  return result;
}

SampleResult sample_until_mark(const IntensityModel& model, double origin,
                               const MarkSet& target,
                               const EventSequence& history, RngStream& rng,
                               const TrajectoryBudget& budget) {
  if (target.empty()) throw BadArgument("target mark set must be non-empty");
  auto state = model.start(history, origin);
  SampleResult result = run_thinning(*state, origin, kInf, rng, budget, -1, &target);
  if (result.seq.empty() || !target.contains(result.seq.events.back().mark))
    result.budget_exceeded = true;
  return result;
}

double log_likelihood(const IntensityModel& model, const EventSequence& seq,
                      double origin, double horizon,
                      const EventSequence& history) {
  auto state = model.start(history, origin);
  const MarkSet all = MarkSet::all(model.mark_count());
  double ll = 0.0;
  double prev = origin;
  for (const auto& ev : seq.events) {
    if (ev.time <= origin || ev.time > horizon)
      throw HorizonViolation("event outside (origin, horizon]");
    const double lam = state->intensity(ev.time)[ev.mark];
    if (lam <= 0.0)
      throw ZeroIntensityEvent("event with zero intensity at t=" +
                               std::to_string(ev.time));
    ll += std::log(lam);
    ll -= state->compensator(prev, ev.time, all);
    state->add_event(ev);
    prev = ev.time;
  }
  ll -= state->compensator(prev, horizon, all);
  return ll;
}

}  // namespace ptq
