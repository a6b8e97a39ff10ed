#include "ptq/queries.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "ptq/quadrature.hpp"

namespace ptq {

namespace {

// ---------------------------------------------------------------------------
// Deterministic parallel fan-out: element i only ever depends on (seed, i),
// so the worker count changes throughput but never results.
// ---------------------------------------------------------------------------

template <typename T, typename Fn>
std::vector<T> parallel_map(long n, int workers, Fn&& fn) {
  std::vector<T> out(static_cast<std::size_t>(n));
  if (workers <= 1 || n < 2) {
    for (long i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const long chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long lo = w * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (long i = lo; i < hi; ++i) out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

struct TrajectoryValue {
  double value = 0.0;
  bool censored = false;
  double lower = 0.0;
  double upper = 1.0;
  double gap = 0.0;
};

double check_unit_interval(double v, const char* what) {
  if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
    throw Error(std::string(what) + " outside [0,1]: " + std::to_string(v));
  return std::clamp(v, 0.0, 1.0);
}

// Welford reduction in trajectory-index order over non-censored values.
EstimateResult reduce(const std::vector<TrajectoryValue>& values,
                      bool with_bounds) {
  EstimateResult r;
  double mean = 0.0, m2 = 0.0, mean_lo = 0.0, mean_hi = 0.0;
  long n = 0;
  for (const auto& tv : values) {
    if (tv.censored) {
      ++r.censored;
      r.budget_limited = true;
      r.max_residual_gap = std::max(r.max_residual_gap, tv.gap);
      continue;
    }
    ++n;
    const double d = tv.value - mean;
    mean += d / n;
    m2 += d * (tv.value - mean);
    mean_lo += (tv.lower - mean_lo) / n;
    mean_hi += (tv.upper - mean_hi) / n;
    r.max_residual_gap = std::max(r.max_residual_gap, tv.gap);
  }
  r.n_samples = n;
  r.value = mean;
  r.variance = n > 1 ? m2 / (n - 1) : 0.0;
  r.std_error = n > 0 ? std::sqrt(r.variance / n) : 0.0;
  if (with_bounds) {
    r.lower_bound = mean_lo;
    r.upper_bound = mean_hi;
  }
  return r;
}

template <typename Fn>  // Fn(long index, RngStream&) -> TrajectoryValue
EstimateResult monte_carlo(long n_samples, std::uint64_t seed,
                           const QueryConfig& config, bool with_bounds,
                           Fn&& fn) {
  if (n_samples < 1) throw BadArgument("n_samples must be >= 1");
  auto values = parallel_map<TrajectoryValue>(
      n_samples, config.workers, [&](long i) {
        RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(i));
        return fn(i, rng);
      });
  return reduce(values, with_bounds);
}

// Masked compensator sum_i integral over span i of lambda*_{M_i}, evaluated
// along `traj` (sampled events change the base intensity mid-span).
double masked_span_integral(const IntensityModel& model,
                            const EventSequence& history, double origin,
                            const RestrictionSchedule& schedule,
                            const EventSequence& traj) {
  auto state = model.start(history, origin);
  double total = 0.0;
  std::size_t next = 0;
  double prev = origin;
  for (std::size_t i = 0; i < schedule.span_count(); ++i) {
    const double hi = schedule.boundaries[i];
    const MarkSet& masked = schedule.restricted[i];
    while (next < traj.size() && traj[next].time <= hi) {
      if (traj[next].time > prev) {
        total += state->compensator(prev, traj[next].time, masked);
        prev = traj[next].time;
      }
      state->add_event(traj[next]);
      ++next;
    }
    total += state->compensator(prev, hi, masked);
    prev = hi;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Online first-passage integration
//
// Accumulates I_X = integral lambda*_X(t) exp(-G(t)) dt for one or two
// weight sets X, where G is the running trapezoid integral of a decay set's
// intensity. Within a step each intensity is replaced by its trapezoid
// average, which makes the exponential weighting exact; the accumulated
// weights then telescope so that I_A + I_B + survival == 1 identically.
// ---------------------------------------------------------------------------

struct FirstPassage {
  OnlineAccumulator decay;
  double i_a = 0.0;
  double i_b = 0.0;

  void start(double t, double g, double wa, double wb) {
    decay.start(t, g);
    last_wa_ = wa;
    last_wb_ = wb;
  }

  void step(double t, double g, double wa, double wb) {
    const double s0 = decay.exp_factor();
    const double gbar = 0.5 * (decay.last_value() + g);
    decay.step(t, g);
    const double s1 = decay.exp_factor();
    if (gbar > 0.0) {
      i_a += 0.5 * (last_wa_ + wa) / gbar * (s0 - s1);
      i_b += 0.5 * (last_wb_ + wb) / gbar * (s0 - s1);
    }
    last_wa_ = wa;
    last_wb_ = wb;
  }

  double survival() const { return decay.exp_factor(); }

 private:
  double last_wa_ = 0.0;
  double last_wb_ = 0.0;
};

}  // namespace

void validate_query(const QuerySpec& spec, int mark_count) {
  std::visit(
      [&](const auto& q) {
        using Q = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<Q, HittingTimeCdfQuery>) {
          if (q.set.empty()) throw BadArgument("hitting-time set is empty");
          if (q.set.mark_count() != mark_count) throw BadMark("set size != K");
        } else if constexpr (std::is_same_v<Q, NthMarkQuery>) {
          if (q.n < 1) throw BadArgument("nth-mark requires n >= 1");
          if (q.set.empty()) throw BadArgument("nth-mark set is empty");
          if (q.set.mark_count() != mark_count) throw BadMark("set size != K");
        } else if constexpr (std::is_same_v<Q, ABeforeBQuery>) {
          if (q.a.empty() || q.b.empty())
            throw BadArgument("A and B must be non-empty");
          if (q.a.mark_count() != mark_count || q.b.mark_count() != mark_count)
            throw BadMark("set size != K");
          if (q.a.intersects(q.b)) throw BadArgument("A and B must be disjoint");
          if (!(q.precision > 0.0)) throw BadArgument("precision must be > 0");
        } else if constexpr (std::is_same_v<Q, RestrictedMarkQuery>) {
          for (const MarkSet& m : q.schedule.restricted)
            if (m.mark_count() != mark_count) throw BadMark("set size != K");
        } else if constexpr (std::is_same_v<Q, NextMarkQuery>) {
          if (q.set.empty()) throw BadArgument("next-mark set is empty");
          if (q.set.mark_count() != mark_count) throw BadMark("set size != K");
          if (q.a > q.b) throw InvalidInterval("next-mark requires a <= b");
        }
      },
      spec);
}

// ---------------------------------------------------------------------------
// Direct queries
// ---------------------------------------------------------------------------

double next_time_cdf(const IntensityModel& model, const EventSequence& history,
                     double origin, double t) {
  if (t < origin) throw InvalidInterval("t must be >= origin");
  const double comp =
      model.compensator(origin, t, history, MarkSet::all(model.mark_count()));
  return 1.0 - std::exp(-comp);
}

double next_mark_prob(const IntensityModel& model, const EventSequence& history,
                      double origin, const MarkSet& set, double a, double b,
                      const QueryConfig& config) {
  if (!(origin <= a) || a > b) throw InvalidInterval("need origin <= a <= b");
  if (set.empty()) throw BadArgument("mark set must be non-empty");
  if (a == b) return 0.0;
  auto state = model.start(history, origin);
  const MarkSet all = MarkSet::all(model.mark_count());

  FirstPassage fp;
  {
    const Vector lam = state->intensity(a);
    fp.start(a, lam.sum(), set.select_sum(lam), 0.0);
  }
  // survival already spent on (origin, a); folded in when reading out
  const double head = state->compensator(origin, a, all);

  auto eval_step = [&](double t) {
    const Vector lam = state->intensity(t);
    fp.step(t, lam.sum(), set.select_sum(lam), 0.0);
  };

  if (std::isfinite(b)) {
    const int n = std::max(2, config.integration_points);
    const double h = (b - a) / (n - 1);
    for (int i = 1; i < n; ++i) eval_step(i == n - 1 ? b : a + h * i);
  } else {
    double t = a;
    long steps = 0;
    while (std::exp(-head) * fp.survival() > config.survival_tol) {
      t += config.grid_spacing;
      if (t > config.budget.max_time || ++steps > 100000000L) break;
      eval_step(t);
    }
  }
  return std::exp(-head) * fp.i_a;
}

double joint_next_event_prob(const IntensityModel& model,
                             const EventSequence& history, double origin,
                             const MarkSet& set, double a, double b,
                             const QueryConfig& config) {
  return next_mark_prob(model, history, origin, set, a, b, config);
}

// ---------------------------------------------------------------------------
// Restricted-mark importance estimators
// ---------------------------------------------------------------------------

EstimateResult restricted_mark_estimate(const IntensityModel& model,
                                        const EventSequence& history,
                                        double origin,
                                        const RestrictionSchedule& schedule,
                                        long n_samples, std::uint64_t seed,
                                        const QueryConfig& config) {
  schedule.validate(origin);
  if (schedule.span_count() == 0) {
    EstimateResult r;
    r.value = 1.0;
    r.n_samples = n_samples;
    return r;
  }
  const double horizon = schedule.final_boundary();
  return monte_carlo(
      n_samples, seed, config, false, [&](long, RngStream& rng) {
        TrajectoryValue tv;
        const SampleResult sample = sample_restricted(
            model, schedule, origin, horizon, history, rng, config.budget);
        if (sample.budget_exceeded) {
          tv.censored = true;
          return tv;
        }
        const double integral =
            masked_span_integral(model, history, origin, schedule, sample.seq);
        tv.value = check_unit_interval(std::exp(-integral), "importance weight");
        return tv;
      });
}

EstimateResult hitting_time_cdf_estimate(const IntensityModel& model,
                                         const EventSequence& history,
                                         double origin, const MarkSet& set,
                                         double t, long n_samples,
                                         std::uint64_t seed,
                                         const QueryConfig& config) {
  if (set.empty()) throw BadArgument("hitting set must be non-empty");
  if (t < origin) throw InvalidInterval("t must be >= origin");
  if (t == origin) {
    EstimateResult r;
    r.n_samples = n_samples;
    return r;
  }
  RestrictionSchedule schedule;
  schedule.boundaries = {t};
  schedule.restricted = {set};
  EstimateResult r = restricted_mark_estimate(model, history, origin, schedule,
                                              n_samples, seed, config);
  r.value = 1.0 - r.value;
  return r;
}

EstimateResult nth_mark_estimate(const IntensityModel& model,
                                 const EventSequence& history, double origin,
                                 long n, const MarkSet& set, long n_samples,
                                 std::uint64_t seed,
                                 const QueryConfig& config) {
  if (n < 1) throw BadArgument("n must be >= 1");
  if (set.empty()) throw BadArgument("mark set must be non-empty");
  const MarkSet complement = set.complement();

  // Pick which exponential form to report: masking the smaller set keeps the
  // integrand small. Masking all marks would stall the gap, so a full `set`
  // forces the direct form (whose mask is then empty) and vice versa.
  bool direct;
  switch (config.nth_mark_form) {
    case NthMarkForm::kDirect: direct = true; break;
    case NthMarkForm::kComplement: direct = false; break;
    default:
      direct = complement.count() <= set.count();
  }
  const MarkSet& masked = direct ? complement : set;
  if (masked.full())
    throw BadArgument("nth-mark mask covers every mark; no event can arrive");

  RestrictionSchedule gap_schedule;
  gap_schedule.boundaries = {kInf};
  gap_schedule.restricted = {masked};

  return monte_carlo(
      n_samples, seed, config, false, [&](long, RngStream& rng) {
        TrajectoryValue tv;
        // events 1..n-1 from the unmasked model
        const SampleResult prefix = sample_until_nth_event(
            model, origin, n - 1, history, rng, config.budget);
        if (prefix.budget_exceeded) {
          tv.censored = true;
          return tv;
        }
        EventSequence merged = history;
        merged.events.insert(merged.events.end(), prefix.seq.events.begin(),
                             prefix.seq.events.end());
        const double gap_start = prefix.seq.empty() ? origin
                                                    : prefix.seq.events.back().time;
        merged.window_end = gap_start;
        // the nth event arrives from the proposal masking `masked`
        const MaskedModel proposal(model, gap_schedule, gap_start);
        const SampleResult tail = sample_until_nth_event(
            proposal, gap_start, 1, merged, rng, config.budget);
        if (tail.budget_exceeded || tail.seq.empty()) {
          tv.censored = true;
          return tv;
        }
        const double gap_end = tail.seq.events.back().time;
        auto state = model.start(merged, gap_start);
        const double integral = state->compensator(gap_start, gap_end, masked);
        const double w =
            check_unit_interval(std::exp(-integral), "importance weight");
        tv.value = direct ? w : 1.0 - w;
        return tv;
      });
}

EstimateResult a_before_b_estimate(const IntensityModel& model,
                                   const EventSequence& history, double origin,
                                   const MarkSet& set_a, const MarkSet& set_b,
                                   long n_samples, double precision,
                                   std::uint64_t seed,
                                   const QueryConfig& config) {
  if (set_a.empty() || set_b.empty())
    throw BadArgument("A and B must be non-empty");
  if (set_a.intersects(set_b)) throw BadArgument("A and B must be disjoint");
  if (!(precision > 0.0)) throw BadArgument("precision must be > 0");
  const MarkSet both = set_a.unite(set_b);

  EstimateResult r = monte_carlo(
      n_samples, seed, config, true, [&](long, RngStream& rng) {
        TrajectoryValue tv;
        auto state = model.start(history, origin);
        FirstPassage fp;

        double next_grid = origin;
        long grid_index = 0;
        auto grid_point = [&](long j) { return origin + config.grid_spacing * j; };

        {
          const Vector lam = state->intensity(origin);
          fp.start(origin, both.select_sum(lam), set_a.select_sum(lam),
                   set_b.select_sum(lam));
        }
        auto eval_at = [&](double t) {
          const Vector lam = state->intensity(t);
          fp.step(t, both.select_sum(lam), set_a.select_sum(lam),
                  set_b.select_sum(lam));
        };
        // Integrates grid points up to `limit`; returns true once the
        // survival gap has reached the precision target.
        auto integrate_to = [&](double limit) {
          while ((next_grid = grid_point(grid_index + 1)) <= limit) {
            ++grid_index;
            eval_at(next_grid);
            if (fp.survival() <= precision) return true;
            if (grid_index > 100000000L)
              throw Error("A-before-B integration failed to converge");
          }
          return false;
        };

        double t = origin;
        long accepted = 0;
        bool done = false;
        while (!done) {
          if (t >= config.budget.max_time) {
            tv.censored = true;
            break;
          }
          const ThinningBound tb = state->thinning_bound(t);
          if (tb.bound == 0.0 && tb.horizon == kInf) {
            // no further events possible; walk the grid until precision
            while (!done) {
              ++grid_index;
              const double g = grid_point(grid_index);
              if (g > config.budget.max_time || grid_index > 100000000L) {
                tv.censored = true;
                break;
              }
              eval_at(g);
              done = fp.survival() <= precision;
            }
            break;
          }
          if (tb.bound == 0.0) {
            t += tb.horizon;
            continue;
          }
          const double gap = rng.exponential(tb.bound);
          if (gap > tb.horizon) {
            t += tb.horizon;
            continue;
          }
          const double cand = t + gap;
          // accumulate every grid point the candidate skipped over
          if (integrate_to(std::min(cand, config.budget.max_time))) break;
          if (cand >= config.budget.max_time) {
            tv.censored = true;
            break;
          }
          Vector lam = state->intensity(cand);
          const double total_base = lam.sum();
          if (total_base > tb.bound * (1.0 + 1e-9))
            throw DominationViolation("intensity exceeds thinning bound");
          for (MarkId k : both.members()) lam[k] = 0.0;  // proposal masks A u B
          const double total = lam.sum();
          const double u = rng.uniform() * tb.bound;
          if (u < total) {
            double acc = 0.0;
            MarkId mark = static_cast<MarkId>(lam.size()) - 1;
            for (int k = 0; k < lam.size(); ++k) {
              acc += lam[k];
              if (u < acc) {
                mark = k;
                break;
              }
            }
            eval_at(cand);  // pre-event abscissa
            if (fp.survival() <= precision) break;
            state->add_event({cand, mark});
            eval_at(cand);  // post-event jump
            if (fp.survival() <= precision) break;
            if (++accepted >= config.budget.max_events) {
              tv.censored = true;
              break;
            }
          }
          t = cand;
        }

        // lower/upper carry the raw set integrals; both accumulator slots
        // run identical arithmetic, so swapping A and B swaps these means
        // bitwise, which is what makes the swapped-query complement exact
        tv.lower = check_unit_interval(fp.i_a, "A-before-B lower bound");
        tv.upper = check_unit_interval(fp.i_b, "B-before-A lower bound");
        tv.value = 0.5 * (tv.lower + (1.0 - tv.upper));
        tv.gap = fp.survival();
        if (tv.censored) tv.censored = tv.gap > precision;
        return tv;
      });
  // censored trajectories keep their achieved gap in max_residual_gap
  const double mean_ia = r.lower_bound.value_or(0.0);
  const double mean_ib = r.upper_bound.value_or(0.0);
  const double d = mean_ia - mean_ib;
  // midpoint written as m or 1-m with m in [1/2, 1]: 1-m is exact in IEEE,
  // so the swapped query's value sums with this one to exactly one
  const double m = std::min(0.5 * (1.0 + std::abs(d)), 1.0);
  r.value = d >= 0.0 ? m : 1.0 - m;
  r.lower_bound = mean_ia;
  r.upper_bound = 1.0 - mean_ib;
  return r;
}

// ---------------------------------------------------------------------------
// Naive estimation
// ---------------------------------------------------------------------------

EstimateResult naive_estimate(const IntensityModel& model,
                              const EventSequence& history, double origin,
                              const QuerySpec& spec, double horizon,
                              long n_samples, std::uint64_t seed,
                              const QueryConfig& config) {
  validate_query(spec, model.mark_count());

  auto per_trajectory = [&](long, RngStream& rng) {
    TrajectoryValue tv;
    std::visit(
        [&](const auto& q) {
          using Q = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<Q, HittingTimeCdfQuery>) {
            const double t_abs = origin + q.t;
            TrajectoryBudget budget = config.budget;
            budget.max_time = std::min(budget.max_time, t_abs);
            const SampleResult s = sample_until_mark(model, origin, q.set,
                                                     history, rng, budget);
            if (s.budget_exceeded && s.seq.window_end < t_abs) {
              tv.censored = true;
              return;
            }
            tv.value = (!s.seq.empty() &&
                        q.set.contains(s.seq.events.back().mark) &&
                        s.seq.events.back().time <= t_abs)
                           ? 1.0
                           : 0.0;
          } else if constexpr (std::is_same_v<Q, NextTimeCdfQuery>) {
            TrajectoryBudget budget = config.budget;
            budget.max_time = std::min(budget.max_time, origin + q.t);
            const SampleResult s =
                sample_until_nth_event(model, origin, 1, history, rng, budget);
            tv.value = s.seq.empty() ? 0.0 : 1.0;
          } else if constexpr (std::is_same_v<Q, NextMarkQuery>) {
            TrajectoryBudget budget = config.budget;
            budget.max_time = std::min(
                budget.max_time, std::isfinite(q.b) ? origin + q.b : horizon);
            if (budget.max_time == kInf)
              throw BadArgument("naive next-mark needs a finite horizon");
            const SampleResult s =
                sample_until_nth_event(model, origin, 1, history, rng, budget);
            tv.value = (!s.seq.empty() &&
                        s.seq.events.front().time >= origin + q.a &&
                        q.set.contains(s.seq.events.front().mark))
                           ? 1.0
                           : 0.0;
          } else if constexpr (std::is_same_v<Q, NthMarkQuery>) {
            const SampleResult s = sample_until_nth_event(model, origin, q.n,
                                                          history, rng,
                                                          config.budget);
            if (s.budget_exceeded) {
              tv.censored = true;
              return;
            }
            tv.value =
                q.set.contains(s.seq.events[q.n - 1].mark) ? 1.0 : 0.0;
          } else if constexpr (std::is_same_v<Q, ABeforeBQuery>) {
            TrajectoryBudget budget = config.budget;
            budget.max_time = std::min(budget.max_time, horizon);
            const SampleResult s = sample_until_mark(
                model, origin, q.a.unite(q.b), history, rng, budget);
            if (s.budget_exceeded) {
              tv.censored = true;
              return;
            }
            tv.value = q.a.contains(s.seq.events.back().mark) ? 1.0 : 0.0;
          } else if constexpr (std::is_same_v<Q, RestrictedMarkQuery>) {
            RestrictionSchedule sched = q.schedule;
            for (double& b : sched.boundaries) b += origin;
            const SampleResult s =
                sample_thinning(model, origin, sched.final_boundary(), history,
                                rng, config.budget);
            if (s.budget_exceeded) {
              tv.censored = true;
              return;
            }
            tv.value = in_query_space(s.seq, sched, origin) ? 1.0 : 0.0;
          }
        },
        spec);
    return tv;
  };

  EstimateResult r = monte_carlo(n_samples, seed, config, false, per_trajectory);
  // binary estimand: report the Bernoulli per-sample variance
  r.variance = r.value * (1.0 - r.value);
  r.std_error = r.n_samples > 0 ? std::sqrt(r.variance / r.n_samples) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

EstimateResult importance_estimate(const IntensityModel& model,
                                   const EventSequence& history, double origin,
                                   const QuerySpec& spec, long n_samples,
                                   std::uint64_t seed,
                                   const QueryConfig& config) {
  validate_query(spec, model.mark_count());
  return std::visit(
      [&](const auto& q) -> EstimateResult {
        using Q = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<Q, HittingTimeCdfQuery>) {
          return hitting_time_cdf_estimate(model, history, origin, q.set,
                                           origin + q.t, n_samples, seed,
                                           config);
        } else if constexpr (std::is_same_v<Q, NthMarkQuery>) {
          return nth_mark_estimate(model, history, origin, q.n, q.set,
                                   n_samples, seed, config);
        } else if constexpr (std::is_same_v<Q, ABeforeBQuery>) {
          return a_before_b_estimate(model, history, origin, q.a, q.b,
                                     n_samples, q.precision, seed, config);
        } else if constexpr (std::is_same_v<Q, RestrictedMarkQuery>) {
          RestrictionSchedule sched = q.schedule;
          for (double& b : sched.boundaries) b += origin;
          return restricted_mark_estimate(model, history, origin, sched,
                                          n_samples, seed, config);
        } else if constexpr (std::is_same_v<Q, NextTimeCdfQuery>) {
          EstimateResult r;
          r.value = next_time_cdf(model, history, origin, origin + q.t);
          r.n_samples = 0;
          return r;
        } else {
          EstimateResult r;
          r.value = next_mark_prob(model, history, origin, q.set,
                                   origin + q.a,
                                   std::isfinite(q.b) ? origin + q.b : kInf,
                                   config);
          r.n_samples = 0;
          return r;
        }
      },
      spec);
}

}  // namespace ptq
