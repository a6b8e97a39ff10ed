#pragma once

#include <optional>
#include <variant>

#include "ptq/core.hpp"
#include "ptq/sampling.hpp"

namespace ptq {

struct EstimateResult {
  double value = 0.0;      // in [0, 1]
  double std_error = 0.0;  // sqrt(variance / n_samples)
  long n_samples = 0;
  double variance = 0.0;   // per-sample empirical variance
  std::optional<double> lower_bound;  // A-before-B only
  std::optional<double> upper_bound;
  std::optional<double> truncation_horizon;
  long censored = 0;              // trajectories cut short by the budget
  double max_residual_gap = 0.0;  // A-before-B: worst upper-lower gap
  bool budget_limited = false;
};

// ---------------------------------------------------------------------------
// Query taxonomy. All times inside a QuerySpec are offsets from the query
// origin (the end of the conditioning prefix); the estimator entry points
// below take absolute times.
// ---------------------------------------------------------------------------

struct HittingTimeCdfQuery {
  MarkSet set;  // A
  double t;     // offset past origin
};
struct NthMarkQuery {
  long n;
  MarkSet set;  // A
};
struct ABeforeBQuery {
  MarkSet a, b;  // disjoint, non-empty
  double precision = 0.01;
};
struct RestrictedMarkQuery {
  RestrictionSchedule schedule;
};
struct NextTimeCdfQuery {
  double t;
};
struct NextMarkQuery {
  MarkSet set;     // A
  double a = 0.0;  // offsets past origin
  double b = kInf;
};

using QuerySpec = std::variant<HittingTimeCdfQuery, NthMarkQuery, ABeforeBQuery,
                               RestrictedMarkQuery, NextTimeCdfQuery,
                               NextMarkQuery>;

void validate_query(const QuerySpec& spec, int mark_count);

// Which exponential form the nth-mark estimator reports. Auto picks the
// smaller masked set (the lower-variance integrand).
enum class NthMarkForm { kAuto, kDirect, kComplement };

struct QueryConfig {
  int integration_points = 1000;  // finite-interval trapezoid grids
  double grid_spacing = 0.01;     // open-ended online integration
  double survival_tol = 1e-6;     // truncation of infinite upper bounds
  int workers = 1;
  TrajectoryBudget budget;
  NthMarkForm nth_mark_form = NthMarkForm::kAuto;
};

// ---------------------------------------------------------------------------
// Directly tractable queries (no sampling)
// ---------------------------------------------------------------------------

// P(tau_1 <= t) = 1 - exp(-integral_origin^t lambda*(s) ds).
double next_time_cdf(const IntensityModel& model, const EventSequence& history,
                     double origin, double t);

// P(kappa_1 in A, tau_1 in [a, b]) by quadrature of
// lambda*_A(t) exp(-integral_origin^t lambda*(s) ds); b may be infinite.
double next_mark_prob(const IntensityModel& model, const EventSequence& history,
                      double origin, const MarkSet& set, double a, double b,
                      const QueryConfig& config = {});

double joint_next_event_prob(const IntensityModel& model,
                             const EventSequence& history, double origin,
                             const MarkSet& set, double a, double b,
                             const QueryConfig& config = {});

// ---------------------------------------------------------------------------
// Monte Carlo estimators
// ---------------------------------------------------------------------------

// Frequency of the query predicate over plain thinning trajectories.
EstimateResult naive_estimate(const IntensityModel& model,
                              const EventSequence& history, double origin,
                              const QuerySpec& spec, double horizon,
                              long n_samples, std::uint64_t seed,
                              const QueryConfig& config = {});

// Mean of exp(-sum_i masked-span compensators) over restricted proposals.
EstimateResult restricted_mark_estimate(const IntensityModel& model,
                                        const EventSequence& history,
                                        double origin,
                                        const RestrictionSchedule& schedule,
                                        long n_samples, std::uint64_t seed,
                                        const QueryConfig& config = {});

// P(hit(A) <= t): complement of the single-span restricted-mark estimate.
EstimateResult hitting_time_cdf_estimate(const IntensityModel& model,
                                         const EventSequence& history,
                                         double origin, const MarkSet& set,
                                         double t, long n_samples,
                                         std::uint64_t seed,
                                         const QueryConfig& config = {});

// P(kappa_n in A): events 1..n-1 sampled unmasked, the final gap sampled
// with the reporting form's mark set masked.
EstimateResult nth_mark_estimate(const IntensityModel& model,
                                 const EventSequence& history, double origin,
                                 long n, const MarkSet& set, long n_samples,
                                 std::uint64_t seed,
                                 const QueryConfig& config = {});

// P(hit(A) < hit(B)): proposal masks A and B everywhere; per trajectory the
// lower/upper bound integrals are accumulated online until their gap (the
// survival of A u B) drops to `precision`.
EstimateResult a_before_b_estimate(const IntensityModel& model,
                                   const EventSequence& history, double origin,
                                   const MarkSet& set_a, const MarkSet& set_b,
                                   long n_samples, double precision,
                                   std::uint64_t seed,
                                   const QueryConfig& config = {});

// Dispatch on the spec; next-event queries resolve to their deterministic
// forms.
EstimateResult importance_estimate(const IntensityModel& model,
                                   const EventSequence& history, double origin,
                                   const QuerySpec& spec, long n_samples,
                                   std::uint64_t seed,
                                   const QueryConfig& config = {});

}  // namespace ptq
