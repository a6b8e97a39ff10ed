#pragma once

#include <cstdint>

#include "ptq/core.hpp"

namespace ptq {

// Multivariate exponential-kernel Hawkes parameters.
//   lambda*_k(t) = mu_k + sum_kappa sum_{tau_{kappa,i} < t}
//                    alpha(k,kappa) exp(-beta(k,kappa) (t - tau_{kappa,i}))
// Row index = affected mark, column index = causing mark.
struct HawkesParams {
  Vector mu;    // K, >= 0
  Matrix alpha; // K x K, >= 0
  Matrix beta;  // K x K, > 0

  int mark_count() const { return static_cast<int>(mu.size()); }
  void validate() const;
};

struct PoissonParams {
  Vector rates; // K, > 0

  int mark_count() const { return static_cast<int>(rates.size()); }
  void validate() const;
};

// Largest |eigenvalue| of the branching matrix alpha ./ beta; < 1 means the
// process is stable.
double branching_spectral_radius(const HawkesParams& params);

// Accumulated excitation per (k, kappa) pair at a reference time; lets the
// kernel sum be maintained in O(K^2) per event instead of replaying the
// history.
struct ExcitationState {
  Matrix s;          // K x K
  double anchor = 0.0;

  explicit ExcitationState(int mark_count)
      : s(Matrix::Zero(mark_count, mark_count)) {}

  void decay_to(const HawkesParams& p, double t) {
    if (t < anchor) throw TimeBeforeHistory("excitation decay backwards");
    if (t > anchor)
      s.array() *= (-p.beta.array() * (t - anchor)).exp();
    anchor = t;
  }
  // Register an event at the current anchor time.
  void add_event(MarkId cause) { s.col(cause).array() += 1.0; }

  // lambda*_k(t) for t >= anchor assuming no events in (anchor, t].
  Vector intensity(const HawkesParams& p, double t) const;
};

class HawkesModel final : public IntensityModel {
 public:
  explicit HawkesModel(HawkesParams params);

  const HawkesParams& params() const { return params_; }

  int mark_count() const override { return params_.mark_count(); }
  Vector intensity(double t, const EventSequence& history) const override;
  double compensator(double a, double b, const EventSequence& history,
                     const MarkSet& set) const override;
  ThinningBound thinning_bound(double t,
                               const EventSequence& history) const override;
  std::unique_ptr<ModelState> start(const EventSequence& history,
                                    double origin) const override;

 private:
  HawkesParams params_;
};

class PoissonModel final : public IntensityModel {
 public:
  explicit PoissonModel(PoissonParams params);

  const PoissonParams& params() const { return params_; }
  double total_rate() const { return params_.rates.sum(); }

  int mark_count() const override { return params_.mark_count(); }
  Vector intensity(double t, const EventSequence& history) const override;
  double compensator(double a, double b, const EventSequence& history,
                     const MarkSet& set) const override;
  ThinningBound thinning_bound(double t,
                               const EventSequence& history) const override;
  std::unique_ptr<ModelState> start(const EventSequence& history,
                                    double origin) const override;

 private:
  PoissonParams params_;
};

struct RandomHawkesConfig {
  double mu_min = 0.1, mu_max = 1.0;
  double beta_min = 1.0, beta_max = 3.0;
  double radius_cap = 0.95; // alpha rescaled onto this if exceeded
};

// Random model draw: mu ~ U(mu_min, mu_max), beta ~ U(beta_min, beta_max),
// alpha ~ strength * U(0, 1), with alpha rescaled uniformly whenever the
// branching spectral radius reaches radius_cap. Deterministic given seed.
HawkesParams random_hawkes(int mark_count, double interaction_strength,
                           std::uint64_t seed,
                           const RandomHawkesConfig& config = {});

}  // namespace ptq
