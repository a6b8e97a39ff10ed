#include "ptq/hawkes.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "ptq/rng.hpp"

namespace ptq {

void HawkesParams::validate() const {
  const int k = mark_count();
  if (k < 1) throw BadArgument("Hawkes model needs at least one mark");
  if (alpha.rows() != k || alpha.cols() != k || beta.rows() != k ||
      beta.cols() != k)
    throw BadArgument("alpha/beta must be K x K");
  if ((mu.array() < 0.0).any()) throw BadArgument("mu must be >= 0");
  if ((alpha.array() < 0.0).any()) throw BadArgument("alpha must be >= 0");
  if (!(beta.array() > 0.0).all()) throw BadArgument("beta must be > 0");
  if (branching_spectral_radius(*this) >= 1.0)
    throw BadArgument("branching spectral radius must be < 1");
}

void PoissonParams::validate() const {
  if (mark_count() < 1) throw BadArgument("Poisson model needs >= 1 mark");
  if (!(rates.array() > 0.0).all()) throw BadArgument("rates must be > 0");
}

double branching_spectral_radius(const HawkesParams& params) {
  const Matrix branching = params.alpha.cwiseQuotient(params.beta);
  return branching.eigenvalues().cwiseAbs().maxCoeff();
}

Vector ExcitationState::intensity(const HawkesParams& p, double t) const {
  if (t < anchor) throw TimeBeforeHistory("intensity query before anchor");
  const double dt = t - anchor;
  Vector out = p.mu;
  if (dt == 0.0)
    out += (p.alpha.array() * s.array()).matrix().rowwise().sum();
  else
    out += (p.alpha.array() * (-p.beta.array() * dt).exp() * s.array())
               .matrix()
               .rowwise()
               .sum();
  return out;
}

namespace {

ExcitationState replay(const HawkesParams& p, const EventSequence& history,
                       double origin) {
  ExcitationState st(p.mark_count());
  for (const auto& ev : history.events) {
    if (ev.time > origin)
      throw TimeBeforeHistory("history event past the requested origin");
    st.decay_to(p, ev.time);
    st.add_event(ev.mark);
  }
  st.decay_to(p, origin);
  return st;
}

class HawkesState final : public ModelState {
 public:
  HawkesState(const HawkesParams& p, ExcitationState st)
      : params_(p), state_(std::move(st)) {}

  int mark_count() const override { return params_.mark_count(); }
  double anchor() const override { return state_.anchor; }

  Vector intensity(double t) const override {
    return state_.intensity(params_, t);
  }

  double compensator(double a, double b, const MarkSet& set) const override {
    if (a > b) throw InvalidInterval("compensator requires a <= b");
    if (a < state_.anchor)
      throw TimeBeforeHistory("compensator interval before anchor");
    if (a == b || set.empty()) return 0.0;
    // integral of mu plus the decayed kernel tails over [a, b]
    const auto& al = params_.alpha.array();
    const auto& be = params_.beta.array();
    const Eigen::ArrayXXd tail =
        (al / be) * state_.s.array() *
        ((-be * (a - state_.anchor)).exp() - (-be * (b - state_.anchor)).exp());
    Vector per_mark = params_.mu * (b - a);
    per_mark += tail.matrix().rowwise().sum();
    return set.select_sum(per_mark);
  }

  ThinningBound thinning_bound(double t) const override {
    // between events the exponential kernel only decays, so the current
    // total intensity dominates until the next accepted event
    return {intensity(t).sum(), kInf};
  }

  void add_event(const MarkedEvent& ev) override {
    state_.decay_to(params_, ev.time);
    state_.add_event(ev.mark);
  }

 private:
  const HawkesParams& params_;
  ExcitationState state_;
};

}  // namespace

HawkesModel::HawkesModel(HawkesParams params) : params_(std::move(params)) {
  params_.validate();
}

Vector HawkesModel::intensity(double t, const EventSequence& history) const {
  return replay(params_, history, t).intensity(params_, t);
}

double HawkesModel::compensator(double a, double b, const EventSequence& history,
                                const MarkSet& set) const {
  return HawkesState(params_, replay(params_, history, a))
      .compensator(a, b, set);
}

ThinningBound HawkesModel::thinning_bound(double t,
                                          const EventSequence& history) const {
  return {intensity(t, history).sum(), kInf};
}

std::unique_ptr<ModelState> HawkesModel::start(const EventSequence& history,
                                               double origin) const {
  return std::make_unique<HawkesState>(params_, replay(params_, history, origin));
}

namespace {

class PoissonState final : public ModelState {
 public:
  PoissonState(const PoissonParams& p, double origin)
      : params_(p), anchor_(origin) {}

  int mark_count() const override { return params_.mark_count(); }
  double anchor() const override { return anchor_; }
  Vector intensity(double t) const override {
    if (t < anchor_) throw TimeBeforeHistory("intensity query before anchor");
    return params_.rates;
  }
  double compensator(double a, double b, const MarkSet& set) const override {
    if (a > b) throw InvalidInterval("compensator requires a <= b");
    return set.select_sum(params_.rates) * (b - a);
  }
  ThinningBound thinning_bound(double) const override {
    return {params_.rates.sum(), kInf};
  }
  void add_event(const MarkedEvent& ev) override { anchor_ = ev.time; }

 private:
  const PoissonParams& params_;
  double anchor_;
};

}  // namespace

PoissonModel::PoissonModel(PoissonParams params) : params_(std::move(params)) {
  params_.validate();
}

Vector PoissonModel::intensity(double, const EventSequence&) const {
  return params_.rates;
}

double PoissonModel::compensator(double a, double b, const EventSequence&,
                                 const MarkSet& set) const {
  if (a > b) throw InvalidInterval("compensator requires a <= b");
  return set.select_sum(params_.rates) * (b - a);
}

ThinningBound PoissonModel::thinning_bound(double, const EventSequence&) const {
  return {params_.rates.sum(), kInf};
}

std::unique_ptr<ModelState> PoissonModel::start(const EventSequence& history,
                                                double origin) const {
  if (!history.events.empty() && history.events.back().time > origin)
    throw TimeBeforeHistory("state origin precedes last history event");
  return std::make_unique<PoissonState>(params_, origin);
}

HawkesParams random_hawkes(int mark_count, double interaction_strength,
                           std::uint64_t seed, const RandomHawkesConfig& config) {
  if (mark_count < 1) throw BadArgument("mark_count must be >= 1");
  if (interaction_strength < 0.0)
    throw BadArgument("interaction_strength must be >= 0");
  RngStream rng = RngStream::derive(seed, 0x68617768ULL);
  HawkesParams p;
  p.mu.resize(mark_count);
  p.alpha.resize(mark_count, mark_count);
  p.beta.resize(mark_count, mark_count);
  for (int k = 0; k < mark_count; ++k)
    p.mu[k] = config.mu_min + (config.mu_max - config.mu_min) * rng.uniform();
  for (int k = 0; k < mark_count; ++k)
    for (int c = 0; c < mark_count; ++c) {
      p.beta(k, c) =
          config.beta_min + (config.beta_max - config.beta_min) * rng.uniform();
      p.alpha(k, c) = interaction_strength * rng.uniform();
    }
  const double radius = branching_spectral_radius(p);
  if (radius >= config.radius_cap)
    p.alpha *= config.radius_cap / radius;
  p.validate();
  return p;
}

}  // namespace ptq
