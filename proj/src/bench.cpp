#include "ptq/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "ptq/rng.hpp"
#include "ptq/sampling.hpp"

namespace ptq {

namespace {

using Clock = std::chrono::steady_clock;

long long elapsed_ns(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0)
      .count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MarkSet random_subset(int mark_count, int size, RngStream& rng) {
  std::vector<MarkId> pool(mark_count);
  for (int k = 0; k < mark_count; ++k) pool[k] = k;
  MarkSet out(mark_count);
  for (int i = 0; i < size && i < mark_count; ++i) {
    const int j =
        i + static_cast<int>(rng.uniform() * (mark_count - i));
    std::swap(pool[i], pool[std::min(j, mark_count - 1)]);
    out.set(pool[i]);
  }
  return out;
}

int subset_size(const ExperimentConfig& cfg) {
  return std::max(1, static_cast<int>(std::lround(cfg.mark_count *
                                                  cfg.set_fraction)));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (mark_count < 1) throw BadArgument("mark_count must be >= 1");
  if (model_count < 1) throw BadArgument("model_count must be >= 1");
  if (repetitions < 1) throw BadArgument("repetitions must be >= 1");
  if (ladder.empty()) throw BadArgument("ladder must be non-empty");
  for (long n : ladder)
    if (n < 1 || n >= ground_truth_samples)
      throw BadArgument("ladder entries must be in [1, ground_truth_samples)");
  if (query_type != "hitting_time" && query_type != "nth_mark" &&
      query_type != "a_before_b" && query_type != "restricted")
    throw BadArgument("unknown query_type: " + query_type);
}

QuerySpec random_query(const ExperimentConfig& cfg, std::uint64_t seed) {
  RngStream rng = RngStream::derive(seed, 0x71ULL);
  const int size = subset_size(cfg);
  if (cfg.query_type == "hitting_time") {
    return HittingTimeCdfQuery{random_subset(cfg.mark_count, size, rng),
                               cfg.query_horizon};
  }
  if (cfg.query_type == "nth_mark") {
    return NthMarkQuery{cfg.nth_mark_n,
                        random_subset(cfg.mark_count, size, rng)};
  }
  if (cfg.query_type == "a_before_b") {
    const MarkSet both = random_subset(
        cfg.mark_count, std::min(2 * size, cfg.mark_count), rng);
    MarkSet a(cfg.mark_count), b(cfg.mark_count);
    int i = 0;
    for (MarkId k : both.members()) (i++ % 2 == 0 ? a : b).set(k);
    if (b.empty()) {  // K == 1 cannot happen here (disjoint non-empty needed)
      throw BadArgument("a_before_b sweep needs K >= 2");
    }
    return ABeforeBQuery{a, b, cfg.precision};
  }
  // two-span restricted query over [0, horizon]
  RestrictionSchedule sched;
  sched.boundaries = {0.5 * cfg.query_horizon, cfg.query_horizon};
  sched.restricted = {random_subset(cfg.mark_count, size, rng),
                      random_subset(cfg.mark_count, size, rng)};
  return RestrictedMarkQuery{std::move(sched)};
}

EstimateResult ground_truth(const IntensityModel& model,
                            const EventSequence& history, double origin,
                            const QuerySpec& spec, const ExperimentConfig& cfg,
                            std::uint64_t seed) {
  // unbiased reference: importance everywhere except the truncated
  // A-before-B estimator, which gets a naive reference instead
  if (std::holds_alternative<ABeforeBQuery>(spec))
    return naive_estimate(model, history, origin, spec,
                          origin + cfg.a_before_b_horizon,
                          cfg.ground_truth_samples, seed, cfg.query);
  return importance_estimate(model, history, origin, spec,
                             cfg.ground_truth_samples, seed, cfg.query);
}

double relative_efficiency(double truth, double imp_variance) {
  if (!(truth > 0.0 && truth < 1.0))
    throw DegenerateTruth("truth must lie strictly inside (0, 1)");
  if (!(imp_variance > 0.0))
    throw BadArgument("importance variance must be > 0");
  return truth * (1.0 - truth) / imp_variance;
}

std::vector<MeanRae> mean_rae(const std::vector<BenchRecord>& records) {
  std::vector<MeanRae> out;
  auto find = [&](const std::string& est, long n) -> MeanRae& {
    for (auto& m : out)
      if (m.estimator == est && m.n_samples == n) return m;
    out.push_back({est, n, 0.0, 0, 0});
    return out.back();
  };
  for (const auto& r : records) {
    if (r.estimator == "truth") continue;
    MeanRae& m = find(r.estimator, r.n_samples);
    if (r.truth <= 0.0) {
      ++m.excluded_zero_truth;
      continue;
    }
    ++m.count;
    m.mean_rae += (std::abs(r.truth - r.estimate) / r.truth - m.mean_rae) /
                  m.count;
  }
  return out;
}

namespace {

void run_ladder(const IntensityModel& model, const EventSequence& history,
                double origin, const QuerySpec& spec,
                const ExperimentConfig& cfg, const std::string& query_id,
                std::uint64_t seed_base, std::vector<BenchRecord>& records) {
  const EstimateResult truth = ground_truth(
      model, history, origin, spec, cfg,
      RngStream::derive(seed_base, 0xCAFEULL).next_u64());
  records.push_back({query_id, "truth", truth.n_samples, truth.value,
                     truth.value, truth.variance, 0.0, 0, seed_base});

  const double naive_horizon =
      origin + (std::holds_alternative<ABeforeBQuery>(spec)
                    ? cfg.a_before_b_horizon
                    : cfg.query_horizon);
  for (std::size_t li = 0; li < cfg.ladder.size(); ++li) {
    const long n = cfg.ladder[li];
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const std::uint64_t run_id = (li * 1000ULL + rep) * 2ULL;
      {
        const std::uint64_t seed = RngStream::derive(seed_base, run_id).next_u64();
        const auto t0 = Clock::now();
        const EstimateResult est = naive_estimate(model, history, origin, spec,
                                                  naive_horizon, n, seed,
                                                  cfg.query);
        records.push_back({query_id, "naive", n, est.value, truth.value,
                           est.variance, 0.0, elapsed_ns(t0), seed});
      }
      {
        const std::uint64_t seed =
            RngStream::derive(seed_base, run_id + 1).next_u64();
        const auto t0 = Clock::now();
        const EstimateResult est = importance_estimate(model, history, origin,
                                                       spec, n, seed, cfg.query);
        const double eff =
            (truth.value > 0.0 && truth.value < 1.0 && est.variance > 0.0)
                ? relative_efficiency(truth.value, est.variance)
                : 0.0;
        records.push_back({query_id, "importance", n, est.value, truth.value,
                           est.variance, eff, elapsed_ns(t0), seed});
      }
    }
  }
}

}  // namespace

std::vector<BenchRecord> run_experiment(const IntensityModel& model,
                                        const EventSequence& history,
                                        double origin,
                                        const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<BenchRecord> records;
  const QuerySpec spec = random_query(
      cfg, RngStream::derive(cfg.master_seed, 0x2001ULL).next_u64());
  run_ladder(model, history, origin, spec, cfg, "q0", cfg.master_seed, records);
  return records;
}

std::vector<BenchRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<BenchRecord> records;
  for (int m = 0; m < cfg.model_count; ++m) {
    const std::uint64_t model_seed =
        RngStream::derive(cfg.master_seed, 1000ULL + m).next_u64();
    const HawkesModel model(random_hawkes(cfg.mark_count,
                                          cfg.interaction_strength, model_seed,
                                          cfg.model_config));
    const QuerySpec spec = random_query(
        cfg, RngStream::derive(cfg.master_seed, 2000ULL + m).next_u64());
    run_ladder(model, EventSequence{}, 0.0, spec, cfg,
               "m" + std::to_string(m),
               RngStream::derive(cfg.master_seed, 3000ULL + m).next_u64(),
               records);
  }
  return records;
}

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "query_id,estimator,n_samples,estimate,truth,variance,efficiency,"
         "wall_ns,seed\n";
  out.precision(17);
  for (const auto& r : records) {
    out << r.query_id << ',' << r.estimator << ',' << r.n_samples << ','
        << r.estimate << ',' << r.truth << ',' << r.variance << ','
        << r.efficiency << ',' << r.wall_ns << ',' << r.seed << '\n';
  }
}

std::vector<SweepRecord> interaction_sweep(int mark_count,
                                           const std::vector<double>& strengths,
                                           int models_per_strength,
                                           int trajectories_per_model,
                                           double horizon, std::uint64_t seed) {
  if (mark_count < 1 || models_per_strength < 1 || trajectories_per_model < 1)
    throw BadArgument("sweep sizes must be positive");
  for (double s : strengths)
    if (s < 0.0) throw BadArgument("strengths must be >= 0");

  std::vector<SweepRecord> rows;
  for (std::size_t si = 0; si < strengths.size(); ++si) {
    for (int m = 0; m < models_per_strength; ++m) {
      const std::uint64_t model_seed =
          RngStream::derive(seed, si * 100003ULL + m).next_u64();
      const HawkesModel model(
          random_hawkes(mark_count, strengths[si], model_seed));
      RngStream set_rng = RngStream::derive(model_seed, 0x5e7ULL);
      const MarkSet mask = random_subset(
          mark_count, std::max(1, mark_count / 3), set_rng);
      RestrictionSchedule sched;
      sched.boundaries = {horizon};
      sched.restricted = {mask};

      SweepRecord row;
      row.strength = strengths[si];
      row.model_index = static_cast<int>(si) * models_per_strength + m;
      std::vector<double> naive_ns, restricted_ns;
      for (int i = 0; i < trajectories_per_model; ++i) {
        RngStream rng = RngStream::derive(model_seed, 10000ULL + i);
        auto t0 = Clock::now();
        (void)sample_thinning(model, 0.0, horizon, EventSequence{}, rng);
        naive_ns.push_back(static_cast<double>(elapsed_ns(t0)));

        RngStream rng2 = RngStream::derive(model_seed, 20000ULL + i);
        t0 = Clock::now();
        (void)sample_restricted(model, sched, 0.0, horizon, EventSequence{},
                                rng2);
        restricted_ns.push_back(static_cast<double>(elapsed_ns(t0)));
      }
      for (double v : naive_ns) row.naive_ns_mean += v / naive_ns.size();
      for (double v : restricted_ns)
        row.restricted_ns_mean += v / restricted_ns.size();
      row.naive_ns_median = median(naive_ns);
      row.restricted_ns_median = median(restricted_ns);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& rows) {
  out << "strength,model_index,naive_ns_mean,naive_ns_median,"
         "restricted_ns_mean,restricted_ns_median\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.strength << ',' << r.model_index << ',' << r.naive_ns_mean << ','
        << r.naive_ns_median << ',' << r.restricted_ns_mean << ','
        << r.restricted_ns_median << '\n';
  }
}

}  // namespace ptq
