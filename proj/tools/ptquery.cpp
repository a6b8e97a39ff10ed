// ptquery: simulate marked event sequences, answer probabilistic queries,
// and run the estimator benchmark. Data goes to stdout (or --out);
// diagnostics go to stderr.
//
// exit codes: 0 ok, 2 configuration error, 3 trajectory budget exhausted,
//             4 overlapping A/B sets in an a_before_b query.
#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "ptq/bench.hpp"
#include "ptq/io.hpp"
#include "ptq/queries.hpp"
#include "ptq/sampling.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitOverlap = 4;

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw ptq::io::ParseError("cannot open output file: " + path);
  return file;
}

std::vector<long> parse_ladder(const std::string& csv) {
  std::vector<long> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stol(tok));
  return out;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

int run_simulate(const std::string& model_path, const std::string& cond_path,
                 long samples, double horizon, std::uint64_t seed,
                 const std::string& out_path, long max_events) {
  auto model = ptq::io::load_model(model_path);
  ptq::EventSequence history;
  double origin = 0.0;
  if (!cond_path.empty()) {
    std::ifstream in(cond_path);
    if (!in) throw ptq::io::ParseError("cannot open: " + cond_path);
    ptq::io::json j;
    in >> j;
    history = ptq::io::sequence_from_json(j, model->mark_count());
    origin = history.window_end;
  }
  ptq::TrajectoryBudget budget;
  budget.max_events = max_events;
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  bool exhausted = false;
  std::vector<ptq::EventSequence> batch;
  for (long i = 0; i < samples; ++i) {
    ptq::RngStream rng =
        ptq::RngStream::derive(seed, static_cast<std::uint64_t>(i));
    ptq::SampleResult s = ptq::sample_thinning(*model, origin, origin + horizon,
                                               history, rng, budget);
    exhausted = exhausted || s.budget_exceeded;
    batch.push_back(std::move(s.seq));
  }
  ptq::io::write_jsonl(out, batch);
  if (exhausted) {
    std::cerr << "warning: at least one trajectory hit the event budget\n";
    return kExitBudget;
  }
  return 0;
}

int run_query(const std::string& model_path, const std::string& query_path,
              const std::string& cond_path, long samples,
              const std::string& method, std::uint64_t seed, double precision,
              double horizon, const ptq::QueryConfig& config,
              const std::string& out_path) {
  auto model = ptq::io::load_model(model_path);
  ptq::io::QueryFile qf = ptq::io::load_query(query_path, model->mark_count());
  if (auto* ab = std::get_if<ptq::ABeforeBQuery>(&qf.spec); ab && precision > 0)
    ab->precision = precision;

  ptq::EventSequence history;
  double origin = 0.0;
  if (!cond_path.empty()) {
    std::ifstream in(cond_path);
    if (!in) throw ptq::io::ParseError("cannot open: " + cond_path);
    ptq::io::json j;
    in >> j;
    history = ptq::io::sequence_from_json(j, model->mark_count());
  } else if (qf.condition) {
    history = *qf.condition;
  }
  origin = history.window_end;

  ptq::EstimateResult r;
  if (method == "naive") {
    r = ptq::naive_estimate(*model, history, origin, qf.spec, origin + horizon,
                            samples, seed, config);
  } else if (method == "importance") {
    r = ptq::importance_estimate(*model, history, origin, qf.spec, samples,
                                 seed, config);
  } else {
    throw ptq::BadArgument("method must be 'naive' or 'importance'");
  }
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  out << ptq::io::estimate_to_json(r).dump() << "\n";
  if (r.budget_limited) {
    std::cerr << "warning: " << r.censored
              << " trajectories cut short by the budget\n";
    return kExitBudget;
  }
  return 0;
}

int run_bench(const ptq::ExperimentConfig& cfg, const std::string& out_path) {
  const auto records = ptq::run_experiment(cfg);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  ptq::write_csv(out, records);
  for (const auto& m : ptq::mean_rae(records)) {
    std::cerr << m.estimator << " n=" << m.n_samples
              << " mean_rae=" << m.mean_rae << " (" << m.count << " runs)\n";
  }
  return 0;
}

int run_sweep(int mark_count, const std::vector<double>& strengths, int models,
              int trajectories, double horizon, std::uint64_t seed,
              const std::string& out_path) {
  const auto rows = ptq::interaction_sweep(mark_count, strengths, models,
                                           trajectories, horizon, seed);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  ptq::write_sweep_csv(out, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probabilistic queries over marked temporal point processes"};
  app.require_subcommand(1);

  std::string model_path, query_path, cond_path, out_path, method = "importance";
  long samples = 1000, max_events = 10000;
  double horizon = 1.0, precision = 0.0;
  std::uint64_t seed = 1;
  ptq::QueryConfig config;

  auto* sim = app.add_subcommand("simulate", "sample event sequences (JSONL)");
  sim->add_option("--model", model_path, "model JSON file")->required();
  sim->add_option("--condition", cond_path, "conditioning prefix JSON");
  sim->add_option("--samples", samples, "number of trajectories");
  sim->add_option("--horizon", horizon, "window length past the origin");
  sim->add_option("--seed", seed, "master seed");
  sim->add_option("--max-events", max_events, "per-trajectory event budget");
  sim->add_option("--out", out_path, "output path (default stdout)");

  auto* qry = app.add_subcommand("query", "estimate a query probability");
  qry->add_option("--model", model_path, "model JSON file")->required();
  qry->add_option("--query", query_path, "query JSON file")->required();
  qry->add_option("--condition", cond_path, "conditioning prefix JSON");
  qry->add_option("--samples", samples, "Monte Carlo sample count");
  qry->add_option("--method", method, "naive | importance");
  qry->add_option("--seed", seed, "master seed");
  qry->add_option("--precision", precision,
                  "a_before_b bound gap (overrides the query file)");
  qry->add_option("--horizon", horizon, "naive truncation horizon");
  qry->add_option("--integration-points", config.integration_points,
                  "quadrature points for finite intervals");
  qry->add_option("--grid-spacing", config.grid_spacing,
                  "step for open-ended integration");
  qry->add_option("--workers", config.workers, "worker threads");
  qry->add_option("--max-events", config.budget.max_events,
                  "per-trajectory event budget");
  qry->add_option("--out", out_path, "output path (default stdout)");

  ptq::ExperimentConfig bench_cfg;
  std::string ladder_csv, strengths_csv = "0.25,0.5,1.0,2.0,4.0";
  int sweep_models = 5, sweep_traj = 50;
  auto* ben = app.add_subcommand("bench", "estimator comparison CSV");
  ben->add_option("--query-type", bench_cfg.query_type,
                  "hitting_time | nth_mark | a_before_b | restricted");
  ben->add_option("--mark-count", bench_cfg.mark_count, "marks per model");
  ben->add_option("--strength", bench_cfg.interaction_strength,
                  "excitation strength of the random models");
  ben->add_option("--models", bench_cfg.model_count, "random models");
  ben->add_option("--query-horizon", bench_cfg.query_horizon,
                  "query horizon past the origin");
  ben->add_option("--truth-samples", bench_cfg.ground_truth_samples,
                  "ground-truth sample count");
  ben->add_option("--ladder", ladder_csv, "comma-separated sample counts");
  ben->add_option("--repetitions", bench_cfg.repetitions,
                  "repeats per ladder point");
  ben->add_option("--seed", bench_cfg.master_seed, "master seed");
  ben->add_option("--out", out_path, "output path (default stdout)");

  auto* swp = app.add_subcommand("sweep", "naive vs restricted timing CSV");
  int sweep_marks = 4;
  swp->add_option("--mark-count", sweep_marks, "marks per model");
  swp->add_option("--strengths", strengths_csv, "comma-separated strengths");
  swp->add_option("--models-per-strength", sweep_models, "models per strength");
  swp->add_option("--trajectories", sweep_traj, "timed samples per model");
  swp->add_option("--horizon", horizon, "simulation window");
  swp->add_option("--seed", seed, "master seed");
  swp->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (sim->parsed())
      return run_simulate(model_path, cond_path, samples, horizon, seed,
                          out_path, max_events);
    if (qry->parsed())
      return run_query(model_path, query_path, cond_path, samples, method,
                       seed, precision, horizon, config, out_path);
    if (ben->parsed()) {
      if (!ladder_csv.empty()) bench_cfg.ladder = parse_ladder(ladder_csv);
      return run_bench(bench_cfg, out_path);
    }
    if (swp->parsed())
      return run_sweep(sweep_marks, parse_doubles(strengths_csv), sweep_models,
                       sweep_traj, horizon, seed, out_path);
  } catch (const ptq::BadArgument& e) {
    // disjointness violations get their own exit code
    std::cerr << "error: " << e.what() << "\n";
    return std::string(e.what()).find("disjoint") != std::string::npos
               ? kExitOverlap
               : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
