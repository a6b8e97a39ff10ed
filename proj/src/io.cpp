#include "ptq/io.hpp"

#include <fstream>
#include <sstream>

#include "ptq/hawkes.hpp"

namespace ptq::io {

namespace {

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("expected an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("expected an array of rows");
  Matrix m(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != j[0].size())
      throw ParseError("ragged matrix rows");
    for (std::size_t c = 0; c < j[r].size(); ++c)
      m(r, c) = j[r][c].get<double>();
  }
  return m;
}

MarkSet markset_from_json(const json& j, int mark_count) {
  std::vector<MarkId> marks;
  for (const auto& e : j) marks.push_back(e.get<MarkId>());
  return MarkSet::from_list(mark_count, marks);
}

}  // namespace

std::unique_ptr<IntensityModel> model_from_json(const json& j) {
  const std::string type = j.value("type", "");
  if (type == "hawkes") {
    HawkesParams p;
    p.mu = vector_from_json(j.at("mu"));
    p.alpha = matrix_from_json(j.at("alpha"));
    p.beta = matrix_from_json(j.at("beta"));
    return std::make_unique<HawkesModel>(std::move(p));
  }
  if (type == "poisson") {
    PoissonParams p;
    p.rates = vector_from_json(j.at("rates"));
    return std::make_unique<PoissonModel>(std::move(p));
  }
  throw ParseError("unknown model type: '" + type + "'");
}

std::unique_ptr<IntensityModel> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  json j;
  in >> j;
  return model_from_json(j);
}

EventSequence sequence_from_json(const json& j, int mark_count) {
  EventSequence seq;
  seq.window_end = j.at("T").get<double>();
  for (const auto& e : j.at("events")) {
    seq.events.push_back({e.at("t").get<double>(), e.at("k").get<MarkId>()});
  }
  validate_sequence(seq, mark_count);
  return seq;
}

json sequence_to_json(const EventSequence& seq) {
  json events = json::array();
  for (const auto& ev : seq.events)
    events.push_back({{"t", ev.time}, {"k", ev.mark}});
  return {{"events", events}, {"T", seq.window_end}};
}

std::vector<EventSequence> read_jsonl(std::istream& in, int mark_count) {
  std::vector<EventSequence> seqs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    seqs.push_back(sequence_from_json(json::parse(line), mark_count));
  }
  return seqs;
}

void write_jsonl(std::ostream& out, const std::vector<EventSequence>& seqs) {
  for (const auto& seq : seqs) out << sequence_to_json(seq) << "\n";
}

QueryFile query_from_json(const json& j, int mark_count) {
  QueryFile out;
  const std::string type = j.value("type", "");
  if (type == "hitting_time") {
    out.spec = HittingTimeCdfQuery{markset_from_json(j.at("A"), mark_count),
                                   j.at("t").get<double>()};
  } else if (type == "nth_mark") {
    out.spec = NthMarkQuery{j.at("n").get<long>(),
                            markset_from_json(j.at("A"), mark_count)};
  } else if (type == "a_before_b") {
    out.spec = ABeforeBQuery{markset_from_json(j.at("A"), mark_count),
                             markset_from_json(j.at("B"), mark_count),
                             j.value("precision", 0.01)};
  } else if (type == "restricted") {
    RestrictionSchedule sched;
    for (const auto& b : j.at("boundaries"))
      sched.boundaries.push_back(b.get<double>());
    for (const auto& m : j.at("restricted"))
      sched.restricted.push_back(markset_from_json(m, mark_count));
    out.spec = RestrictedMarkQuery{std::move(sched)};
  } else if (type == "next_time") {
    out.spec = NextTimeCdfQuery{j.at("t").get<double>()};
  } else if (type == "next_mark") {
    NextMarkQuery q{markset_from_json(j.at("A"), mark_count), 0.0, kInf};
    if (j.contains("a")) q.a = j.at("a").get<double>();
    if (j.contains("b")) q.b = j.at("b").get<double>();
    out.spec = std::move(q);
  } else {
    throw ParseError("unknown query type: '" + type + "'");
  }
  validate_query(out.spec, mark_count);
  if (j.contains("condition")) {
    json cond = j.at("condition");
    if (!cond.contains("T") && cond.contains("events")) {
      double last = 0.0;
      for (const auto& e : cond.at("events"))
        last = std::max(last, e.at("t").get<double>());
      cond["T"] = last;
    }
    out.condition = sequence_from_json(cond, mark_count);
  }
  return out;
}

QueryFile load_query(const std::string& path, int mark_count) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open query file: " + path);
  json j;
  in >> j;
  return query_from_json(j, mark_count);
}

json estimate_to_json(const EstimateResult& r) {
  json j{{"value", r.value},
         {"std_error", r.std_error},
         {"n_samples", r.n_samples},
         {"variance", r.variance}};
  if (r.lower_bound) j["lower_bound"] = *r.lower_bound;
  if (r.upper_bound) j["upper_bound"] = *r.upper_bound;
  if (r.truncation_horizon) j["truncation_horizon"] = *r.truncation_horizon;
  if (r.censored > 0) j["censored"] = r.censored;
  if (r.budget_limited) j["budget_limited"] = true;
  if (r.max_residual_gap > 0.0) j["max_residual_gap"] = r.max_residual_gap;
  return j;
}

}  // namespace ptq::io
