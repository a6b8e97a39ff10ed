#include "doctest.h"

#include <sstream>

#include "ptq/hawkes.hpp"
#include "ptq/io.hpp"
#include "ptq/rng.hpp"

using namespace ptq;

TEST_CASE("model round trip") {
  const io::json j = io::json::parse(R"({
    "type": "hawkes",
    "mu": [0.5, 0.3],
    "alpha": [[0.2, 0.1], [0.0, 0.3]],
    "beta": [[1.5, 2.0], [1.0, 2.5]]
  })");
  auto model = io::model_from_json(j);
  CHECK(model->mark_count() == 2);
  auto* hawkes = dynamic_cast<HawkesModel*>(model.get());
  REQUIRE(hawkes != nullptr);
  CHECK(hawkes->params().mu[1] == 0.3);
  CHECK(hawkes->params().alpha(0, 1) == 0.1);

  auto poisson = io::model_from_json(
      io::json::parse(R"({"type":"poisson","rates":[1.0,2.0]})"));
  CHECK(poisson->mark_count() == 2);

  CHECK_THROWS_AS(io::model_from_json(io::json::parse(R"({"type":"wat"})")),
                  io::ParseError);
  CHECK_THROWS_AS(
      io::model_from_json(io::json::parse(
          R"({"type":"hawkes","mu":[1],"alpha":[[1],[2]],"beta":[[1]]})")),
      BadArgument);
  CHECK_THROWS_AS(
      io::model_from_json(io::json::parse(
          R"({"type":"hawkes","mu":[1],"alpha":"x","beta":[[1]]})")),
      io::ParseError);
}

TEST_CASE("sequence jsonl round trip is lossless") {
  RngStream rng(44);
  std::vector<EventSequence> seqs;
  for (int i = 0; i < 50; ++i) {
    EventSequence s;
    double t = 0.0;
    const int n = static_cast<int>(rng.uniform() * 10);
    for (int j = 0; j < n; ++j) {
      t += rng.exponential(1.0);
      s.events.push_back({t, static_cast<MarkId>(rng.uniform() * 4)});
    }
    s.window_end = t + rng.uniform();
    seqs.push_back(std::move(s));
  }
  std::stringstream buf;
  io::write_jsonl(buf, seqs);
  const auto back = io::read_jsonl(buf, 4);
  REQUIRE(back.size() == seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    CHECK(back[i].window_end == seqs[i].window_end);
    REQUIRE(back[i].size() == seqs[i].size());
    for (std::size_t j = 0; j < seqs[i].size(); ++j) {
      CHECK(back[i][j].time == seqs[i][j].time);  // exact doubles
      CHECK(back[i][j].mark == seqs[i][j].mark);
    }
  }
}

TEST_CASE("sequence parsing validates") {
  CHECK_THROWS_AS(io::sequence_from_json(io::json::parse(
                      R"({"T":1.0,"events":[{"t":0.5,"k":3}]})"), 2),
                  BadMark);
  CHECK_THROWS_AS(io::sequence_from_json(io::json::parse(
                      R"({"T":1.0,"events":[{"t":0.8,"k":0},{"t":0.5,"k":1}]})"),
                  2),
                  OrderingViolation);
  CHECK_THROWS(io::sequence_from_json(io::json::parse(R"({"events":[]})"), 2));
}

TEST_CASE("query files") {
  const io::QueryFile ht = io::query_from_json(io::json::parse(
      R"({"type":"hitting_time","A":[0,2],"t":1.5})"), 3);
  const auto& q = std::get<HittingTimeCdfQuery>(ht.spec);
  CHECK(q.t == 1.5);
  CHECK(q.set == MarkSet(3, {0, 2}));
  CHECK_FALSE(ht.condition.has_value());

  const io::QueryFile ab = io::query_from_json(io::json::parse(
      R"({"type":"a_before_b","A":[0],"B":[1],
          "condition":{"events":[{"t":0.25,"k":2}]}})"), 3);
  CHECK(std::get<ABeforeBQuery>(ab.spec).precision == 0.01);
  REQUIRE(ab.condition.has_value());
  CHECK(ab.condition->window_end == 0.25);

  CHECK_THROWS_AS(io::query_from_json(io::json::parse(
                      R"({"type":"a_before_b","A":[0],"B":[0]})"), 3),
                  BadArgument);
  CHECK_THROWS_AS(
      io::query_from_json(io::json::parse(R"({"type":"nope"})"), 3),
      io::ParseError);

  const io::QueryFile rs = io::query_from_json(io::json::parse(
      R"({"type":"restricted","boundaries":[1.0,2.0],
          "restricted":[[0],[1,2]]})"), 3);
  const auto& sched = std::get<RestrictedMarkQuery>(rs.spec).schedule;
  CHECK(sched.span_count() == 2);
  CHECK(sched.restricted[1] == MarkSet(3, {1, 2}));
}

TEST_CASE("estimate serialization") {
  EstimateResult r;
  r.value = 0.25;
  r.std_error = 0.01;
  r.n_samples = 100;
  r.variance = 0.01;
  r.lower_bound = 0.2;
  r.upper_bound = 0.3;
  const io::json j = io::estimate_to_json(r);
  CHECK(j.at("value") == 0.25);
  CHECK(j.at("n_samples") == 100);
  CHECK(j.at("lower_bound") == 0.2);
  CHECK_FALSE(j.contains("censored"));
  CHECK_FALSE(j.contains("budget_limited"));
}
