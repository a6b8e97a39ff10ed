#pragma once

#include "json.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ptq/core.hpp"
#include "ptq/queries.hpp"

namespace ptq::io {

using json = nlohmann::json;

struct ParseError : Error {
  using Error::Error;
};

// Model config: {"type":"hawkes","mu":[..],"alpha":[[..]],"beta":[[..]]}
// or {"type":"poisson","rates":[..]}.
std::unique_ptr<IntensityModel> model_from_json(const json& j);
std::unique_ptr<IntensityModel> load_model(const std::string& path);

// Sequence line: {"events":[{"t":..,"k":..},...],"T":..}.
EventSequence sequence_from_json(const json& j, int mark_count = -1);
json sequence_to_json(const EventSequence& seq);
std::vector<EventSequence> read_jsonl(std::istream& in, int mark_count = -1);
void write_jsonl(std::ostream& out, const std::vector<EventSequence>& seqs);

// Query spec: {"type":"hitting_time","A":[..],"t":..} and friends; times are
// offsets from the query origin. The optional "condition" carries a prefix
// sequence.
struct QueryFile {
  QuerySpec spec;
  std::optional<EventSequence> condition;
};
QueryFile query_from_json(const json& j, int mark_count);
QueryFile load_query(const std::string& path, int mark_count);

json estimate_to_json(const EstimateResult& r);

}  // namespace ptq::io
