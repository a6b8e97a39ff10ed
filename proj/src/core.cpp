#include "ptq/core.hpp"

#include <cmath>

namespace ptq {

void validate_sequence(const EventSequence& seq, int mark_count) {
  double prev = -kInf;
  for (const auto& ev : seq.events) {
    if (!std::isfinite(ev.time) || ev.time < 0.0)
      throw OrderingViolation("event time must be finite and non-negative");
    if (!(ev.time > prev))
      throw OrderingViolation("event times must be strictly increasing");
    if (ev.time > seq.window_end)
      throw HorizonViolation("event at t=" + std::to_string(ev.time) +
                             " beyond window_end=" +
                             std::to_string(seq.window_end));
    if (mark_count >= 0 && (ev.mark < 0 || ev.mark >= mark_count))
      throw BadMark("mark " + std::to_string(ev.mark) + " outside [0, " +
                    std::to_string(mark_count) + ")");
    prev = ev.time;
  }
}

bool in_query_space(const EventSequence& seq, const RestrictionSchedule& schedule,
                    double origin) {
  schedule.validate(origin);
  for (const auto& ev : seq.events) {
    const MarkSet* active = schedule.active_at(ev.time, origin);
    if (active != nullptr && active->contains(ev.mark)) return false;
  }
  return true;
}

EventSequence slice(const EventSequence& seq, double a, double b,
                    bool closed_left, bool closed_right) {
  if (a > b) throw InvalidInterval("slice requires a <= b");
  EventSequence out;
  out.window_end = seq.window_end;
  for (const auto& ev : seq.events) {
    const bool above = closed_left ? ev.time >= a : ev.time > a;
    const bool below = closed_right ? ev.time <= b : ev.time < b;
    if (above && below) out.events.push_back(ev);
  }
  return out;
}

std::unique_ptr<ModelState> IntensityModel::start(const EventSequence& history,
                                                  double origin) const {
  return std::make_unique<ReplayState>(*this, history, origin);
}

ReplayState::ReplayState(const IntensityModel& model, EventSequence history,
                         double origin)
    : model_(model), history_(std::move(history)), anchor_(origin) {
  if (!history_.events.empty() && history_.events.back().time > origin)
    throw TimeBeforeHistory("state origin precedes last history event");
  history_.window_end = origin;
}

Vector ReplayState::intensity(double t) const {
  if (t < anchor_) throw TimeBeforeHistory("intensity query before anchor");
  return model_.intensity(t, history_);
}

double ReplayState::compensator(double a, double b, const MarkSet& set) const {
  if (a < anchor_) throw TimeBeforeHistory("compensator interval before anchor");
  return model_.compensator(a, b, history_, set);
}

ThinningBound ReplayState::thinning_bound(double t) const {
  if (t < anchor_) throw TimeBeforeHistory("bound query before anchor");
  return model_.thinning_bound(t, history_);
}

void ReplayState::add_event(const MarkedEvent& ev) {
  if (ev.time < anchor_) throw TimeBeforeHistory("event before anchor");
  history_.events.push_back(ev);
  history_.window_end = ev.time;
  anchor_ = ev.time;
}

}  // namespace ptq
