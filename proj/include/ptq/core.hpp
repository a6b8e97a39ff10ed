#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OrderingViolation : Error {
  using Error::Error;
};
struct HorizonViolation : Error {
  using Error::Error;
};
struct BadMark : Error {
  using Error::Error;
};
struct InvalidInterval : Error {
  using Error::Error;
};
struct BadArgument : Error {
  using Error::Error;
};
struct TimeBeforeHistory : Error {
  using Error::Error;
};
struct DominationViolation : Error {
  using Error::Error;
};
struct ZeroIntensityEvent : Error {
  using Error::Error;
};
struct NonFiniteIntegrand : Error {
  using Error::Error;
};
struct NonMonotonicTime : Error {
  using Error::Error;
};
struct DegenerateTruth : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Events and sequences
// ---------------------------------------------------------------------------

// Marks are dense integers 0..K-1; string labels, if any, live at the I/O
// boundary.
using MarkId = int;

struct MarkedEvent {
  double time = 0.0;
  MarkId mark = 0;
};

// Time-ordered events over an observation window [*, window_end].
struct EventSequence {
  std::vector<MarkedEvent> events;
  double window_end = 0.0;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
  const MarkedEvent& operator[](std::size_t i) const { return events[i]; }
  double last_time(double fallback = 0.0) const {
    return events.empty() ? fallback : events.back().time;
  }
};

// Subset of {0,..,K-1} with bitset semantics.
class MarkSet {
 public:
  MarkSet() = default;
  explicit MarkSet(int mark_count) : bits_(mark_count, false) {}
  MarkSet(int mark_count, std::initializer_list<MarkId> marks)
      : bits_(mark_count, false) {
    for (MarkId k : marks) set(k);
  }
  static MarkSet all(int mark_count) {
    MarkSet s(mark_count);
    std::fill(s.bits_.begin(), s.bits_.end(), true);
    s.count_ = mark_count;
    return s;
  }
  static MarkSet from_list(int mark_count, const std::vector<MarkId>& marks) {
    MarkSet s(mark_count);
    for (MarkId k : marks) s.set(k);
    return s;
  }

  int mark_count() const { return static_cast<int>(bits_.size()); }
  int count() const { return count_; }
  bool empty() const { return count_ == 0; }
  bool full() const { return count_ == mark_count(); }

  bool contains(MarkId k) const {
    return k >= 0 && k < mark_count() && bits_[k];
  }
  void set(MarkId k) {
    if (k < 0 || k >= mark_count())
      throw BadMark("mark " + std::to_string(k) + " outside [0, " +
                    std::to_string(mark_count()) + ")");
    if (!bits_[k]) {
      bits_[k] = true;
      ++count_;
    }
  }

  MarkSet complement() const {
    MarkSet s(mark_count());
    for (int k = 0; k < mark_count(); ++k)
      if (!bits_[k]) s.set(k);
    return s;
  }
  MarkSet unite(const MarkSet& other) const {
    MarkSet s(mark_count());
    for (int k = 0; k < mark_count(); ++k)
      if (bits_[k] || other.bits_[k]) s.set(k);
    return s;
  }
  bool intersects(const MarkSet& other) const {
    for (int k = 0; k < mark_count(); ++k)
      if (bits_[k] && other.bits_[k]) return true;
    return false;
  }
  std::vector<MarkId> members() const {
    std::vector<MarkId> out;
    for (int k = 0; k < mark_count(); ++k)
      if (bits_[k]) out.push_back(k);
    return out;
  }

  // Sum of the components selected by this set.
  double select_sum(const Vector& v) const {
    double s = 0.0;
    for (int k = 0; k < mark_count(); ++k)
      if (bits_[k]) s += v[k];
    return s;
  }

  bool operator==(const MarkSet& other) const { return bits_ == other.bits_; }

 private:
  std::vector<bool> bits_;
  int count_ = 0;
};

// Boundary times a_1 < ... < a_n with a restricted mark set per span
// (a_{i-1}, a_i]; beyond a_n nothing is restricted.
struct RestrictionSchedule {
  std::vector<double> boundaries;
  std::vector<MarkSet> restricted;

  std::size_t span_count() const { return boundaries.size(); }
  double final_boundary() const {
    return boundaries.empty() ? -kInf : boundaries.back();
  }

  // Restricted set in force at time t (span intervals open on the left),
  // or nullptr past the final boundary.
  const MarkSet* active_at(double t, double origin) const {
    if (t <= origin) return nullptr;
    for (std::size_t i = 0; i < boundaries.size(); ++i)
      if (t <= boundaries[i]) return &restricted[i];
    return nullptr;
  }

  void validate(double origin) const {
    if (boundaries.size() != restricted.size())
      throw BadArgument("schedule boundary/markset length mismatch");
    double prev = origin;
    for (double b : boundaries) {
      if (!(b > prev)) throw BadArgument("schedule boundaries must increase");
      prev = b;
    }
  }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

void validate_sequence(const EventSequence& seq, int mark_count = -1);

bool in_query_space(const EventSequence& seq, const RestrictionSchedule& schedule,
                    double origin);

EventSequence slice(const EventSequence& seq, double a, double b,
                    bool closed_left, bool closed_right);

// ---------------------------------------------------------------------------
// Intensity model contract
// ---------------------------------------------------------------------------

struct ThinningBound {
  double bound = 0.0;    // dominates total intensity over [t, t + horizon]
  double horizon = kInf; // validity window; refresh past it
};

// Per-trajectory incremental evaluator. Anchored at some time with a fixed
// event prefix; all queries assume no events have occurred since the anchor.
// Not shared between threads.
class ModelState {
 public:
  virtual ~ModelState() = default;
  virtual int mark_count() const = 0;
  virtual double anchor() const = 0;
  // lambda*_k(t) for t >= anchor, conditioned on no event in (anchor, t].
  virtual Vector intensity(double t) const = 0;
  virtual double total_intensity(double t) const { return intensity(t).sum(); }
  // integral_a^b sum_{k in set} lambda*_k(s) ds, anchor <= a <= b, event-free.
  virtual double compensator(double a, double b, const MarkSet& set) const = 0;
  virtual ThinningBound thinning_bound(double t) const = 0;
  // Appends an event; the event time becomes the new anchor.
  virtual void add_event(const MarkedEvent& ev) = 0;
};

// Pure conditional-intensity model. Implementations must be stateless
// functions of (t, history); `history` carries the full conditioning prefix.
class IntensityModel {
 public:
  virtual ~IntensityModel() = default;
  virtual int mark_count() const = 0;

  virtual Vector intensity(double t, const EventSequence& history) const = 0;
  virtual double compensator(double a, double b, const EventSequence& history,
                             const MarkSet& set) const = 0;
  virtual ThinningBound thinning_bound(double t,
                                       const EventSequence& history) const = 0;

  // Incremental evaluator seeded with `history`, anchored at `origin`.
  // The default replays the full history on every call; models with a
  // recursive structure override it.
  virtual std::unique_ptr<ModelState> start(const EventSequence& history,
                                            double origin) const;
};

// ModelState fallback that re-invokes the history-based contract.
class ReplayState final : public ModelState {
 public:
  ReplayState(const IntensityModel& model, EventSequence history, double origin);

  int mark_count() const override { return model_.mark_count(); }
  double anchor() const override { return anchor_; }
  Vector intensity(double t) const override;
  double compensator(double a, double b, const MarkSet& set) const override;
  ThinningBound thinning_bound(double t) const override;
  void add_event(const MarkedEvent& ev) override;

 private:
  const IntensityModel& model_;
  EventSequence history_;
  double anchor_;
};

}  // namespace ptq
