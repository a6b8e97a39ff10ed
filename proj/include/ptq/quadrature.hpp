#pragma once

#include <functional>

#include "ptq/core.hpp"

namespace ptq {

// Fixed-grid trapezoidal rule on n equally spaced points over [a, b].
double trapezoid(const std::function<double(double)>& f, double a, double b,
                 int n);

// Accumulates integral f dt and exp(-integral) one trapezoid step at a
// time, interleaved with a running simulation; nothing about the trajectory
// is stored.
class OnlineAccumulator {
 public:
  OnlineAccumulator() = default;

  void start(double t0, double f0);
  void step(double t_next, double f_next);

  bool started() const { return started_; }
  double integral() const { return integral_; }
  double exp_factor() const { return exp_factor_; }
  double last_time() const { return last_t_; }
  double last_value() const { return last_f_; }

 private:
  bool started_ = false;
  double last_t_ = 0.0;
  double last_f_ = 0.0;
  double integral_ = 0.0;
  double exp_factor_ = 1.0;
};

}  // namespace ptq
