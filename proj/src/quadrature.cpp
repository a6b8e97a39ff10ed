#include "ptq/quadrature.hpp"

#include <cmath>

namespace ptq {

double trapezoid(const std::function<double(double)>& f, double a, double b,
                 int n) {
  if (a > b) throw InvalidInterval("trapezoid requires a <= b");
  if (n < 2) throw BadArgument("trapezoid requires n >= 2");
  if (a == b) return 0.0;
  const double h = (b - a) / (n - 1);
  double prev = f(a);
  if (!std::isfinite(prev)) throw NonFiniteIntegrand("f(a) not finite");
  double sum = 0.0;
  for (int i = 1; i < n; ++i) {
    // hit b exactly on the last point
    const double x = (i == n - 1) ? b : a + h * i;
    const double cur = f(x);
    if (!std::isfinite(cur))
      throw NonFiniteIntegrand("integrand not finite at x=" + std::to_string(x));
    sum += 0.5 * (prev + cur) * (x - (a + h * (i - 1)));
    prev = cur;
  }
  return sum;
}

void OnlineAccumulator::start(double t0, double f0) {
  if (!std::isfinite(f0)) throw NonFiniteIntegrand("f0 not finite");
  started_ = true;
  last_t_ = t0;
  last_f_ = f0;
  integral_ = 0.0;
  exp_factor_ = 1.0;
}

void OnlineAccumulator::step(double t_next, double f_next) {
  if (!started_) throw Error("OnlineAccumulator::step before start");
  if (t_next < last_t_) throw NonMonotonicTime("accumulator time went backwards");
  if (!std::isfinite(f_next)) throw NonFiniteIntegrand("f not finite");
  integral_ += 0.5 * (last_f_ + f_next) * (t_next - last_t_);
  exp_factor_ = std::exp(-integral_);
  last_t_ = t_next;
  last_f_ = f_next;
}

}  // namespace ptq
