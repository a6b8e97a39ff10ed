#include "doctest.h"

#include <cmath>
#include <set>

#include "ptq/rng.hpp"

using namespace ptq;

TEST_CASE("streams are deterministic in (master, index)") {
  RngStream a = RngStream::derive(42, 7);
  RngStream b = RngStream::derive(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c = RngStream::derive(42, 8);
  RngStream d = RngStream::derive(43, 7);
  RngStream e = RngStream::derive(42, 7);
  CHECK(c.next_u64() != e.next_u64());
  CHECK(d.next_u64() != RngStream::derive(42, 7).next_u64());
}

// Frozen reference draws; any change here breaks reproducibility of every
// seeded estimate in the library.
TEST_CASE("frozen output values") {
  RngStream s(1);
  CHECK(s.next_u64() == 0x910A2DEC89025CC1ULL);
  CHECK(s.next_u64() == 0xBEEB8DA1658EEC67ULL);
  CHECK(s.next_u64() == 0xF893A2EEFB32555EULL);
}

TEST_CASE("uniform lies in the open unit interval") {
  RngStream s(123);
  double lo = 1.0, hi = 0.0, mean = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    mean += u / n;
  }
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("exponential has the right first two moments") {
  RngStream s(7);
  const int n = 200000;
  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.exponential(2.0);
    CHECK(x > 0.0);
    mean += x;
    m2 += x * x;
  }
  mean /= n;
  m2 /= n;
  // Exp(2): mean 1/2, second moment 2/4; 4-sigma bands
  CHECK(std::abs(mean - 0.5) < 4.0 * 0.5 / std::sqrt(double(n)));
  CHECK(std::abs(m2 - 0.5) < 4.0 * 2.0 / std::sqrt(double(n)));
}

TEST_CASE("derived streams do not collide across indices") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i)
    seen.insert(RngStream::derive(5, i).next_u64());
  CHECK(seen.size() == 10000);
}
