#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "tvd/rng.hpp"

using tvd::Philox;

// Known-answer vectors published with the Random123 reference implementation.
TEST_CASE("philox block matches the reference vectors") {
  CHECK(Philox::block({0, 0, 0, 0}, {0, 0}) == Philox::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Philox::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Philox::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream output is the block sequence over an incrementing counter") {
  Philox g(0);
  const Philox::Counter first = Philox::block({0, 0, 0, 0}, {0, 0});
  const Philox::Counter second = Philox::block({1, 0, 0, 0}, {0, 0});
  for (auto w : first) CHECK(g() == w);
  for (auto w : second) CHECK(g() == w);
}

TEST_CASE("substreams are reproducible and distinct") {
  Philox a(7, 32, 3), b(7, 32, 3), c(7, 32, 4), d(8, 32, 3);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 64; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    differs_c |= x != c.normal();
    differs_d |= x != d.normal();
  }
  CHECK(differs_c);
  CHECK(differs_d);
  std::set<std::uint64_t> keys;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t n = 0; n < 16; ++n)
      for (std::uint64_t r = 0; r < 16; ++r) keys.insert(tvd::derive_key(s, n, r));
  CHECK(keys.size() == 4 * 16 * 16);
}

TEST_CASE("uniform and normal draws have the right moments") {
  Philox g(12345);
  const int m = 200000;
  double su = 0, sn = 0, sn2 = 0;
  double lo = 1, hi = 0;
  for (int i = 0; i < m; ++i) {
    const double u = g.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    su += u;
    const double z = g.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(su / m == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / m) < 0.01);
  CHECK(sn2 / m == doctest::Approx(1.0).epsilon(0.02));
}
