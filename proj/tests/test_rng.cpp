#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <numeric>

#include "tda/rng.hpp"

using tda::Matrix;
using tda::Rng;

TEST_CASE("generator reproduces the published splitmix64 sequence") {
  // reference outputs of splitmix64 seeded with 0; pins the stream across
  // platforms and compilers
  const std::uint64_t want[] = {0xE220A8397B1DCDAFull, 0x6E789E6AA1B965F4ull,
                                0x06C45D188009454Full, 0xF88BB8A8724C81ECull,
                                0x1B39896A51A8749Bull};
  Rng r(0);
  for (std::uint64_t w : want) CHECK(r.next_u64() == w);
}

TEST_CASE("same seed, same stream; different seeds diverge") {
  Rng a(123), b(123), c(124);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t x = a.next_u64();
    all_equal = all_equal && x == b.next_u64();
    any_diff = any_diff || x != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("split streams are independent of each other and of the parent") {
  const Rng parent(99);
  Rng s1 = parent.split(1);
  Rng s2 = parent.split(2);
  CHECK(s1.next_u64() != s2.next_u64());

  // splitting again from the same (unadvanced) parent reproduces the stream
  Rng s1b = parent.split(1);
  Rng s1c = parent.split(1);
  for (int i = 0; i < 8; ++i) CHECK(s1b.next_u64() == s1c.next_u64());
}

TEST_CASE("uniform ranges") {
  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const double u = r.next_open();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const double u = r.next_range(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
  }
}

TEST_CASE("next_below stays in bounds and hits every residue") {
  Rng r(11);
  CHECK(r.next_below(1) == 0);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t v = r.next_below(5);
    REQUIRE(v < 5);
    ++counts[static_cast<int>(v)];
  }
  for (int c : counts) CHECK(c > 800);  // crude uniformity; expected 1000 each
}

TEST_CASE("normal sampling is deterministic per seed") {
  Rng a(5), b(5);
  const Matrix x = tda::sample_standard_normal(a, 8, 3);
  const Matrix y = tda::sample_standard_normal(b, 8, 3);
  CHECK(x == y);
}

TEST_CASE("odd-length normal fills are prefixes of even ones") {
  // a trailing odd draw discards its Box-Muller partner, so the consumed
  // u64 stream depends only on the pair count
  Rng a(17), b(17);
  double five[5], six[6];
  tda::fill_standard_normal(a, five, 5);
  tda::fill_standard_normal(b, six, 6);
  for (int i = 0; i < 5; ++i) CHECK(five[i] == six[i]);
}

TEST_CASE("normal moments over 1e5 draws") {
  Rng r(2024);
  const std::size_t n = 100000;
  std::vector<double> x(n);
  tda::fill_standard_normal(r, x.data(), n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  CHECK(std::abs(mean) < 0.02);
  CHECK(var > 0.97);
  CHECK(var < 1.03);
}

TEST_CASE("degenerate normal shapes") {
  Rng r(3);
  const Matrix empty = tda::sample_standard_normal(r, 0, 4);
  CHECK(empty.rows() == 0);
  CHECK(empty.size() == 0);
}

TEST_CASE("shuffle is a permutation and is seed-deterministic") {
  std::vector<int> idx(257);
  std::iota(idx.begin(), idx.end(), 0);
  Rng a(31), b(31);
  auto one = idx;
  auto two = idx;
  tda::shuffle_indices(one, a);
  tda::shuffle_indices(two, b);
  CHECK(one == two);
  CHECK(one != idx);  // 257! to 1 odds against
  std::sort(one.begin(), one.end());
  CHECK(one == idx);
}
