#include <cmath>

#include "tda/rng.hpp"

namespace tda {

std::uint64_t Rng::next_below(std::uint64_t bound) {
  if (bound == 0) throw Error("next_below: bound must be positive");
  // reject the partial block at the top of the range so every value in
  // [0, bound) is equally likely
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

void fill_standard_normal(Rng& rng, double* out, std::size_t n) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  std::size_t i = 0;
  while (i < n) {
    const double u1 = rng.next_open();
    const double u2 = rng.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    out[i++] = r * std::cos(two_pi * u2);
    if (i < n) out[i++] = r * std::sin(two_pi * u2);
  }
}

Matrix sample_standard_normal(Rng& rng, int rows, int cols) {
  Matrix out(rows, cols);
  fill_standard_normal(rng, out.data(), out.size());
  return out;
}

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace tda
