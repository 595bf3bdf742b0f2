#pragma once

// Brute-force reference computations that share no code with the library.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

/// E[f | first `level` coordinates] on the binary product space of `horizon`
/// fair coins, atoms in path order with coordinate 1 most significant. Each
/// atom is averaged over every atom sharing its first `level` bits.
inline std::vector<double> prefix_average(const std::vector<double>& f, int horizon, int level) {
  const std::size_t n = f.size();
  level = std::clamp(level, 0, horizon);
  const int drop = horizon - level;
  std::map<std::size_t, std::pair<double, int>> acc;
  for (std::size_t a = 0; a < n; ++a) {
    auto& [sum, count] = acc[a >> drop];
    sum += f[a];
    ++count;
  }
  std::vector<double> out(n);
  for (std::size_t a = 0; a < n; ++a) {
    const auto& [sum, count] = acc[a >> drop];
    out[a] = sum / count;
  }
  return out;
}

/// Coordinate k (1-based) of a fair-coin path: +1 for H (bit 0), -1 for T.
inline double coin(std::size_t atom, int k, int horizon) {
  return ((atom >> (horizon - k)) & 1u) ? -1.0 : 1.0;
}

/// E|eps_1 + ... + eps_n| / n for fair coins, by walking all 2^n paths.
inline double coin_mean_abs_average(int n) {
  double total = 0.0;
  for (std::uint64_t path = 0; path < (std::uint64_t{1} << n); ++path) {
    const int heads = n - std::popcount(path);
    total += std::abs(2.0 * heads - n);
  }
  return total / std::ldexp(1.0, n) / n;
}

/// 2 n C(n-1, n/2-1) / 2^n / n: the closed-form mean absolute deviation of a
/// simple random walk at even n.
inline double binomial_mad_over_n(int n) {
  double c = 1.0;  // C(n-1, k) built incrementally
  const int k = n / 2 - 1;
  for (int j = 1; j <= k; ++j) c = c * (n - 1 - k + j) / j;
  return 2.0 * n * c / std::ldexp(1.0, n) / n;
}

inline double expectation(const std::vector<double>& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s / static_cast<double>(f.size());
}

}  // namespace oracle
