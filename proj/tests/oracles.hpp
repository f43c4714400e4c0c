#pragma once

// Brute-force reference computations. They share no code with the library beyond
// plain integer vectors, so a passing comparison is independent evidence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <vector>

namespace oracle {

using Vec = std::vector<long double>;
using IVec = std::vector<std::int64_t>;
using Columns = std::vector<IVec>;  // basis given column by column

inline constexpr long double kPi = 3.141592653589793238462643383279502884L;

inline long double rho(long double sigma, long double d2) { return std::exp(-kPi * d2 / (sigma * sigma)); }

inline long double rho_range(long double sigma, long double center, std::int64_t lo, std::int64_t hi) {
  long double s = 0;
  for (std::int64_t k = lo; k <= hi; ++k) s += rho(sigma, (k - center) * (k - center));
  return s;
}

inline long double rho_z(long double sigma, long double center = 0) {
  const auto reach = static_cast<std::int64_t>(12 * sigma) + 12;
  return rho_range(sigma, center, -reach, reach);
}

inline void for_each_box(std::size_t dim, std::int64_t lo, std::int64_t hi, const std::function<void(const IVec&)>& f) {
  IVec x(dim, lo);
  while (true) {
    f(x);
    std::size_t i = 0;
    while (i < dim && x[i] == hi) x[i++] = lo;
    if (i == dim) return;
    ++x[i];
  }
}

inline Vec apply(const Columns& b, const IVec& x) {
  Vec v(b[0].size(), 0);
  for (std::size_t j = 0; j < b.size(); ++j)
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += static_cast<long double>(b[j][i]) * x[j];
  return v;
}

inline long double norm2(const Vec& v) {
  long double s = 0;
  for (auto x : v) s += x * x;
  return s;
}

/// Classical Gram-Schmidt of the columns in long double: returns b~_i and mu_{ij}.
struct Gso {
  std::vector<Vec> star;
  std::vector<std::vector<long double>> mu;
  std::vector<long double> norms;
};

inline Gso gram_schmidt(const Columns& b) {
  Gso g;
  const std::size_t n = b.size();
  g.mu.assign(n, std::vector<long double>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    Vec v(b[i].begin(), b[i].end());
    for (std::size_t j = 0; j < i; ++j) {
      long double dot = 0;
      for (std::size_t k = 0; k < v.size(); ++k) dot += static_cast<long double>(b[i][k]) * g.star[j][k];
      g.mu[i][j] = dot / (g.norms[j] * g.norms[j]);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= g.mu[i][j] * g.star[j][k];
    }
    g.norms.push_back(std::sqrt(norm2(v)));
    g.star.push_back(v);
  }
  return g;
}

/// Klein's finite-interval probability of x (centered target), written from the
/// nearest-plane recursion: x_{n-1} first, each coordinate an interval Gaussian.
inline long double klein_probability(const Columns& b, long double sigma, std::int64_t half, const IVec& x,
                                     const Vec& center) {
  const Gso g = gram_schmidt(b);
  const std::size_t n = b.size();
  Vec target = center;
  long double p = 1;
  for (std::size_t i = n; i-- > 0;) {
    long double dot = 0;
    for (std::size_t k = 0; k < target.size(); ++k) dot += target[k] * g.star[i][k];
    const long double c = dot / (g.norms[i] * g.norms[i]);
    const long double s = sigma / g.norms[i];
    const auto mid = static_cast<std::int64_t>(std::llround(c));
    if (x[i] < mid - half || x[i] > mid + half) return 0;
    p *= rho(s, (x[i] - c) * (x[i] - c)) / rho_range(s, c, mid - half, mid + half);
    for (std::size_t k = 0; k < target.size(); ++k) target[k] -= static_cast<long double>(x[i]) * b[i][k];
  }
  return p;
}

/// Exhaustive shortest nonzero vector over a coefficient box.
inline long double lambda1_box(const Columns& b, std::int64_t reach) {
  long double best = std::numeric_limits<long double>::infinity();
  for_each_box(b.size(), -reach, reach, [&](const IVec& x) {
    if (std::all_of(x.begin(), x.end(), [](std::int64_t v) { return v == 0; })) return;
    best = std::min(best, norm2(apply(b, x)));
  });
  return std::sqrt(best);
}

/// lambda_1 of {v : v = A s mod q} by scanning all integer vectors in [-q/2, q/2]^m.
inline long double lambda1_qary_scan(const std::vector<IVec>& a_rows, std::int64_t q) {
  const std::size_t m = a_rows.size(), n = a_rows[0].size();
  std::map<IVec, bool> image;
  for_each_box(n, 0, q - 1, [&](const IVec& s) {
    IVec v(m);
    for (std::size_t i = 0; i < m; ++i) {
      std::int64_t acc = 0;
      for (std::size_t j = 0; j < n; ++j) acc += a_rows[i][j] * s[j];
      v[i] = ((acc % q) + q) % q;
    }
    image[v] = true;
  });
  long double best = q;
  for (const auto& [v, _] : image) {
    long double s = 0;
    bool zero = true;
    for (auto c : v) {
      const std::int64_t r = c > q / 2 ? c - q : c;
      s += static_cast<long double>(r * r);
      zero = zero && r == 0;
    }
    if (!zero) best = std::min(best, std::sqrt(s));
  }
  return best;
}

inline long double log2_sum_exp(const std::vector<long double>& xs) {
  long double s = 0;
  for (auto x : xs) s += std::exp2(x);
  return std::log2(s);
}

/// sin((2k+1) theta) with theta = asin(sqrt(a)).
inline long double grover(long double a, std::uint64_t k) {
  return std::sin((2.0L * k + 1) * std::asin(std::sqrt(a)));
}

/// f_{Z^n, s}(x) = rho_s(Z^n + x) / rho_s(Z^n) for diagonal lattices diag(d).
inline long double periodic_diag(const IVec& d, long double s, const Vec& x) {
  long double r = 1;
  for (std::size_t i = 0; i < d.size(); ++i) {
    long double num = 0, den = 0;
    for (std::int64_t k = -60; k <= 60; ++k) {
      const long double v = static_cast<long double>(k * d[i]);
      num += rho(s, (v + x[i]) * (v + x[i]));
      den += rho(s, v * v);
    }
    r *= num / den;
  }
  return r;
}

}  // namespace oracle
