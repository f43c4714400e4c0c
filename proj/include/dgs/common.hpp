#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgs {

enum class ErrorKind {
  RankDeficient,
  EnumerationBudgetExceeded,
  NoVectorInRadius,
  ParamConstraint,
  EmptySampleSet,
  RatioOutOfRange,
  ZeroGoodAmplitude,
  PhiOutOfRange,
  HypothesisViolated,
  NoSolutionInSupport,
  MissingInput,
  InvalidInput,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline constexpr std::uint64_t kDefaultBudget = 10'000'000;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Coords = std::vector<std::int64_t>;

// Rounds half away from zero.
inline std::int64_t round_nearest(double x) {
  return static_cast<std::int64_t>(std::round(x));
}

// Rounds to nu fractional bits, ties to even.
inline double round_to_bits(double x, int nu) {
  return std::ldexp(std::nearbyint(std::ldexp(x, nu)), -nu);
}

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// log2(2^a + 2^b) without overflow.
inline double log2_add(double a, double b) {
  if (a < b) std::swap(a, b);
  return a + std::log2(1.0 + std::exp2(b - a));
}

// Neumaier-compensated running sum; order of add() calls fixes the result.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Accumulates terms given by their natural logarithm.
class LogSum {
 public:
  void add(double log_term) {
    if (log_term == kNegInf) return;
    if (log_term > max_) {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    } else {
      sum_ += std::exp(log_term - max_);
    }
  }
  double value() const { return sum_ == 0.0 ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

// Visits every integer vector in a product of intervals, last coordinate slowest.
template <class F>
void for_each_in_box(const std::vector<std::pair<std::int64_t, std::int64_t>>& box, F&& f) {
  const std::size_t n = box.size();
  Coords x(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (box[i].first > box[i].second) return;
    x[i] = box[i].first;
  }
  while (true) {
    f(static_cast<const Coords&>(x));
    std::size_t i = 0;
    while (i < n) {
      if (x[i] < box[i].second) {
        ++x[i];
        break;
      }
      x[i] = box[i].first;
      ++i;
    }
    if (i == n) return;
  }
}

std::uint64_t box_size(const std::vector<std::pair<std::int64_t, std::int64_t>>& box);

}  // namespace dgs
