#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dgs/common.hpp"
#include "dgs/lattice.hpp"

namespace dgs {

// Constant c in the mass-estimation condition log(sigma) + M log 2 + nu <= c 2^{2M}.
inline constexpr double kMassConditionConstant = 1.0;

struct GaussianParams {
  double sigma = 1.0;
  std::vector<double> center;  // empty means the origin
  int box_exp = 2;             // M, interval half-width 2^M
  int precision = 8;           // nu

  void validate() const;
  double center_at(std::size_t i) const { return i < center.size() ? center[i] : 0.0; }
  Eigen::VectorXd center_vector(std::size_t dim) const;
  std::int64_t half_width() const { return std::int64_t{1} << box_exp; }
  double mass_condition_lhs() const;
  bool mass_condition(double c = kMassConditionConstant) const;
};

/// Sum of exp(-pi (k - center)^2 / sigma^2) over lo <= k <= hi.
double gaussian_sum(double sigma, double center, std::int64_t lo, std::int64_t hi);
/// Natural log of gaussian_sum, safe when every term underflows.
double log_gaussian_sum(double sigma, double center, std::int64_t lo, std::int64_t hi);
/// rho_{sigma,c}(Z), truncation error below 1e-15 relative.
double rho_integers(double sigma, double center = 0.0);
double log_rho_integers(double sigma, double center = 0.0);

/// rho_{sigma,x}([-2^M, 2^M]); enforces GaussianParams validity and the mass condition.
double rho_interval(const GaussianParams& p, double center_x,
                    double c_const = kMassConditionConstant);

using CoeffBox = std::vector<std::pair<std::int64_t, std::int64_t>>;

double rho_lattice_box(const LatticeBasis& basis, const GaussianParams& p, const CoeffBox& box,
                       std::uint64_t budget = kDefaultBudget);
double log_rho_lattice_box(const LatticeBasis& basis, const GaussianParams& p, const CoeffBox& box,
                           std::uint64_t budget = kDefaultBudget);

struct DistributionTable {
  std::vector<Coords> coords;
  std::vector<Eigen::VectorXd> points;
  std::vector<double> mass;
  double total_check = 0.0;

  std::size_t size() const { return mass.size(); }
  void push(Coords c, Eigen::VectorXd p, double m);
  // Normalises (if requested), fills total_check and the lookup index, checks invariants.
  void finalize(bool normalize);
  std::optional<std::size_t> find(const Coords& c) const;
  std::string to_csv() const;

 private:
  std::map<Coords, std::size_t> index_;
};

double total_variation(const DistributionTable& a, const DistributionTable& b);

struct InequalityCheck {
  std::string name;
  double log_lhs = 0.0;  // natural logs, so that tiny masses stay representable
  double log_rhs = 0.0;
  bool holds = false;
};

struct TailBoundsReport {
  InequalityCheck integer_mass;   // rho_{s,c}(Z) <= rho_s(I) / (1 - 2^M sqrt(2 pi e) e^{-pi 4^M})
  InequalityCheck integer_tail;   // rho_{s,c}(Z \ I) <= 2^{M+1} sqrt(2 pi e) e^{-pi 4^M} (3s + 4)
  InequalityCheck lattice_tail;   // rho_s(L \ Omega) <= 2 (2^{M-1} sqrt(2 pi e))^m e^{-pi m 4^{M-1}} (...)^m
  bool all_hold() const { return integer_mass.holds && integer_tail.holds && lattice_tail.holds; }
};

TailBoundsReport tail_bounds_check(const LatticeBasis& basis, const GaussianParams& p,
                                   std::uint64_t budget = kDefaultBudget);

/// Upper bound prod_i rho_{sigma/||b~_i||}(Z) on rho_sigma(L), natural log.
double log_rho_lattice_upper(const LatticeBasis& basis, double sigma);

/// Radius r with rho_s(L \ rB) and rho_s((L+x) \ rB) below rel_tol * rho_s(L).
double gaussian_truncation_radius(double sigma, std::size_t dim, double rel_tol);

struct MassSplit {
  double log_selected = kNegInf;   // rho over enumerated selected points of L - center
  double log_remainder = kNegInf;  // rigorous bound on the mass of points never enumerated
  double radius = 0.0;
};

/// Sums rho_sigma(v - center) over lattice vectors v whose coordinates pass `select`,
/// growing an enumeration ball until the unvisited remainder is below rel_tol times the sum.
MassSplit lattice_mass_split(const LatticeBasis& basis, double sigma, const Eigen::VectorXd& center,
                             const std::function<bool(const Coords&)>& select, double rel_tol,
                             std::uint64_t budget = kDefaultBudget);

/// f_{L,sigma}(x) = rho_sigma(L + x) / rho_sigma(L), square bases.
double periodic_gaussian(const LatticeBasis& basis, double sigma, const Eigen::VectorXd& x,
                         std::uint64_t budget = kDefaultBudget);

struct FourierCheck {
  double f_value = 0.0;
  double series_value = 0.0;
  double residual = 0.0;
  double dual_tail = 0.0;  // D_{dual,1/sigma} mass outside the box
};

FourierCheck fourier_identity_check(const LatticeBasis& basis, double sigma,
                                    const Eigen::VectorXd& x, const CoeffBox& dual_box,
                                    std::uint64_t budget = kDefaultBudget);

double pointwise_approx_score(const std::vector<Eigen::VectorXd>& w, const Eigen::VectorXd& x);

struct SandwichReport {
  double f_value = 0.0;
  double distance = 0.0;
  double tau = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  bool upper_applies = false;
  bool lower_holds = false;
  bool upper_holds = true;
  bool holds() const { return lower_holds && upper_holds; }
};

/// Checks rho_{1/s}(dist) <= f_{L,1/s}(x), and f_{L,1/s}(x) <= rho_{1/s}(dist - tau) when dist >= tau.
SandwichReport distance_sandwich_check(const LatticeBasis& basis, double sigma,
                                       const Eigen::VectorXd& x,
                                       std::uint64_t budget = kDefaultBudget);

}  // namespace dgs
