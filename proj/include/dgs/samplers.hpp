#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "dgs/common.hpp"
#include "dgs/gaussian.hpp"
#include "dgs/lattice.hpp"
#include "dgs/rng.hpp"

namespace dgs {

/**
 * Cached data of the finite Klein sampler for a square basis B = QR:
 * rotated center c' = Q^T c, per-coordinate widths sigma / R_ii, the centered
 * interval masses rho_{sigma_i}([-2^M, 2^M]) and the constant
 * C = 1 / (1 - 2^M sqrt(2 pi e) e^{-pi 4^M}).
 */
struct KleinConfig {
  LatticeBasis basis;
  GaussianParams params;
  Eigen::VectorXd center;
  Eigen::VectorXd rotated_center;
  std::vector<double> sigmas;
  std::vector<double> log_centered_mass;
  double log_c_const = 0.0;

  static KleinConfig make(LatticeBasis basis, GaussianParams params);

  std::size_t dim() const { return sigmas.size(); }
  std::int64_t half_width() const { return params.half_width(); }
  double c_const() const { return std::exp(log_c_const); }
  // |Omega| = (2^{M+1} + 1)^m, saturating.
  std::uint64_t omega_size() const;
};

// x~_i = (c'_i - sum_{j>i} R_ij x_j) / R_ii.
double conditional_center(const KleinConfig& cfg, const Coords& x, std::size_t i);
bool in_klein_support(const KleinConfig& cfg, const Coords& x);
// Omega contains B * prod [-2^{M-1}, 2^{M-1}]; fails for badly skewed bases.
bool omega_contains_box(const KleinConfig& cfg, std::uint64_t budget = kDefaultBudget);

struct KleinPoint {
  Coords x;
  double log_rho = 0.0;        // -pi ||Bx - c||^2 / sigma^2
  double log_denominator = 0.0;  // sum_i log rho_{sigma_i, x~_i}(shifted interval)
  double log_q() const { return log_rho - log_denominator; }
};

/// Enumerates Omega depth-first, coordinate m-1 down to 0, intervals ascending.
std::vector<KleinPoint> enumerate_omega(const KleinConfig& cfg,
                                        std::uint64_t budget = kDefaultBudget);
double log_rho_omega(const std::vector<KleinPoint>& omega);

/// log of prod_i rho_{sigma_i,x~_i}(shifted) / (C^m prod_i rho_{sigma_i}([-2^M, 2^M])).
double log_acceptance_ratio(const KleinConfig& cfg, double log_denominator);

struct KleinDraw {
  Coords x;
  Eigen::VectorXd point;
  double log_denominator = 0.0;
};

KleinDraw klein_sample(const KleinConfig& cfg, Philox& rng);

DistributionTable klein_pmf_exact(const KleinConfig& cfg, std::uint64_t budget = kDefaultBudget);
DistributionTable target_pmf_exact(const KleinConfig& cfg, std::uint64_t budget = kDefaultBudget);

struct WBound {
  double w = 1.0;
  double log_w = 0.0;
  double log_rho_omega = 0.0;
  std::optional<double> max_ratio;  // max over Omega of D_{Omega,sigma}(x) / q(x)
};

WBound w_bound(const KleinConfig& cfg, bool audit = true, std::uint64_t budget = kDefaultBudget);

struct RejectionStats {
  std::uint64_t trials = 0;
  std::uint64_t accepts = 0;
  double w_used = 0.0;
  double c_const = 1.0;
};

struct RejectionResult {
  KleinDraw draw;
  RejectionStats stats;
};

RejectionResult rejection_sample(const KleinConfig& cfg, Philox& rng);

/// q(x) accept(x) / sum q accept over Omega.
DistributionTable accepted_output_pmf(const KleinConfig& cfg, std::uint64_t budget = kDefaultBudget);

struct McmcResult {
  KleinDraw draw;
  std::uint64_t steps = 0;
  std::uint64_t accepts = 0;
};

McmcResult mcmc_sample(const KleinConfig& cfg, std::uint64_t burn_in, Philox& rng);

/// Delta = rho_sigma(L) / prod_i rho_{sigma/||b~_i||}(Z).
double delta_ratio(const KleinConfig& cfg, std::uint64_t budget = kDefaultBudget);
std::uint64_t mcmc_burn_in(double delta, int nu);

struct TransitionMatrix {
  std::vector<Coords> states;
  Eigen::MatrixXd p;  // row-stochastic
};

TransitionMatrix mcmc_transition_matrix(const KleinConfig& cfg,
                                        std::uint64_t budget = kDefaultBudget);

struct LatticeTail {
  double log_rho_omega = 0.0;
  double log_rho_outside = 0.0;  // includes the enumeration remainder bound
  double log_rho_lattice = 0.0;
  double tv_exact = 0.0;         // rho(L \ Omega) / rho(L)
  double tv_two_sided = 0.0;     // rho(L \ Omega) (1 + 1 / rho(L)) / 2
  double rho_outside() const { return std::exp(log_rho_outside); }
};

LatticeTail lattice_tail(const KleinConfig& cfg, std::uint64_t budget = kDefaultBudget);

/// Centered discrete Gaussian over Z (or shifted by center), exact CDF inversion on the window.
std::int64_t sample_integer_gaussian(double sigma, Philox& rng, double center = 0.0);

}  // namespace dgs
