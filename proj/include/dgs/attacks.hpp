#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dgs/common.hpp"
#include "dgs/lattice.hpp"
#include "dgs/qsim.hpp"
#include "dgs/rng.hpp"
#include "dgs/samplers.hpp"

namespace dgs {

struct LweInstance {
  IntMatrix a;  // m x n, entries in [0, q)
  IntVector b;
  IntVector secret;
  IntVector error;
  std::int64_t modulus = 0;
  std::size_t n_guess = 0;
  double noise_sigma = 0.0;

  std::size_t m() const { return static_cast<std::size_t>(a.rows()); }
  std::size_t n() const { return static_cast<std::size_t>(a.cols()); }
  std::size_t n_dual() const { return n() - n_guess; }
  IntMatrix a_guess() const { return a.leftCols(static_cast<Eigen::Index>(n_guess)); }
  IntMatrix a_dual() const { return a.rightCols(static_cast<Eigen::Index>(n_dual())); }
  IntVector s_guess() const { return secret.head(static_cast<Eigen::Index>(n_guess)); }
  bool consistent() const;
};

LweInstance gen_lwe(std::size_t m, std::size_t n, std::size_t n_guess, std::int64_t q,
                    double noise_sigma, Philox& rng);

enum class NormKind { l1, l2, linf, lp };

struct SisInstance {
  IntMatrix a;  // n x m
  std::int64_t modulus = 0;
  double norm_p = 2.0;  // infinity for the max norm
  double length_bound = 1.0;

  NormKind norm_kind() const;
  void validate() const;
};

/// Exact check of A x = 0 mod q and 0 < ||x||_p <= bound (integer arithmetic for p in {1, 2, inf}).
bool sis_solution_valid(const SisInstance& inst, const IntVector& x);

struct AttackParams {
  double sigma = 1.0;          // distinguisher width; dual vectors have width q sigma
  double tau = 0.0;
  std::size_t n_samples = 400;
  double eps = 0.1;
  double delta = 0.1;
  double eta1 = 0.05;
  double eta2 = 0.1;
  double eta = 0.001;          // qRAM variant estimation accuracy, default delta / 100

  static AttackParams make(double sigma, std::size_t m);
  void validate(std::size_t m) const;
};

struct HypothesisReport {
  double lambda1 = 0.0;  // lambda_1(L_q(A))
  double error_norm = 0.0;
  double tau = 0.0;
  double gap = 0.0;      // rho_{1/s}(e) - rho_{1/s}(lambda1 - ||e|| - tau)
  bool radius_ok = false;
  double need_classical = 0.0;
  double need_qram = 0.0;
  double need_sampler = 0.0;
  bool classical_ok() const { return radius_ok && gap > need_classical; }
  bool qram_ok() const { return radius_ok && gap > need_qram; }
  bool sampler_ok() const { return radius_ok && gap > need_sampler; }
};

HypothesisReport check_dual_hypothesis(const LweInstance& inst, const AttackParams& params);

/// Candidate s_guess with index i = sum_k s_k q^k.
IntVector guess_from_index(std::uint64_t i, std::size_t n_guess, std::int64_t q);
std::uint64_t index_from_guess(const IntVector& s, std::int64_t q);
std::uint64_t candidate_count(const LweInstance& inst);

/// b - A_guess s mod q, as a real vector.
Eigen::VectorXd residual_target(const LweInstance& inst, const IntVector& s_guess);

/// Dual vectors from D_{L_q^perp(A_dual), q sigma} by exact rejection from the Klein sampler.
std::vector<IntVector> sample_dual_vectors(const LweInstance& inst, double sigma, std::size_t count,
                                           int box_exp, Philox& rng);

/// S(s) = sum_j cos(2 pi w_j^T (b - A_guess s) / q) for every candidate.
std::vector<double> dual_scores_direct(const LweInstance& inst, const std::vector<IntVector>& w);
/// Same scores through a q^{n_guess}-point multidimensional DFT.
std::vector<double> dual_scores_fft(const LweInstance& inst, const std::vector<IntVector>& w);

struct DualAttackResult {
  std::optional<IntVector> guess;
  std::uint64_t guess_index = 0;
  double score_truth = 0.0;
  double score_runner_up = 0.0;
  bool hypothesis_ok = true;
  QueryLedger ledger;
};

/// Exhaustive search with the S >= S_max update rule; empty when no score reaches 0.
DualAttackResult classical_dual_attack(const LweInstance& inst, const std::vector<IntVector>& w,
                                       const AttackParams& params, bool use_fft = false);

DualAttackResult quantum_dual_attack_qram(const LweInstance& inst, const std::vector<IntVector>& w,
                                          const AttackParams& params, Philox& rng,
                                          unsigned max_find_k = 4, bool exact_scores = false);

/// Source of the Gaussian state |D> over L_q^perp(A_dual) used by the sampler-based attack.
class DualStateSource {
 public:
  virtual ~DualStateSource() = default;
  virtual std::string name() const = 0;
  /// E_{w ~ D} cos(2 pi <t, w> / q).
  virtual double mean_cos(const Eigen::VectorXd& t) const = 0;
  /// Certified bound on d_TV(D, D_{L, q sigma}).
  virtual double tv_bound() const = 0;
  /// Klein-state preparations consumed per prepared |D>.
  virtual std::uint64_t klein_preps_per_state() const = 0;
  virtual double w() const = 0;
};

/// Runs prepare -> transduce -> amplify on an enumerable Omega and keeps the measured table.
class EnumeratedDualState : public DualStateSource {
 public:
  EnumeratedDualState(const KleinConfig& cfg, std::int64_t modulus, int nu, Philox& rng,
                      std::uint64_t budget = kDefaultBudget);
  std::string name() const override { return "enumerated"; }
  double mean_cos(const Eigen::VectorXd& t) const override;
  double tv_bound() const override { return tv_bound_; }
  std::uint64_t klein_preps_per_state() const override { return preps_; }
  double w() const override { return w_; }
  const DistributionTable& table() const { return table_; }
  double tv_to_lattice() const { return tv_exact_; }

 private:
  std::int64_t modulus_;
  DistributionTable table_;
  double tv_bound_ = 0.0;
  double tv_exact_ = 0.0;
  double w_ = 1.0;
  std::uint64_t preps_ = 1;
};

/// For q-ary kernels: the mean of cos(2 pi <t,w>/q) under D_{L_q^perp(B), q sigma} is
/// f_{L_q(B), 1/sigma}(t), evaluated exactly as a sum over the q^k cosets of q Z^m, each a
/// product of one-dimensional theta sums. w, the amplification count and the TV bound follow
/// from the Klein data and rigorous tail bounds, without enumerating Omega.
class FourierDualState : public DualStateSource {
 public:
  FourierDualState(const IntMatrix& a_dual, std::int64_t modulus, double sigma, int box_exp,
                   int nu);
  std::string name() const override { return "fourier"; }
  double mean_cos(const Eigen::VectorXd& t) const override;
  double tv_bound() const override { return tv_bound_; }
  std::uint64_t klein_preps_per_state() const override { return preps_; }
  double w() const override { return w_; }
  double log_rho_lattice() const { return log_rho_lattice_; }

 private:
  double log_theta_sum(const Eigen::VectorXd& t) const;

  IntMatrix a_dual_;
  std::int64_t modulus_;
  double sigma_;
  std::vector<IntVector> coset_reps_;
  double log_norm_ = 0.0;
  double log_rho_lattice_ = 0.0;
  double tv_bound_ = 0.0;
  double w_ = 1.0;
  std::uint64_t preps_ = 1;
};

/// f_{L_q(B), width}(t) for the image lattice of B (m x k) via coset theta products.
double qary_periodic_gaussian(const IntMatrix& b, std::int64_t q, double width,
                              const Eigen::VectorXd& t);

DualAttackResult quantum_dual_attack_sampler(const LweInstance& inst, const AttackParams& params,
                                             const DualStateSource& source, Philox& rng,
                                             unsigned max_find_k = 4, bool strict = false);

enum class SisMode { classical, quantum };

struct SisResult {
  IntVector x;
  std::uint64_t repetitions = 0;  // accepted samples (classical) or Grover iterates (quantum)
  std::uint64_t state_preps = 0;  // |D> preparations (quantum)
  std::uint64_t klein_trials = 0;
  double p_exact = 0.0;
  QueryLedger ledger;
};

/// p = sum_x D_{Omega,sigma}(x) [0 < ||x||_p <= bound].
double sis_success_probability(const SisInstance& inst, const KleinConfig& cfg,
                               std::uint64_t budget = kDefaultBudget);

SisResult solve_sis(const SisInstance& inst, const KleinConfig& cfg, SisMode mode, Philox& rng,
                    int nu = 20, std::uint64_t budget = kDefaultBudget);

/// Kernel lattice of the SIS matrix, i.e. {x : A x = 0 mod q}.
QaryLattice sis_lattice(const SisInstance& inst);

}  // namespace dgs
