#pragma once

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dgs/common.hpp"
#include "dgs/gaussian.hpp"
#include "dgs/rng.hpp"
#include "dgs/samplers.hpp"

namespace dgs {

using Amplitude = std::complex<double>;

struct BasisState {
  Coords x;
  int flag = 0;
  auto operator<=>(const BasisState&) const = default;
};

/// Sparse amplitude vector over (coordinates, ancilla flag).
class QuantumState {
 public:
  QuantumState() = default;
  explicit QuantumState(int precision) : precision_(precision) {}

  int precision() const { return precision_; }
  std::size_t size() const { return amps_.size(); }
  const std::vector<BasisState>& keys() const { return keys_; }
  const std::vector<Amplitude>& amplitudes() const { return amps_; }

  void add(BasisState key, Amplitude a);
  Amplitude amplitude(const BasisState& key) const;
  double norm_sq() const;
  double mass_where(const std::function<bool(const BasisState&)>& pred) const;
  void scale_where(const std::function<bool(const BasisState&)>& pred, double factor);
  QuantumState restricted(const std::function<bool(const BasisState&)>& pred) const;
  void normalize();
  // Invariant |sum |a|^2 - 1| <= m 2^{-nu+2}.
  bool norm_within_budget(std::size_t dim) const;

  /// Measurement distribution of the coordinate register (flags marginalised).
  DistributionTable measurement_table(const LatticeBasis& basis) const;
  Coords sample(Philox& rng) const;

 private:
  int precision_ = 53;
  std::vector<BasisState> keys_;
  std::vector<Amplitude> amps_;
  std::map<BasisState, std::size_t> index_;
};

class QueryLedger {
 public:
  void add(const std::string& name, std::uint64_t n = 1) { counts_[name] += n; }
  std::uint64_t get(const std::string& name) const;
  void merge(const QueryLedger& other);
  void reset() { counts_.clear(); }
  const std::map<std::string, std::uint64_t>& counts() const { return counts_; }

 private:
  std::map<std::string, std::uint64_t> counts_;
};

namespace ledger_keys {
inline constexpr const char* kStatePrep = "state_prep";
inline constexpr const char* kBCircuit = "b_circuit";
inline constexpr const char* kTestFunction = "test_function";
inline constexpr const char* kGroverIterate = "grover_iterate";
inline constexpr const char* kScoreFn = "score_fn";
inline constexpr const char* kPhi = "phi";
inline constexpr const char* kTableLookup = "table_lookup";
inline constexpr const char* kGaussianState = "gaussian_state";
inline constexpr const char* kKleinState = "klein_state";
}  // namespace ledger_keys

/// Internal amplitude precision so that every prepared amplitude is within 2^{-nu} of sqrt(q).
int klein_state_precision(const KleinConfig& cfg, int nu);

/// Per-coordinate conditional 1-D states rounded to klein_state_precision bits and renormalised.
QuantumState prepare_klein_state(const KleinConfig& cfg, int nu,
                                 std::uint64_t budget = kDefaultBudget);

/// Appends an ancilla: (x,0) gets a round_nu(sqrt(r(x))), (x,1) gets a sqrt(1 - f^2).
QuantumState amplitude_transduce(const QuantumState& state,
                                 const std::function<double(const Coords&)>& ratio_fn, int nu);

enum class QaaMode { known_amplitude, exponential, fixed_point };
const char* to_string(QaaMode mode);

struct QaaOptions {
  QaaMode mode = QaaMode::known_amplitude;
  double fixed_point_delta = 0.01;
  double fixed_point_p_lower = 0.0;  // 0 means use the exact initial probability
  double growth = 1.2;               // exponential schedule factor
  std::uint64_t max_iterations = std::uint64_t{1} << 30;
};

struct QaaResult {
  bool success = false;
  QuantumState good_state;         // post-selected good component, renormalised
  double initial_probability = 0;  // |good amplitude|^2 of the input
  double final_probability = 0;    // success probability of the last measurement
  double residual_bad_mass = 0;
  std::uint64_t iterations = 0;    // Grover iterates over all attempts
  std::uint64_t calls = 0;         // state-preparation equivalents
  std::uint64_t rounds = 0;        // measurement attempts
};

/// Good amplitude after k Grover iterates applied as explicit reflections on the
/// 2-D good/bad plane; p is the initial good probability.
double sim_good_amplitude(double p, std::uint64_t k);
/// Fixed-point success probability 1 - delta^2 T_L(T_{1/L}(1/delta) sqrt(1-p))^2.
double fixed_point_success(double p, double delta, std::uint64_t length);
std::uint64_t fixed_point_length(double p_lower, double delta);

QaaResult qaa_project(const QuantumState& state,
                      const std::function<bool(const BasisState&)>& good, const QaaOptions& opts,
                      QueryLedger& ledger, Philox& rng);

/// QPE outcome distribution of the Grover rotation and sin^2(pi y / 2^t) readout.
class AmplitudeEstimator {
 public:
  double estimate(double a_true, int t_bits, Philox& rng);
  // Exact Pr[y] for the outcome kernel.
  static double outcome_probability(double a_true, int t_bits, std::uint64_t y);
  // Median of the sin^2(pi y / 2^t) readout.
  static double median_outcome(double a_true, int t_bits);

 private:
  std::map<std::pair<double, int>, std::vector<double>> cdf_cache_;
};

double amplitude_estimate(double a_true, int t_bits, Philox& rng);

struct MeanEstimatePlan {
  int t_bits = 0;
  std::uint64_t runs = 0;
  std::uint64_t calls_per_run = 0;
};

MeanEstimatePlan mean_estimate_plan(double eps, double delta);

/// Median of amplitude-estimation runs on the [0,1]-rescaled phi.
double mean_estimate(const DistributionTable& dist,
                     const std::function<double(const Coords&)>& phi, double eps, double delta,
                     QueryLedger& ledger, Philox& rng, AmplitudeEstimator* estimator = nullptr);
/// Same estimator when the exact mean of phi (in [-1,1]) is already known.
double mean_estimate_from_mean(double true_mean, double eps, double delta, QueryLedger& ledger,
                               Philox& rng, AmplitudeEstimator* estimator = nullptr,
                               const char* call_key = ledger_keys::kStatePrep);

/// Internal precision for the full pipeline so that its output is within 2^{-nu} of D_{Omega,sigma}.
int pipeline_precision(std::uint64_t omega_size, double w, int nu);

struct PipelineResult {
  DistributionTable output;  // measured coordinates after post-selection
  QaaResult qaa;
  WBound w;
  LatticeTail tail;
  double tv_to_target = 0.0;   // d_TV(output, D_{Omega,sigma})
  double tv_to_lattice = 0.0;  // d_TV(output, D_{L,sigma})
  double tv_bound = 0.0;       // 2^{-nu} + rho_sigma(L \ Omega)
  int inner_precision = 0;
};

/// prepare_klein_state -> amplitude_transduce with D/(w q) -> qaa_project on flag 0.
PipelineResult run_gaussian_pipeline(const KleinConfig& cfg, int nu, const QaaOptions& opts,
                                     QueryLedger& ledger, Philox& rng,
                                     std::uint64_t budget = kDefaultBudget);

class ScoreOracle {
 public:
  virtual ~ScoreOracle() = default;
  virtual std::uint64_t size() const = 0;
  // Noise-free value, used for bookkeeping only and never counted.
  virtual double exact(std::uint64_t i) const = 0;
  // Value the comparator reports with high probability; ranks the marked set of each search.
  virtual double typical(std::uint64_t i) const { return exact(i); }
  // One counted call to the randomized score function.
  virtual double sample(std::uint64_t i, Philox& rng) = 0;
};

struct MaxFindResult {
  std::uint64_t index = 0;
  std::uint64_t score_calls = 0;
  std::uint64_t searches = 0;
};

double max_find_round_budget(unsigned domain_bits);

MaxFindResult max_find_bounded_error(ScoreOracle& oracle, unsigned domain_bits, unsigned k,
                                     Philox& rng, QueryLedger& ledger);

}  // namespace dgs
