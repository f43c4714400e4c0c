#include "dgs/attacks.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <limits>
#include <mutex>

namespace dgs {

namespace {

constexpr std::uint64_t kCandidateBudget = 10'000'000;

std::int64_t mod(std::int64_t v, std::int64_t q) {
  const std::int64_t r = v % q;
  return r < 0 ? r + q : r;
}

IntMatrix uniform_matrix(std::size_t rows, std::size_t cols, std::int64_t q, Philox& rng) {
  IntMatrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      a(i, j) = static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(q)));
  return a;
}

IntVector lattice_vector(const QaryLattice& lat, const Coords& x) {
  IntVector c(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) c(static_cast<Eigen::Index>(i)) = x[i];
  return lat.basis_int * c;
}

IntVector exact_vector(const LatticeBasis& basis, const Coords& x) {
  const auto v = basis.exact_point(x);
  IntVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (denominator(v[i]) != 1) fail(ErrorKind::InvalidInput, "lattice point is not integral");
    out(static_cast<Eigen::Index>(i)) = static_cast<std::int64_t>(numerator(v[i]));
  }
  return out;
}

// log sum_z exp(-pi (u + q z)^2 / width^2)
double log_theta(double u, std::int64_t q, double width) {
  const double qd = static_cast<double>(q);
  const double u0 = u - qd * std::round(u / qd);
  const auto span = static_cast<std::int64_t>(std::ceil(7.0 * width / qd)) + 1;
  LogSum s;
  for (std::int64_t z = -span; z <= span; ++z) {
    const double d = u0 + qd * static_cast<double>(z);
    s.add(-kPi * d * d / (width * width));
  }
  return s.value();
}

// All B y mod q for y in Z_q^k.
std::vector<IntVector> coset_representatives(const IntMatrix& b, std::int64_t q) {
  const auto k = static_cast<std::size_t>(b.cols());
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < k; ++i) {
    count *= static_cast<std::uint64_t>(q);
    if (count > kCandidateBudget) fail(ErrorKind::EnumerationBudgetExceeded, "too many cosets");
  }
  std::vector<IntVector> reps;
  reps.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) reps.push_back(mod_q(b * guess_from_index(i, k, q), q));
  return reps;
}

double log_coset_theta_sum(const std::vector<IntVector>& reps, std::int64_t q, double width,
                           const Eigen::VectorXd& t) {
  LogSum total;
  for (const auto& r : reps) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
      acc += log_theta(static_cast<double>(r(i)) + t(i), q, width);
    total.add(acc);
  }
  return total.value();
}

std::vector<std::pair<std::int64_t, IntVector>> dual_projections(const LweInstance& inst,
                                                                 const std::vector<IntVector>& w) {
  const IntMatrix ag = inst.a_guess();
  const std::int64_t q = inst.modulus;
  std::vector<std::pair<std::int64_t, IntVector>> out;
  out.reserve(w.size());
  for (const auto& wj : w) {
    if (static_cast<std::size_t>(wj.size()) != inst.m())
      fail(ErrorKind::InvalidInput, "dual vector has wrong length");
    const IntVector wq = mod_q(wj, q);
    out.emplace_back(mod(wq.dot(mod_q(inst.b, q)), q), mod_q(ag.transpose() * wq, q));
  }
  return out;
}

void check_candidates(const LweInstance& inst) {
  if (candidate_count(inst) > kCandidateBudget)
    fail(ErrorKind::EnumerationBudgetExceeded, "q^n_guess exceeds 10^7");
}

std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

void fill_result(DualAttackResult& res, const std::vector<double>& scores, std::uint64_t truth) {
  res.score_truth = scores[truth];
  res.score_runner_up = -std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < scores.size(); ++i)
    if (i != truth) res.score_runner_up = std::max(res.score_runner_up, scores[i]);
}

unsigned domain_bits(std::uint64_t n) {
  unsigned l = 0;
  while ((std::uint64_t{1} << l) < n) ++l;
  return l;
}

class CandidateOracle : public ScoreOracle {
 public:
  CandidateOracle(std::vector<double> exact, double eps, double delta, const char* key,
                  QueryLedger& ledger, bool noiseless)
      : exact_(std::move(exact)), eps_(eps), delta_(delta), key_(key), ledger_(ledger),
        noiseless_(noiseless) {}

  std::uint64_t size() const override { return exact_.size(); }
  double exact(std::uint64_t i) const override { return exact_[i]; }
  double typical(std::uint64_t i) const override {
    if (noiseless_) return exact_[i];
    const double a = std::clamp((1.0 + exact_[i]) / 2.0, 0.0, 1.0);
    return 2.0 * AmplitudeEstimator::median_outcome(a, mean_estimate_plan(eps_, delta_).t_bits) - 1.0;
  }
  double sample(std::uint64_t i, Philox& rng) override {
    ledger_.add(ledger_keys::kScoreFn);
    if (noiseless_) return exact_[i];
    return mean_estimate_from_mean(exact_[i], eps_, delta_, ledger_, rng, &estimator_, key_);
  }

 private:
  std::vector<double> exact_;
  double eps_, delta_;
  const char* key_;
  QueryLedger& ledger_;
  bool noiseless_;
  AmplitudeEstimator estimator_;
};

}  // namespace

bool LweInstance::consistent() const {
  if (a.rows() != b.size() || a.cols() != secret.size() || error.size() != b.size()) return false;
  if (n_guess > n()) return false;
  return mod_q(a * secret + error, modulus) == mod_q(b, modulus);
}

LweInstance gen_lwe(std::size_t m, std::size_t n, std::size_t n_guess, std::int64_t q,
                    double noise_sigma, Philox& rng) {
  if (m < n) fail(ErrorKind::ParamConstraint, "gen_lwe needs m >= n");
  if (n_guess > n) fail(ErrorKind::ParamConstraint, "n_guess exceeds n");
  if (q < 2 || prime_of_power(q) != q) fail(ErrorKind::ParamConstraint, "modulus must be prime");
  if (!(noise_sigma > 0)) fail(ErrorKind::ParamConstraint, "noise width must be positive");
  LweInstance inst;
  inst.modulus = q;
  inst.n_guess = n_guess;
  inst.noise_sigma = noise_sigma;
  do {
    inst.a = uniform_matrix(m, n, q, rng);
  } while (rank_mod(inst.a, q) != n || rank_mod(inst.a_dual(), q) != n - n_guess);
  inst.secret = uniform_matrix(n, 1, q, rng).col(0);
  inst.error.resize(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < inst.error.size(); ++i)
    inst.error(i) = sample_integer_gaussian(noise_sigma, rng);
  inst.b = mod_q(inst.a * inst.secret + inst.error, q);
  return inst;
}

NormKind SisInstance::norm_kind() const {
  if (std::isinf(norm_p)) return NormKind::linf;
  if (norm_p == 1.0) return NormKind::l1;
  if (norm_p == 2.0) return NormKind::l2;
  return NormKind::lp;
}

void SisInstance::validate() const {
  if (modulus < 2) fail(ErrorKind::InvalidInput, "SIS modulus must be at least 2");
  if (a.rows() < 1 || a.cols() < a.rows()) fail(ErrorKind::InvalidInput, "SIS needs m >= n >= 1");
  if (!(norm_p > 0)) fail(ErrorKind::InvalidInput, "norm exponent must be positive");
  if (!(length_bound > 0)) fail(ErrorKind::InvalidInput, "length bound must be positive");
}

bool sis_solution_valid(const SisInstance& inst, const IntVector& x) {
  if (x.size() != inst.a.cols()) return false;
  if (x.isZero()) return false;
  for (Eigen::Index i = 0; i < inst.a.rows(); ++i) {
    __int128 acc = 0;
    for (Eigen::Index j = 0; j < x.size(); ++j) acc += static_cast<__int128>(inst.a(i, j)) * x(j);
    if (acc % inst.modulus != 0) return false;
  }
  const Rational bound(inst.length_bound);
  switch (inst.norm_kind()) {
    case NormKind::linf: {
      std::int64_t mx = 0;
      for (Eigen::Index j = 0; j < x.size(); ++j) mx = std::max<std::int64_t>(mx, std::abs(x(j)));
      return Rational(mx) <= bound;
    }
    case NormKind::l1: {
      Integer s = 0;
      for (Eigen::Index j = 0; j < x.size(); ++j) s += std::abs(x(j));
      return Rational(s) <= bound;
    }
    case NormKind::l2: {
      Integer s = 0;
      for (Eigen::Index j = 0; j < x.size(); ++j) s += Integer(x(j)) * x(j);
      return Rational(s) <= bound * bound;
    }
    case NormKind::lp: {
      long double s = 0;
      for (Eigen::Index j = 0; j < x.size(); ++j)
        s += std::pow(static_cast<long double>(std::abs(x(j))), static_cast<long double>(inst.norm_p));
      return std::pow(s, 1.0L / inst.norm_p) <= inst.length_bound;
    }
  }
  return false;
}

AttackParams AttackParams::make(double sigma, std::size_t m) {
  AttackParams p;
  p.sigma = sigma;
  p.tau = std::sqrt(static_cast<double>(m) / (2 * kPi)) / sigma;
  return p;
}

void AttackParams::validate(std::size_t m) const {
  if (!(sigma > 0)) fail(ErrorKind::ParamConstraint, "sigma must be positive");
  const double expect = std::sqrt(static_cast<double>(m) / (2 * kPi)) / sigma;
  if (std::fabs(tau - expect) > 1e-12 * expect) fail(ErrorKind::ParamConstraint, "tau does not match sigma and m");
  if (n_samples == 0) fail(ErrorKind::ParamConstraint, "N must be positive");
  if (!(eps > 0 && delta > 0 && eta1 > 0 && eta > 0 && eta2 >= 0))
    fail(ErrorKind::ParamConstraint, "tolerances must be positive");
}

HypothesisReport check_dual_hypothesis(const LweInstance& inst, const AttackParams& params) {
  params.validate(inst.m());
  HypothesisReport r;
  r.lambda1 = lambda1_qary_primal(inst.a, inst.modulus);
  r.error_norm = std::sqrt(static_cast<double>(inst.error.squaredNorm()));
  r.tau = params.tau;
  const double s2 = params.sigma * params.sigma;
  const double far = r.lambda1 - r.error_norm - r.tau;
  r.radius_ok = far > 0;
  r.gap = std::exp(-kPi * s2 * r.error_norm * r.error_norm) - std::exp(-kPi * s2 * far * far);
  r.need_classical = 2 * params.delta;
  r.need_qram = 2 * params.delta + params.eta;
  r.need_sampler = 2 * params.eps + 2 * params.eta1 + params.eta2;
  return r;
}

IntVector guess_from_index(std::uint64_t i, std::size_t n_guess, std::int64_t q) {
  IntVector s(static_cast<Eigen::Index>(n_guess));
  for (std::size_t k = 0; k < n_guess; ++k) {
    s(static_cast<Eigen::Index>(k)) = static_cast<std::int64_t>(i % static_cast<std::uint64_t>(q));
    i /= static_cast<std::uint64_t>(q);
  }
  return s;
}

std::uint64_t index_from_guess(const IntVector& s, std::int64_t q) {
  std::uint64_t i = 0;
  for (Eigen::Index k = s.size(); k-- > 0;) i = i * static_cast<std::uint64_t>(q) + static_cast<std::uint64_t>(mod(s(k), q));
  return i;
}

std::uint64_t candidate_count(const LweInstance& inst) {
  std::uint64_t c = 1;
  for (std::size_t k = 0; k < inst.n_guess; ++k) {
    c *= static_cast<std::uint64_t>(inst.modulus);
    if (c > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(inst.modulus))
      return std::numeric_limits<std::uint64_t>::max();
  }
  return c;
}

Eigen::VectorXd residual_target(const LweInstance& inst, const IntVector& s_guess) {
  return mod_q(inst.b - inst.a_guess() * s_guess, inst.modulus).cast<double>();
}

std::vector<IntVector> sample_dual_vectors(const LweInstance& inst, double sigma, std::size_t count,
                                           int box_exp, Philox& rng) {
  const QaryLattice lat = qary_basis(inst.a_dual(), inst.modulus, QaryKind::kernel);
  GaussianParams gp;
  gp.sigma = static_cast<double>(inst.modulus) * sigma;
  gp.box_exp = box_exp;
  const KleinConfig cfg = KleinConfig::make(lat.basis, gp);
  std::vector<IntVector> w;
  w.reserve(count);
  for (std::size_t j = 0; j < count; ++j) w.push_back(lattice_vector(lat, rejection_sample(cfg, rng).draw.x));
  return w;
}

std::vector<double> dual_scores_direct(const LweInstance& inst, const std::vector<IntVector>& w) {
  check_candidates(inst);
  const std::int64_t q = inst.modulus;
  const auto proj = dual_projections(inst, w);
  std::vector<double> cos_table(static_cast<std::size_t>(q));
  for (std::int64_t y = 0; y < q; ++y)
    cos_table[static_cast<std::size_t>(y)] = std::cos(2 * kPi * static_cast<double>(y) / static_cast<double>(q));
  const std::uint64_t count = candidate_count(inst);
  std::vector<double> scores(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const IntVector s = guess_from_index(i, inst.n_guess, q);
    double acc = 0.0;
    for (const auto& [wb, wa] : proj) acc += cos_table[static_cast<std::size_t>(mod(wb - wa.dot(s), q))];
    scores[i] = acc;
  }
  return scores;
}

std::vector<double> dual_scores_fft(const LweInstance& inst, const std::vector<IntVector>& w) {
  check_candidates(inst);
  const std::int64_t q = inst.modulus;
  const std::uint64_t count = candidate_count(inst);
  const auto proj = dual_projections(inst, w);
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count));
  std::fill_n(&buf[0][0], 2 * count, 0.0);
  for (const auto& [wb, wa] : proj) {
    const auto u = index_from_guess(wa, q);
    const double ph = 2 * kPi * static_cast<double>(wb) / static_cast<double>(q);
    buf[u][0] += std::cos(ph);
    buf[u][1] += std::sin(ph);
  }
  std::vector<double> scores(count);
  if (inst.n_guess == 0) {
    scores[0] = buf[0][0];
  } else {
    // Every axis has length q, so FFTW's row-major axis order only relabels axes consistently.
    std::vector<int> dims(inst.n_guess, static_cast<int>(q));
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(fftw_plan_mutex());
      plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
      std::lock_guard<std::mutex> lock(fftw_plan_mutex());
      fftw_destroy_plan(plan);
    }
    for (std::uint64_t i = 0; i < count; ++i) scores[i] = buf[i][0];
  }
  fftw_free(buf);
  return scores;
}

DualAttackResult classical_dual_attack(const LweInstance& inst, const std::vector<IntVector>& w,
                                       const AttackParams& params, bool use_fft) {
  params.validate(inst.m());
  DualAttackResult res;
  res.hypothesis_ok = check_dual_hypothesis(inst, params).classical_ok();
  const auto scores = use_fft ? dual_scores_fft(inst, w) : dual_scores_direct(inst, w);
  double best = 0.0;
  for (std::uint64_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= best) {
      best = scores[i];
      res.guess_index = i;
      res.guess = guess_from_index(i, inst.n_guess, inst.modulus);
    }
  }
  res.ledger.add(ledger_keys::kScoreFn, scores.size());
  res.ledger.add(ledger_keys::kTableLookup, scores.size() * w.size());
  fill_result(res, scores, index_from_guess(inst.s_guess(), inst.modulus));
  return res;
}

DualAttackResult quantum_dual_attack_qram(const LweInstance& inst, const std::vector<IntVector>& w,
                                          const AttackParams& params, Philox& rng,
                                          unsigned max_find_k, bool exact_scores) {
  params.validate(inst.m());
  if (w.empty()) fail(ErrorKind::EmptySampleSet, "no dual vectors");
  DualAttackResult res;
  res.hypothesis_ok = check_dual_hypothesis(inst, params).qram_ok();
  auto scores = dual_scores_direct(inst, w);
  for (auto& s : scores) s /= static_cast<double>(w.size());
  CandidateOracle oracle(scores, params.eta, 0.1, ledger_keys::kTableLookup, res.ledger, exact_scores);
  const auto found = max_find_bounded_error(oracle, domain_bits(scores.size()), max_find_k, rng, res.ledger);
  res.guess_index = found.index;
  res.guess = guess_from_index(found.index, inst.n_guess, inst.modulus);
  fill_result(res, scores, index_from_guess(inst.s_guess(), inst.modulus));
  return res;
}

EnumeratedDualState::EnumeratedDualState(const KleinConfig& cfg, std::int64_t modulus, int nu,
                                         Philox& rng, std::uint64_t budget)
    : modulus_(modulus) {
  QueryLedger ledger;
  const auto pipe = run_gaussian_pipeline(cfg, nu, QaaOptions{}, ledger, rng, budget);
  table_ = pipe.output;
  tv_bound_ = pipe.tv_bound;
  tv_exact_ = pipe.tv_to_lattice;
  w_ = pipe.w.w;
  const double theta = std::asin(std::sqrt(std::min(1.0, pipe.qaa.initial_probability)));
  preps_ = 2 * static_cast<std::uint64_t>(std::floor(kPi / (4 * theta))) + 1;
}

double EnumeratedDualState::mean_cos(const Eigen::VectorXd& t) const {
  CompensatedSum s;
  const double q = static_cast<double>(modulus_);
  for (std::size_t i = 0; i < table_.size(); ++i)
    s.add(table_.mass[i] * std::cos(2 * kPi * t.dot(table_.points[i]) / q));
  return s.value();
}

FourierDualState::FourierDualState(const IntMatrix& a_dual, std::int64_t modulus, double sigma,
                                   int box_exp, int nu)
    : a_dual_(a_dual), modulus_(modulus), sigma_(sigma) {
  if (!(sigma > 0)) fail(ErrorKind::ParamConstraint, "sigma must be positive");
  if (rank_mod(a_dual, modulus) != static_cast<std::size_t>(a_dual.cols()))
    fail(ErrorKind::RankDeficient, "A_dual is not full rank mod q");
  coset_reps_ = coset_representatives(a_dual, modulus);
  const auto m = static_cast<std::size_t>(a_dual.rows());
  log_norm_ = log_coset_theta_sum(coset_reps_, modulus, 1.0 / sigma, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)));
  const double width = static_cast<double>(modulus) * sigma;
  const double md = static_cast<double>(m);
  log_rho_lattice_ = md * std::log(width) - static_cast<double>(a_dual.cols()) * std::log(static_cast<double>(modulus)) + log_norm_;

  const QaryLattice lat = qary_basis(a_dual, modulus, QaryKind::kernel);
  GaussianParams gp;
  gp.sigma = width;
  gp.box_exp = box_exp;
  gp.precision = nu;
  const KleinConfig cfg = KleinConfig::make(lat.basis, gp);

  // Every x outside Omega has ||Bx|| >= min_i R_ii (2^M + 1/2); Banaszczyk bounds the mass beyond.
  const double radius = cfg.basis.min_gs_norm() * (std::ldexp(1.0, box_exp) + 0.5);
  const double t = radius / (width * std::sqrt(md));
  if (t < 1.0 / std::sqrt(2 * kPi)) fail(ErrorKind::ParamConstraint, "box too small for the tail bound");
  const double log_c = std::log(t) + 0.5 * std::log(2 * kPi * std::exp(1.0)) - kPi * t * t;
  const double log_frac = std::log(2.0) + md * log_c;
  if (log_frac >= 0) fail(ErrorKind::ParamConstraint, "tail bound is vacuous");
  const double log_outside = log_frac + log_rho_lattice_;
  const double log_omega_lower = log_rho_lattice_ + std::log1p(-std::exp(log_frac));
  double log_num = md * cfg.log_c_const;
  for (double v : cfg.log_centered_mass) log_num += v;
  w_ = std::max(1.0, std::exp(log_num - log_omega_lower));
  const double k = std::floor(kPi / (4 * std::asin(1.0 / std::sqrt(w_))));
  preps_ = 2 * static_cast<std::uint64_t>(k) + 1;
  tv_bound_ = std::ldexp(1.0, -nu) + std::exp(log_outside);
}

double FourierDualState::log_theta_sum(const Eigen::VectorXd& t) const {
  return log_coset_theta_sum(coset_reps_, modulus_, 1.0 / sigma_, t);
}

double FourierDualState::mean_cos(const Eigen::VectorXd& t) const {
  return std::exp(log_theta_sum(t) - log_norm_);
}

double qary_periodic_gaussian(const IntMatrix& b, std::int64_t q, double width,
                              const Eigen::VectorXd& t) {
  if (rank_mod(b, q) != static_cast<std::size_t>(b.cols()))
    fail(ErrorKind::RankDeficient, "generator matrix is not full rank mod q");
  const auto reps = coset_representatives(b, q);
  return std::exp(log_coset_theta_sum(reps, q, width, t) -
                  log_coset_theta_sum(reps, q, width, Eigen::VectorXd::Zero(t.size())));
}

DualAttackResult quantum_dual_attack_sampler(const LweInstance& inst, const AttackParams& params,
                                             const DualStateSource& source, Philox& rng,
                                             unsigned max_find_k, bool strict) {
  params.validate(inst.m());
  check_candidates(inst);
  DualAttackResult res;
  const auto hyp = check_dual_hypothesis(inst, params);
  res.hypothesis_ok = hyp.sampler_ok() && source.tv_bound() <= params.eta1 / 2;
  if (strict && !res.hypothesis_ok)
    fail(ErrorKind::HypothesisViolated,
         "separation gap " + std::to_string(hyp.gap) + " needs > " + std::to_string(hyp.need_sampler));
  const std::uint64_t count = candidate_count(inst);
  std::vector<double> scores(count);
  for (std::uint64_t i = 0; i < count; ++i)
    scores[i] = source.mean_cos(residual_target(inst, guess_from_index(i, inst.n_guess, inst.modulus)));
  const double delta = 1.0 / (20.0 * std::pow(static_cast<double>(inst.modulus), static_cast<double>(inst.m())));
  CandidateOracle oracle(scores, params.eps, delta, ledger_keys::kGaussianState, res.ledger, false);
  const auto found = max_find_bounded_error(oracle, domain_bits(count), max_find_k, rng, res.ledger);
  res.ledger.add(ledger_keys::kKleinState,
                 res.ledger.get(ledger_keys::kGaussianState) * source.klein_preps_per_state());
  res.guess_index = found.index;
  res.guess = guess_from_index(found.index, inst.n_guess, inst.modulus);
  fill_result(res, scores, index_from_guess(inst.s_guess(), inst.modulus));
  return res;
}

double sis_success_probability(const SisInstance& inst, const KleinConfig& cfg, std::uint64_t budget) {
  inst.validate();
  const auto target = target_pmf_exact(cfg, budget);
  CompensatedSum p;
  for (std::size_t i = 0; i < target.size(); ++i)
    if (sis_solution_valid(inst, exact_vector(cfg.basis, target.coords[i]))) p.add(target.mass[i]);
  return p.value();
}

SisResult solve_sis(const SisInstance& inst, const KleinConfig& cfg, SisMode mode, Philox& rng,
                    int nu, std::uint64_t budget) {
  SisResult res;
  res.p_exact = sis_success_probability(inst, cfg, budget);
  if (!(res.p_exact > 0)) fail(ErrorKind::NoSolutionInSupport, "no short vector in the sampler support");

  if (mode == SisMode::classical) {
    for (;;) {
      const auto r = rejection_sample(cfg, rng);
      res.klein_trials += r.stats.trials;
      ++res.repetitions;
      res.ledger.add(ledger_keys::kTestFunction);
      const IntVector x = exact_vector(cfg.basis, r.draw.x);
      if (sis_solution_valid(inst, x)) {
        res.x = x;
        res.ledger.add(ledger_keys::kKleinState, res.klein_trials);
        return res;
      }
    }
  }

  QueryLedger inner;
  const auto pipe = run_gaussian_pipeline(cfg, nu, QaaOptions{}, inner, rng, budget);
  QuantumState phi(nu);
  for (std::size_t i = 0; i < pipe.output.size(); ++i) {
    const bool good = sis_solution_valid(inst, exact_vector(cfg.basis, pipe.output.coords[i]));
    phi.add({pipe.output.coords[i], good ? 1 : 0}, std::sqrt(pipe.output.mass[i]));
  }
  const auto out = qaa_project(phi, [](const BasisState& k) { return k.flag == 1; }, QaaOptions{},
                               res.ledger, rng);
  res.repetitions = out.iterations;
  res.state_preps = out.calls;
  res.ledger.add(ledger_keys::kKleinState, out.calls * pipe.qaa.calls);
  res.ledger.add(ledger_keys::kTestFunction, out.calls);
  res.x = exact_vector(cfg.basis, out.good_state.sample(rng));
  if (!sis_solution_valid(inst, res.x)) fail(ErrorKind::NoSolutionInSupport, "post-selected vector is invalid");
  return res;
}

QaryLattice sis_lattice(const SisInstance& inst) {
  inst.validate();
  return qary_basis(inst.a.transpose(), inst.modulus, QaryKind::kernel);
}

}  // namespace dgs
