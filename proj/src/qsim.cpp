#include "dgs/qsim.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace dgs {

void QuantumState::add(BasisState key, Amplitude a) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    amps_[it->second] += a;
    return;
  }
  index_.emplace(key, keys_.size());
  keys_.push_back(std::move(key));
  amps_.push_back(a);
}

Amplitude QuantumState::amplitude(const BasisState& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? Amplitude{} : amps_[it->second];
}

double QuantumState::norm_sq() const {
  CompensatedSum s;
  for (const auto& a : amps_) s.add(std::norm(a));
  return s.value();
}

double QuantumState::mass_where(const std::function<bool(const BasisState&)>& pred) const {
  CompensatedSum s;
  for (std::size_t i = 0; i < keys_.size(); ++i)
    if (pred(keys_[i])) s.add(std::norm(amps_[i]));
  return s.value();
}

void QuantumState::scale_where(const std::function<bool(const BasisState&)>& pred, double factor) {
  for (std::size_t i = 0; i < keys_.size(); ++i)
    if (pred(keys_[i])) amps_[i] *= factor;
}

QuantumState QuantumState::restricted(const std::function<bool(const BasisState&)>& pred) const {
  QuantumState out(precision_);
  for (std::size_t i = 0; i < keys_.size(); ++i)
    if (pred(keys_[i])) out.add(keys_[i], amps_[i]);
  return out;
}

void QuantumState::normalize() {
  const double n = std::sqrt(norm_sq());
  if (!(n > 0)) fail(ErrorKind::ZeroGoodAmplitude, "cannot normalise a zero state");
  for (auto& a : amps_) a /= n;
}

bool QuantumState::norm_within_budget(std::size_t dim) const {
  return std::fabs(norm_sq() - 1.0) <= static_cast<double>(dim) * std::ldexp(1.0, -precision_ + 2);
}

DistributionTable QuantumState::measurement_table(const LatticeBasis& basis) const {
  std::map<Coords, double> marginal;
  for (std::size_t i = 0; i < keys_.size(); ++i) marginal[keys_[i].x] += std::norm(amps_[i]);
  DistributionTable t;
  for (const auto& [x, p] : marginal) t.push(x, basis.point(x), p);
  t.finalize(true);
  return t;
}

Coords QuantumState::sample(Philox& rng) const {
  const double u = rng.uniform01() * norm_sq();
  double acc = 0.0;
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    acc += std::norm(amps_[i]);
    if (u < acc) return keys_[i].x;
  }
  return keys_.back().x;
}

std::uint64_t QueryLedger::get(const std::string& name) const {
  auto it = counts_.find(name);
  return it == counts_.end() ? 0 : it->second;
}

void QueryLedger::merge(const QueryLedger& other) {
  for (const auto& [k, v] : other.counts_) counts_[k] += v;
}

int klein_state_precision(const KleinConfig& cfg, int nu) {
  const double k = std::ldexp(1.0, cfg.params.box_exp + 1) + 1;
  return nu + static_cast<int>(std::ceil(std::log2(static_cast<double>(cfg.dim()) * (1 + std::sqrt(k)))));
}

QuantumState prepare_klein_state(const KleinConfig& cfg, int nu, std::uint64_t budget) {
  if (cfg.omega_size() > budget)
    fail(ErrorKind::EnumerationBudgetExceeded, "|Omega| exceeds enumeration budget");
  const int inner = klein_state_precision(cfg, nu);
  const std::size_t n = cfg.dim();
  const auto h = cfg.half_width();
  QuantumState state(nu);
  Coords x(n, 0);
  std::vector<double> amp(static_cast<std::size_t>(2 * h + 1));
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double prefix) {
    const double mid_real = conditional_center(cfg, x, i);
    const auto mid = round_nearest(mid_real);
    const double s = cfg.sigmas[i];
    const double log_den = log_gaussian_sum(s, mid_real, mid - h, mid + h);
    std::vector<double> local(amp.size());
    double norm = 0.0;
    for (std::int64_t v = mid - h; v <= mid + h; ++v) {
      const double d = static_cast<double>(v) - mid_real;
      const double a = round_to_bits(std::exp(0.5 * (-kPi * d * d / (s * s) - log_den)), inner);
      local[static_cast<std::size_t>(v - mid + h)] = a;
      norm += a * a;
    }
    norm = std::sqrt(norm);
    for (std::int64_t v = mid - h; v <= mid + h; ++v) {
      const double a = local[static_cast<std::size_t>(v - mid + h)] / norm;
      if (a == 0.0) continue;
      x[i] = v;
      if (i == 0)
        state.add({x, 0}, prefix * a);
      else
        rec(i - 1, prefix * a);
    }
    x[i] = 0;
  };
  rec(n - 1, 1.0);
  return state;
}

QuantumState amplitude_transduce(const QuantumState& state,
                                 const std::function<double(const Coords&)>& ratio_fn, int nu) {
  QuantumState out(std::min(nu, state.precision()));
  const double slack = std::ldexp(1.0, -nu);
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto& key = state.keys()[i];
    const double r = ratio_fn(key.x);
    if (!(r >= 0.0 && r <= 1.0 + slack))
      fail(ErrorKind::RatioOutOfRange, "ratio " + std::to_string(r) + " outside [0, 1]");
    const double f = std::min(1.0, round_to_bits(std::sqrt(std::min(r, 1.0)), nu));
    const Amplitude a = state.amplitudes()[i];
    out.add({key.x, 0}, a * f);
    const double rest = std::sqrt(std::max(0.0, 1.0 - f * f));
    if (rest > 0) out.add({key.x, 1}, a * rest);
  }
  return out;
}

const char* to_string(QaaMode mode) {
  switch (mode) {
    case QaaMode::known_amplitude: return "known-amplitude";
    case QaaMode::exponential: return "exponential";
    case QaaMode::fixed_point: return "fixed-point";
  }
  return "unknown";
}

double sim_good_amplitude(double p, std::uint64_t k) {
  // Coordinates on the orthonormal (good, bad) pair; psi is the initial state.
  const double g0 = std::sqrt(p), b0 = std::sqrt(1.0 - p);
  double g = g0, b = b0;
  for (std::uint64_t it = 0; it < k; ++it) {
    g = -g;  // reflection through the bad axis
    const double proj = 2.0 * (g * g0 + b * b0);
    g = proj * g0 - g;  // reflection through psi
    b = proj * b0 - b;
  }
  return g;
}

namespace {

double chebyshev(double order, double x) {
  if (std::fabs(x) <= 1.0) return std::cos(order * std::acos(x));
  const double v = std::cosh(order * std::acosh(std::fabs(x)));
  return (x < 0 && std::fmod(order, 2.0) == 1.0) ? -v : v;
}

}  // namespace

double fixed_point_success(double p, double delta, std::uint64_t length) {
  const double l = static_cast<double>(length);
  const double gamma_inv = chebyshev(1.0 / l, 1.0 / delta);
  const double t = chebyshev(l, gamma_inv * std::sqrt(1.0 - p));
  return 1.0 - delta * delta * t * t;
}

std::uint64_t fixed_point_length(double p_lower, double delta) {
  auto l = static_cast<std::uint64_t>(std::ceil(std::log(2.0 / delta) / std::sqrt(p_lower)));
  if (l % 2 == 0) ++l;
  return l;
}

QaaResult qaa_project(const QuantumState& state,
                      const std::function<bool(const BasisState&)>& good, const QaaOptions& opts,
                      QueryLedger& ledger, Philox& rng) {
  QaaResult res;
  const double total = state.norm_sq();
  res.initial_probability = state.mass_where(good) / total;
  const double p = res.initial_probability;
  if (!(p > 0)) fail(ErrorKind::ZeroGoodAmplitude, "state has no good component");
  const double theta = std::asin(std::sqrt(std::min(1.0, p)));

  auto attempt = [&](std::uint64_t iterations, double success) {
    res.iterations += iterations;
    res.calls += 2 * iterations + 1;
    ++res.rounds;
    res.final_probability = success;
    ledger.add(ledger_keys::kStatePrep, 2 * iterations + 1);
    ledger.add(ledger_keys::kGroverIterate, iterations);
    return rng.bernoulli(success);
  };

  bool ok = false;
  switch (opts.mode) {
    case QaaMode::known_amplitude: {
      const auto k = static_cast<std::uint64_t>(std::floor(kPi / (4 * theta)));
      const double g = sim_good_amplitude(p, k);
      while (!ok && res.rounds < opts.max_iterations) ok = attempt(k, g * g);
      break;
    }
    case QaaMode::exponential: {
      double m = 1.0;
      while (!ok && res.iterations < opts.max_iterations) {
        const std::uint64_t r = rng.uniform_below(static_cast<std::uint64_t>(std::ceil(m)));
        const double g = std::sin((2.0 * static_cast<double>(r) + 1.0) * theta);
        ok = attempt(r, g * g);
        m = std::min(m * opts.growth, static_cast<double>(opts.max_iterations));
      }
      break;
    }
    case QaaMode::fixed_point: {
      const double p_lower = opts.fixed_point_p_lower > 0 ? opts.fixed_point_p_lower : p;
      const auto l = fixed_point_length(p_lower, opts.fixed_point_delta);
      const double success = fixed_point_success(p, opts.fixed_point_delta, l);
      while (!ok && res.rounds < opts.max_iterations) ok = attempt((l - 1) / 2, success);
      break;
    }
  }
  res.success = ok;
  res.residual_bad_mass = 1.0 - res.final_probability;
  if (ok) {
    res.good_state = state.restricted(good);
    res.good_state.normalize();
  }
  return res;
}

double AmplitudeEstimator::outcome_probability(double a_true, int t_bits, std::uint64_t y) {
  const double t = std::ldexp(1.0, t_bits);
  const double theta = std::asin(std::sqrt(std::clamp(a_true, 0.0, 1.0)));
  const double delta = theta / kPi - static_cast<double>(y) / t;
  const double s = std::sin(kPi * delta);
  if (std::fabs(s) < 1e-300 || std::fabs(delta - std::round(delta)) < 1e-15) return 1.0;
  const double num = std::sin(kPi * t * delta);
  return num * num / (t * t * s * s);
}

double AmplitudeEstimator::median_outcome(double a_true, int t_bits) {
  const std::uint64_t t = std::uint64_t{1} << t_bits;
  std::vector<std::pair<double, double>> outcomes(t);
  double total = 0.0;
  for (std::uint64_t y = 0; y < t; ++y) {
    const double s = std::sin(kPi * static_cast<double>(y) / static_cast<double>(t));
    outcomes[y] = {s * s, outcome_probability(a_true, t_bits, y)};
    total += outcomes[y].second;
  }
  std::sort(outcomes.begin(), outcomes.end());
  double acc = 0.0;
  for (const auto& [v, p] : outcomes) {
    acc += p;
    if (acc >= 0.5 * total) return v;
  }
  return outcomes.back().first;
}

double AmplitudeEstimator::estimate(double a_true, int t_bits, Philox& rng) {
  if (t_bits < 1 || t_bits > 24) fail(ErrorKind::ParamConstraint, "t_bits must lie in [1, 24]");
  const std::uint64_t t = std::uint64_t{1} << t_bits;
  auto key = std::make_pair(a_true, t_bits);
  auto it = cdf_cache_.find(key);
  if (it == cdf_cache_.end()) {
    std::vector<double> cdf(t);
    double acc = 0.0;
    for (std::uint64_t y = 0; y < t; ++y) {
      acc += outcome_probability(a_true, t_bits, y);
      cdf[y] = acc;
    }
    if (cdf_cache_.size() > 4096) cdf_cache_.clear();
    it = cdf_cache_.emplace(key, std::move(cdf)).first;
  }
  const auto& cdf = it->second;
  const double u = rng.uniform01() * cdf.back();
  const auto y = static_cast<std::uint64_t>(
      std::min<std::ptrdiff_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                               static_cast<std::ptrdiff_t>(t) - 1));
  const double s = std::sin(kPi * static_cast<double>(y) / static_cast<double>(t));
  return s * s;
}

double amplitude_estimate(double a_true, int t_bits, Philox& rng) {
  AmplitudeEstimator est;
  return est.estimate(a_true, t_bits, rng);
}

MeanEstimatePlan mean_estimate_plan(double eps, double delta) {
  if (!(eps > 0 && eps < 1)) fail(ErrorKind::ParamConstraint, "eps must lie in (0, 1)");
  if (!(delta > 0 && delta < 1)) fail(ErrorKind::ParamConstraint, "delta must lie in (0, 1)");
  MeanEstimatePlan plan;
  plan.t_bits = 1;
  while (true) {
    const double t = std::ldexp(1.0, plan.t_bits);
    if (2 * (kPi / t + kPi * kPi / (t * t)) <= eps) break;
    ++plan.t_bits;
  }
  const double gap = 8.0 / (kPi * kPi) - 0.5;
  auto r = static_cast<std::uint64_t>(std::ceil(std::log(1.0 / delta) / (2 * gap * gap)));
  if (r % 2 == 0) ++r;
  plan.runs = r;
  plan.calls_per_run = (std::uint64_t{2} << plan.t_bits) - 1;
  return plan;
}

double mean_estimate_from_mean(double true_mean, double eps, double delta, QueryLedger& ledger,
                               Philox& rng, AmplitudeEstimator* estimator, const char* call_key) {
  if (!(true_mean >= -1.0 - 1e-12 && true_mean <= 1.0 + 1e-12))
    fail(ErrorKind::PhiOutOfRange, "mean outside [-1, 1]");
  const auto plan = mean_estimate_plan(eps, delta);
  AmplitudeEstimator local;
  AmplitudeEstimator& est = estimator ? *estimator : local;
  const double a = std::clamp((1.0 + true_mean) / 2.0, 0.0, 1.0);
  std::vector<double> runs(plan.runs);
  for (auto& r : runs) r = est.estimate(a, plan.t_bits, rng);
  std::nth_element(runs.begin(), runs.begin() + static_cast<std::ptrdiff_t>(runs.size() / 2), runs.end());
  ledger.add(call_key, plan.runs * plan.calls_per_run);
  ledger.add(ledger_keys::kPhi, plan.runs * plan.calls_per_run);
  return 2.0 * runs[runs.size() / 2] - 1.0;
}

double mean_estimate(const DistributionTable& dist,
                     const std::function<double(const Coords&)>& phi, double eps, double delta,
                     QueryLedger& ledger, Philox& rng, AmplitudeEstimator* estimator) {
  CompensatedSum mean;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double v = phi(dist.coords[i]);
    if (!(v >= -1.0 && v <= 1.0)) fail(ErrorKind::PhiOutOfRange, "phi value outside [-1, 1]");
    mean.add(dist.mass[i] * v);
  }
  return mean_estimate_from_mean(mean.value(), eps, delta, ledger, rng, estimator);
}

int pipeline_precision(std::uint64_t omega_size, double w, int nu) {
  return nu + 3 + static_cast<int>(std::ceil(0.5 * std::log2(static_cast<double>(omega_size) * std::max(1.0, w))));
}

PipelineResult run_gaussian_pipeline(const KleinConfig& cfg, int nu, const QaaOptions& opts,
                                     QueryLedger& ledger, Philox& rng, std::uint64_t budget) {
  PipelineResult res;
  const auto omega = enumerate_omega(cfg, budget);
  res.w = w_bound(cfg, false, budget);
  res.inner_precision = pipeline_precision(omega.size(), res.w.w, nu);
  std::map<Coords, double> log_den;
  for (const auto& p : omega) log_den.emplace(p.x, p.log_denominator);

  const QuantumState klein = prepare_klein_state(cfg, res.inner_precision, budget);
  const QuantumState transduced = amplitude_transduce(
      klein,
      [&](const Coords& x) { return std::exp(log_acceptance_ratio(cfg, log_den.at(x))); },
      res.inner_precision);
  res.qaa = qaa_project(transduced, [](const BasisState& k) { return k.flag == 0; }, opts, ledger, rng);
  if (!res.qaa.success) fail(ErrorKind::ZeroGoodAmplitude, "amplification did not succeed");
  ledger.add(ledger_keys::kKleinState, res.qaa.calls);
  ledger.add(ledger_keys::kBCircuit, res.qaa.calls);
  res.output = res.qaa.good_state.measurement_table(cfg.basis);

  res.tail = lattice_tail(cfg, budget);
  CompensatedSum to_target, to_lattice;
  for (const auto& p : omega) {
    const auto idx = res.output.find(p.x);
    const double d = idx ? res.output.mass[*idx] : 0.0;
    to_target.add(std::fabs(d - std::exp(p.log_rho - res.tail.log_rho_omega)));
    to_lattice.add(std::fabs(d - std::exp(p.log_rho - res.tail.log_rho_lattice)));
  }
  res.tv_to_target = 0.5 * to_target.value();
  res.tv_to_lattice = 0.5 * (to_lattice.value() + res.tail.tv_exact);
  res.tv_bound = std::ldexp(1.0, -nu) + res.tail.rho_outside();
  return res;
}

double max_find_round_budget(unsigned domain_bits) {
  const double n = std::ldexp(1.0, static_cast<int>(domain_bits));
  return 22.5 * std::sqrt(n) + 1.4 * static_cast<double>(domain_bits);
}

namespace {

constexpr int kVerifyVotes = 5;

double median_score(ScoreOracle& oracle, std::uint64_t i, Philox& rng, std::uint64_t& calls) {
  std::array<double, kVerifyVotes> v{};
  for (auto& s : v) s = oracle.sample(i, rng);
  calls += kVerifyVotes;
  std::nth_element(v.begin(), v.begin() + kVerifyVotes / 2, v.end());
  return v[kVerifyVotes / 2];
}

}  // namespace

MaxFindResult max_find_bounded_error(ScoreOracle& oracle, unsigned domain_bits, unsigned k,
                                     Philox& rng, QueryLedger& ledger) {
  if (k == 0) fail(ErrorKind::ParamConstraint, "k must be positive");
  const std::uint64_t n = std::uint64_t{1} << domain_bits;
  if (oracle.size() > n) fail(ErrorKind::ParamConstraint, "oracle domain exceeds 2^l");
  const std::uint64_t live = oracle.size();

  // Order by (score, -index): ties go to the lowest index.
  std::vector<std::uint64_t> order(live);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> exact(live);
  for (std::uint64_t i = 0; i < live; ++i) exact[i] = oracle.typical(i);
  std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    if (exact[a] != exact[b]) return exact[a] < exact[b];
    return a > b;
  });
  std::vector<std::uint64_t> rank(live);
  for (std::uint64_t r = 0; r < live; ++r) rank[order[r]] = r;

  MaxFindResult res;
  std::uint64_t calls = 0;
  auto beats = [](double sa, std::uint64_t a, double sb, std::uint64_t b) {
    return sa > sb || (sa == sb && a < b);
  };

  std::uint64_t j = rng.uniform_below(live);
  double sj = median_score(oracle, j, rng, calls);
  std::uint64_t jmax = j;
  double smax = sj;
  const double budget = max_find_round_budget(domain_bits);
  const double theta_cap = std::sqrt(static_cast<double>(n));

  for (unsigned round = 0; round < k; ++round) {
    double spent = 0.0;
    while (spent < budget) {
      // Bounded-error exponential search for i with s(i) > s(j).
      double m = 1.0;
      bool found = false;
      while (!found && spent < budget) {
        const std::uint64_t r = rng.uniform_below(static_cast<std::uint64_t>(std::ceil(m)));
        const std::uint64_t marked = live - 1 - rank[j];
        const double theta = std::asin(std::sqrt(static_cast<double>(marked) / static_cast<double>(n)));
        const double success = std::pow(std::sin((2.0 * static_cast<double>(r) + 1.0) * theta), 2);
        std::uint64_t candidate;
        if (marked > 0 && rng.bernoulli(success)) {
          candidate = order[rank[j] + 1 + rng.uniform_below(marked)];
        } else {
          // Outcome drawn from the unmarked part of the full 2^l register.
          std::uint64_t pick = rng.uniform_below(n - marked);
          candidate = pick <= rank[j] && pick < live ? order[pick] : j;
        }
        calls += r;
        ++res.searches;
        const double sc = median_score(oracle, candidate, rng, calls);
        spent = static_cast<double>(calls - (res.score_calls));
        if (candidate != j && beats(sc, candidate, sj, j)) {
          j = candidate;
          sj = sc;
          found = true;
        }
        m = std::min(m * 1.2, theta_cap);
      }
    }
    res.score_calls = calls;
    if (beats(sj, j, smax, jmax)) {
      jmax = j;
      smax = sj;
    }
  }
  res.index = jmax;
  ledger.add(ledger_keys::kScoreFn, calls);
  return res;
}

}  // namespace dgs
