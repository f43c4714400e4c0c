#include "dgs/samplers.hpp"

#include <algorithm>

namespace dgs {

namespace {

const double kWindowScale = std::sqrt(45.0 / kPi);
constexpr std::int64_t kFar = std::int64_t{1} << 60;

struct IntervalDraw {
  std::int64_t value;
  double log_mass;
};

// Exact CDF inversion of the 1-D Gaussian restricted to [lo, hi]; terms beyond the
// window are below e^{-45} relative to the peak and are dropped.
IntervalDraw sample_interval(double sigma, double center, std::int64_t lo, std::int64_t hi,
                             Philox& rng) {
  const auto nearest = std::clamp(round_nearest(center), lo, hi);
  const auto half = static_cast<std::int64_t>(std::ceil(kWindowScale * sigma)) + 1;
  const std::int64_t wlo = std::max(lo, nearest - half);
  const std::int64_t whi = std::min(hi, nearest + half);
  const double s2 = sigma * sigma;
  const double dn = static_cast<double>(nearest) - center;
  const double peak = -kPi * dn * dn / s2;
  thread_local std::vector<double> cdf;
  cdf.resize(static_cast<std::size_t>(whi - wlo + 1));
  double total = 0.0;
  for (std::int64_t k = wlo; k <= whi; ++k) {
    const double d = static_cast<double>(k) - center;
    total += std::exp(-kPi * d * d / s2 - peak);
    cdf[static_cast<std::size_t>(k - wlo)] = total;
  }
  const double u = rng.uniform01() * total;
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto idx = std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1);
  return {wlo + idx, peak + std::log(total)};
}

}  // namespace

KleinConfig KleinConfig::make(LatticeBasis basis, GaussianParams params) {
  params.validate();
  if (!basis.is_square()) fail(ErrorKind::InvalidInput, "Klein sampler requires a square basis");
  KleinConfig cfg;
  cfg.center = params.center_vector(basis.ambient_dim());
  cfg.rotated_center = basis.q_factor().transpose() * cfg.center;
  const auto h = params.half_width();
  for (double g : basis.gs_norms()) {
    const double s = params.sigma / g;
    cfg.sigmas.push_back(s);
    cfg.log_centered_mass.push_back(log_gaussian_sum(s, 0.0, -h, h));
  }
  const double two_m = std::ldexp(1.0, params.box_exp);
  const double log_eps = params.box_exp * std::log(2.0) +
                         0.5 * std::log(2 * kPi * std::exp(1.0)) - kPi * two_m * two_m;
  cfg.log_c_const = -std::log1p(-std::exp(log_eps));
  cfg.basis = std::move(basis);
  cfg.params = std::move(params);
  return cfg;
}

std::uint64_t KleinConfig::omega_size() const {
  return box_size(CoeffBox(dim(), {-half_width(), half_width()}));
}

double conditional_center(const KleinConfig& cfg, const Coords& x, std::size_t i) {
  const Eigen::MatrixXd& r = cfg.basis.r_factor();
  const auto ii = static_cast<Eigen::Index>(i);
  double c = cfg.rotated_center(ii);
  for (Eigen::Index j = ii + 1; j < r.cols(); ++j) c -= r(ii, j) * static_cast<double>(x[j]);
  return c / r(ii, ii);
}

bool in_klein_support(const KleinConfig& cfg, const Coords& x) {
  const auto h = cfg.half_width();
  for (std::size_t i = cfg.dim(); i-- > 0;) {
    const auto mid = round_nearest(conditional_center(cfg, x, i));
    if (x[i] < mid - h || x[i] > mid + h) return false;
  }
  return true;
}

bool omega_contains_box(const KleinConfig& cfg, std::uint64_t budget) {
  const auto inner = cfg.half_width() / 2;
  CoeffBox box(cfg.dim(), {-inner, inner});
  if (box_size(box) > budget)
    fail(ErrorKind::EnumerationBudgetExceeded, "inner box exceeds enumeration budget");
  bool ok = true;
  for_each_in_box(box, [&](const Coords& x) { ok = ok && in_klein_support(cfg, x); });
  return ok;
}

std::vector<KleinPoint> enumerate_omega(const KleinConfig& cfg, std::uint64_t budget) {
  if (cfg.omega_size() > budget)
    fail(ErrorKind::EnumerationBudgetExceeded,
         "|Omega| = " + std::to_string(cfg.omega_size()) + " exceeds enumeration budget");
  const std::size_t n = cfg.dim();
  const auto h = cfg.half_width();
  const Eigen::MatrixXd& r = cfg.basis.r_factor();
  const double s2 = cfg.params.sigma * cfg.params.sigma;
  std::vector<KleinPoint> out;
  out.reserve(cfg.omega_size());
  Coords x(n, 0);
  std::function<void(std::size_t, double, double)> rec = [&](std::size_t i, double dist_sq,
                                                             double log_den) {
    const double mid_real = conditional_center(cfg, x, i);
    const auto mid = round_nearest(mid_real);
    const double ld = log_den + log_gaussian_sum(cfg.sigmas[i], mid_real, mid - h, mid + h);
    const double rii = r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    for (std::int64_t v = mid - h; v <= mid + h; ++v) {
      x[i] = v;
      const double d = rii * (static_cast<double>(v) - mid_real);
      const double nd = dist_sq + d * d;
      if (i == 0)
        out.push_back({x, -kPi * nd / s2, ld});
      else
        rec(i - 1, nd, ld);
    }
    x[i] = 0;
  };
  rec(n - 1, 0.0, 0.0);
  return out;
}

double log_rho_omega(const std::vector<KleinPoint>& omega) {
  LogSum sum;
  for (const auto& p : omega) sum.add(p.log_rho);
  return sum.value();
}

double log_acceptance_ratio(const KleinConfig& cfg, double log_denominator) {
  double base = static_cast<double>(cfg.dim()) * cfg.log_c_const;
  for (double l : cfg.log_centered_mass) base += l;
  return log_denominator - base;
}

KleinDraw klein_sample(const KleinConfig& cfg, Philox& rng) {
  const std::size_t n = cfg.dim();
  const auto h = cfg.half_width();
  KleinDraw d;
  d.x.assign(n, 0);
  for (std::size_t i = n; i-- > 0;) {
    const double mid_real = conditional_center(cfg, d.x, i);
    const auto mid = round_nearest(mid_real);
    const auto draw = sample_interval(cfg.sigmas[i], mid_real, mid - h, mid + h, rng);
    d.x[i] = draw.value;
    d.log_denominator += draw.log_mass;
  }
  d.point = cfg.basis.point(d.x);
  return d;
}

namespace {

DistributionTable table_from_logs(const KleinConfig& cfg, const std::vector<KleinPoint>& omega,
                                  const std::vector<double>& log_mass) {
  LogSum total;
  for (double l : log_mass) total.add(l);
  const double norm = total.value();
  DistributionTable t;
  t.coords.reserve(omega.size());
  t.points.reserve(omega.size());
  t.mass.reserve(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k)
    t.push(omega[k].x, cfg.basis.point(omega[k].x), std::exp(log_mass[k] - norm));
  t.finalize(true);
  return t;
}

}  // namespace

DistributionTable klein_pmf_exact(const KleinConfig& cfg, std::uint64_t budget) {
  const auto omega = enumerate_omega(cfg, budget);
  std::vector<double> logs;
  logs.reserve(omega.size());
  for (const auto& p : omega) logs.push_back(p.log_q());
  return table_from_logs(cfg, omega, logs);
}

DistributionTable target_pmf_exact(const KleinConfig& cfg, std::uint64_t budget) {
  const auto omega = enumerate_omega(cfg, budget);
  std::vector<double> logs;
  logs.reserve(omega.size());
  for (const auto& p : omega) logs.push_back(p.log_rho);
  return table_from_logs(cfg, omega, logs);
}

DistributionTable accepted_output_pmf(const KleinConfig& cfg, std::uint64_t budget) {
  const auto omega = enumerate_omega(cfg, budget);
  std::vector<double> logs;
  logs.reserve(omega.size());
  for (const auto& p : omega) logs.push_back(p.log_q() + log_acceptance_ratio(cfg, p.log_denominator));
  return table_from_logs(cfg, omega, logs);
}

WBound w_bound(const KleinConfig& cfg, bool audit, std::uint64_t budget) {
  const auto omega = enumerate_omega(cfg, budget);
  WBound out;
  out.log_rho_omega = log_rho_omega(omega);
  out.log_w = static_cast<double>(cfg.dim()) * cfg.log_c_const - out.log_rho_omega;
  for (double l : cfg.log_centered_mass) out.log_w += l;
  out.w = std::exp(out.log_w);
  if (audit) {
    double best = kNegInf;
    for (const auto& p : omega) best = std::max(best, p.log_denominator - out.log_rho_omega);
    out.max_ratio = std::exp(best);
  }
  return out;
}

RejectionResult rejection_sample(const KleinConfig& cfg, Philox& rng) {
  RejectionResult res;
  res.stats.c_const = cfg.c_const();
  while (true) {
    KleinDraw d = klein_sample(cfg, rng);
    ++res.stats.trials;
    const double lr = log_acceptance_ratio(cfg, d.log_denominator);
    if (lr > 1e-12)
      fail(ErrorKind::RatioOutOfRange, "acceptance ratio exceeds 1 at a sampled point");
    if (rng.uniform01() < std::exp(lr)) {
      ++res.stats.accepts;
      res.draw = std::move(d);
      return res;
    }
  }
}

McmcResult mcmc_sample(const KleinConfig& cfg, std::uint64_t burn_in, Philox& rng) {
  McmcResult res;
  res.draw = klein_sample(cfg, rng);
  for (std::uint64_t s = 0; s < burn_in; ++s) {
    KleinDraw y = klein_sample(cfg, rng);
    ++res.steps;
    // D(y) q(x) / (D(x) q(y)) equals the ratio of the Klein denominators.
    const double log_a = y.log_denominator - res.draw.log_denominator;
    if (log_a >= 0 || rng.uniform01() < std::exp(log_a)) {
      res.draw = std::move(y);
      ++res.accepts;
    }
  }
  return res;
}

double delta_ratio(const KleinConfig& cfg, std::uint64_t budget) {
  const auto all = lattice_mass_split(cfg.basis, cfg.params.sigma, cfg.center,
                                      [](const Coords&) { return true; }, 1e-15, budget);
  return std::exp(all.log_selected - log_rho_lattice_upper(cfg.basis, cfg.params.sigma));
}

std::uint64_t mcmc_burn_in(double delta, int nu) {
  if (!(delta > 0)) fail(ErrorKind::ParamConstraint, "Delta must be positive");
  return static_cast<std::uint64_t>(std::ceil(nu * std::log(2.0) / delta));
}

TransitionMatrix mcmc_transition_matrix(const KleinConfig& cfg, std::uint64_t budget) {
  const auto omega = enumerate_omega(cfg, std::min<std::uint64_t>(budget, 4096));
  const auto n = static_cast<Eigen::Index>(omega.size());
  TransitionMatrix t;
  t.p = Eigen::MatrixXd::Zero(n, n);
  for (const auto& pt : omega) t.states.push_back(pt.x);
  LogSum qnorm;
  for (const auto& pt : omega) qnorm.add(pt.log_q());
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double qj = std::exp(omega[j].log_q() - qnorm.value());
      const double a = std::min(0.0, omega[j].log_denominator - omega[i].log_denominator);
      t.p(i, j) = qj * std::exp(a);
      off += t.p(i, j);
    }
    t.p(i, i) = 1.0 - off;
  }
  return t;
}

LatticeTail lattice_tail(const KleinConfig& cfg, std::uint64_t budget) {
  const auto omega = enumerate_omega(cfg, budget);
  LatticeTail t;
  t.log_rho_omega = log_rho_omega(omega);
  const auto split = lattice_mass_split(
      cfg.basis, cfg.params.sigma, cfg.center,
      [&](const Coords& z) { return !in_klein_support(cfg, z); }, 1e-9, budget);
  t.log_rho_outside = log_add(split.log_selected, split.log_remainder);
  t.log_rho_lattice = log_add(t.log_rho_omega, t.log_rho_outside);
  t.tv_exact = std::exp(t.log_rho_outside - t.log_rho_lattice);
  t.tv_two_sided = 0.5 * std::exp(t.log_rho_outside) * (1.0 + std::exp(-t.log_rho_lattice));
  return t;
}

std::int64_t sample_integer_gaussian(double sigma, Philox& rng, double center) {
  if (!(sigma > 0)) fail(ErrorKind::ParamConstraint, "sigma must be positive");
  return sample_interval(sigma, center, -kFar, kFar, rng).value;
}

}  // namespace dgs
