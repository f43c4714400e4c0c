#include "dgs/gaussian.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace dgs {

namespace {

// Terms further than this (in units of sigma) from the dominant one are below e^{-45} relative.
const double kWindowScale = std::sqrt(45.0 / kPi);
constexpr std::int64_t kDirectLimit = 10'000'000;
constexpr std::int64_t kFar = std::int64_t{1} << 60;

double log_term(double sigma, double center, std::int64_t k) {
  const double d = static_cast<double>(k) - center;
  return -kPi * d * d / (sigma * sigma);
}

// Poisson dual form: rho_{s,c}(Z) = s * sum_k exp(-pi s^2 k^2) cos(2 pi k c).
double poisson_rho_integers(double sigma, double center) {
  const auto kmax = static_cast<std::int64_t>(std::ceil(kWindowScale / sigma)) + 1;
  CompensatedSum sum;
  sum.add(1.0);
  for (std::int64_t k = 1; k <= kmax; ++k) {
    const double kd = static_cast<double>(k);
    sum.add(2.0 * std::exp(-kPi * sigma * sigma * kd * kd) * std::cos(2 * kPi * kd * center));
  }
  return sigma * sum.value();
}

}  // namespace

void GaussianParams::validate() const {
  if (!(sigma > 0) || !std::isfinite(sigma))
    fail(ErrorKind::ParamConstraint, "sigma must be a positive finite real");
  if (box_exp < 2 || box_exp > 40)
    fail(ErrorKind::ParamConstraint, "box_exp must lie in [2, 40]");
  if (precision < 8) fail(ErrorKind::ParamConstraint, "precision must be >= 8");
  for (double c : center)
    if (!std::isfinite(c)) fail(ErrorKind::ParamConstraint, "center must be finite");
}

Eigen::VectorXd GaussianParams::center_vector(std::size_t dim) const {
  if (!center.empty() && center.size() != dim)
    fail(ErrorKind::ParamConstraint, "center dimension " + std::to_string(center.size()) +
                                         " does not match lattice dimension " +
                                         std::to_string(dim));
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < center.size(); ++i) c(static_cast<Eigen::Index>(i)) = center[i];
  return c;
}

double GaussianParams::mass_condition_lhs() const {
  return std::log(sigma) + box_exp * std::log(2.0) + precision;
}

bool GaussianParams::mass_condition(double c) const {
  return mass_condition_lhs() <= c * std::ldexp(1.0, 2 * box_exp);
}

double log_gaussian_sum(double sigma, double center, std::int64_t lo, std::int64_t hi) {
  if (!(sigma > 0)) fail(ErrorKind::ParamConstraint, "sigma must be positive");
  if (hi < lo) return kNegInf;
  const auto nearest = std::clamp(round_nearest(center), lo, hi);
  const auto half = static_cast<std::int64_t>(std::ceil(kWindowScale * sigma)) + 1;
  const std::int64_t wlo = std::max(lo, nearest - half);
  const std::int64_t whi = std::min(hi, nearest + half);
  const double peak = log_term(sigma, center, nearest);
  if (whi - wlo + 1 > kDirectLimit) {
    if (sigma > 1 && wlo > lo && whi < hi) return std::log(poisson_rho_integers(sigma, center));
    fail(ErrorKind::ParamConstraint, "Gaussian sum window exceeds 10^7 terms");
  }
  CompensatedSum sum;
  for (std::int64_t k = wlo; k <= whi; ++k) sum.add(std::exp(log_term(sigma, center, k) - peak));
  return peak + std::log(sum.value());
}

double gaussian_sum(double sigma, double center, std::int64_t lo, std::int64_t hi) {
  return std::exp(log_gaussian_sum(sigma, center, lo, hi));
}

double log_rho_integers(double sigma, double center) {
  if (sigma > 1) {
    const double reduced = center - std::floor(center);
    return std::log(poisson_rho_integers(sigma, reduced));
  }
  return log_gaussian_sum(sigma, center, -kFar, kFar);
}

double rho_integers(double sigma, double center) { return std::exp(log_rho_integers(sigma, center)); }

double rho_interval(const GaussianParams& p, double center_x, double c_const) {
  p.validate();
  if (!p.mass_condition(c_const))
    fail(ErrorKind::ParamConstraint,
         "mass condition log(sigma) + M log 2 + nu <= c 4^M violated");
  if (!std::isfinite(center_x)) fail(ErrorKind::ParamConstraint, "center must be finite");
  return gaussian_sum(p.sigma, center_x, -p.half_width(), p.half_width());
}

double log_rho_lattice_box(const LatticeBasis& basis, const GaussianParams& p, const CoeffBox& box,
                           std::uint64_t budget) {
  p.validate();
  if (box.size() != basis.rank()) fail(ErrorKind::InvalidInput, "box dimension mismatch");
  if (box_size(box) > budget)
    fail(ErrorKind::EnumerationBudgetExceeded, "coefficient box exceeds enumeration budget");
  const Eigen::VectorXd c = p.center_vector(basis.ambient_dim());
  const double s2 = p.sigma * p.sigma;
  LogSum sum;
  for_each_in_box(box, [&](const Coords& x) {
    sum.add(-kPi * (basis.point(x) - c).squaredNorm() / s2);
  });
  return sum.value();
}

double rho_lattice_box(const LatticeBasis& basis, const GaussianParams& p, const CoeffBox& box,
                       std::uint64_t budget) {
  p.validate();
  if (box.size() != basis.rank()) fail(ErrorKind::InvalidInput, "box dimension mismatch");
  if (box_size(box) > budget)
    fail(ErrorKind::EnumerationBudgetExceeded, "coefficient box exceeds enumeration budget");
  const Eigen::VectorXd c = p.center_vector(basis.ambient_dim());
  const double s2 = p.sigma * p.sigma;
  CompensatedSum sum;
  for_each_in_box(box, [&](const Coords& x) {
    sum.add(std::exp(-kPi * (basis.point(x) - c).squaredNorm() / s2));
  });
  return sum.value();
}

void DistributionTable::push(Coords c, Eigen::VectorXd p, double m) {
  coords.push_back(std::move(c));
  points.push_back(std::move(p));
  mass.push_back(m);
}

void DistributionTable::finalize(bool normalize) {
  CompensatedSum total;
  for (double m : mass) {
    if (!(m >= 0)) fail(ErrorKind::InvalidInput, "negative or NaN mass in distribution table");
    total.add(m);
  }
  if (normalize) {
    if (!(total.value() > 0)) fail(ErrorKind::InvalidInput, "distribution table has zero mass");
    const double t = total.value();
    for (double& m : mass) m /= t;
    total = CompensatedSum();
    for (double m : mass) total.add(m);
  }
  total_check = total.value();
  if (std::fabs(total_check - 1.0) > 1e-10)
    fail(ErrorKind::InvalidInput, "distribution table masses do not sum to 1");
  index_.clear();
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (!index_.emplace(coords[i], i).second)
      fail(ErrorKind::InvalidInput, "duplicate support point in distribution table");
}

std::optional<std::size_t> DistributionTable::find(const Coords& c) const {
  auto it = index_.find(c);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string DistributionTable::to_csv() const {
  std::ostringstream out;
  const std::size_t n = coords.empty() ? 0 : coords.front().size();
  const std::size_t m = points.empty() ? 0 : static_cast<std::size_t>(points.front().size());
  for (std::size_t i = 0; i < n; ++i) out << "x" << i << ",";
  for (std::size_t i = 0; i < m; ++i) out << "v" << i << ",";
  out << "mass\n";
  char buf[40];
  for (std::size_t k = 0; k < size(); ++k) {
    for (auto x : coords[k]) out << x << ",";
    for (Eigen::Index i = 0; i < points[k].size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", points[k](i));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", mass[k]);
    out << buf << "\n";
  }
  return out.str();
}

double total_variation(const DistributionTable& a, const DistributionTable& b) {
  CompensatedSum sum;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto j = b.find(a.coords[i]);
    sum.add(std::fabs(a.mass[i] - (j ? b.mass[*j] : 0.0)));
  }
  for (std::size_t j = 0; j < b.size(); ++j)
    if (!a.find(b.coords[j])) sum.add(b.mass[j]);
  return 0.5 * sum.value();
}

double log_rho_lattice_upper(const LatticeBasis& basis, double sigma) {
  double total = 0.0;
  for (double g : basis.gs_norms()) total += log_rho_integers(sigma / g);
  return total;
}

namespace {

// log of 2 (t sqrt(2 pi e) e^{-pi t^2})^n, the shifted tail factor at radius t s sqrt(n).
double log_tail_factor(double t, std::size_t n) {
  if (t < 1.0 / std::sqrt(2 * kPi)) return std::log(2.0);
  return std::log(2.0) +
         static_cast<double>(n) * (std::log(t) + 0.5 * std::log(2 * kPi * std::exp(1.0)) - kPi * t * t);
}

}  // namespace

double gaussian_truncation_radius(double sigma, std::size_t dim, double rel_tol) {
  const double target = std::log(rel_tol);
  double t = 1.0;
  while (log_tail_factor(t, dim) > target) t *= 1.05;
  return t * sigma * std::sqrt(static_cast<double>(dim));
}

MassSplit lattice_mass_split(const LatticeBasis& basis, double sigma, const Eigen::VectorXd& center,
                             const std::function<bool(const Coords&)>& select, double rel_tol,
                             std::uint64_t budget) {
  const std::size_t n = basis.rank();
  const double s2 = sigma * sigma;
  const double log_total_upper = log_rho_lattice_upper(basis, sigma);
  const Eigen::VectorXd full = basis.q_factor().transpose() * center;
  const double ortho_sq = full.tail(full.size() - static_cast<Eigen::Index>(n)).squaredNorm();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  double radius = std::sqrt(ortho_sq) + gaussian_truncation_radius(sigma, n, 1e-3);
  std::uint64_t spent = 0;
  while (true) {
    LogSum sum;
    std::uint64_t visited = 0;
    for_each_lattice_point_in_ball(basis, center, radius, budget - spent,
                                   [&](const Coords& z, double d2) {
                                     ++visited;
                                     if (select(z)) sum.add(-kPi * d2 / s2);
                                   });
    spent = std::min(budget, spent + visited);
    const double in_plane = std::sqrt(std::max(0.0, radius * radius - ortho_sq));
    const double t = in_plane / (sigma * sqrt_n);
    MassSplit out;
    out.log_selected = sum.value();
    out.log_remainder = -kPi * ortho_sq / s2 + log_tail_factor(t, n) + log_total_upper;
    out.radius = radius;
    if (out.log_selected != kNegInf && out.log_remainder <= out.log_selected + std::log(rel_tol))
      return out;
    if (spent >= budget)
      fail(ErrorKind::EnumerationBudgetExceeded, "lattice mass enumeration exceeded budget");
    radius *= 1.25;
  }
}

TailBoundsReport tail_bounds_check(const LatticeBasis& basis, const GaussianParams& p,
                                   std::uint64_t budget) {
  p.validate();
  const double s = p.sigma;
  const double c0 = p.center_at(0);
  const auto h = p.half_width();
  const double two_m = std::ldexp(1.0, p.box_exp);
  const double log_sqrt_2pie = 0.5 * std::log(2 * kPi * std::exp(1.0));
  const double log_eps = p.box_exp * std::log(2.0) + log_sqrt_2pie - kPi * two_m * two_m;

  TailBoundsReport r;
  r.integer_mass.name = "integer_mass";
  r.integer_mass.log_lhs = log_rho_integers(s, c0);
  r.integer_mass.log_rhs = log_gaussian_sum(s, 0.0, -h, h) - std::log1p(-std::exp(log_eps));
  r.integer_mass.holds = r.integer_mass.log_lhs <= r.integer_mass.log_rhs + 1e-12;

  r.integer_tail.name = "integer_tail";
  r.integer_tail.log_lhs = log_add(log_gaussian_sum(s, c0, -kFar, -h - 1),
                                   log_gaussian_sum(s, c0, h + 1, kFar));
  r.integer_tail.log_rhs = std::log(2.0) + log_eps + std::log(3 * s + 4);
  r.integer_tail.holds = r.integer_tail.log_lhs <= r.integer_tail.log_rhs + 1e-12;

  const std::size_t m = basis.rank();
  const auto inner = h / 2;
  auto outside_box = [&](const Coords& z) {
    return std::any_of(z.begin(), z.end(), [&](std::int64_t v) { return v < -inner || v > inner; });
  };
  const MassSplit split = lattice_mass_split(
      basis, s, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.ambient_dim())), outside_box,
      1e-6, budget);
  const double md = static_cast<double>(m);
  r.lattice_tail.name = "lattice_tail";
  r.lattice_tail.log_lhs = log_add(split.log_selected, split.log_remainder);
  r.lattice_tail.log_rhs = std::log(2.0) + md * ((p.box_exp - 1) * std::log(2.0) + log_sqrt_2pie) -
                           kPi * md * two_m * two_m / 4 +
                           md * std::log(3 * s / basis.min_gs_norm() + 4);
  r.lattice_tail.holds = r.lattice_tail.log_lhs <= r.lattice_tail.log_rhs + 1e-12;
  return r;
}

double periodic_gaussian(const LatticeBasis& basis, double sigma, const Eigen::VectorXd& x,
                         std::uint64_t budget) {
  if (!basis.is_square()) fail(ErrorKind::InvalidInput, "periodic Gaussian requires a square basis");
  if (!(sigma > 0)) fail(ErrorKind::ParamConstraint, "sigma must be positive");
  const Eigen::VectorXd coeff = basis.matrix().partialPivLu().solve(x);
  Coords shift(static_cast<std::size_t>(coeff.size()));
  for (Eigen::Index i = 0; i < coeff.size(); ++i) shift[i] = round_nearest(coeff(i));
  const Eigen::VectorXd reduced = x - basis.point(shift);
  if (reduced.norm() <= 1e-12 * std::max(1.0, x.norm())) return 1.0;
  auto all = [](const Coords&) { return true; };
  const auto num = lattice_mass_split(basis, sigma, -reduced, all, 1e-14, budget);
  const auto den = lattice_mass_split(
      basis, sigma, Eigen::VectorXd::Zero(reduced.size()), all, 1e-14, budget);
  return std::min(1.0, std::exp(num.log_selected - den.log_selected));
}

FourierCheck fourier_identity_check(const LatticeBasis& basis, double sigma,
                                    const Eigen::VectorXd& x, const CoeffBox& dual_box,
                                    std::uint64_t budget) {
  const LatticeBasis dual = basis.dual();
  if (dual_box.size() != dual.rank()) fail(ErrorKind::InvalidInput, "dual box dimension mismatch");
  if (box_size(dual_box) > budget)
    fail(ErrorKind::EnumerationBudgetExceeded, "dual box exceeds enumeration budget");
  const double width = 1.0 / sigma;
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(x.size());
  auto all = [](const Coords&) { return true; };
  auto outside = [&](const Coords& z) {
    for (std::size_t i = 0; i < z.size(); ++i)
      if (z[i] < dual_box[i].first || z[i] > dual_box[i].second) return true;
    return false;
  };
  const double log_total = lattice_mass_split(dual, width, origin, all, 1e-15, budget).log_selected;

  FourierCheck out;
  out.f_value = periodic_gaussian(basis, sigma, x, budget);
  CompensatedSum series;
  for_each_in_box(dual_box, [&](const Coords& z) {
    const Eigen::VectorXd w = dual.point(z);
    const double d = std::exp(-kPi * w.squaredNorm() / (width * width) - log_total);
    series.add(d * std::cos(2 * kPi * w.dot(x)));
  });
  out.series_value = series.value();
  out.residual = std::fabs(out.f_value - out.series_value);
  const auto split = lattice_mass_split(dual, width, origin, outside, 1e-6, budget);
  const double log_out_upper = log_add(split.log_selected, split.log_remainder);
  out.dual_tail = std::exp(log_out_upper - log_total);
  return out;
}

double pointwise_approx_score(const std::vector<Eigen::VectorXd>& w, const Eigen::VectorXd& x) {
  if (w.empty()) fail(ErrorKind::EmptySampleSet, "score needs at least one dual vector");
  CompensatedSum sum;
  for (const auto& v : w) sum.add(std::cos(2 * kPi * v.dot(x)));
  return sum.value() / static_cast<double>(w.size());
}

SandwichReport distance_sandwich_check(const LatticeBasis& basis, double sigma,
                                       const Eigen::VectorXd& x, std::uint64_t budget) {
  SandwichReport r;
  const double width = 1.0 / sigma;
  r.f_value = periodic_gaussian(basis, width, x, budget);
  r.distance = closest_vector(basis, x, budget).distance;
  r.tau = width * std::sqrt(static_cast<double>(basis.ambient_dim()) / (2 * kPi));
  auto rho = [&](double d) { return std::exp(-kPi * d * d / (width * width)); };
  r.lower = rho(r.distance);
  r.lower_holds = r.f_value >= r.lower * (1 - 1e-12) - 1e-15;
  r.upper_applies = r.distance >= r.tau;
  if (r.upper_applies) {
    r.upper = rho(r.distance - r.tau);
    r.upper_holds = r.f_value <= r.upper * (1 + 1e-12) + 1e-15;
  }
  return r;
}

}  // namespace dgs
