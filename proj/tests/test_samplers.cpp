#include <doctest.h>

#include <map>

#include "dgs/samplers.hpp"
#include "oracles.hpp"

using namespace dgs;

namespace {

KleinConfig reference_m2() {
  GaussianParams p;
  p.sigma = 2.0;
  p.box_exp = 2;
  return KleinConfig::make(basis_from_columns({{2, 0}, {1, 1}}), p);
}

double max_pointwise(const DistributionTable& a, const DistributionTable& b) {
  double err = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto j = a.find(b.coords[i]);
    err = std::max(err, std::fabs((j ? a.mass[*j] : 0.0) - b.mass[i]));
  }
  return err;
}

}  // namespace

TEST_CASE("Klein pmf agrees with the nearest-plane oracle") {
  const oracle::Columns cols{{3, 1}, {1, 2}};
  GaussianParams p;
  p.sigma = 1.5;
  p.box_exp = 2;
  p.center = {0.3, -0.7};
  const auto cfg = KleinConfig::make(basis_from_columns({{3, 1}, {1, 2}}), p);
  const auto pmf = klein_pmf_exact(cfg);
  CHECK(pmf.size() == cfg.omega_size());
  long double total = 0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const oracle::IVec x(pmf.coords[i].begin(), pmf.coords[i].end());
    const long double want = oracle::klein_probability(cols, 1.5L, 4, x, {0.3L, -0.7L});
    total += want;
    CHECK(pmf.mass[i] == doctest::Approx(static_cast<double>(want)).epsilon(1e-11));
  }
  CHECK(static_cast<double>(total) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rejection output equals the truncated target") {
  const auto cfg = reference_m2();
  CHECK(max_pointwise(accepted_output_pmf(cfg), target_pmf_exact(cfg)) <= 1e-12);
}

TEST_CASE("target pmf is proportional to rho on Omega") {
  const auto cfg = reference_m2();
  const auto t = target_pmf_exact(cfg);
  const auto omega = enumerate_omega(cfg);
  REQUIRE(omega.size() == t.size());
  const double log_total = log_rho_omega(omega);
  for (const auto& pt : omega)
    CHECK(t.mass[*t.find(pt.x)] == doctest::Approx(std::exp(pt.log_rho - log_total)).epsilon(1e-12));
}

TEST_CASE("acceptance ratio never exceeds one and w matches the reference value") {
  const auto cfg = reference_m2();
  const auto wb = w_bound(cfg, true);
  CHECK(wb.w == doctest::Approx(1.07837).epsilon(1e-5));
  CHECK(*wb.max_ratio <= wb.w * (1 + 1e-12));
  for (const auto& pt : enumerate_omega(cfg)) CHECK(log_acceptance_ratio(cfg, pt.log_denominator) <= 1e-12);
}

TEST_CASE("truncation TV identity and the two-sided expression") {
  const auto t = lattice_tail(reference_m2());
  CHECK(t.tv_exact == doctest::Approx(2.69e-9).epsilon(0.01));
  CHECK(t.tv_two_sided == doctest::Approx(4.06e-9).epsilon(0.01));
  CHECK(t.tv_exact <= t.rho_outside());
}

TEST_CASE("Omega covers the half box for Z^2 but not for a skewed basis") {
  GaussianParams p;
  p.sigma = 1.0;
  p.box_exp = 2;
  CHECK(omega_contains_box(KleinConfig::make(basis_from_columns({{1, 0}, {0, 1}}), p)));
  CHECK_FALSE(omega_contains_box(KleinConfig::make(basis_from_columns({{1, 0}, {10, 1}}), p)));
}

TEST_CASE("Klein support matches the enumerated Omega") {
  const auto cfg = KleinConfig::make(basis_from_columns({{5, 1}, {6, 1}}), reference_m2().params);
  std::map<Coords, bool> in_omega;
  for (const auto& pt : enumerate_omega(cfg)) in_omega[pt.x] = true;
  CHECK(in_omega.size() == cfg.omega_size());
  CoeffBox box(2, {-40, 40});
  for_each_in_box(box, [&](const Coords& x) { CHECK(in_klein_support(cfg, x) == in_omega.count(x) > 0); });
}

TEST_CASE("rejection sampler frequencies") {
  const auto cfg = reference_m2();
  const auto target = target_pmf_exact(cfg);
  Philox rng(21);
  std::map<Coords, double> counts;
  const int n = 40000;
  std::uint64_t trials = 0;
  for (int i = 0; i < n; ++i) {
    const auto r = rejection_sample(cfg, rng);
    counts[r.draw.x] += 1.0 / n;
    trials += r.stats.trials;
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) tv += std::fabs(counts[target.coords[i]] - target.mass[i]);
  CHECK(tv / 2 < 0.03);
  const double w = w_bound(cfg, false).w;
  CHECK(static_cast<double>(trials) / n == doctest::Approx(w).epsilon(0.03));
}

TEST_CASE("sampling is deterministic per seed") {
  const auto cfg = reference_m2();
  Philox a(7), b(7);
  for (int i = 0; i < 50; ++i) CHECK(klein_sample(cfg, a).x == klein_sample(cfg, b).x);
}

TEST_CASE("MCMC kernel leaves the target invariant") {
  const auto cfg = reference_m2();
  const auto t = mcmc_transition_matrix(cfg);
  const auto target = target_pmf_exact(cfg);
  Eigen::RowVectorXd pi(static_cast<Eigen::Index>(t.states.size()));
  for (std::size_t i = 0; i < t.states.size(); ++i)
    pi(static_cast<Eigen::Index>(i)) = target.mass[*target.find(t.states[i])];
  CHECK((pi * t.p - pi).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((t.p.rowwise().sum().array() - 1).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("MCMC burn-in grows with precision and shrinks with Delta") {
  CHECK(mcmc_burn_in(0.5, 16) > mcmc_burn_in(0.5, 8));
  CHECK(mcmc_burn_in(0.1, 8) > mcmc_burn_in(0.5, 8));
  const auto cfg = reference_m2();
  Philox rng(3);
  const auto r = mcmc_sample(cfg, 20, rng);
  CHECK(r.steps == 20);
  CHECK(in_klein_support(cfg, r.draw.x));
}

TEST_CASE("integer Gaussian sampler moments") {
  Philox rng(8);
  const double sigma = 2.5, c = 0.4;
  const int n = 50000;
  double mean = 0;
  for (int i = 0; i < n; ++i) mean += static_cast<double>(sample_integer_gaussian(sigma, rng, c));
  mean /= n;
  long double exact = 0, z = 0;
  for (int k = -60; k <= 60; ++k) {
    const long double r = oracle::rho(sigma, (k - c) * (k - c));
    exact += k * r;
    z += r;
  }
  CHECK(mean == doctest::Approx(static_cast<double>(exact / z)).epsilon(0.03));
}

TEST_CASE("non-square bases are rejected by the Klein sampler") {
  const auto b = basis_from_columns({{1, 0, 0}, {0, 1, 0}});
  try {
    KleinConfig::make(b, GaussianParams{});
    FAIL("expected InvalidInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
  }
}

TEST_CASE("enumeration budget is enforced") {
  GaussianParams p;
  p.box_exp = 6;
  const auto cfg = KleinConfig::make(basis_from_columns({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), p);
  try {
    enumerate_omega(cfg, 1000);
    FAIL("expected EnumerationBudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EnumerationBudgetExceeded);
  }
}
