#include <doctest.h>

#include "dgs/cost.hpp"
#include "oracles.hpp"

using namespace dgs;

namespace {

CostInputs quantum(double bkz, double sample, double p) {
  CostInputs in;
  in.t_qbkz = bkz;
  in.t_qsample = sample;
  in.neg_log2_p = p;
  return in;
}

CostInputs classical(double bkz, double sample, double n) {
  CostInputs in;
  in.t_bkz = bkz;
  in.t_sample = sample;
  in.n_samples = n;
  return in;
}

}  // namespace

TEST_CASE("log2-sum-exp against long double") {
  Philox rng(1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> xs;
    std::vector<long double> ys;
    for (std::uint64_t k = 0; k < 1 + rng.uniform_below(5); ++k) {
      xs.push_back(200 * rng.uniform01() - 100);
      ys.push_back(xs.back());
    }
    CHECK(log2_sum_exp(xs) == doctest::Approx(static_cast<double>(oracle::log2_sum_exp(ys))).epsilon(1e-14));
  }
  CHECK(log2_sum_exp({3000.0, 3000.0}) == doctest::Approx(3001.0));
  CHECK(log2_sum_exp({}) == kNegInf);
}

TEST_CASE("quantum SIS table rows") {
  CHECK(combine_sis_cost(quantum(146, 119, 50)).rounded() == 146);
  CHECK(combine_sis_cost(quantum(219, 179, 72)).rounded() == 219);
  CHECK(combine_sis_cost(quantum(312, 259, 100)).rounded() == 312);
  const auto r = combine_sis_cost(quantum(146, 119, 50));
  CHECK(r.terms[1].log2 == doctest::Approx(144.0));
  CHECK(r.dominant == "reduction");
}

TEST_CASE("classical SIS table rows under nearest rounding") {
  const auto l2 = combine_classical_sis_cost(classical(201, 159, 39));
  const auto l3 = combine_classical_sis_cost(classical(288, 230, 55));
  const auto l5 = combine_classical_sis_cost(classical(400, 323, 74));
  CHECK(l2.rounded() == 201);
  CHECK(l3.rounded() == 288);
  CHECK(l5.rounded() == 400);
  CHECK(l3.log2_total == doctest::Approx(288.0 + std::log2(1.125)));
}

TEST_CASE("dual cost formulas") {
  CostInputs in;
  in.t_bkz = 120;
  in.n_samples = 40;
  in.delta_log2 = -30;
  in.q_pow_nguess_half = 60;
  const auto r = combine_dual_costs(in);
  REQUIRE(r.size() == 4);
  CHECK(r[0].formula == "ps-no-qram");
  CHECK(r[0].log2_total == doctest::Approx(log2_sum_exp({120, 30 + 20 + 60})));
  CHECK(r[1].log2_total == doctest::Approx(log2_sum_exp({120, 30 + 40, 20 + 60})));
  CHECK(r[2].log2_total == doctest::Approx(log2_sum_exp({120, 15 + 40, 20 + 60})));
  CHECK(r[3].log2_total == doctest::Approx(log2_sum_exp({120, 15 + 20 + 60})));
  CHECK(r[2].log2_total <= r[1].log2_total);
  CHECK(r[3].log2_total <= r[0].log2_total);
}

TEST_CASE("missing and invalid inputs") {
  CostInputs in;
  in.t_qbkz = 100;
  try {
    combine_sis_cost(in);
    FAIL("expected MissingInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingInput);
  }
  in = quantum(100, 50, -1);
  try {
    combine_sis_cost(in);
    FAIL("expected InvalidInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
  }
}

TEST_CASE("Delta times w is bounded for Z^m and invariant under scaling") {
  for (std::size_t m = 1; m <= 3; ++m) {
    std::vector<std::vector<std::int64_t>> cols(m, std::vector<std::int64_t>(m, 0));
    for (std::size_t i = 0; i < m; ++i) cols[i][i] = 1;
    GaussianParams p;
    p.sigma = 1.0;
    p.box_exp = m == 3 ? 3 : 6;
    const auto dw = measured_delta_and_w(KleinConfig::make(basis_from_columns(cols), p));
    CHECK(dw.product() >= 0.5);
    CHECK(dw.product() <= 2.0);
  }
  GaussianParams p;
  p.sigma = 1.3;
  p.box_exp = 3;
  const auto b = basis_from_columns({{2, 0}, {1, 1}});
  const auto base = measured_delta_and_w(KleinConfig::make(b, p));
  GaussianParams p3 = p;
  p3.sigma = 3 * p.sigma;
  const auto scaled = measured_delta_and_w(KleinConfig::make(b.scaled(Rational(3)), p3));
  CHECK(scaled.delta == doctest::Approx(base.delta).epsilon(1e-10));
  CHECK(scaled.w == doctest::Approx(base.w).epsilon(1e-10));
}
