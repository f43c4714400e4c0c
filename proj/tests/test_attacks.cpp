#include <doctest.h>

#include <algorithm>

#include "dgs/attacks.hpp"
#include "oracles.hpp"

using namespace dgs;

namespace {

LweInstance toy_instance(Philox& rng, const AttackParams& params) {
  for (;;) {
    auto inst = gen_lwe(8, 4, 2, 17, 0.8, rng);
    if (check_dual_hypothesis(inst, params).sampler_ok()) return inst;
  }
}

std::vector<oracle::IVec> rows(const IntMatrix& a) {
  std::vector<oracle::IVec> r(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r[i].push_back(a(i, j));
  return r;
}

}  // namespace

TEST_CASE("generated LWE instances are consistent") {
  Philox rng(1);
  const auto inst = gen_lwe(8, 4, 2, 17, 0.8, rng);
  CHECK(inst.consistent());
  CHECK(rank_mod(inst.a, 17) == 4);
  CHECK(rank_mod(inst.a_dual(), 17) == 2);
  CHECK(inst.a_guess().cols() == 2);
  try {
    gen_lwe(8, 4, 2, 16, 0.8, rng);
    FAIL("expected ParamConstraint");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParamConstraint);
  }
}

TEST_CASE("candidate indexing round-trips") {
  for (std::uint64_t i = 0; i < 289; ++i) CHECK(index_from_guess(guess_from_index(i, 2, 17), 17) == i);
  IntVector s(2);
  s << 3, 5;
  CHECK(index_from_guess(s, 17) == 3 + 5 * 17);
}

TEST_CASE("hypothesis report uses the exact lambda1") {
  Philox rng(2);
  const auto params = AttackParams::make(1.0, 8);
  const auto inst = gen_lwe(8, 4, 2, 17, 0.8, rng);
  const auto h = check_dual_hypothesis(inst, params);
  CHECK(h.lambda1 == doctest::Approx(static_cast<double>(oracle::lambda1_qary_scan(rows(inst.a), 17))));
  CHECK(h.tau == doctest::Approx(std::sqrt(8 / (2 * kPi))));
  CHECK(h.need_sampler == doctest::Approx(2 * params.eps + 2 * params.eta1 + params.eta2));
}

TEST_CASE("dual vectors lie in the kernel and scores match a direct recomputation") {
  Philox rng(3);
  const auto inst = gen_lwe(8, 4, 2, 17, 0.8, rng);
  const auto w = sample_dual_vectors(inst, 1.0, 60, 6, rng);
  for (const auto& v : w) CHECK(mod_q(inst.a_dual().transpose() * v, 17).isZero());

  const auto direct = dual_scores_direct(inst, w);
  const auto fft = dual_scores_fft(inst, w);
  REQUIRE(direct.size() == 289);
  for (std::uint64_t i = 0; i < 289; i += 7) {
    const IntVector s = guess_from_index(i, 2, 17);
    long double want = 0;
    for (const auto& v : w) {
      std::int64_t dot = 0;
      for (Eigen::Index j = 0; j < 8; ++j) {
        std::int64_t r = inst.b(j);
        for (Eigen::Index k = 0; k < 2; ++k) r -= inst.a(j, k) * s(k);
        dot += v(j) * r;
      }
      want += std::cos(2 * oracle::kPi * static_cast<long double>(((dot % 17) + 17) % 17) / 17);
    }
    CHECK(direct[i] == doctest::Approx(static_cast<double>(want)).epsilon(1e-10));
  }
  for (std::size_t i = 0; i < direct.size(); ++i) CHECK(std::fabs(direct[i] - fft[i]) <= 1e-9);
}

TEST_CASE("duplicating every dual vector keeps the classical guess") {
  Philox rng(4);
  const auto params = AttackParams::make(1.0, 8);
  const auto inst = toy_instance(rng, params);
  const auto w = sample_dual_vectors(inst, 1.0, 200, 6, rng);
  auto doubled = w;
  doubled.insert(doubled.end(), w.begin(), w.end());
  const auto a = classical_dual_attack(inst, w, params);
  const auto b = classical_dual_attack(inst, doubled, params, true);
  CHECK(a.guess_index == b.guess_index);
  CHECK(b.score_truth == doctest::Approx(2 * a.score_truth));
}

TEST_CASE("classical attack recovers the guessed part") {
  Philox rng(5);
  const auto params = AttackParams::make(1.0, 8);
  int ok = 0;
  for (int t = 0; t < 10; ++t) {
    const auto inst = toy_instance(rng, params);
    const auto w = sample_dual_vectors(inst, 1.0, 400, 6, rng);
    const auto r = classical_dual_attack(inst, w, params);
    ok += r.guess && *r.guess == inst.s_guess();
  }
  CHECK(ok >= 9);
}

TEST_CASE("qRAM attack with exact and estimated scores") {
  Philox rng(6);
  const auto params = AttackParams::make(1.0, 8);
  const auto inst = toy_instance(rng, params);
  const auto w = sample_dual_vectors(inst, 1.0, 400, 6, rng);
  for (bool exact : {true, false}) {
    const auto r = quantum_dual_attack_qram(inst, w, params, rng, 4, exact);
    CHECK(r.guess.value() == inst.s_guess());
    CHECK(r.ledger.get(ledger_keys::kScoreFn) > 0);
  }
  try {
    quantum_dual_attack_qram(inst, {}, params, rng);
    FAIL("expected EmptySampleSet");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptySampleSet);
  }
}

TEST_CASE("q-ary periodic Gaussian matches lattice enumeration") {
  IntMatrix b(3, 1);
  b << 1, 2, 3;
  Eigen::VectorXd t(3);
  t << 0.4, -1.3, 2.2;
  long double num = 0, den = 0;
  oracle::for_each_box(3, -12, 12, [&](const oracle::IVec& v) {
    if ((v[1] - 2 * v[0]) % 5 != 0 || (v[2] - 3 * v[0]) % 5 != 0) return;
    long double d0 = 0, d1 = 0;
    for (int i = 0; i < 3; ++i) {
      d0 += static_cast<long double>(v[i]) * v[i];
      d1 += (v[i] + t(i)) * (v[i] + t(i));
    }
    den += oracle::rho(1.0L, d0);
    num += oracle::rho(1.0L, d1);
  });
  CHECK(qary_periodic_gaussian(b, 5, 1.0, t) == doctest::Approx(static_cast<double>(num / den)).epsilon(1e-12));
}

TEST_CASE("Fourier dual state agrees with enumeration and with the pipeline state") {
  IntMatrix a(3, 1);
  a << 1, 2, 3;
  const double sigma = 0.6;  // dual vectors of width q sigma = 3
  const FourierDualState fourier(a, 5, sigma, 3, 8);
  const auto lat = qary_basis(a, 5, QaryKind::kernel);
  GaussianParams gp;
  gp.sigma = 3.0;
  gp.box_exp = 3;
  Philox rng(7);
  const EnumeratedDualState enumerated(KleinConfig::make(lat.basis, gp), 5, 8, rng);
  CHECK(fourier.tv_bound() <= 0.01);
  CHECK(enumerated.tv_to_lattice() <= enumerated.tv_bound());

  Philox pick(8);
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd t(3);
    for (int i = 0; i < 3; ++i) t(i) = static_cast<double>(pick.uniform_below(5));
    long double num = 0, den = 0;
    oracle::for_each_box(3, -16, 16, [&](const oracle::IVec& v) {
      if ((v[0] + 2 * v[1] + 3 * v[2]) % 5 != 0) return;
      const long double r = oracle::rho(3.0L, static_cast<long double>(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
      den += r;
      num += r * std::cos(2 * oracle::kPi * (t(0) * v[0] + t(1) * v[1] + t(2) * v[2]) / 5);
    });
    const double want = static_cast<double>(num / den);
    CHECK(fourier.mean_cos(t) == doctest::Approx(want).epsilon(1e-10));
    CHECK(std::fabs(enumerated.mean_cos(t) - want) <= 2 * enumerated.tv_bound());
  }
}

TEST_CASE("sampler attack recovers the guess and refuses a violated hypothesis in strict mode") {
  Philox rng(9);
  const auto params = AttackParams::make(1.0, 8);
  auto inst = toy_instance(rng, params);
  const FourierDualState source(inst.a_dual(), 17, 1.0, 7, 8);
  const auto r = quantum_dual_attack_sampler(inst, params, source, rng);
  CHECK(r.hypothesis_ok);
  CHECK(r.guess.value() == inst.s_guess());
  CHECK(r.ledger.get(ledger_keys::kKleinState) ==
        r.ledger.get(ledger_keys::kGaussianState) * source.klein_preps_per_state());

  inst.error.setConstant(3);
  inst.b = mod_q(inst.a * inst.secret + inst.error, 17);
  try {
    quantum_dual_attack_sampler(inst, params, source, rng, 4, true);
    FAIL("expected HypothesisViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HypothesisViolated);
  }
}

TEST_CASE("SIS validity checks are exact") {
  SisInstance inst;
  inst.a = IntMatrix(1, 3);
  inst.a << 1, 2, 3;
  inst.modulus = 7;
  inst.norm_p = 2.0;
  IntVector x(3);
  x << 1, -2, 1;  // 1 - 4 + 3 = 0, norm^2 = 6
  inst.length_bound = 2.449;
  CHECK_FALSE(sis_solution_valid(inst, x));
  inst.length_bound = 2.45;
  CHECK(sis_solution_valid(inst, x));
  inst.norm_p = 1.0;
  inst.length_bound = 4;
  CHECK(sis_solution_valid(inst, x));
  inst.norm_p = std::numeric_limits<double>::infinity();
  inst.length_bound = 1.5;
  CHECK_FALSE(sis_solution_valid(inst, x));
  CHECK_FALSE(sis_solution_valid(inst, IntVector::Zero(3)));
}

TEST_CASE("toy SIS solver") {
  SisInstance inst;
  inst.a = IntMatrix(1, 2);
  inst.a << 1, 1;
  inst.modulus = 3;
  inst.norm_p = std::numeric_limits<double>::infinity();
  inst.length_bound = 1;
  GaussianParams gp;
  gp.sigma = 1.5;
  gp.box_exp = 2;
  gp.precision = 20;
  const auto cfg = KleinConfig::make(sis_lattice(inst).basis, gp);
  const double p = sis_success_probability(inst, cfg);
  CHECK(p == doctest::Approx(0.108793).epsilon(1e-5));

  // Only +-(1, -1) are short solutions; their mass under the truncated target.
  const auto target = target_pmf_exact(cfg);
  double want = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto v = target.points[i];
    if ((std::fabs(v(0) - 1) < 1e-9 && std::fabs(v(1) + 1) < 1e-9) ||
        (std::fabs(v(0) + 1) < 1e-9 && std::fabs(v(1) - 1) < 1e-9))
      want += target.mass[i];
  }
  CHECK(p == doctest::Approx(want).epsilon(1e-12));

  Philox rng(10);
  for (auto mode : {SisMode::classical, SisMode::quantum}) {
    const auto r = solve_sis(inst, cfg, mode, rng);
    CHECK(sis_solution_valid(inst, r.x));
    CHECK(std::abs(r.x(0)) == 1);
  }

  inst.length_bound = 0.5;
  try {
    solve_sis(inst, cfg, SisMode::classical, rng);
    FAIL("expected NoSolutionInSupport");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoSolutionInSupport);
  }
}
