// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dgs/attacks.hpp"
#include "dgs/cost.hpp"
#include "dgs/io.hpp"
#include "dgs/qsim.hpp"
#include "dgs/samplers.hpp"

using namespace dgs;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  const bool pass = o.pass && in_time;
  failures += !pass;
  std::printf("[%s] %2d %-28s %s (%.2fs%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs,
              in_time ? "" : ", over time limit");
  std::fflush(stdout);
}

LatticeBasis random_basis(std::size_t m, Philox& rng, std::int64_t spread) {
  for (;;) {
    std::vector<std::vector<std::int64_t>> cols(m, std::vector<std::int64_t>(m));
    for (auto& c : cols)
      for (auto& v : c) v = static_cast<std::int64_t>(rng.uniform_below(2 * spread + 1)) - spread;
    try {
      return basis_from_columns(cols);
    } catch (const Error&) {
    }
  }
}

GaussianParams gparams(double sigma, int box_exp, int nu = 8, std::vector<double> center = {}) {
  GaussianParams p;
  p.sigma = sigma;
  p.box_exp = box_exp;
  p.precision = nu;
  p.center = std::move(center);
  return p;
}

// Least-squares slope of log y against log x.
double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

class FaultyOracle : public ScoreOracle {
 public:
  FaultyOracle(std::vector<double> v, double fault) : v_(std::move(v)), fault_(fault) {}
  std::uint64_t size() const override { return v_.size(); }
  double exact(std::uint64_t i) const override { return v_[i]; }
  double sample(std::uint64_t i, Philox& rng) override {
    return rng.bernoulli(fault_) ? 2 * rng.uniform01() - 1 : v_[i];
  }

 private:
  std::vector<double> v_;
  double fault_;
};

}  // namespace

int main(int argc, char** argv) {
  const std::string fixtures = argc > 1 ? argv[1] : DGS_FIXTURE_DIR;
  const std::uint64_t seed = 20261016;
  Philox root(seed);

  criterion(1, "quantum-sis-table", 1, [] {
    const double rows[3][3] = {{146, 119, 50}, {219, 179, 72}, {312, 259, 100}};
    const long want[3] = {146, 219, 312};
    bool ok = true;
    std::string got;
    for (int i = 0; i < 3; ++i) {
      CostInputs in;
      in.t_qbkz = rows[i][0];
      in.t_qsample = rows[i][1];
      in.neg_log2_p = rows[i][2];
      const long r = combine_sis_cost(in).rounded();
      ok = ok && r == want[i];
      got += std::to_string(r) + (i < 2 ? "/" : "");
    }
    return Outcome{ok, "computed " + got + " vs 146/219/312"};
  });

  criterion(2, "classical-sis-table", 1, [] {
    const double rows[3][3] = {{201, 159, 39}, {288, 230, 55}, {400, 323, 74}};
    const long want[3] = {202, 289, 400};
    bool ok = true;
    std::string got;
    for (int i = 0; i < 3; ++i) {
      CostInputs in;
      in.t_bkz = rows[i][0];
      in.t_sample = rows[i][1];
      in.n_samples = rows[i][2];
      const long r = combine_classical_sis_cost(in).rounded();
      ok = ok && std::labs(r - want[i]) <= 1;
      got += std::to_string(r) + (i < 2 ? "/" : "");
    }
    return Outcome{ok, "computed " + got + " vs 202/289/400 (+-1)"};
  });

  criterion(3, "rejection-exactness", 10, [&] {
    const Json doc = read_json_file(fixtures + "/reference_m2.json");
    const auto cfg = KleinConfig::make(basis_from_json(doc.at("basis")), gaussian_params_from_json(doc));
    const auto acc = accepted_output_pmf(cfg);
    const auto target = target_pmf_exact(cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
      const auto j = acc.find(target.coords[i]);
      err = std::max(err, std::fabs((j ? acc.mass[*j] : 1.0) - target.mass[i]));
    }
    return Outcome{err <= 1e-12 && acc.size() == target.size(), fmt("max pointwise error %.3g over %zu points", err, target.size())};
  });

  criterion(4, "pipeline-tv-bound", 300, [&] {
    Philox rng = root.substream(4);
    int ok = 0, total = 0;
    double worst = 0.0;
    std::map<std::size_t, int> per_dim;
    for (std::size_t m = 1; m <= 3; ++m) {
      for (int t = 0; t < 5; ++t) {
        const auto basis = random_basis(m, rng, 3);
        const int box_exp = m == 3 ? 2 : 3;
        const int nu = 8 + 2 * (t % 3);
        const double sigma = (0.5 + 1.5 * rng.uniform01()) * basis.min_gs_norm();
        const auto cfg = KleinConfig::make(basis, gparams(sigma, box_exp, nu));
        QueryLedger ledger;
        const auto r = run_gaussian_pipeline(cfg, nu, QaaOptions{}, ledger, rng);
        ++total;
        ++per_dim[m];
        ok += r.tv_to_lattice <= r.tv_bound;
        worst = std::max(worst, r.tv_to_lattice / r.tv_bound);
      }
    }
    return Outcome{ok == total && total >= 10,
                   fmt("%d/%d instances (m=1,2,3: %d,%d,%d) within bound, max tv/bound %.3g", ok, total,
                       per_dim[1], per_dim[2], per_dim[3], worst)};
  });

  criterion(5, "quadratic-speedup", 600, [&] {
    Philox rng = root.substream(5);
    std::vector<double> ws, classical, quantum;
    const int quantum_runs = 200, classical_samples = 400;
    for (std::int64_t k : {6, 12, 25, 50, 100, 200, 400, 800}) {
      const double sigma = 0.5;
      int box_exp = 2;
      while (std::ldexp(1.0, box_exp) < 2.5 * sigma * static_cast<double>(k)) ++box_exp;
      const auto cfg = KleinConfig::make(basis_from_columns({{k, 1}, {k + 1, 1}}), gparams(sigma, box_exp));
      const double w = w_bound(cfg, false).w;

      std::uint64_t trials = 0;
      for (int s = 0; s < classical_samples; ++s) trials += rejection_sample(cfg, rng).stats.trials;

      const auto omega = enumerate_omega(cfg);
      std::map<Coords, double> log_den;
      for (const auto& p : omega) log_den.emplace(p.x, p.log_denominator);
      const int prec = pipeline_precision(omega.size(), w, 8);
      const auto transduced = amplitude_transduce(
          prepare_klein_state(cfg, prec),
          [&](const Coords& x) { return std::exp(log_acceptance_ratio(cfg, log_den.at(x))); }, prec);
      std::uint64_t calls = 0;
      const QaaOptions opts;
      for (int s = 0; s < quantum_runs; ++s) {
        QueryLedger ledger;
        calls += qaa_project(transduced, [](const BasisState& b) { return b.flag == 0; }, opts, ledger, rng).calls;
      }
      ws.push_back(w);
      classical.push_back(static_cast<double>(trials) / classical_samples);
      quantum.push_back(static_cast<double>(calls) / quantum_runs);
    }
    const double span = *std::max_element(ws.begin(), ws.end()) / *std::min_element(ws.begin(), ws.end());
    const double aq = log_slope(ws, quantum), ac = log_slope(ws, classical);
    return Outcome{span >= 100 && aq >= 0.4 && aq <= 0.6 && ac >= 0.9 && ac <= 1.1,
                   fmt("w in [%.3g, %.3g]; alpha quantum %.3f, classical %.3f", ws.front(), ws.back(), aq, ac)};
  });

  criterion(6, "bound-suite", 120, [&] {
    Philox rng = root.substream(6);
    const int points = 100;
    int pass[6] = {0, 0, 0, 0, 0, 0};

    for (int i = 0; i < points; ++i) {
      const double sigma = 0.01 + 50 * rng.uniform01();
      pass[0] += rho_integers(sigma, rng.uniform01() - 0.5) <= 3 * sigma + 4;
    }

    // Finite-interval inequalities over their stated range: any sigma > 0, M >= 1, real center.
    int restricted = 0, restricted_pass = 0;
    for (int i = 0; i < points; ++i) {
      const double sigma = std::exp(std::log(0.1) + std::log(80.0) * rng.uniform01());
      const auto p = gparams(sigma, 2 + static_cast<int>(rng.uniform_below(3)), 8, {rng.uniform01() - 0.5});
      const auto r = tail_bounds_check(basis_from_columns({{1}}), p);
      const bool ok = r.integer_mass.holds && r.integer_tail.holds;
      pass[1] += ok;
      if (sigma <= 1) {
        ++restricted;
        restricted_pass += ok;
      }
    }

    // Lattice tail over its stated range: full-rank B, Omega = B * [-2^{M-1}, 2^{M-1}]^m (the
    // largest complement the hypothesis allows), any sigma.
    int lt_unit = 0, lt_unit_pass = 0;
    for (int i = 0; i < points; ++i) {
      const auto b = random_basis(1 + rng.uniform_below(3), rng, 3);
      const double sigma = std::exp(std::log(0.1) + std::log(40.0) * rng.uniform01());
      const bool ok = tail_bounds_check(b, gparams(sigma, 2 + static_cast<int>(rng.uniform_below(2)))).lattice_tail.holds;
      pass[2] += ok;
      if (b.rank() == 1) {
        ++lt_unit;
        lt_unit_pass += ok;
      }
    }

    // TV between the truncated and the full lattice Gaussian equals rho(L \ Omega) / rho(L) <= rho(L \ Omega).
    double tv_err = 0.0;
    for (int i = 0; i < points; ++i) {
      const auto b = random_basis(1 + rng.uniform_below(2), rng, 2);
      const auto cfg = KleinConfig::make(b, gparams((1 + 2 * rng.uniform01()) * b.min_gs_norm(), 2));
      const auto tail = lattice_tail(cfg);
      const auto target = target_pmf_exact(cfg);
      CompensatedSum half;
      for (std::size_t j = 0; j < target.size(); ++j) {
        const double full = std::exp(-kPi * (target.points[j] - cfg.center).squaredNorm() /
                                         (cfg.params.sigma * cfg.params.sigma) - tail.log_rho_lattice);
        half.add(std::fabs(target.mass[j] - full));
      }
      half.add(std::exp(tail.log_rho_outside - tail.log_rho_lattice));
      const double err = std::fabs(0.5 * half.value() - tail.tv_exact);
      tv_err = std::max(tv_err, err);
      pass[3] += err <= 1e-12 && tail.tv_exact <= tail.rho_outside();
    }

    // Pointwise acceptance ratio at most one.
    for (int i = 0; i < points; ++i) {
      const auto b = random_basis(1 + rng.uniform_below(3), rng, 4);
      std::vector<double> c(b.rank());
      for (auto& v : c) v = 4 * rng.uniform01() - 2;
      const auto cfg = KleinConfig::make(b, gparams(0.3 + 3 * rng.uniform01(), 2, 8, c));
      double mx = -1e300;
      for (const auto& pt : enumerate_omega(cfg)) mx = std::max(mx, log_acceptance_ratio(cfg, pt.log_denominator));
      pass[4] += mx <= 1e-12;
    }

    // Distance sandwich for the periodic Gaussian.
    for (int i = 0; i < points; ++i) {
      const auto b = random_basis(1 + rng.uniform_below(3), rng, 3);
      Eigen::VectorXd x(static_cast<Eigen::Index>(b.rank()));
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = 6 * rng.uniform01() - 3;
      pass[5] += distance_sandwich_check(b, 0.3 + 2 * rng.uniform01(), x).holds();
    }

    const bool ok = std::all_of(std::begin(pass), std::end(pass), [&](int v) { return v == points; });
    return Outcome{ok, fmt("integer-mass %d, finite-interval %d (sigma<=1: %d/%d), lattice-tail %d (m=1: %d/%d), "
                           "tv-identity %d (abs err %.2g), ratio<=1 %d, sandwich %d of %d",
                           pass[0], pass[1], restricted_pass, restricted, pass[2], lt_unit_pass, lt_unit, pass[3],
                           tv_err, pass[4], pass[5], points)};
  });

  criterion(7, "qaa-exactness", 1, [&] {
    Philox rng = root.substream(7);
    double err = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double a = rng.uniform01();
      const auto k = rng.uniform_below(1000);
      const double want = std::sin((2.0 * static_cast<double>(k) + 1) * std::asin(std::sqrt(a)));
      err = std::max(err, std::fabs(sim_good_amplitude(a, k) - want));
    }
    return Outcome{err <= 1e-12, fmt("max error %.3g over 1000 (a, k)", err)};
  });

  criterion(8, "max-finder", 300, [&] {
    Philox rng = root.substream(8);
    const unsigned k = 4;
    const double need = 1 - std::ldexp(1.0, -static_cast<int>(k)) - 0.05;
    bool ok = true;
    std::string detail;
    std::vector<double> normalized;
    for (unsigned l : {6u, 8u, 10u, 12u}) {
      const std::uint64_t n = std::uint64_t{1} << l;
      for (double fault : {0.0, 0.1}) {
        int wins = 0;
        double calls = 0;
        for (int t = 0; t < 200; ++t) {
          std::vector<double> v(n);
          for (auto& x : v) x = 2 * rng.uniform01() - 1;
          const auto best = static_cast<std::uint64_t>(std::max_element(v.begin(), v.end()) - v.begin());
          FaultyOracle o(std::move(v), fault);
          QueryLedger ledger;
          const auto r = max_find_bounded_error(o, l, k, rng, ledger);
          wins += r.index == best;
          calls += static_cast<double>(r.score_calls);
        }
        const double rate = wins / 200.0;
        ok = ok && rate >= need;
        const double c = calls / 200.0 / (k * std::sqrt(static_cast<double>(n)));
        normalized.push_back(c);
        detail += fmt("l=%u%s %.3f/%.1f ", l, fault > 0 ? "f" : "e", rate, c);
      }
    }
    const double spread = *std::max_element(normalized.begin(), normalized.end()) /
                          *std::min_element(normalized.begin(), normalized.end());
    ok = ok && spread <= 2.0;
    return Outcome{ok, detail + fmt("(need rate >= %.4f; calls/(k sqrt N) spread %.2f)", need, spread)};
  });

  criterion(9, "mean-estimator", 300, [&] {
    Philox rng = root.substream(9);
    DistributionTable d;
    for (std::int64_t x = -12; x <= 12; ++x)
      d.push({x}, Eigen::VectorXd::Constant(1, static_cast<double>(x)), std::exp(-kPi * static_cast<double>(x * x)));
    d.finalize(true);
    const auto phi = [](const Coords& x) { return std::cos(kPi * static_cast<double>(x[0])); };
    const double truth = periodic_gaussian(basis_from_columns({{1}}), 1.0, Eigen::VectorXd::Constant(1, 0.5));
    AmplitudeEstimator est;
    int good = 0;
    for (int t = 0; t < 200; ++t) {
      QueryLedger ledger;
      good += std::fabs(mean_estimate(d, phi, 0.05, 0.01, ledger, rng, &est) - truth) <= 0.05;
    }
    std::vector<double> scaled;
    for (double eps : {0.1, 0.05, 0.025}) {
      QueryLedger ledger;
      mean_estimate(d, phi, eps, 0.01, ledger, rng, &est);
      scaled.push_back(static_cast<double>(ledger.get(ledger_keys::kStatePrep)) * eps);
    }
    const double spread = *std::max_element(scaled.begin(), scaled.end()) / *std::min_element(scaled.begin(), scaled.end());
    return Outcome{good >= 190 && spread <= 3.0,
                   fmt("%d/200 within 0.05 of %.6f; calls*eps %.0f/%.0f/%.0f (spread %.2f)", good, truth, scaled[0],
                       scaled[1], scaled[2], spread)};
  });

  criterion(10, "dual-attacks", 900, [&] {
    Philox rng = root.substream(10);
    const auto params = AttackParams::make(1.0, 8);
    int wins[3] = {0, 0, 0};
    int resampled = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
      Philox tr = rng.substream(static_cast<std::uint64_t>(t));
      LweInstance inst;
      for (;;) {
        inst = gen_lwe(8, 4, 2, 17, 0.8, tr);
        const auto h = check_dual_hypothesis(inst, params);
        if (h.classical_ok() && h.qram_ok() && h.sampler_ok()) break;
        ++resampled;
      }
      const auto w = sample_dual_vectors(inst, params.sigma, params.n_samples, 6, tr);
      const auto c = classical_dual_attack(inst, w, params, true);
      wins[0] += c.guess && *c.guess == inst.s_guess();
      const auto q = quantum_dual_attack_qram(inst, w, params, tr);
      wins[1] += q.guess && *q.guess == inst.s_guess();
      const FourierDualState source(inst.a_dual(), inst.modulus, params.sigma, 7, 8);
      const auto s = quantum_dual_attack_sampler(inst, params, source, tr);
      wins[2] += s.hypothesis_ok && s.guess && *s.guess == inst.s_guess();
    }
    const int need = 85;
    return Outcome{wins[0] >= need && wins[1] >= need && wins[2] >= need,
                   fmt("classical %d, qram %d, sampler %d of %d (need %d; %d instances resampled)", wins[0], wins[1],
                       wins[2], trials, need, resampled)};
  });

  criterion(11, "sis-solver", 300, [&] {
    const Json doc = read_json_file(fixtures + "/sis_toy.json");
    const auto inst = sis_from_json(doc.at("instance"));
    const auto gp = gaussian_params_from_json(doc);
    const auto cfg = KleinConfig::make(sis_lattice(inst).basis, gp);
    const double p = sis_success_probability(inst, cfg);
    Philox rng = root.substream(11);
    const int trials = 200;
    bool valid = true;
    double reps_c = 0, reps_q = 0;
    for (int t = 0; t < trials; ++t) {
      const auto c = solve_sis(inst, cfg, SisMode::classical, rng, gp.precision);
      const auto q = solve_sis(inst, cfg, SisMode::quantum, rng, gp.precision);
      valid = valid && sis_solution_valid(inst, c.x) && sis_solution_valid(inst, q.x);
      reps_c += static_cast<double>(c.repetitions);
      reps_q += static_cast<double>(q.repetitions);
    }
    reps_c /= trials;
    reps_q /= trials;
    const double want_c = 1 / p, want_q = (kPi / 4) / std::sqrt(p);
    auto within2 = [](double a, double b) { return a <= 2 * b && b <= 2 * a; };
    return Outcome{valid && within2(reps_c, want_c) && within2(reps_q, want_q),
                   fmt("p=%.6f; all %d solutions valid=%s; classical %.3f vs 1/p %.3f; quantum %.3f vs "
                       "(pi/4)/sqrt(p) %.3f",
                       p, 2 * trials, valid ? "yes" : "no", reps_c, want_c, reps_q, want_q)};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
