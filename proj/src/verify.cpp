#include "dgs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "dgs/attacks.hpp"
#include "dgs/cost.hpp"
#include "dgs/io.hpp"
#include "dgs/qsim.hpp"
#include "dgs/samplers.hpp"

namespace dgs {

namespace {

struct Fixture {
  LatticeBasis basis;
  GaussianParams params;
};

Fixture load_gaussian(const std::string& dir, const std::string& name) {
  const Json doc = read_json_file(dir + "/" + name);
  check_schema(doc);
  return {basis_from_json(doc.at("basis")), gaussian_params_from_json(doc)};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

class Suite {
 public:
  void run(const std::string& key, const std::function<std::string(bool&)>& body) {
    CheckResult r;
    r.key = key;
    try {
      bool ok = false;
      r.detail = body(ok);
      r.passed = ok;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(r));
  }
  std::vector<CheckResult> results;
};

}  // namespace

std::vector<CheckResult> run_verify_suite(const std::string& dir, std::uint64_t seed) {
  Suite s;
  Philox root(seed);

  s.run("lattice/qr_factorisation", [&](bool& ok) {
    const auto f = load_gaussian(dir, "reference_m2.json");
    ok = f.basis.qr_residual() <= 1e-12 && f.basis.orthogonality_error() <= 1e-12;
    return "residual " + fmt(f.basis.qr_residual());
  });

  s.run("lattice/qary_duality", [&](bool& ok) {
    const IntMatrix a = int_matrix_from_json(Json::parse("[[1],[2],[3]]"));
    const auto kernel = qary_basis(a, 5, QaryKind::kernel);
    const auto primal = qary_basis(a, 5, QaryKind::primal);
    const bool det_ok = kernel.basis.exact_volume() == Rational(5) && primal.basis.exact_volume() == Rational(25);
    ok = det_ok && dual_scale_check(kernel.basis, primal.basis, 5, 2);
    return std::string(det_ok ? "" : "determinant mismatch; ") + "kernel/primal scale check";
  });

  s.run("gaussian/integer_mass_bound", [&](bool& ok) {
    ok = true;
    double worst = -1e300;
    for (int i = 1; i <= 40; ++i) {
      const double sigma = 0.25 * i;
      const double lhs = rho_integers(sigma);
      worst = std::max(worst, lhs - (3 * sigma + 4));
      ok = ok && lhs <= 3 * sigma + 4;
    }
    return "max rho(Z) - (3s+4) = " + fmt(worst);
  });

  s.run("gaussian/finite_interval_bounds", [&](bool& ok) {
    const auto f = load_gaussian(dir, "integer_line.json");
    const auto r = tail_bounds_check(f.basis, f.params);
    ok = r.all_hold();
    return "log lhs/rhs " + fmt(r.integer_tail.log_lhs) + " / " + fmt(r.integer_tail.log_rhs);
  });

  s.run("gaussian/poisson_identity", [&](bool& ok) {
    const auto f = load_gaussian(dir, "reference_m2.json");
    Eigen::VectorXd x(2);
    x << 0.37, -0.81;
    const auto c = fourier_identity_check(f.basis, 1.0, x, CoeffBox(2, {-8, 8}));
    ok = c.residual <= 1e-9 + c.dual_tail;
    return "residual " + fmt(c.residual);
  });

  s.run("gaussian/distance_sandwich", [&](bool& ok) {
    const auto f = load_gaussian(dir, "reference_m2.json");
    Philox rng = root.substream(1);
    ok = true;
    for (int i = 0; i < 10; ++i) {
      Eigen::VectorXd x(2);
      x << 4 * rng.uniform01() - 2, 4 * rng.uniform01() - 2;
      ok = ok && distance_sandwich_check(f.basis, 1.0, x).holds();
    }
    return std::string("10 random targets");
  });

  s.run("samplers/rejection_exactness", [&](bool& ok) {
    const auto f = load_gaussian(dir, "reference_m2.json");
    const auto cfg = KleinConfig::make(f.basis, f.params);
    const auto acc = accepted_output_pmf(cfg);
    const auto target = target_pmf_exact(cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i)
      err = std::max(err, std::fabs(acc.mass[*acc.find(target.coords[i])] - target.mass[i]));
    ok = err <= 1e-12;
    return "max pointwise error " + fmt(err);
  });

  s.run("samplers/amplitude_ratio_at_most_one", [&](bool& ok) {
    const auto f = load_gaussian(dir, "reference_m2.json");
    const auto cfg = KleinConfig::make(f.basis, f.params);
    const auto wb = w_bound(cfg, true);
    ok = *wb.max_ratio <= wb.w * (1 + 1e-12);
    return "max D/q " + fmt(*wb.max_ratio) + " vs w " + fmt(wb.w);
  });

  s.run("samplers/truncation_tv_identity", [&](bool& ok) {
    const auto f = load_gaussian(dir, "reference_m2.json");
    const auto cfg = KleinConfig::make(f.basis, f.params);
    const auto t = lattice_tail(cfg);
    ok = t.tv_exact <= t.rho_outside() * (1 + 1e-9) && t.tv_exact <= t.tv_two_sided;
    return "tv " + fmt(t.tv_exact) + " raw tail " + fmt(t.rho_outside());
  });

  s.run("samplers/mcmc_stationarity", [&](bool& ok) {
    const auto f = load_gaussian(dir, "reference_m2.json");
    const auto cfg = KleinConfig::make(f.basis, f.params);
    const auto t = mcmc_transition_matrix(cfg);
    const auto target = target_pmf_exact(cfg);
    Eigen::RowVectorXd pi(static_cast<Eigen::Index>(t.states.size()));
    for (std::size_t i = 0; i < t.states.size(); ++i)
      pi(static_cast<Eigen::Index>(i)) = target.mass[*target.find(t.states[i])];
    const double err = (pi * t.p - pi).cwiseAbs().maxCoeff();
    ok = err <= 1e-12 && t.p.minCoeff() >= -1e-15;
    return "max |pi P - pi| " + fmt(err);
  });

  s.run("qsim/grover_closed_form", [&](bool& ok) {
    Philox rng = root.substream(2);
    double err = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double a = rng.uniform01();
      const auto k = rng.uniform_below(50);
      err = std::max(err, std::fabs(sim_good_amplitude(a, k) -
                                    std::sin((2.0 * static_cast<double>(k) + 1) * std::asin(std::sqrt(a)))));
    }
    ok = err <= 1e-12;
    return "max error " + fmt(err);
  });

  s.run("qsim/pipeline_tv_bound", [&](bool& ok) {
    const auto f = load_gaussian(dir, "reference_m2.json");
    const auto cfg = KleinConfig::make(f.basis, f.params);
    QueryLedger ledger;
    Philox rng = root.substream(3);
    const auto p = run_gaussian_pipeline(cfg, f.params.precision, QaaOptions{}, ledger, rng);
    ok = p.tv_to_lattice <= p.tv_bound;
    return "tv " + fmt(p.tv_to_lattice) + " bound " + fmt(p.tv_bound);
  });

  s.run("qsim/state_norm_budget", [&](bool& ok) {
    const auto f = load_gaussian(dir, "reference_m2.json");
    const auto cfg = KleinConfig::make(f.basis, f.params);
    const auto st = prepare_klein_state(cfg, f.params.precision);
    ok = st.norm_within_budget(cfg.dim());
    return "norm^2 " + fmt(st.norm_sq());
  });

  s.run("attacks/fft_matches_direct", [&](bool& ok) {
    Philox rng = root.substream(4);
    const auto inst = gen_lwe(8, 4, 2, 17, 0.8, rng);
    const auto w = sample_dual_vectors(inst, 1.0, 100, 6, rng);
    const auto a = dual_scores_direct(inst, w);
    const auto b = dual_scores_fft(inst, w);
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::fabs(a[i] - b[i]));
    ok = err <= 1e-9;
    return "max score difference " + fmt(err);
  });

  s.run("attacks/dual_vectors_in_kernel", [&](bool& ok) {
    Philox rng = root.substream(5);
    const auto inst = gen_lwe(8, 4, 2, 17, 0.8, rng);
    const auto w = sample_dual_vectors(inst, 1.0, 50, 6, rng);
    const IntMatrix ad = inst.a_dual();
    ok = std::all_of(w.begin(), w.end(), [&](const IntVector& v) {
      return mod_q(ad.transpose() * v, 17).isZero();
    });
    return std::string("A_dual^T w = 0 mod q");
  });

  s.run("attacks/sis_solutions_exact", [&](bool& ok) {
    const Json doc = read_json_file(dir + "/sis_toy.json");
    check_schema(doc);
    const auto inst = sis_from_json(doc.at("instance"));
    const auto lat = sis_lattice(inst);
    const auto cfg = KleinConfig::make(lat.basis, gaussian_params_from_json(doc));
    Philox rng = root.substream(6);
    ok = true;
    for (int i = 0; i < 20; ++i) {
      ok = ok && sis_solution_valid(inst, solve_sis(inst, cfg, SisMode::classical, rng).x);
      ok = ok && sis_solution_valid(inst, solve_sis(inst, cfg, SisMode::quantum, rng).x);
    }
    return std::string("20 classical + 20 quantum solutions");
  });

  s.run("cost/table_reproduction", [&](bool& ok) {
    const Json doc = read_json_file(dir + "/cost_tables.json");
    check_schema(doc);
    ok = true;
    std::string detail;
    for (const auto& row : doc.at("rows")) {
      const auto in = cost_inputs_from_json(row.at("inputs"));
      const auto table = row.at("table").get<std::string>();
      const auto r = table == "sis-quantum" ? combine_sis_cost(in) : combine_classical_sis_cost(in);
      const long paper = row.at("paper_log2_attack").get<long>();
      ok = ok && std::labs(r.rounded() - paper) <= row.at("tolerance").get<long>();
      detail += std::to_string(r.rounded()) + " ";
    }
    return detail;
  });

  s.run("cost/dual_formula_identities", [&](bool& ok) {
    const Json doc = read_json_file(dir + "/dual_cost_example.json");
    check_schema(doc);
    const auto in = cost_inputs_from_json(doc.at("inputs"));
    const auto r = combine_dual_costs(in);
    const double shift = r[0].terms[1].log2 + 0.5 * *in.delta_log2 - r[3].terms[1].log2;
    ok = r[2].log2_total <= r[1].log2_total + 1e-12 && std::fabs(shift) <= 1e-12;
    return "improved-qram " + fmt(r[2].log2_total) + " <= ps-qram " + fmt(r[1].log2_total);
  });

  s.run("cost/delta_w_product", [&](bool& ok) {
    LatticeBasis z = basis_from_columns({{1, 0}, {0, 1}});
    GaussianParams gp;
    gp.sigma = 1.0;
    gp.box_exp = 3;
    const auto dw = measured_delta_and_w(KleinConfig::make(z, gp));
    ok = dw.product() >= 0.5 && dw.product() <= 2.0;
    return "w * Delta = " + fmt(dw.product());
  });

  return s.results;
}

}  // namespace dgs
