#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "dgs/attacks.hpp"
#include "dgs/cost.hpp"
#include "dgs/gaussian.hpp"
#include "dgs/io.hpp"
#include "dgs/qsim.hpp"
#include "dgs/samplers.hpp"
#include "dgs/verify.hpp"

namespace py = pybind11;
using namespace dgs;

namespace {

KleinConfig make_config(const std::vector<std::vector<std::int64_t>>& columns, double sigma,
                        std::vector<double> center, int box_exp, int precision) {
  GaussianParams p;
  p.sigma = sigma;
  p.center = std::move(center);
  p.box_exp = box_exp;
  p.precision = precision;
  return KleinConfig::make(basis_from_columns(columns), p);
}

CostInputs inputs_from_dict(const py::dict& d) {
  return cost_inputs_from_json(Json::parse(py::str(py::module_::import("json").attr("dumps")(d)).cast<std::string>()));
}

py::dict report_dict(const CostReport& r) {
  py::dict d;
  d["formula"] = r.formula;
  d["log2_total"] = r.log2_total;
  d["rounded"] = r.rounded();
  d["dominant"] = r.dominant;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lattice Gaussian sampling, simulated quantum subroutines, dual attacks and cost formulas";

  static py::exception<Error> dgs_error(m, "DgsError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      dgs_error((std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("rho_integers", &rho_integers, py::arg("sigma"), py::arg("center") = 0.0);
  m.def("log_gaussian_sum", &log_gaussian_sum, py::arg("sigma"), py::arg("center"), py::arg("lo"), py::arg("hi"));

  m.def(
      "sample",
      [](const std::vector<std::vector<std::int64_t>>& columns, double sigma, std::size_t count,
         const std::string& method, std::uint64_t seed, int box_exp, std::vector<double> center) {
        const auto cfg = make_config(columns, sigma, std::move(center), box_exp, 8);
        const Philox root(seed);
        const std::uint64_t burn = method == "mcmc" ? mcmc_burn_in(delta_ratio(cfg), 8) : 0;
        std::vector<Coords> out;
        for (std::size_t t = 0; t < count; ++t) {
          Philox rng = root.substream(t);
          if (method == "klein") out.push_back(klein_sample(cfg, rng).x);
          else if (method == "mcmc") out.push_back(mcmc_sample(cfg, burn, rng).draw.x);
          else if (method == "rejection") out.push_back(rejection_sample(cfg, rng).draw.x);
          else fail(ErrorKind::InvalidInput, "unknown method " + method);
        }
        return out;
      },
      py::arg("columns"), py::arg("sigma"), py::arg("count"), py::arg("method") = "rejection",
      py::arg("seed") = 1, py::arg("box_exp") = 2, py::arg("center") = std::vector<double>{});

  m.def(
      "target_pmf",
      [](const std::vector<std::vector<std::int64_t>>& columns, double sigma, int box_exp,
         std::vector<double> center) {
        const auto t = target_pmf_exact(make_config(columns, sigma, std::move(center), box_exp, 8));
        std::vector<std::pair<Coords, double>> out;
        for (std::size_t i = 0; i < t.size(); ++i) out.emplace_back(t.coords[i], t.mass[i]);
        return out;
      },
      py::arg("columns"), py::arg("sigma"), py::arg("box_exp") = 2, py::arg("center") = std::vector<double>{});

  m.def(
      "mass_summary",
      [](const std::vector<std::vector<std::int64_t>>& columns, double sigma, int box_exp) {
        const auto cfg = make_config(columns, sigma, {}, box_exp, 8);
        const auto tail = lattice_tail(cfg);
        const auto dw = measured_delta_and_w(cfg);
        py::dict d;
        d["w"] = dw.w;
        d["delta"] = dw.delta;
        d["c_const"] = cfg.c_const();
        d["tv_truncation"] = tail.tv_exact;
        d["rho_outside"] = tail.rho_outside();
        return d;
      },
      py::arg("columns"), py::arg("sigma"), py::arg("box_exp") = 2);

  m.def(
      "quantum_pipeline",
      [](const std::vector<std::vector<std::int64_t>>& columns, double sigma, int box_exp, int nu,
         std::uint64_t seed) {
        const auto cfg = make_config(columns, sigma, {}, box_exp, nu);
        QueryLedger ledger;
        Philox rng(seed);
        const auto p = run_gaussian_pipeline(cfg, nu, QaaOptions{}, ledger, rng);
        py::dict d;
        d["tv_to_lattice"] = p.tv_to_lattice;
        d["tv_bound"] = p.tv_bound;
        d["w"] = p.w.w;
        d["calls"] = p.qaa.calls;
        return d;
      },
      py::arg("columns"), py::arg("sigma"), py::arg("box_exp") = 2, py::arg("nu") = 8, py::arg("seed") = 1);

  m.def("sim_good_amplitude", &sim_good_amplitude, py::arg("p"), py::arg("k"));
  m.def(
      "mean_estimate",
      [](double true_mean, double eps, double delta, std::uint64_t seed) {
        QueryLedger ledger;
        Philox rng(seed);
        const double est = mean_estimate_from_mean(true_mean, eps, delta, ledger, rng);
        return std::make_pair(est, ledger.get(ledger_keys::kStatePrep));
      },
      py::arg("true_mean"), py::arg("eps"), py::arg("delta"), py::arg("seed") = 1);

  m.def("combine_sis_cost", [](const py::dict& d) { return report_dict(combine_sis_cost(inputs_from_dict(d))); });
  m.def("combine_classical_sis_cost",
        [](const py::dict& d) { return report_dict(combine_classical_sis_cost(inputs_from_dict(d))); });
  m.def("combine_dual_costs", [](const py::dict& d) {
    py::list out;
    for (const auto& r : combine_dual_costs(inputs_from_dict(d))) out.append(report_dict(r));
    return out;
  });

  m.def(
      "lwe_attack",
      [](const std::string& attack, std::uint64_t seed, double sigma) {
        Philox rng(seed);
        const AttackParams params = AttackParams::make(sigma, 8);
        LweInstance inst;
        do inst = gen_lwe(8, 4, 2, 17, 0.8, rng);
        while (!check_dual_hypothesis(inst, params).sampler_ok());
        DualAttackResult r;
        if (attack == "sampler") {
          r = quantum_dual_attack_sampler(inst, params, FourierDualState(inst.a_dual(), 17, sigma, 7, 8), rng);
        } else {
          const auto w = sample_dual_vectors(inst, sigma, params.n_samples, 6, rng);
          r = attack == "qram" ? quantum_dual_attack_qram(inst, w, params, rng) : classical_dual_attack(inst, w, params);
        }
        py::dict d;
        d["success"] = r.guess && r.guess_index == index_from_guess(inst.s_guess(), 17);
        d["score_truth"] = r.score_truth;
        d["score_runner_up"] = r.score_runner_up;
        return d;
      },
      py::arg("attack") = "classical", py::arg("seed") = 1, py::arg("sigma") = 1.0);

  m.def(
      "solve_sis",
      [](const std::vector<std::vector<std::int64_t>>& a_rows, std::int64_t q, double norm_p, double bound,
         double sigma, int box_exp, const std::string& mode, std::uint64_t seed) {
        SisInstance inst;
        inst.a.resize(static_cast<Eigen::Index>(a_rows.size()), static_cast<Eigen::Index>(a_rows.at(0).size()));
        for (std::size_t i = 0; i < a_rows.size(); ++i)
          for (std::size_t j = 0; j < a_rows[i].size(); ++j)
            inst.a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a_rows[i][j];
        inst.modulus = q;
        inst.norm_p = norm_p;
        inst.length_bound = bound;
        GaussianParams p;
        p.sigma = sigma;
        p.box_exp = box_exp;
        const auto cfg = KleinConfig::make(sis_lattice(inst).basis, p);
        Philox rng(seed);
        const auto r = solve_sis(inst, cfg, mode == "quantum" ? SisMode::quantum : SisMode::classical, rng);
        py::dict d;
        d["x"] = std::vector<std::int64_t>(r.x.data(), r.x.data() + r.x.size());
        d["repetitions"] = r.repetitions;
        d["p_exact"] = r.p_exact;
        d["valid"] = sis_solution_valid(inst, r.x);
        return d;
      },
      py::arg("a"), py::arg("q"), py::arg("norm_p"), py::arg("bound"), py::arg("sigma"),
      py::arg("box_exp") = 2, py::arg("mode") = "classical", py::arg("seed") = 1);

  m.def(
      "verify",
      [](const std::string& fixtures, std::uint64_t seed) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& r : run_verify_suite(fixtures, seed)) out.emplace_back(r.key, r.passed, r.detail);
        return out;
      },
      py::arg("fixtures"), py::arg("seed") = 1);
}
