#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "dgs/attacks.hpp"
#include "dgs/cost.hpp"
#include "dgs/io.hpp"
#include "dgs/qsim.hpp"
#include "dgs/samplers.hpp"
#include "dgs/verify.hpp"

using namespace dgs;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;

struct RunConfig {
  std::string command;
  std::string instance;
  std::string fixtures;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
  std::optional<int> nu;
  std::optional<int> box_exp;
  std::size_t trials = 1;
  unsigned parallel = 1;
  std::string method = "rejection";
  std::string attack = "all";
  std::string mode = "classical";
  bool table = false;

  Json to_json() const {
    Json j{{"command", command}, {"seed", seed}, {"format", format}, {"trials", trials}, {"parallel", parallel}};
    if (!instance.empty()) j["instance"] = instance;
    if (!fixtures.empty()) j["fixtures"] = fixtures;
    if (nu) j["nu"] = *nu;
    if (box_exp) j["box_exp"] = *box_exp;
    if (command == "sample") j["method"] = method;
    if (command == "attack-lwe") j["attack"] = attack;
    if (command == "solve-sis") j["mode"] = mode;
    if (command == "mass") j["table"] = table;
    return j;
  }
};

struct Output {
  Json doc;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  std::string csv_raw;  // used instead of rows when set
};

template <class R, class F>
std::vector<R> run_trials(std::size_t n, unsigned parallel, F&& body) {
  std::vector<R> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        out[i] = body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(parallel, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

Json load_instance(const RunConfig& cfg) {
  if (cfg.instance.empty()) fail(ErrorKind::MissingInput, "--instance is required");
  Json doc = read_json_file(cfg.instance);
  check_schema(doc);
  return doc;
}

GaussianParams resolved_params(const RunConfig& cfg, const Json& doc) {
  GaussianParams p = gaussian_params_from_json(doc);
  if (cfg.nu) p.precision = *cfg.nu;
  if (cfg.box_exp) p.box_exp = *cfg.box_exp;
  p.validate();
  return p;
}

Json header(const RunConfig& cfg) {
  return Json{{"schema_version", kSchemaVersion}, {"config", cfg.to_json()}};
}

std::string num(double v) { return format_double(v); }

std::string coords_str(const Coords& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? " " : "") + std::to_string(x[i]);
  return s;
}

std::string vec_str(const IntVector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v(i));
  return s;
}

Output cmd_sample(const RunConfig& cfg) {
  const Json inst = load_instance(cfg);
  const LatticeBasis basis = basis_from_json(inst.at("basis"));
  const GaussianParams params = resolved_params(cfg, inst);
  const KleinConfig kc = KleinConfig::make(basis, params);
  const Philox root(cfg.seed);

  struct Row {
    Coords x;
    Eigen::VectorXd point;
    std::uint64_t work = 0;
  };
  std::vector<Row> rows;
  Json extra = Json::object();
  if (cfg.method == "quantum") {
    QueryLedger ledger;
    Philox rng = root.substream(0);
    const auto pipe = run_gaussian_pipeline(kc, params.precision, QaaOptions{}, ledger, rng);
    rows = run_trials<Row>(cfg.trials, cfg.parallel, [&](std::size_t t) {
      Philox r = root.substream(t + 1);
      const Coords x = pipe.qaa.good_state.sample(r);
      return Row{x, basis.point(x), pipe.qaa.calls};
    });
    extra = Json{{"w", pipe.w.w}, {"tv_to_lattice", pipe.tv_to_lattice}, {"tv_bound", pipe.tv_bound},
                 {"ledger", ledger_to_json(ledger)}};
  } else if (cfg.method == "rejection" || cfg.method == "klein" || cfg.method == "mcmc") {
    const std::uint64_t burn = cfg.method == "mcmc" ? mcmc_burn_in(delta_ratio(kc), params.precision) : 0;
    if (cfg.method == "mcmc") extra["burn_in"] = burn;
    rows = run_trials<Row>(cfg.trials, cfg.parallel, [&](std::size_t t) {
      Philox r = root.substream(t);
      if (cfg.method == "klein") {
        auto d = klein_sample(kc, r);
        return Row{d.x, d.point, 1};
      }
      if (cfg.method == "mcmc") {
        auto d = mcmc_sample(kc, burn, r);
        return Row{d.draw.x, d.draw.point, d.steps};
      }
      auto d = rejection_sample(kc, r);
      return Row{d.draw.x, d.draw.point, d.stats.trials};
    });
  } else {
    fail(ErrorKind::InvalidInput, "unknown sampling method " + cfg.method);
  }

  Output o;
  o.doc = header(cfg);
  o.doc["params"] = gaussian_params_to_json(params);
  o.doc["basis"] = basis_to_json(basis);
  o.doc["method"] = cfg.method;
  o.doc["summary"] = extra;
  Json samples = Json::array();
  o.csv_header = {"trial", "coords", "point", "work"};
  for (std::size_t t = 0; t < rows.size(); ++t) {
    Json pt = Json::array();
    std::string ps;
    for (Eigen::Index i = 0; i < rows[t].point.size(); ++i) {
      pt.push_back(rows[t].point(i));
      ps += (i ? " " : "") + num(rows[t].point(i));
    }
    samples.push_back(Json{{"trial", t}, {"coords", coords_to_json(rows[t].x)}, {"point", pt}, {"work", rows[t].work}});
    o.csv_rows.push_back({std::to_string(t), coords_str(rows[t].x), ps, std::to_string(rows[t].work)});
  }
  o.doc["samples"] = samples;
  return o;
}

Json check_json(const InequalityCheck& c) {
  return Json{{"log_lhs", c.log_lhs}, {"log_rhs", c.log_rhs}, {"holds", c.holds}};
}

Output cmd_mass(const RunConfig& cfg) {
  const Json inst = load_instance(cfg);
  const LatticeBasis basis = basis_from_json(inst.at("basis"));
  const GaussianParams params = resolved_params(cfg, inst);
  const KleinConfig kc = KleinConfig::make(basis, params);
  const auto wb = w_bound(kc, true);
  const auto tail = lattice_tail(kc);
  const auto dw = measured_delta_and_w(kc);
  const auto tb = tail_bounds_check(basis, params);

  Output o;
  o.doc = header(cfg);
  o.doc["params"] = gaussian_params_to_json(params);
  o.doc["basis"] = basis_to_json(basis);
  o.doc["omega_size"] = kc.omega_size();
  o.doc["c_const"] = kc.c_const();
  o.doc["mass_condition"] = params.mass_condition();
  o.doc["log_rho_omega"] = wb.log_rho_omega;
  o.doc["log_rho_lattice"] = tail.log_rho_lattice;
  o.doc["w"] = wb.w;
  o.doc["max_target_over_klein"] = *wb.max_ratio;
  o.doc["delta"] = dw.delta;
  o.doc["w_times_delta"] = dw.product();
  o.doc["tv_truncation"] = tail.tv_exact;
  o.doc["rho_outside"] = tail.rho_outside();
  o.doc["omega_contains_box"] = omega_contains_box(kc);
  o.doc["tail_bounds"] = Json{{"integer_mass", check_json(tb.integer_mass)},
                              {"integer_tail", check_json(tb.integer_tail)},
                              {"lattice_tail", check_json(tb.lattice_tail)}};
  const auto target = target_pmf_exact(kc);
  if (cfg.table) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < target.size(); ++i)
      rows.push_back(Json{{"coords", coords_to_json(target.coords[i])}, {"mass", target.mass[i]}});
    o.doc["table"] = rows;
  }
  o.csv_raw = target.to_csv();
  return o;
}

struct AttackRow {
  std::size_t trial = 0;
  std::string attack;
  bool success = false;
  std::uint64_t calls = 0;
  double score_truth = 0, score_runner_up = 0;
  bool hypothesis_ok = false;
  std::uint64_t resampled = 0;
};

Output cmd_attack_lwe(const RunConfig& cfg) {
  const Json doc = load_instance(cfg);
  std::vector<std::string> attacks;
  if (cfg.attack == "all") attacks = {"classical", "qram", "sampler"};
  else if (cfg.attack == "classical" || cfg.attack == "qram" || cfg.attack == "sampler") attacks = {cfg.attack};
  else fail(ErrorKind::InvalidInput, "unknown attack " + cfg.attack);

  const bool generate = doc.contains("generate");
  std::optional<LweInstance> fixed;
  if (!generate) fixed = lwe_from_json(doc.at("instance"));
  const Json gen = generate ? doc.at("generate") : Json::object();
  const std::size_t m = generate ? gen.at("m").get<std::size_t>() : fixed->m();
  const AttackParams params = attack_params_from_json(doc.value("attack", Json::object()), m);
  const int dual_box = cfg.box_exp.value_or(doc.value("dual_box_exp", 6));
  const int sampler_box = doc.value("sampler_box_exp", 7);
  const int nu = cfg.nu.value_or(doc.value("precision", 8));
  const Philox root(cfg.seed);

  auto per_trial = run_trials<std::vector<AttackRow>>(cfg.trials, cfg.parallel, [&](std::size_t t) {
    Philox rng = root.substream(t);
    LweInstance inst;
    std::uint64_t resampled = 0;
    if (generate) {
      for (;;) {
        inst = gen_lwe(m, gen.at("n").get<std::size_t>(), gen.at("n_guess").get<std::size_t>(),
                       int_from_json(gen.at("q")), gen.at("noise_sigma").get<double>(), rng);
        if (check_dual_hypothesis(inst, params).sampler_ok()) break;
        ++resampled;
      }
    } else {
      inst = *fixed;
    }
    const auto truth = index_from_guess(inst.s_guess(), inst.modulus);
    std::vector<IntVector> w;
    std::vector<AttackRow> rows;
    for (const auto& name : attacks) {
      DualAttackResult r;
      std::uint64_t calls = 0;
      if (name != "sampler" && w.empty()) w = sample_dual_vectors(inst, params.sigma, params.n_samples, dual_box, rng);
      if (name == "classical") {
        r = classical_dual_attack(inst, w, params);
        calls = r.ledger.get(ledger_keys::kTableLookup);
      } else if (name == "qram") {
        r = quantum_dual_attack_qram(inst, w, params, rng);
        calls = r.ledger.get(ledger_keys::kTableLookup);
      } else {
        const FourierDualState source(inst.a_dual(), inst.modulus, params.sigma, sampler_box, nu);
        r = quantum_dual_attack_sampler(inst, params, source, rng);
        calls = r.ledger.get(ledger_keys::kGaussianState);
      }
      rows.push_back({t, name, r.guess && r.guess_index == truth, calls, r.score_truth, r.score_runner_up,
                      r.hypothesis_ok, resampled});
    }
    return rows;
  });

  Output o;
  o.doc = header(cfg);
  o.doc["attack_params"] = attack_params_to_json(params);
  o.doc["basis"] = generate ? Json("kernel lattice of A_dual, regenerated per trial") : basis_to_json(qary_basis(fixed->a_dual(), fixed->modulus, QaryKind::kernel).basis);
  if (fixed) o.doc["instance"] = lwe_to_json(*fixed);
  Json trials = Json::array();
  std::map<std::string, std::pair<std::size_t, std::size_t>> rate;
  o.csv_header = {"trial", "attack", "success", "calls", "score_truth", "score_runner_up", "hypothesis_ok", "resampled"};
  for (const auto& rows : per_trial)
    for (const auto& r : rows) {
      trials.push_back(Json{{"trial", r.trial}, {"attack", r.attack}, {"success", r.success}, {"calls", r.calls},
                            {"score_truth", r.score_truth}, {"score_runner_up", r.score_runner_up},
                            {"hypothesis_ok", r.hypothesis_ok}, {"resampled", r.resampled}});
      o.csv_rows.push_back({std::to_string(r.trial), r.attack, r.success ? "1" : "0", std::to_string(r.calls),
                            num(r.score_truth), num(r.score_runner_up), r.hypothesis_ok ? "1" : "0",
                            std::to_string(r.resampled)});
      rate[r.attack].first += r.success;
      rate[r.attack].second += 1;
    }
  Json summary = Json::object();
  for (const auto& [k, v] : rate) summary[k] = Json{{"successes", v.first}, {"trials", v.second}};
  o.doc["summary"] = summary;
  o.doc["trials"] = trials;
  return o;
}

Output cmd_solve_sis(const RunConfig& cfg) {
  const Json doc = load_instance(cfg);
  const SisInstance inst = sis_from_json(doc.at("instance"));
  const GaussianParams params = resolved_params(cfg, doc);
  const QaryLattice lat = sis_lattice(inst);
  const KleinConfig kc = KleinConfig::make(lat.basis, params);
  SisMode mode;
  if (cfg.mode == "classical") mode = SisMode::classical;
  else if (cfg.mode == "quantum") mode = SisMode::quantum;
  else fail(ErrorKind::InvalidInput, "unknown mode " + cfg.mode);
  const Philox root(cfg.seed);
  const auto results = run_trials<SisResult>(cfg.trials, cfg.parallel, [&](std::size_t t) {
    Philox rng = root.substream(t);
    return solve_sis(inst, kc, mode, rng, params.precision);
  });

  Output o;
  o.doc = header(cfg);
  o.doc["params"] = gaussian_params_to_json(params);
  o.doc["instance"] = sis_to_json(inst);
  o.doc["basis"] = basis_to_json(lat.basis);
  const double p = results.empty() ? sis_success_probability(inst, kc) : results.front().p_exact;
  double mean = 0;
  Json trials = Json::array();
  o.csv_header = {"trial", "x", "valid", "repetitions", "state_preps", "klein_trials"};
  for (std::size_t t = 0; t < results.size(); ++t) {
    const auto& r = results[t];
    const bool valid = sis_solution_valid(inst, r.x);
    mean += static_cast<double>(r.repetitions);
    trials.push_back(Json{{"trial", t}, {"x", int_vector_to_json(r.x)}, {"valid", valid},
                          {"repetitions", r.repetitions}, {"state_preps", r.state_preps},
                          {"klein_trials", r.klein_trials}, {"ledger", ledger_to_json(r.ledger)}});
    o.csv_rows.push_back({std::to_string(t), vec_str(r.x), valid ? "1" : "0", std::to_string(r.repetitions),
                          std::to_string(r.state_preps), std::to_string(r.klein_trials)});
  }
  if (!results.empty()) mean /= static_cast<double>(results.size());
  o.doc["summary"] = Json{{"p_exact", p},
                          {"mean_repetitions", mean},
                          {"expected_classical", 1.0 / p},
                          {"expected_quantum", (kPi / 4) / std::sqrt(p)}};
  o.doc["trials"] = trials;
  return o;
}

Output cmd_estimate(const RunConfig& cfg) {
  const Json doc = load_instance(cfg);
  Output o;
  o.doc = header(cfg);
  o.doc["basis"] = nullptr;
  o.csv_header = {"label", "table", "formula", "log2_total", "rounded", "paper", "diff", "within_tolerance"};
  auto run_one = [&](const std::string& label, const std::string& table, const CostInputs& in,
                     const Json& paper, long tol) {
    std::vector<CostReport> reports;
    if (table == "sis-quantum") reports = {combine_sis_cost(in)};
    else if (table == "sis-classical") reports = {combine_classical_sis_cost(in)};
    else if (table == "dual") reports = combine_dual_costs(in);
    else fail(ErrorKind::InvalidInput, "unknown cost table " + table);
    Json out = Json::array();
    for (const auto& r : reports) {
      Json j = cost_report_to_json(r);
      std::string paper_s, diff_s, ok_s;
      if (!paper.is_null()) {
        const long diff = r.rounded() - paper.get<long>();
        j["paper"] = paper;
        j["diff"] = diff;
        j["within_tolerance"] = std::labs(diff) <= tol;
        paper_s = std::to_string(paper.get<long>());
        diff_s = std::to_string(diff);
        ok_s = std::labs(diff) <= tol ? "1" : "0";
      }
      o.csv_rows.push_back({label, table, r.formula, num(r.log2_total), std::to_string(r.rounded()), paper_s, diff_s, ok_s});
      out.push_back(j);
    }
    return Json{{"label", label}, {"table", table}, {"inputs", cost_inputs_to_json(in)}, {"reports", out}};
  };
  Json rows = Json::array();
  if (doc.contains("rows")) {
    for (const auto& row : doc.at("rows"))
      rows.push_back(run_one(row.value("label", ""), row.at("table").get<std::string>(),
                             cost_inputs_from_json(row.at("inputs")), row.value("paper_log2_attack", Json()),
                             row.value("tolerance", 0L)));
  } else {
    rows.push_back(run_one(doc.value("label", ""), doc.value("table", "dual"),
                           cost_inputs_from_json(doc.at("inputs")), Json(), 0));
  }
  o.doc["rows"] = rows;
  return o;
}

Output cmd_verify(const RunConfig& cfg, bool& all_pass) {
  const auto results = run_verify_suite(cfg.fixtures, cfg.seed);
  Output o;
  o.doc = header(cfg);
  o.doc["basis"] = nullptr;
  Json checks = Json::array();
  o.csv_header = {"check", "passed", "detail"};
  all_pass = true;
  for (const auto& r : results) {
    checks.push_back(Json{{"check", r.key}, {"passed", r.passed}, {"detail", r.detail}});
    o.csv_rows.push_back({r.key, r.passed ? "1" : "0", r.detail});
    all_pass = all_pass && r.passed;
    std::fprintf(stderr, "%-40s %s  %s\n", r.key.c_str(), r.passed ? "PASS" : "FAIL", r.detail.c_str());
  }
  o.doc["checks"] = checks;
  o.doc["all_passed"] = all_pass;
  return o;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render(const Output& o, const std::string& format) {
  if (format == "json") return o.doc.dump(2) + "\n";
  std::ostringstream s;
  Json meta = o.doc;
  for (const char* bulky : {"samples", "trials", "rows", "checks", "table"}) meta.erase(bulky);
  s << "# " << meta.dump() << "\n";
  if (!o.csv_raw.empty() && o.csv_rows.empty()) {
    s << o.csv_raw;
    return s.str();
  }
  for (std::size_t i = 0; i < o.csv_header.size(); ++i) s << (i ? "," : "") << o.csv_header[i];
  s << "\n";
  for (const auto& row : o.csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << csv_escape(row[i]);
    s << "\n";
  }
  return s.str();
}

int report_error(ErrorKind kind, const std::string& what, int code) {
  const Json e{{"schema_version", kSchemaVersion},
               {"error", Json{{"kind", to_string(kind)}, {"message", what}, {"exit_code", code}}}};
  std::cerr << e.dump() << "\n";
  return code;
}

bool is_config_error(ErrorKind k) {
  return k == ErrorKind::MissingInput || k == ErrorKind::InvalidInput || k == ErrorKind::ParamConstraint;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Gaussian sampling, dual attacks and SIS cost toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub, bool needs_instance) {
    if (needs_instance) sub->add_option("--instance,instance", cfg.instance, "Instance JSON file")->required();
    sub->add_option("--seed", cfg.seed, "64-bit seed");
    sub->add_option("--out", cfg.out, "Output file (stdout if absent)");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--nu", cfg.nu, "Precision nu");
    sub->add_option("--box-exp", cfg.box_exp, "Box exponent M");
    sub->add_option("--trials", cfg.trials, "Number of trials");
    sub->add_option("--parallel", cfg.parallel, "Worker threads");
  };
  auto* sample = app.add_subcommand("sample", "Draw lattice Gaussian samples");
  common(sample, true);
  sample->add_option("--method", cfg.method, "rejection, klein, mcmc or quantum")
      ->check(CLI::IsMember({"rejection", "klein", "mcmc", "quantum"}));
  auto* mass = app.add_subcommand("mass", "Exact masses, w, Delta and tail bounds");
  common(mass, true);
  mass->add_flag("--table", cfg.table, "Include the exact target table");
  auto* attack = app.add_subcommand("attack-lwe", "Run dual attacks on LWE instances");
  common(attack, true);
  attack->add_option("--attack", cfg.attack, "classical, qram, sampler or all");
  auto* sis = app.add_subcommand("solve-sis", "Sample short SIS solutions");
  common(sis, true);
  sis->add_option("--mode", cfg.mode, "classical or quantum");
  auto* estimate = app.add_subcommand("estimate", "Cost formulas and table reproduction");
  common(estimate, true);
  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  common(verify, false);
  verify->add_option("--fixtures", cfg.fixtures, "Fixture directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(ErrorKind::InvalidInput, e.what(), kExitConfig);
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (cfg.trials == 0) return report_error(ErrorKind::InvalidInput, "--trials must be positive", kExitConfig);

  try {
    Output o;
    bool ok = true;
    if (cfg.command == "sample") o = cmd_sample(cfg);
    else if (cfg.command == "mass") o = cmd_mass(cfg);
    else if (cfg.command == "attack-lwe") o = cmd_attack_lwe(cfg);
    else if (cfg.command == "solve-sis") o = cmd_solve_sis(cfg);
    else if (cfg.command == "estimate") o = cmd_estimate(cfg);
    else o = cmd_verify(cfg, ok);
    const std::string text = render(o, cfg.format);
    if (cfg.out.empty()) std::cout << text;
    else write_text_file(cfg.out, text);
    return ok ? 0 : kExitCompute;
  } catch (const Error& e) {
    return report_error(e.kind(), e.what(), is_config_error(e.kind()) ? kExitConfig : kExitCompute);
  } catch (const Json::exception& e) {
    return report_error(ErrorKind::InvalidInput, e.what(), kExitConfig);
  } catch (const std::exception& e) {
    return report_error(ErrorKind::InvalidInput, e.what(), kExitCompute);
  }
}
