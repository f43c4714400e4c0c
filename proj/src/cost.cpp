#include "dgs/cost.hpp"

#include <algorithm>
#include <cmath>

namespace dgs {

namespace {

double need(const std::optional<double>& v, const char* field) {
  if (!v) fail(ErrorKind::MissingInput, std::string("missing cost input: ") + field);
  return *v;
}

CostReport build(std::string formula, std::vector<CostTerm> terms) {
  CostReport r;
  r.formula = std::move(formula);
  std::vector<double> xs;
  for (const auto& t : terms) xs.push_back(t.log2);
  r.log2_total = log2_sum_exp(xs);
  r.dominant = std::max_element(terms.begin(), terms.end(), [](const CostTerm& a, const CostTerm& b) {
                 return a.log2 < b.log2;
               })->name;
  r.terms = std::move(terms);
  return r;
}

}  // namespace

void CostInputs::validate() const {
  for (const auto* v : {&t_bkz, &t_qbkz, &t_sample, &t_qsample, &n_samples, &neg_log2_p, &delta_log2,
                        &q_pow_nguess_half})
    if (*v && !std::isfinite(**v)) fail(ErrorKind::InvalidInput, "cost inputs must be finite");
  if (!std::isfinite(poly_slack)) fail(ErrorKind::InvalidInput, "poly_slack must be finite");
  if (neg_log2_p && *neg_log2_p < 0) fail(ErrorKind::InvalidInput, "-log2 p must be non-negative");
}

long CostReport::rounded() const { return std::lround(log2_total); }

double log2_sum_exp(const std::vector<double>& xs) {
  if (xs.empty()) return kNegInf;
  const double mx = *std::max_element(xs.begin(), xs.end());
  if (std::isinf(mx)) return mx;
  CompensatedSum s;
  for (double x : xs) s.add(std::exp2(x - mx));
  return mx + std::log2(s.value());
}

std::vector<CostReport> combine_dual_costs(const CostInputs& in) {
  in.validate();
  const double bkz = need(in.t_bkz, "t_bkz");
  const double n = need(in.n_samples, "n_samples");
  const double d = need(in.delta_log2, "delta_log2");
  const double qh = need(in.q_pow_nguess_half, "q_pow_nguess_half");
  const double slack = in.poly_slack;
  std::vector<CostReport> out;
  out.push_back(build("ps-no-qram", {{"reduction", bkz}, {"distinguisher", -d + n / 2 + qh + slack}}));
  out.push_back(build("ps-qram", {{"reduction", bkz}, {"sampling", -d + n + slack}, {"search", n / 2 + qh}}));
  out.push_back(build("improved-qram", {{"reduction", bkz}, {"sampling", -d / 2 + n + slack}, {"search", n / 2 + qh}}));
  out.push_back(build("improved-no-qram", {{"reduction", bkz}, {"distinguisher", -d / 2 + n / 2 + qh + slack}}));
  return out;
}

CostReport combine_sis_cost(const CostInputs& in) {
  in.validate();
  const double bkz = need(in.t_qbkz, "t_qbkz");
  const double qs = need(in.t_qsample, "t_qsample");
  const double p = need(in.neg_log2_p, "neg_log2_p");
  return build("sis-quantum", {{"reduction", bkz}, {"sampling", qs + p / 2 + in.poly_slack}});
}

CostReport combine_classical_sis_cost(const CostInputs& in) {
  in.validate();
  const double bkz = need(in.t_bkz, "t_bkz");
  const double s = need(in.t_sample, "t_sample");
  const double n = need(in.n_samples, "n_samples");
  return build("sis-classical", {{"reduction", bkz}, {"sampling", s + n + in.poly_slack}});
}

DeltaW measured_delta_and_w(const KleinConfig& cfg, std::uint64_t budget) {
  const auto h = cfg.half_width();
  const double log_box = log_rho_lattice_box(cfg.basis, cfg.params, CoeffBox(cfg.dim(), {-h, h}), budget);
  double log_prod = 0.0;
  for (double v : cfg.log_centered_mass) log_prod += v;
  DeltaW r;
  r.delta = std::exp(log_box - log_prod);
  r.w = w_bound(cfg, false, budget).w;
  return r;
}

}  // namespace dgs
