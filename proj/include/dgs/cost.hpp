#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dgs/samplers.hpp"

namespace dgs {

/// All quantities are log2 values.
struct CostInputs {
  std::optional<double> t_bkz;
  std::optional<double> t_qbkz;
  std::optional<double> t_sample;
  std::optional<double> t_qsample;
  std::optional<double> n_samples;
  std::optional<double> neg_log2_p;
  std::optional<double> delta_log2;
  std::optional<double> q_pow_nguess_half;
  double poly_slack = 0.0;

  void validate() const;
};

struct CostTerm {
  std::string name;
  double log2 = 0.0;
};

struct CostReport {
  std::string formula;
  double log2_total = 0.0;
  std::vector<CostTerm> terms;
  std::string dominant;
  std::string rounding = "nearest";

  long rounded() const;
};

/// log2(sum_i 2^{x_i}), exact up to rounding of the largest term.
double log2_sum_exp(const std::vector<double>& xs);

/// ps-no-qram, ps-qram, improved-qram, improved-no-qram, in that order.
std::vector<CostReport> combine_dual_costs(const CostInputs& in);
/// T_Q-BKZ + sqrt(T_sample / p).
CostReport combine_sis_cost(const CostInputs& in);
/// T_BKZ + N T_sample.
CostReport combine_classical_sis_cost(const CostInputs& in);

struct DeltaW {
  double delta = 0.0;  // rho_sigma(L cap box) / prod_i rho_{sigma_i}(truncated Z)
  double w = 1.0;
  double product() const { return delta * w; }
};

DeltaW measured_delta_and_w(const KleinConfig& cfg, std::uint64_t budget = kDefaultBudget);

}  // namespace dgs
