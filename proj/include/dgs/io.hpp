#pragma once

#include <json.hpp>

#include <string>

#include "dgs/attacks.hpp"
#include "dgs/cost.hpp"
#include "dgs/gaussian.hpp"
#include "dgs/lattice.hpp"
#include "dgs/qsim.hpp"

namespace dgs {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

std::string format_double(double v);  // %.17g

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
// Rejects documents whose schema_version is absent or different.
void check_schema(const Json& doc);

std::int64_t int_from_json(const Json& v);
IntVector int_vector_from_json(const Json& v);
IntMatrix int_matrix_from_json(const Json& rows);
Json int_vector_to_json(const IntVector& v);
Json int_matrix_to_json(const IntMatrix& m);
Json coords_to_json(const Coords& x);

/// {"columns": [[...], ...]} with integer or "p/q" entries, or {"qary": {"a", "q", "kind"}}.
LatticeBasis basis_from_json(const Json& v);
Json basis_to_json(const LatticeBasis& b);

GaussianParams gaussian_params_from_json(const Json& v);
Json gaussian_params_to_json(const GaussianParams& p);

LweInstance lwe_from_json(const Json& v);
Json lwe_to_json(const LweInstance& inst);
SisInstance sis_from_json(const Json& v);
Json sis_to_json(const SisInstance& inst);
AttackParams attack_params_from_json(const Json& v, std::size_t m);
Json attack_params_to_json(const AttackParams& p);

CostInputs cost_inputs_from_json(const Json& v);
Json cost_inputs_to_json(const CostInputs& in);
Json cost_report_to_json(const CostReport& r);

Json ledger_to_json(const QueryLedger& l);

}  // namespace dgs
