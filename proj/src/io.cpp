#include "dgs/io.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace dgs {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingInput, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorKind::InvalidInput, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidInput, "cannot write " + path);
    out << content;
    if (!out) fail(ErrorKind::InvalidInput, "write failed for " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) fail(ErrorKind::InvalidInput, "cannot move output to " + path);
}

void check_schema(const Json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version"))
    fail(ErrorKind::InvalidInput, "document has no schema_version");
  if (doc.at("schema_version") != kSchemaVersion)
    fail(ErrorKind::InvalidInput, "unsupported schema_version " + doc.at("schema_version").dump());
}

std::int64_t int_from_json(const Json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::size_t pos = 0;
    std::int64_t x = 0;
    try {
      x = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == s.size() && pos > 0) return x;
  }
  fail(ErrorKind::InvalidInput, "expected an integer, got " + v.dump());
}

IntVector int_vector_from_json(const Json& v) {
  if (!v.is_array()) fail(ErrorKind::InvalidInput, "expected an integer array");
  IntVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = int_from_json(v[i]);
  return out;
}

IntMatrix int_matrix_from_json(const Json& rows) {
  if (!rows.is_array() || rows.empty()) fail(ErrorKind::InvalidInput, "expected a non-empty matrix");
  const std::size_t cols = rows[0].size();
  IntMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != cols) fail(ErrorKind::InvalidInput, "ragged matrix");
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = int_from_json(rows[i][j]);
  }
  return m;
}

Json int_vector_to_json(const IntVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json int_matrix_to_json(const IntMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(int_vector_to_json(m.row(i).transpose()));
  return out;
}

Json coords_to_json(const Coords& x) {
  Json out = Json::array();
  for (auto v : x) out.push_back(v);
  return out;
}

namespace {

Rational rational_from_json(const Json& v) {
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_string()) {
    try {
      return Rational(v.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  fail(ErrorKind::InvalidInput, "expected an integer or p/q string, got " + v.dump());
}

QaryKind qary_kind_from_string(const std::string& s) {
  if (s == "primal") return QaryKind::primal;
  if (s == "kernel") return QaryKind::kernel;
  fail(ErrorKind::InvalidInput, "unknown q-ary kind " + s);
}

template <class T>
T get_or(const Json& v, const char* key, T fallback) {
  return v.contains(key) ? v.at(key).get<T>() : fallback;
}

double norm_from_json(const Json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    fail(ErrorKind::InvalidInput, "unknown norm " + s);
  }
  return v.get<double>();
}

}  // namespace

LatticeBasis basis_from_json(const Json& v) {
  try {
    if (v.contains("qary")) {
      const auto& q = v.at("qary");
      return qary_basis(int_matrix_from_json(q.at("a")), int_from_json(q.at("q")),
                        qary_kind_from_string(get_or<std::string>(q, "kind", "kernel")))
          .basis;
    }
    const auto& cols = v.at("columns");
    if (!cols.is_array() || cols.empty()) fail(ErrorKind::InvalidInput, "basis needs columns");
    const std::size_t rows = cols[0].size();
    RationalMatrix m(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j].size() != rows) fail(ErrorKind::InvalidInput, "ragged basis columns");
      for (std::size_t i = 0; i < rows; ++i) m(i, j) = rational_from_json(cols[j][i]);
    }
    return gram_schmidt_qr(m);
  } catch (const Json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("basis: ") + e.what());
  }
}

Json basis_to_json(const LatticeBasis& b) {
  Json cols = Json::array();
  const auto& c = b.columns();
  for (std::size_t j = 0; j < c.cols(); ++j) {
    Json col = Json::array();
    for (std::size_t i = 0; i < c.rows(); ++i) col.push_back(c(i, j).str());
    cols.push_back(col);
  }
  Json gs = Json::array();
  for (double g : b.gs_norms()) gs.push_back(g);
  return Json{{"columns", cols}, {"gs_norms", gs}};
}

GaussianParams gaussian_params_from_json(const Json& v) {
  try {
    GaussianParams p;
    p.sigma = v.at("sigma").get<double>();
    if (v.contains("center")) p.center = v.at("center").get<std::vector<double>>();
    p.box_exp = get_or<int>(v, "box_exp", p.box_exp);
    p.precision = get_or<int>(v, "precision", p.precision);
    return p;
  } catch (const Json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("gaussian parameters: ") + e.what());
  }
}

Json gaussian_params_to_json(const GaussianParams& p) {
  return Json{{"sigma", p.sigma}, {"center", p.center}, {"box_exp", p.box_exp}, {"precision", p.precision}};
}

LweInstance lwe_from_json(const Json& v) {
  try {
    LweInstance inst;
    inst.a = int_matrix_from_json(v.at("a"));
    inst.b = int_vector_from_json(v.at("b"));
    inst.secret = int_vector_from_json(v.at("secret"));
    inst.error = int_vector_from_json(v.at("error"));
    inst.modulus = int_from_json(v.at("modulus"));
    inst.n_guess = v.at("n_guess").get<std::size_t>();
    inst.noise_sigma = get_or<double>(v, "noise_sigma", 0.0);
    if (!inst.consistent()) fail(ErrorKind::InvalidInput, "LWE instance violates b = A s + e mod q");
    return inst;
  } catch (const Json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("LWE instance: ") + e.what());
  }
}

Json lwe_to_json(const LweInstance& inst) {
  return Json{{"modulus", inst.modulus},       {"n_guess", inst.n_guess},
              {"noise_sigma", inst.noise_sigma}, {"a", int_matrix_to_json(inst.a)},
              {"b", int_vector_to_json(inst.b)}, {"secret", int_vector_to_json(inst.secret)},
              {"error", int_vector_to_json(inst.error)}};
}

SisInstance sis_from_json(const Json& v) {
  try {
    SisInstance inst;
    inst.a = int_matrix_from_json(v.at("a"));
    inst.modulus = int_from_json(v.at("modulus"));
    inst.norm_p = norm_from_json(v.at("norm_p"));
    inst.length_bound = v.at("length_bound").get<double>();
    inst.validate();
    return inst;
  } catch (const Json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("SIS instance: ") + e.what());
  }
}

Json sis_to_json(const SisInstance& inst) {
  Json norm = std::isinf(inst.norm_p) ? Json("inf") : Json(inst.norm_p);
  return Json{{"modulus", inst.modulus}, {"norm_p", norm}, {"length_bound", inst.length_bound},
              {"a", int_matrix_to_json(inst.a)}};
}

AttackParams attack_params_from_json(const Json& v, std::size_t m) {
  try {
    AttackParams p = AttackParams::make(get_or<double>(v, "sigma", 1.0), m);
    p.n_samples = get_or<std::size_t>(v, "n_samples", p.n_samples);
    p.eps = get_or<double>(v, "eps", p.eps);
    p.delta = get_or<double>(v, "delta", p.delta);
    p.eta1 = get_or<double>(v, "eta1", p.eta1);
    p.eta2 = get_or<double>(v, "eta2", p.eta2);
    p.eta = get_or<double>(v, "eta", p.delta / 100);
    p.validate(m);
    return p;
  } catch (const Json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("attack parameters: ") + e.what());
  }
}

Json attack_params_to_json(const AttackParams& p) {
  return Json{{"sigma", p.sigma}, {"tau", p.tau},   {"n_samples", p.n_samples}, {"eps", p.eps},
              {"delta", p.delta}, {"eta1", p.eta1}, {"eta2", p.eta2},           {"eta", p.eta}};
}

namespace {

const std::vector<std::pair<const char*, std::optional<double> CostInputs::*>>& cost_fields() {
  static const std::vector<std::pair<const char*, std::optional<double> CostInputs::*>> f = {
      {"t_bkz", &CostInputs::t_bkz},
      {"t_qbkz", &CostInputs::t_qbkz},
      {"t_sample", &CostInputs::t_sample},
      {"t_qsample", &CostInputs::t_qsample},
      {"n_samples", &CostInputs::n_samples},
      {"neg_log2_p", &CostInputs::neg_log2_p},
      {"delta_log2", &CostInputs::delta_log2},
      {"q_pow_nguess_half", &CostInputs::q_pow_nguess_half},
  };
  return f;
}

}  // namespace

CostInputs cost_inputs_from_json(const Json& v) {
  try {
    CostInputs in;
    for (const auto& [name, field] : cost_fields())
      if (v.contains(name) && !v.at(name).is_null()) in.*field = v.at(name).get<double>();
    in.poly_slack = get_or<double>(v, "poly_slack", 0.0);
    in.validate();
    return in;
  } catch (const Json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("cost inputs: ") + e.what());
  }
}

Json cost_inputs_to_json(const CostInputs& in) {
  Json out = Json::object();
  for (const auto& [name, field] : cost_fields())
    if (in.*field) out[name] = *(in.*field);
  out["poly_slack"] = in.poly_slack;
  return out;
}

Json cost_report_to_json(const CostReport& r) {
  Json terms = Json::array();
  for (const auto& t : r.terms) terms.push_back(Json{{"name", t.name}, {"log2", t.log2}});
  return Json{{"formula", r.formula}, {"log2_total", r.log2_total}, {"rounded", r.rounded()},
              {"dominant", r.dominant}, {"rounding", r.rounding}, {"terms", terms}};
}

Json ledger_to_json(const QueryLedger& l) {
  Json out = Json::object();
  for (const auto& [k, v] : l.counts()) out[k] = v;
  return out;
}

}  // namespace dgs
