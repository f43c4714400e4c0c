#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dgs/common.hpp"

namespace dgs {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static RationalMatrix from_int(const IntMatrix& m);
  static RationalMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  RationalMatrix transpose() const;
  RationalMatrix operator*(const RationalMatrix& rhs) const;
  RationalMatrix scaled(const Rational& t) const;
  std::vector<Rational> column(std::size_t j) const;

  bool is_integral() const;
  IntMatrix to_int() const;
  Eigen::MatrixXd to_double() const;

  bool operator==(const RationalMatrix& rhs) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

// Index of the first column lying in the rational span of the preceding ones.
std::optional<std::size_t> first_dependent_column(const RationalMatrix& m);
std::size_t rank(const RationalMatrix& m);
Rational determinant(const RationalMatrix& m);
RationalMatrix inverse(const RationalMatrix& m);
std::vector<Rational> solve(const RationalMatrix& a, const std::vector<Rational>& b);

/**
 * Basis B (columns b_1..b_n in R^m) with exact entries and a floating QR
 * factorisation B = Q R, R_ii > 0.
 */
class LatticeBasis {
 public:
  LatticeBasis() = default;

  const RationalMatrix& columns() const { return columns_; }
  const Eigen::MatrixXd& matrix() const { return b_; }
  const Eigen::MatrixXd& q_factor() const { return q_; }
  const Eigen::MatrixXd& r_factor() const { return r_; }
  const std::vector<double>& gs_norms() const { return gs_norms_; }
  double qr_residual() const { return qr_residual_; }
  double orthogonality_error() const { return orth_error_; }

  std::size_t ambient_dim() const { return columns_.rows(); }
  std::size_t rank() const { return columns_.cols(); }
  bool is_square() const { return ambient_dim() == rank(); }
  double min_gs_norm() const;

  Eigen::VectorXd point(const Coords& x) const;
  std::vector<Rational> exact_point(const Coords& x) const;

  double volume() const;           // product of gs_norms
  Rational exact_volume() const;   // |det B|, square bases only

  LatticeBasis scaled(const Rational& t) const;
  // Basis of the dual lattice, B^{-T}; square bases only.
  LatticeBasis dual() const;

  friend LatticeBasis gram_schmidt_qr(const RationalMatrix& b);

 private:
  RationalMatrix columns_;
  Eigen::MatrixXd b_;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd r_;
  std::vector<double> gs_norms_;
  double qr_residual_ = 0.0;
  double orth_error_ = 0.0;
};

LatticeBasis gram_schmidt_qr(const RationalMatrix& b);
LatticeBasis basis_from_columns(const std::vector<std::vector<std::int64_t>>& columns);

// Column-style Hermite normal form of a full-row-rank generator matrix:
// lower triangular, positive diagonal, 0 <= H(i,j) < H(i,i) for j < i.
IntMatrix hermite_normal_form(const IntMatrix& generators);

bool in_lattice(const LatticeBasis& basis, const std::vector<Rational>& x);

enum class QaryKind { primal, kernel };
const char* to_string(QaryKind kind);

struct QaryLattice {
  IntMatrix a;
  std::int64_t modulus = 0;
  QaryKind kind = QaryKind::primal;
  IntMatrix basis_int;
  LatticeBasis basis;

  // Exact membership by the defining congruence.
  bool contains(const IntVector& x) const;
};

// Rank of A modulo the prime p of q = p^k.
std::size_t rank_mod(const IntMatrix& a, std::int64_t q);
std::int64_t prime_of_power(std::int64_t q);

QaryLattice qary_basis(const IntMatrix& a, std::int64_t q, QaryKind kind);

// Every enumerated x in the kernel lattice has integer inner product with every
// enumerated y in (1/q) times the primal lattice.
bool dual_scale_check(const LatticeBasis& kernel, const LatticeBasis& primal, std::int64_t q,
                      int radius);
bool dual_scale_check(const QaryLattice& kernel, int radius);

struct ShortVector {
  Coords coords;
  std::vector<Rational> vector;
  Rational norm_sq;
  double norm = 0.0;
};

ShortVector shortest_vector(const LatticeBasis& basis, double radius_bound,
                            std::uint64_t budget = kDefaultBudget);
double lambda1_bruteforce(const LatticeBasis& basis, double radius_bound,
                          std::uint64_t budget = kDefaultBudget);

// Exact lambda_1 of L_q(A) by enumerating the q^rank cosets of qZ^m.
double lambda1_qary_primal(const IntMatrix& a, std::int64_t q,
                           std::uint64_t budget = kDefaultBudget);

// Visits every lattice vector B z with ||B z - center|| <= radius (pruned enumeration).
void for_each_lattice_point_in_ball(
    const LatticeBasis& basis, const Eigen::VectorXd& center, double radius, std::uint64_t budget,
    const std::function<void(const Coords& z, double dist_sq)>& visit);

struct ClosestVector {
  Coords coords;
  double distance = 0.0;
};

ClosestVector closest_vector(const LatticeBasis& basis, const Eigen::VectorXd& target,
                             std::uint64_t budget = kDefaultBudget);

IntVector mod_q(const IntVector& v, std::int64_t q);
IntVector centered_mod_q(const IntVector& v, std::int64_t q);

}  // namespace dgs
