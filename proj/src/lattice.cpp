#include "dgs/lattice.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace dgs {

RationalMatrix RationalMatrix::from_int(const IntMatrix& m) {
  RationalMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = Rational(m(i, j));
  return out;
}

RationalMatrix RationalMatrix::identity(std::size_t n) {
  RationalMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1;
  return out;
}

RationalMatrix RationalMatrix::transpose() const {
  RationalMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& rhs) const {
  if (cols_ != rhs.rows_) fail(ErrorKind::InvalidInput, "matrix product: shape mismatch");
  RationalMatrix out(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const Rational& a = (*this)(i, k);
      if (a == 0) continue;
      for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
    }
  return out;
}

RationalMatrix RationalMatrix::scaled(const Rational& t) const {
  RationalMatrix out = *this;
  for (auto& v : out.data_) v *= t;
  return out;
}

std::vector<Rational> RationalMatrix::column(std::size_t j) const {
  std::vector<Rational> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

bool RationalMatrix::is_integral() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](const Rational& v) { return denominator(v) == 1; });
}

IntMatrix RationalMatrix::to_int() const {
  IntMatrix out(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) {
      const Rational& v = (*this)(i, j);
      if (denominator(v) != 1) fail(ErrorKind::InvalidInput, "matrix entry is not an integer");
      out(i, j) = static_cast<std::int64_t>(numerator(v));
    }
  return out;
}

Eigen::MatrixXd RationalMatrix::to_double() const {
  Eigen::MatrixXd out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(i, j) = static_cast<double>((*this)(i, j));
  return out;
}

std::optional<std::size_t> first_dependent_column(const RationalMatrix& m) {
  // Reduced columns with their pivot rows, built incrementally.
  std::vector<std::pair<std::vector<Rational>, std::size_t>> pivots;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    std::vector<Rational> v = m.column(j);
    for (const auto& [p, row] : pivots) {
      if (v[row] == 0) continue;
      Rational f = v[row] / p[row];
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= f * p[i];
    }
    auto it = std::find_if(v.begin(), v.end(), [](const Rational& x) { return x != 0; });
    if (it == v.end()) return j;
    pivots.emplace_back(std::move(v), static_cast<std::size_t>(it - v.begin()));
  }
  return std::nullopt;
}

std::size_t rank(const RationalMatrix& m) {
  RationalMatrix a = m;
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
    std::size_t p = r;
    while (p < a.rows() && a(p, c) == 0) ++p;
    if (p == a.rows()) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(p, j), a(r, j));
    for (std::size_t i = r + 1; i < a.rows(); ++i) {
      if (a(i, c) == 0) continue;
      Rational f = a(i, c) / a(r, c);
      for (std::size_t j = c; j < a.cols(); ++j) a(i, j) -= f * a(r, j);
    }
    ++r;
  }
  return r;
}

Rational determinant(const RationalMatrix& m) {
  if (m.rows() != m.cols()) fail(ErrorKind::InvalidInput, "determinant of a non-square matrix");
  RationalMatrix a = m;
  const std::size_t n = a.rows();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a(p, c) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(c, j));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (a(i, c) == 0) continue;
      Rational f = a(i, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(i, j) -= f * a(c, j);
    }
  }
  return det;
}

RationalMatrix inverse(const RationalMatrix& m) {
  if (m.rows() != m.cols()) fail(ErrorKind::InvalidInput, "inverse of a non-square matrix");
  const std::size_t n = m.rows();
  RationalMatrix a = m;
  RationalMatrix inv = RationalMatrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a(p, c) == 0) ++p;
    if (p == n) fail(ErrorKind::RankDeficient, "singular matrix (column " + std::to_string(c) + ")");
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(a(p, j), a(c, j));
      std::swap(inv(p, j), inv(c, j));
    }
    Rational piv = a(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      a(c, j) /= piv;
      inv(c, j) /= piv;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || a(i, c) == 0) continue;
      Rational f = a(i, c);
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= f * a(c, j);
        inv(i, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

namespace {

// Unique exact solution of a z = b for a full-column-rank a, if consistent.
std::optional<std::vector<Rational>> solve_full_column_rank(const RationalMatrix& a,
                                                            const std::vector<Rational>& b) {
  const std::size_t m = a.rows(), n = a.cols();
  RationalMatrix aug(m, n + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n) = b[i];
  }
  std::size_t r = 0;
  std::vector<std::size_t> pivot_col;
  for (std::size_t c = 0; c < n && r < m; ++c) {
    std::size_t p = r;
    while (p < m && aug(p, c) == 0) ++p;
    if (p == m) continue;
    for (std::size_t j = 0; j <= n; ++j) std::swap(aug(p, j), aug(r, j));
    Rational piv = aug(r, c);
    for (std::size_t j = 0; j <= n; ++j) aug(r, j) /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || aug(i, c) == 0) continue;
      Rational f = aug(i, c);
      for (std::size_t j = 0; j <= n; ++j) aug(i, j) -= f * aug(r, j);
    }
    pivot_col.push_back(c);
    ++r;
  }
  if (r < n) fail(ErrorKind::RankDeficient, "solve: matrix lacks full column rank");
  for (std::size_t i = r; i < m; ++i)
    if (aug(i, n) != 0) return std::nullopt;
  std::vector<Rational> z(n);
  for (std::size_t i = 0; i < r; ++i) z[pivot_col[i]] = aug(i, n);
  return z;
}

}  // namespace

std::vector<Rational> solve(const RationalMatrix& a, const std::vector<Rational>& b) {
  auto z = solve_full_column_rank(a, b);
  if (!z) fail(ErrorKind::InvalidInput, "solve: inconsistent system");
  return *z;
}

double LatticeBasis::min_gs_norm() const {
  return *std::min_element(gs_norms_.begin(), gs_norms_.end());
}

Eigen::VectorXd LatticeBasis::point(const Coords& x) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(b_.rows());
  for (std::size_t j = 0; j < x.size(); ++j) v += static_cast<double>(x[j]) * b_.col(j);
  return v;
}

std::vector<Rational> LatticeBasis::exact_point(const Coords& x) const {
  std::vector<Rational> v(ambient_dim());
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] == 0) continue;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += columns_(i, j) * x[j];
  }
  return v;
}

double LatticeBasis::volume() const {
  double v = 1.0;
  for (double g : gs_norms_) v *= g;
  return v;
}

Rational LatticeBasis::exact_volume() const {
  Rational d = determinant(columns_);
  return d < 0 ? Rational(-d) : d;
}

LatticeBasis LatticeBasis::scaled(const Rational& t) const { return gram_schmidt_qr(columns_.scaled(t)); }

LatticeBasis LatticeBasis::dual() const {
  if (!is_square()) fail(ErrorKind::InvalidInput, "dual basis requires a square basis");
  return gram_schmidt_qr(inverse(columns_).transpose());
}

LatticeBasis gram_schmidt_qr(const RationalMatrix& b) {
  if (b.cols() == 0 || b.rows() < b.cols())
    fail(ErrorKind::RankDeficient, "basis must have 1 <= n <= m columns");
  if (auto dep = first_dependent_column(b))
    fail(ErrorKind::RankDeficient, "column " + std::to_string(*dep) +
                                       " is a combination of the preceding columns");
  LatticeBasis out;
  out.columns_ = b;
  out.b_ = b.to_double();
  const Eigen::Index m = out.b_.rows(), n = out.b_.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(out.b_);
  out.q_ = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
  out.r_ = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.r_(i, i) < 0) {
      out.r_.row(i) *= -1.0;
      out.q_.col(i) *= -1.0;
    }
    out.gs_norms_.push_back(out.r_(i, i));
  }
  out.qr_residual_ = (out.b_ - out.q_.leftCols(n) * out.r_).cwiseAbs().maxCoeff();
  out.orth_error_ =
      (out.q_.transpose() * out.q_ - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  return out;
}

LatticeBasis basis_from_columns(const std::vector<std::vector<std::int64_t>>& columns) {
  if (columns.empty()) fail(ErrorKind::InvalidInput, "empty basis");
  IntMatrix b(static_cast<Eigen::Index>(columns.front().size()),
              static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != columns.front().size())
      fail(ErrorKind::InvalidInput, "basis columns differ in length");
    for (std::size_t i = 0; i < columns[j].size(); ++i) b(i, j) = columns[j][i];
  }
  return gram_schmidt_qr(RationalMatrix::from_int(b));
}

namespace {

Integer floor_div(const Integer& a, const Integer& b) {
  Integer q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

IntMatrix hermite_normal_form(const IntMatrix& generators) {
  const Eigen::Index m = generators.rows(), k = generators.cols();
  std::vector<std::vector<Integer>> h(k, std::vector<Integer>(m));  // column-major
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < m; ++i) h[j][i] = generators(i, j);

  auto combine = [&](Eigen::Index a, Eigen::Index b, const Integer& s, const Integer& t,
                     const Integer& u, const Integer& v) {
    for (Eigen::Index i = 0; i < m; ++i) {
      Integer x = h[a][i], y = h[b][i];
      h[a][i] = s * x + t * y;
      h[b][i] = u * x + v * y;
    }
  };

  for (Eigen::Index i = 0; i < m; ++i) {
    if (i >= k) fail(ErrorKind::RankDeficient, "generators do not span a full-rank lattice");
    for (Eigen::Index j = i + 1; j < k; ++j) {
      if (h[j][i] == 0) continue;
      if (h[i][i] == 0) {
        std::swap(h[i], h[j]);
        continue;
      }
      Integer a = h[i][i], b = h[j][i];
      // extended gcd: s a + t b = g
      Integer old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
      while (r != 0) {
        Integer q = old_r / r;
        Integer tmp = old_r - q * r; old_r = r; r = tmp;
        tmp = old_s - q * s; old_s = s; s = tmp;
        tmp = old_t - q * t; old_t = t; t = tmp;
      }
      const Integer& g = old_r;
      combine(i, j, old_s, old_t, -b / g, a / g);
    }
    if (h[i][i] == 0) fail(ErrorKind::RankDeficient, "generators do not span a full-rank lattice");
    if (h[i][i] < 0)
      for (auto& v : h[i]) v = -v;
    for (Eigen::Index j = 0; j < i; ++j) {
      Integer f = floor_div(h[j][i], h[i][i]);
      if (f == 0) continue;
      for (Eigen::Index r = 0; r < m; ++r) h[j][r] -= f * h[i][r];
    }
  }
  IntMatrix out(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) {
      if (boost::multiprecision::abs(h[j][i]) > Integer(std::numeric_limits<std::int64_t>::max()))
        fail(ErrorKind::InvalidInput, "HNF entry overflows 64 bits");
      out(i, j) = static_cast<std::int64_t>(h[j][i]);
    }
  return out;
}

bool in_lattice(const LatticeBasis& basis, const std::vector<Rational>& x) {
  auto z = solve_full_column_rank(basis.columns(), x);
  if (!z) return false;
  return std::all_of(z->begin(), z->end(), [](const Rational& v) { return denominator(v) == 1; });
}

const char* to_string(QaryKind kind) { return kind == QaryKind::primal ? "primal" : "kernel"; }

IntVector mod_q(const IntVector& v, std::int64_t q) {
  IntVector out = v;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) %= q;
    if (out(i) < 0) out(i) += q;
  }
  return out;
}

IntVector centered_mod_q(const IntVector& v, std::int64_t q) {
  IntVector out = mod_q(v, q);
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if (2 * out(i) > q) out(i) -= q;
  return out;
}

std::int64_t prime_of_power(std::int64_t q) {
  if (q < 2) fail(ErrorKind::ParamConstraint, "modulus must be >= 2");
  std::int64_t p = q;
  for (std::int64_t d = 2; d * d <= q; ++d)
    if (q % d == 0) {
      p = d;
      break;
    }
  std::int64_t r = q;
  while (r % p == 0) r /= p;
  if (r != 1) fail(ErrorKind::ParamConstraint, "modulus " + std::to_string(q) + " is not a prime power");
  return p;
}

std::size_t rank_mod(const IntMatrix& a, std::int64_t q) {
  const std::int64_t p = prime_of_power(q);
  auto mulmod = [p](std::int64_t x, std::int64_t y) {
    return static_cast<std::int64_t>((static_cast<__int128>(x) * y) % p);
  };
  auto inv = [&](std::int64_t x) {
    std::int64_t r = 1, e = p - 2, b = x;
    while (e > 0) {
      if (e & 1) r = mulmod(r, b);
      b = mulmod(b, b);
      e >>= 1;
    }
    return r;
  };
  IntMatrix m = a;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = ((m(i, j) % p) + p) % p;
  std::size_t r = 0;
  for (Eigen::Index c = 0; c < m.cols() && static_cast<Eigen::Index>(r) < m.rows(); ++c) {
    Eigen::Index piv = static_cast<Eigen::Index>(r);
    while (piv < m.rows() && m(piv, c) == 0) ++piv;
    if (piv == m.rows()) continue;
    m.row(piv).swap(m.row(static_cast<Eigen::Index>(r)));
    std::int64_t iv = inv(m(r, c));
    for (Eigen::Index i = static_cast<Eigen::Index>(r) + 1; i < m.rows(); ++i) {
      if (m(i, c) == 0) continue;
      std::int64_t f = mulmod(m(i, c), iv);
      for (Eigen::Index j = c; j < m.cols(); ++j) m(i, j) = ((m(i, j) - mulmod(f, m(r, j))) % p + p) % p;
    }
    ++r;
  }
  return r;
}

bool QaryLattice::contains(const IntVector& x) const {
  if (x.size() != a.rows()) return false;
  if (kind == QaryKind::kernel) {
    IntVector s = a.transpose() * x;
    return mod_q(s, modulus).isZero();
  }
  std::vector<Rational> v(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) v[i] = x(i);
  return in_lattice(basis, v);
}

QaryLattice qary_basis(const IntMatrix& a, std::int64_t q, QaryKind kind) {
  const Eigen::Index m = a.rows(), n = a.cols();
  if (m < n || n < 1) fail(ErrorKind::InvalidInput, "A must be m x n with m >= n >= 1");
  if (rank_mod(a, q) != static_cast<std::size_t>(n))
    fail(ErrorKind::RankDeficient, "A is not full rank modulo " + std::to_string(q));
  IntMatrix gens(m, n + m);
  gens.leftCols(n) = a;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) gens(i, j) = ((a(i, j) % q) + q) % q;
  gens.rightCols(m) = IntMatrix::Identity(m, m) * q;
  IntMatrix primal = hermite_normal_form(gens);

  QaryLattice out;
  out.a = a;
  out.modulus = q;
  out.kind = kind;
  if (kind == QaryKind::primal) {
    out.basis_int = primal;
  } else {
    // L_q^perp(A) = q * dual(L_q(A)).
    RationalMatrix k = inverse(RationalMatrix::from_int(primal)).transpose().scaled(Rational(q));
    if (!k.is_integral()) fail(ErrorKind::InvalidInput, "kernel basis is not integral");
    out.basis_int = hermite_normal_form(k.to_int());
  }
  out.basis = gram_schmidt_qr(RationalMatrix::from_int(out.basis_int));

  Integer expected = 1;
  const Eigen::Index e = kind == QaryKind::primal ? m - n : n;
  for (Eigen::Index i = 0; i < e; ++i) expected *= q;
  if (out.basis.exact_volume() != Rational(expected))
    fail(ErrorKind::InvalidInput, "q-ary basis has unexpected determinant");
  return out;
}

bool dual_scale_check(const LatticeBasis& kernel, const LatticeBasis& primal, std::int64_t q,
                      int radius) {
  if (kernel.ambient_dim() != primal.ambient_dim()) return false;
  auto enumerate = [radius](const LatticeBasis& b) {
    std::vector<std::vector<Rational>> pts;
    std::vector<std::pair<std::int64_t, std::int64_t>> box(b.rank(), {-radius, radius});
    for_each_in_box(box, [&](const Coords& z) { pts.push_back(b.exact_point(z)); });
    return pts;
  };
  const auto xs = enumerate(kernel);
  const auto ys = enumerate(primal);
  for (const auto& x : xs)
    for (const auto& y : ys) {
      Rational ip = 0;
      for (std::size_t i = 0; i < x.size(); ++i) ip += x[i] * y[i];
      ip /= q;
      if (denominator(ip) != 1) return false;
    }
  return true;
}

bool dual_scale_check(const QaryLattice& kernel, int radius) {
  QaryLattice primal = qary_basis(kernel.a, kernel.modulus, QaryKind::primal);
  return dual_scale_check(kernel.basis, primal.basis, kernel.modulus, radius);
}

namespace {

// Schnorr-Euchner style depth-first enumeration of integer z with
// ||R z - t||^2 <= radius_sq; visit may shrink radius_sq.
void enumerate_ball(const Eigen::MatrixXd& r, const Eigen::VectorXd& t, double& radius_sq,
                    std::uint64_t budget,
                    const std::function<void(const Coords&, double)>& visit) {
  const Eigen::Index n = r.cols();
  Coords z(static_cast<std::size_t>(n), 0);
  std::uint64_t nodes = 0;
  std::function<void(Eigen::Index, double)> rec = [&](Eigen::Index i, double partial) {
    if (++nodes > budget)
      fail(ErrorKind::EnumerationBudgetExceeded,
           "enumeration exceeded budget of " + std::to_string(budget) + " nodes");
    double c = t(i);
    for (Eigen::Index j = i + 1; j < n; ++j) c -= r(i, j) * static_cast<double>(z[j]);
    c /= r(i, i);
    const double rem = radius_sq - partial;
    if (rem < 0) return;
    const double w = std::sqrt(rem) / r(i, i);
    const auto lo = static_cast<std::int64_t>(std::ceil(c - w - 1e-9));
    const auto hi = static_cast<std::int64_t>(std::floor(c + w + 1e-9));
    for (std::int64_t v = lo; v <= hi; ++v) {
      const double d = r(i, i) * (static_cast<double>(v) - c);
      const double np = partial + d * d;
      if (np > radius_sq * (1 + 1e-12) + 1e-12) continue;
      z[i] = v;
      if (i == 0)
        visit(z, np);
      else
        rec(i - 1, np);
    }
    z[i] = 0;
  };
  rec(n - 1, 0.0);
}

}  // namespace

void for_each_lattice_point_in_ball(
    const LatticeBasis& basis, const Eigen::VectorXd& center, double radius, std::uint64_t budget,
    const std::function<void(const Coords& z, double dist_sq)>& visit) {
  const Eigen::Index n = static_cast<Eigen::Index>(basis.rank());
  const Eigen::VectorXd full = basis.q_factor().transpose() * center;
  const double ortho_sq = full.tail(full.size() - n).squaredNorm();
  double radius_sq = radius * radius - ortho_sq;
  if (radius_sq < 0) return;
  enumerate_ball(basis.r_factor(), full.head(n), radius_sq, budget,
                 [&](const Coords& z, double d2) { visit(z, d2 + ortho_sq); });
}

ShortVector shortest_vector(const LatticeBasis& basis, double radius_bound, std::uint64_t budget) {
  const Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.rank()));
  double radius_sq = radius_bound * radius_bound * (1 + 1e-9);
  std::optional<ShortVector> best;
  enumerate_ball(basis.r_factor(), t, radius_sq, budget, [&](const Coords& z, double) {
    if (std::all_of(z.begin(), z.end(), [](std::int64_t v) { return v == 0; })) return;
    std::vector<Rational> v = basis.exact_point(z);
    Rational nsq = 0;
    for (const auto& x : v) nsq += x * x;
    if (!best || nsq < best->norm_sq) {
      best = ShortVector{z, std::move(v), nsq, std::sqrt(static_cast<double>(nsq))};
      radius_sq = std::min(radius_sq, static_cast<double>(nsq) * (1 + 1e-9));
    }
  });
  if (!best)
    fail(ErrorKind::NoVectorInRadius,
         "no nonzero lattice vector within radius " + std::to_string(radius_bound));
  return *best;
}

double lambda1_bruteforce(const LatticeBasis& basis, double radius_bound, std::uint64_t budget) {
  return shortest_vector(basis, radius_bound, budget).norm;
}

double lambda1_qary_primal(const IntMatrix& a, std::int64_t q, std::uint64_t budget) {
  const Eigen::Index m = a.rows(), n = a.cols();
  long double cosets = std::pow(static_cast<long double>(q), static_cast<long double>(n));
  if (cosets > static_cast<long double>(budget))
    fail(ErrorKind::EnumerationBudgetExceeded, "q^n cosets exceed the enumeration budget");
  std::int64_t best = q * q;
  IntVector s = IntVector::Zero(n);
  IntVector v = IntVector::Zero(m);
  const IntMatrix am = [&] {
    IntMatrix t = a;
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) t(i, j) = ((a(i, j) % q) + q) % q;
    return t;
  }();
  while (true) {
    Eigen::Index j = 0;
    while (j < n) {
      v += am.col(j);
      if (++s(j) < q) break;
      s(j) = 0;
      v -= am.col(j) * q;
      ++j;
    }
    if (j == n) break;
    std::int64_t nsq = 0;
    bool zero = true;
    for (Eigen::Index i = 0; i < m; ++i) {
      std::int64_t r = ((v(i) % q) + q) % q;
      if (2 * r > q) r -= q;
      if (r != 0) zero = false;
      nsq += r * r;
    }
    if (!zero) best = std::min(best, nsq);
  }
  return std::sqrt(static_cast<double>(best));
}

ClosestVector closest_vector(const LatticeBasis& basis, const Eigen::VectorXd& target,
                             std::uint64_t budget) {
  const Eigen::Index n = static_cast<Eigen::Index>(basis.rank());
  const Eigen::MatrixXd& r = basis.r_factor();
  const Eigen::VectorXd full = basis.q_factor().transpose() * target;
  const Eigen::VectorXd t = full.head(n);
  const double ortho_sq = full.tail(full.size() - n).squaredNorm();

  // Babai nearest plane gives the initial radius.
  Coords z(static_cast<std::size_t>(n));
  double babai = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double c = t(i);
    for (Eigen::Index j = i + 1; j < n; ++j) c -= r(i, j) * static_cast<double>(z[j]);
    c /= r(i, i);
    z[i] = round_nearest(c);
    const double d = r(i, i) * (static_cast<double>(z[i]) - c);
    babai += d * d;
  }
  ClosestVector best{z, babai};
  double radius_sq = babai * (1 + 1e-9) + 1e-12;
  enumerate_ball(r, t, radius_sq, budget, [&](const Coords& c, double d2) {
    if (d2 < best.distance) {
      best = {c, d2};
      radius_sq = d2 * (1 + 1e-9) + 1e-12;
    }
  });
  best.distance = std::sqrt(best.distance + ortho_sq);
  return best;
}

}  // namespace dgs
