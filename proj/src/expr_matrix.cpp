#include "solderlab/expr_matrix.hpp"

#include "solderlab/errors.hpp"

namespace solderlab {

ExprMatrix ExprMatrix::identity(std::size_t n) {
  ExprMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = Expr(1.0);
  return m;
}

ExprMatrix ExprMatrix::transpose() const {
  ExprMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

Eigen::MatrixXd ExprMatrix::evaluate(std::span<const double> point) const {
  Eigen::MatrixXd out(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          solderlab::evaluate((*this)(r, c), point);
    }
  }
  return out;
}

ExprMatrix operator*(const ExprMatrix& a, const ExprMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix product shape mismatch");
  ExprMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < b.cols(); ++c) {
      Expr acc;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(r, k) * b(k, c);
      out(r, c) = acc;
    }
  }
  return out;
}

namespace {

template <typename Fn>
ExprMatrix combine(const ExprMatrix& a, const ExprMatrix& b, Fn fn) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("matrix shape mismatch");
  }
  ExprMatrix out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = fn(a(r, c), b(r, c));
  }
  return out;
}

Expr minor_determinant(const ExprMatrix& m, std::vector<std::size_t>& rows,
                       std::vector<std::size_t>& cols) {
  if (rows.size() == 1) return m(rows[0], cols[0]);
  std::size_t r0 = rows.front();
  std::vector<std::size_t> sub_rows(rows.begin() + 1, rows.end());
  Expr acc;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const Expr& entry = m(r0, cols[k]);
    if (entry.is_zero()) continue;
    std::vector<std::size_t> sub_cols;
    sub_cols.reserve(cols.size() - 1);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j != k) sub_cols.push_back(cols[j]);
    }
    Expr term = entry * minor_determinant(m, sub_rows, sub_cols);
    acc = (k % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

}  // namespace

ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b) {
  return combine(a, b, [](const Expr& x, const Expr& y) { return x + y; });
}

ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b) {
  return combine(a, b, [](const Expr& x, const Expr& y) { return x - y; });
}

Expr determinant(const ExprMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("determinant of a non-square matrix");
  if (m.rows() == 0) return Expr(1.0);
  std::vector<std::size_t> rows(m.rows());
  std::vector<std::size_t> cols(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) rows[i] = cols[i] = i;
  return minor_determinant(m, rows, cols);
}

ExprMatrix inverse(const ExprMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("inverse of a non-square matrix");
  const std::size_t n = m.rows();
  Expr det = determinant(m);
  if (det.is_zero()) throw SingularError("matrix is identically singular");
  ExprMatrix inv(n, n);
  if (n == 1) {
    inv(0, 0) = Expr(1.0) / det;
    return inv;
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      // inv(r, c) = cofactor(c, r) / det
      std::vector<std::size_t> rows;
      std::vector<std::size_t> cols;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != c) rows.push_back(i);
        if (i != r) cols.push_back(i);
      }
      Expr cof = minor_determinant(m, rows, cols);
      if ((r + c) % 2 == 1) cof = -cof;
      inv(r, c) = cof / det;
    }
  }
  return inv;
}

ExprMatrix differentiate(const ExprMatrix& m, std::size_t index) {
  ExprMatrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = differentiate(m(r, c), index);
  }
  return out;
}

ExprMatrix substitute(const ExprMatrix& m, std::span<const Expr> replacements) {
  ExprMatrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = substitute(m(r, c), replacements);
  }
  return out;
}

}  // namespace solderlab
