#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "solderlab/expr.hpp"

namespace solderlab {

/// Dense row-major matrix of expressions (metrics, frame changes, coframes).
class ExprMatrix {
 public:
  ExprMatrix() = default;
  ExprMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static ExprMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Expr& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Expr& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  ExprMatrix transpose() const;
  Eigen::MatrixXd evaluate(std::span<const double> point) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Expr> data_;
};

ExprMatrix operator*(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b);

/// Laplace expansion; zero entries are skipped, so sparse or diagonal
/// matrices stay small.
Expr determinant(const ExprMatrix& m);

/// Adjugate over determinant. Singularity only shows up at evaluation time.
ExprMatrix inverse(const ExprMatrix& m);

/// Entry-wise exact derivative.
ExprMatrix differentiate(const ExprMatrix& m, std::size_t index);

ExprMatrix substitute(const ExprMatrix& m, std::span<const Expr> replacements);

}  // namespace solderlab
