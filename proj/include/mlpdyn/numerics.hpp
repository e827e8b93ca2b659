#pragma once

// Small dense linear algebra (dimension <= 64). Self-contained so that
// results do not depend on which LAPACK is installed.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mlpdyn {

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<double> column(std::size_t j) const;
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Matrix transpose() const;
  double frobenius_norm() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

using HessianMatrix = Matrix;

struct SymEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
  int sweeps = 0;
};

inline constexpr std::size_t kMaxDenseDim = 64;

// Cyclic Jacobi. Stops when the off-diagonal Frobenius norm drops to
// 1e-14 * ||A||_F; throws ConvergenceError after 50 sweeps and
// ValidationError for non-square, oversized or asymmetric (1e-10) input.
SymEigen sym_eigen(const Matrix& a);

// Singular values, descending, by one-sided (Hestenes) Jacobi on the columns.
std::vector<double> singular_values(const Matrix& a);

// Count of singular values above rel_tol * sigma_max.
std::size_t numerical_rank(const Matrix& a, double rel_tol = 1e-10);

// Orthonormal basis (as columns) of the column space, dropping directions
// with singular value <= rel_tol * sigma_max.
Matrix column_space_basis(const Matrix& a, double rel_tol = 1e-10);

// p + span(U) with orthonormal columns U (d x k).
class AffinePiece {
 public:
  // Throws ValidationError unless U^T U = I within 1e-12 and rows(U) == d.
  AffinePiece(std::vector<double> base, Matrix directions, std::string label);

  // Orthonormalizes the given spanning vectors first (modified Gram-Schmidt).
  static AffinePiece spanned_by(std::vector<double> base, const std::vector<std::vector<double>>& spanning,
                                std::string label);

  std::size_t ambient_dim() const { return base_.size(); }
  std::size_t dim() const { return directions_.cols(); }
  const std::vector<double>& base() const { return base_; }
  const Matrix& directions() const { return directions_; }
  const std::string& label() const { return label_; }

  // base + U * coords
  std::vector<double> point_at(std::span<const double> coords) const;

 private:
  std::vector<double> base_;
  Matrix directions_;
  std::string label_;
};

struct Projection {
  double distance = 0.0;
  std::vector<double> point;
};

Projection affine_distance(std::span<const double> point, const AffinePiece& piece);

double norm2(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace mlpdyn
