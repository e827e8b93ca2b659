#include "mlpdyn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mlpdyn/error.hpp"

namespace mlpdyn {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ValidationError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ValidationError("Matrix product: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymEigen sym_eigen(const Matrix& input) {
  const std::size_t n = input.rows();
  if (n != input.cols()) throw ValidationError("sym_eigen: matrix is not square");
  if (n == 0) throw ValidationError("sym_eigen: empty matrix");
  if (n > kMaxDenseDim) throw ValidationError("sym_eigen: dimension exceeds 64");
  const double scale = input.frobenius_norm();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(input(i, j) - input(j, i)) > 1e-10 * std::max(1.0, scale)) {
        throw ValidationError("sym_eigen: matrix is not symmetric");
      }

  Matrix a = input;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (input(i, j) + input(j, i));
  Matrix v = Matrix::identity(n);

  const double target = 1e-14 * scale;
  int sweep = 0;
  constexpr int kMaxSweeps = 50;
  while (off_diagonal_norm(a) > target) {
    if (sweep == kMaxSweeps) throw ConvergenceError("sym_eigen: no convergence after 50 Jacobi sweeps");
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::fabs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymEigen out;
  out.sweeps = sweep;
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values.push_back(a(order[k], order[k]));
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

namespace {

// One-sided Jacobi: rotates columns of `u` until they are mutually orthogonal.
void orthogonalize_columns(Matrix& u) {
  const std::size_t rows = u.rows();
  const std::size_t cols = u.cols();
  constexpr int kMaxSweeps = 60;
  constexpr double kEps = 1e-15;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t k = 0; k < rows; ++k) {
          alpha += u(k, p) * u(k, p);
          beta += u(k, q) * u(k, q);
          gamma += u(k, p) * u(k, q);
        }
        if (gamma == 0.0 || std::fabs(gamma) <= kEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < rows; ++k) {
          const double ukp = u(k, p);
          const double ukq = u(k, q);
          u(k, p) = c * ukp - s * ukq;
          u(k, q) = s * ukp + c * ukq;
        }
      }
    }
    if (!rotated) return;
  }
  throw ConvergenceError("singular_values: one-sided Jacobi did not converge");
}

std::vector<double> column_norms(const Matrix& u) {
  std::vector<double> out(u.cols());
  for (std::size_t j = 0; j < u.cols(); ++j) out[j] = norm2(u.column(j));
  return out;
}

}  // namespace

std::vector<double> singular_values(const Matrix& a) {
  if (a.empty()) throw ValidationError("singular_values: empty matrix");
  if (a.cols() > kMaxDenseDim) throw ValidationError("singular_values: more than 64 columns");
  Matrix u = a;
  orthogonalize_columns(u);
  auto sv = column_norms(u);
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

std::size_t numerical_rank(const Matrix& a, double rel_tol) {
  if (!(rel_tol > 0.0)) throw ValidationError("numerical_rank: rel_tol must be > 0");
  const auto sv = singular_values(a);
  if (sv.front() == 0.0) return 0;
  return static_cast<std::size_t>(
      std::count_if(sv.begin(), sv.end(), [&](double s) { return s > rel_tol * sv.front(); }));
}

Matrix column_space_basis(const Matrix& a, double rel_tol) {
  if (a.empty()) throw ValidationError("column_space_basis: empty matrix");
  Matrix u = a;
  orthogonalize_columns(u);
  const auto norms = column_norms(u);
  const double smax = *std::max_element(norms.begin(), norms.end());
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < norms.size(); ++j)
    if (smax > 0.0 && norms[j] > rel_tol * smax) keep.push_back(j);
  std::sort(keep.begin(), keep.end(), [&](std::size_t i, std::size_t j) { return norms[i] > norms[j]; });
  Matrix basis(a.rows(), keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c)
    for (std::size_t k = 0; k < a.rows(); ++k) basis(k, c) = u(k, keep[c]) / norms[keep[c]];
  return basis;
}

AffinePiece::AffinePiece(std::vector<double> base, Matrix directions, std::string label)
    : base_(std::move(base)), directions_(std::move(directions)), label_(std::move(label)) {
  if (directions_.cols() == 0) directions_ = Matrix(base_.size(), 0);
  if (directions_.rows() != base_.size()) throw ValidationError("AffinePiece: direction rows must equal base dimension");
  if (directions_.cols() > base_.size()) throw ValidationError("AffinePiece: more directions than dimensions");
  for (std::size_t i = 0; i < directions_.cols(); ++i) {
    for (std::size_t j = i; j < directions_.cols(); ++j) {
      double g = 0.0;
      for (std::size_t k = 0; k < base_.size(); ++k) g += directions_(k, i) * directions_(k, j);
      if (std::fabs(g - (i == j ? 1.0 : 0.0)) > 1e-12) {
        throw ValidationError("AffinePiece: directions are not orthonormal");
      }
    }
  }
}

AffinePiece AffinePiece::spanned_by(std::vector<double> base, const std::vector<std::vector<double>>& spanning,
                                    std::string label) {
  const std::size_t d = base.size();
  std::vector<std::vector<double>> ortho;
  for (auto vec : spanning) {
    if (vec.size() != d) throw ValidationError("AffinePiece: spanning vector has wrong dimension");
    const double original = norm2(vec);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : ortho) {
        const double c = dot(vec, q);
        for (std::size_t k = 0; k < d; ++k) vec[k] -= c * q[k];
      }
    }
    const double nrm = norm2(vec);
    if (nrm <= 1e-12 * std::max(1.0, original)) continue;
    for (auto& x : vec) x /= nrm;
    ortho.push_back(std::move(vec));
  }
  Matrix u(d, ortho.size());
  for (std::size_t j = 0; j < ortho.size(); ++j)
    for (std::size_t k = 0; k < d; ++k) u(k, j) = ortho[j][k];
  return AffinePiece(std::move(base), std::move(u), std::move(label));
}

std::vector<double> AffinePiece::point_at(std::span<const double> coords) const {
  if (coords.size() != dim()) throw ValidationError("AffinePiece::point_at: wrong number of coordinates");
  std::vector<double> p = base_;
  for (std::size_t j = 0; j < dim(); ++j)
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += directions_(k, j) * coords[j];
  return p;
}

Projection affine_distance(std::span<const double> point, const AffinePiece& piece) {
  const std::size_t d = piece.ambient_dim();
  if (point.size() != d) throw ValidationError("affine_distance: dimension mismatch");
  std::vector<double> diff(d);
  for (std::size_t k = 0; k < d; ++k) diff[k] = point[k] - piece.base()[k];
  Projection out;
  out.point = piece.base();
  const Matrix& u = piece.directions();
  for (std::size_t j = 0; j < piece.dim(); ++j) {
    double c = 0.0;
    for (std::size_t k = 0; k < d; ++k) c += u(k, j) * diff[k];
    for (std::size_t k = 0; k < d; ++k) out.point[k] += c * u(k, j);
  }
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += (point[k] - out.point[k]) * (point[k] - out.point[k]);
  out.distance = std::sqrt(s);
  return out;
}

}  // namespace mlpdyn
