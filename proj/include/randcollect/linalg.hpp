#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "randcollect/common.hpp"

namespace randcollect {

// Dense row-major matrix. Just enough surface for the solvers below; the
// systems in this project are desk-scale (n up to a few hundred).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

// Solves A x = b by Gaussian elimination with partial pivoting.
// Throws NumericError when a pivot collapses (singular system).
inline std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw NumericError("solve_linear: shape mismatch");
  const double scale = std::max(a.max_abs(), 1e-30);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a(r, k)) > std::abs(a(piv, k))) piv = r;
    if (std::abs(a(piv, k)) <= scale * 1e-14)
      throw NumericError("solve_linear: singular system");
    if (piv != k) {
      for (std::size_t j = k; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a(r, k) / a(k, k);
      if (f == 0.0) continue;
      a(r, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) a(r, j) -= f * a(k, j);
      b[r] -= f * b[k];
    }
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

// Max-norm residual |A x - b|, for callers that promise a post-check.
inline double solve_residual(const Matrix& a, const std::vector<double>& x,
                             const std::vector<double>& b) {
  double res = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = -b[i];
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    res = std::max(res, std::abs(s));
  }
  return res;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, returned in
// descending order. The caller is responsible for symmetry; entries are read
// from the upper triangle and mirrored.
inline std::vector<double> jacobi_eigenvalues(Matrix s, int max_sweeps = 100) {
  const std::size_t n = s.rows();
  if (s.cols() != n) throw NumericError("jacobi_eigenvalues: not square");
  if (n == 1) return {s(0, 0)};

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s(j, i) = s(i, j);

  const double norm0 = std::max(s.max_abs(), 1e-30);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
    if (std::sqrt(off) <= norm0 * 1e-14) {
      std::vector<double> ev(n);
      for (std::size_t i = 0; i < n; ++i) ev[i] = s(i, i);
      std::sort(ev.begin(), ev.end(), std::greater<double>());
      return ev;
    }

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = s(p, q);
        if (std::abs(apq) <= norm0 * 1e-300) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        const double app = s(p, p), aqq = s(q, q);
        s(p, p) = c * c * app - 2.0 * sn * c * apq + sn * sn * aqq;
        s(q, q) = sn * sn * app + 2.0 * sn * c * apq + c * c * aqq;
        s(p, q) = 0.0;
        s(q, p) = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = s(i, p), aiq = s(i, q);
          s(i, p) = c * aip - sn * aiq;
          s(p, i) = s(i, p);
          s(i, q) = sn * aip + c * aiq;
          s(q, i) = s(i, q);
        }
      }
    }
  }
  throw NumericError("jacobi_eigenvalues: no convergence");
}

}  // namespace randcollect
