#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <span>

#include "cqg/error.hpp"

namespace cqg::num {

// Charts in this library are at most 12-dimensional (two spatial + two
// rotational blocks), so dense fixed-capacity storage beats anything fancier.
inline constexpr int kMaxDim = 12;

// Small dense square matrix, row-major, inline storage.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int n) : n_(n) {
    if (n < 0 || n > kMaxDim)
      fail(ErrorKind::UnsupportedDimension,
           "Mat: dimension " + std::to_string(n) + " outside [0, 12]");
    a_.fill(0.0);
  }

  int dim() const { return n_; }
  double& operator()(int i, int j) { return a_[i * n_ + j]; }
  double operator()(int i, int j) const { return a_[i * n_ + j]; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  static Mat identity(int n) {
    Mat m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Mat& operator+=(const Mat& o) {
    for (int i = 0; i < n_ * n_; ++i) a_[i] += o.a_[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (int i = 0; i < n_ * n_; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Mat& operator*=(double s) {
    for (int i = 0; i < n_ * n_; ++i) a_[i] *= s;
    return *this;
  }

  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < n_ * n_; ++i) m = std::max(m, std::abs(a_[i]));
    return m;
  }

 private:
  int n_ = 0;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

// Rank-3 coefficient array Gamma^i_{jk}, symmetric in (j,k) by construction
// for every connection this library produces.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n) { a_.fill(0.0); }

  int dim() const { return n_; }
  double& at(int i, int j, int k) { return a_[(i * n_ + j) * n_ + k]; }
  double at(int i, int j, int k) const { return a_[(i * n_ + j) * n_ + k]; }

  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < n_ * n_ * n_; ++i) m = std::max(m, std::abs(a_[i]));
    return m;
  }
  double max_abs_diff(const Tensor3& o) const {
    double m = 0.0;
    for (int i = 0; i < n_ * n_ * n_; ++i)
      m = std::max(m, std::abs(a_[i] - o.a_[i]));
    return m;
  }

 private:
  int n_ = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> a_{};
};

namespace detail {

// In-place LU with partial pivoting. Returns the permutation sign, fills
// `perm`. Throws DegenerateChart on an (effectively) zero pivot.
inline int lu_factor(Mat& m, std::array<int, kMaxDim>& perm) {
  const int n = m.dim();
  int sign = 1;
  double scale = m.max_abs();
  if (scale == 0.0)
    fail(ErrorKind::DegenerateChart, "lu_factor: zero matrix");
  for (int c = 0; c < n; ++c) {
    int p = c;
    double best = std::abs(m(c, c));
    for (int r = c + 1; r < n; ++r) {
      double v = std::abs(m(r, c));
      if (v > best) { best = v; p = r; }
    }
    if (best <= 1e-14 * scale)
      fail(ErrorKind::DegenerateChart,
           "lu_factor: pivot " + std::to_string(best) +
               " below threshold (matrix numerically singular)");
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(m(c, j), m(p, j));
      sign = -sign;
    }
    perm[c] = p;
    const double inv = 1.0 / m(c, c);
    for (int r = c + 1; r < n; ++r) {
      const double f = m(r, c) * inv;
      m(r, c) = f;
      for (int j = c + 1; j < n; ++j) m(r, j) -= f * m(c, j);
    }
  }
  return sign;
}

inline void lu_solve(const Mat& lu, const std::array<int, kMaxDim>& perm,
                     std::span<double> b) {
  const int n = lu.dim();
  for (int c = 0; c < n; ++c)
    if (perm[c] != c) std::swap(b[c], b[perm[c]]);
  for (int r = 1; r < n; ++r)
    for (int c = 0; c < r; ++c) b[r] -= lu(r, c) * b[c];
  for (int r = n - 1; r >= 0; --r) {
    for (int c = r + 1; c < n; ++c) b[r] -= lu(r, c) * b[c];
    b[r] /= lu(r, r);
  }
}

}  // namespace detail

inline double determinant(const Mat& g) {
  Mat lu = g;
  std::array<int, kMaxDim> perm{};
  int sign;
  try {
    sign = detail::lu_factor(lu, perm);
  } catch (const Error&) {
    return 0.0;  // numerically singular: report det ~ 0, let callers threshold
  }
  double d = sign;
  for (int i = 0; i < g.dim(); ++i) d *= lu(i, i);
  return d;
}

inline Mat inverse(const Mat& g) {
  Mat lu = g;
  std::array<int, kMaxDim> perm{};
  detail::lu_factor(lu, perm);
  const int n = g.dim();
  Mat inv(n);
  std::array<double, kMaxDim> col{};
  for (int j = 0; j < n; ++j) {
    col.fill(0.0);
    col[j] = 1.0;
    detail::lu_solve(lu, perm, std::span<double>(col.data(), n));
    for (int i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

// Compensated (Kahan) accumulator; the fixed-order reductions in the
// quadrature and Monte-Carlo drivers run through this.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace cqg::num
