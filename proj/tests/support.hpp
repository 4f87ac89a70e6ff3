#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "fgneg/covariance.hpp"

namespace fgneg::testing {

inline Mat random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = nd(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

inline CMat random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = cplx(nd(rng), nd(rng));
  Eigen::HouseholderQR<CMat> qr(g);
  return qr.householderQ();
}

inline Mat block_form(const std::vector<double>& x) {
  const int k = static_cast<int>(x.size());
  Mat b = Mat::Zero(2 * k, 2 * k);
  for (int j = 0; j < k; ++j) {
    b(2 * j, 2 * j + 1) = -x[j];
    b(2 * j + 1, 2 * j) = x[j];
  }
  return b;
}

// Random physical covariance on k modes.  pure = true draws x_j = +-1.
inline CovarianceMatrix random_covariance(int k, std::mt19937_64& rng,
                                          bool pure = false) {
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<double> x(k);
  for (auto& v : x) v = pure ? (ud(rng) < 0 ? -1.0 : 1.0) : ud(rng);
  Mat o = random_orthogonal(2 * k, rng);
  Mat g = o * block_form(x) * o.transpose();
  return CovarianceMatrix::unchecked(0.5 * (g - g.transpose()));
}

inline CorrelationMatrix random_correlation(int k, std::mt19937_64& rng,
                                            bool complex_entries = false) {
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  Vec n(k);
  for (int i = 0; i < k; ++i) n(i) = ud(rng);
  if (complex_entries) {
    CMat u = random_unitary(k, rng);
    CMat c = u * n.cast<cplx>().asDiagonal() * u.adjoint();
    return CorrelationMatrix(0.5 * (c + c.adjoint()));
  }
  Mat o = random_orthogonal(k, rng);
  Mat c = o * n.asDiagonal() * o.transpose();
  return CorrelationMatrix::from_real(0.5 * (c + c.transpose()));
}

// Pairing sum over perfect matchings, by expansion along the first index.
inline double brute_pfaffian(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 0) return 1.0;
  if (n % 2) return 0.0;
  double sum = 0.0;
  for (int j = 1; j < n; ++j) {
    std::vector<int> rest;
    for (int r = 1; r < n; ++r)
      if (r != j) rest.push_back(r);
    Mat sub(n - 2, n - 2);
    for (int p = 0; p < n - 2; ++p)
      for (int q = 0; q < n - 2; ++q) sub(p, q) = a(rest[p], rest[q]);
    const double sign = (j % 2 == 1) ? 1.0 : -1.0;
    sum += sign * a(0, j) * brute_pfaffian(sub);
  }
  return sum;
}

inline double simpson(const std::function<double(double)>& f, double lo,
                      double hi, int intervals) {
  const double h = (hi - lo) / intervals;
  double s = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace fgneg::testing
