#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fgneg/types.hpp"

namespace fgneg {

// Majorana convention: for mode j (0-based), m_{2j} = f_j^dag + f_j and
// m_{2j+1} = i (f_j^dag - f_j).  Covariance entries are
// gamma_{jl} = (i/2) tr(rho [m_j, m_l]).

struct CovarianceDiagnostics {
  bool even_dimension = false;
  double antisymmetry_violation = 0.0;  // max |M + M^T|
  double max_abs_eigenvalue = 0.0;      // of i*M after antisymmetrization
  bool is_antisymmetric = false;
  bool is_physical = false;
};

CovarianceDiagnostics validate_covariance(const Mat& m);

class CovarianceMatrix {
 public:
  CovarianceMatrix() = default;
  // Validates; throws StructuralError or PhysicalityError.
  explicit CovarianceMatrix(const Mat& m);
  // Skips validation. Used internally for matrices known to be valid.
  static CovarianceMatrix unchecked(Mat m);

  int modes() const { return static_cast<int>(data_.rows() / 2); }
  const Mat& data() const { return data_; }
  double operator()(int i, int j) const { return data_(i, j); }

 private:
  Mat data_;
};

// Two-point function C_{jl} = tr(rho f_j^dag f_l).
class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;
  explicit CorrelationMatrix(const CMat& c);
  static CorrelationMatrix from_real(const Mat& c);

  int modes() const { return static_cast<int>(data_.rows()); }
  const CMat& data() const { return data_; }
  bool is_real(double tol = kStructuralTol) const;
  Mat real() const { return data_.real(); }
  CorrelationMatrix restrict(std::span<const int> modes) const;

 private:
  CMat data_;
};

struct Bipartition {
  std::vector<int> a;  // 0-based mode indices
  std::vector<int> b;

  static Bipartition contiguous(int na, int nb);
  int size_a() const { return static_cast<int>(a.size()); }
  int size_b() const { return static_cast<int>(b.size()); }
  std::vector<int> modes() const;  // a followed by b
  // Throws StructuralError on overlap, empty sides, or out-of-range indices.
  void validate(int total_modes) const;
};

// Parameters of the two-mode normal form
//   [[0, a, 0, -b], [-a, 0, -c, 0], [0, c, 0, d], [b, 0, -d, 0]].
struct TwoModeNormalForm {
  double a = 0, b = 0, c = 0, d = 0;
  Mat matrix() const;
};

// Brings a general 4x4 two-mode covariance to normal form by local
// SO(2) x SO(2) rotations (an SVD of the off-diagonal block).
TwoModeNormalForm two_mode_normal_form(const Mat& gamma4);

CovarianceMatrix correlation_to_covariance(const CorrelationMatrix& c);
// Requires a number-conserving gamma; throws StructuralError otherwise.
CorrelationMatrix covariance_to_correlation(const CovarianceMatrix& gamma,
                                            double tol = 1e-10);

struct NormalForm {
  Mat rotation;           // O in SO(2k), O gamma O^T block diagonal
  std::vector<double> x;  // O gamma O^T = (+) x_j [[0,-1],[1,0]]
};

NormalForm normal_form(const CovarianceMatrix& gamma);

std::vector<int> majorana_indices(std::span<const int> modes);
CovarianceMatrix reduced_covariance(const CovarianceMatrix& gamma,
                                    std::span<const int> modes);
// Reduced state on A u B, ordered A first.
CovarianceMatrix restrict_to(const CovarianceMatrix& gamma,
                             const Bipartition& part);
// The local partition of the matrix returned by restrict_to.
Bipartition local_partition(const Bipartition& part);

std::vector<Mat> pinch(const CovarianceMatrix& gamma,
                       std::span<const std::pair<int, int>> pairing);

double pfaffian(Mat a);
// Pairing sum Pf(gamma[idx, idx]) over an even ordered index list. The
// expectation tr(rho m_{j1}...m_{j2p}) equals (-i)^p times this value.
double majorana_moment(const CovarianceMatrix& gamma,
                       std::span<const int> indices);
cplx majorana_expectation(const CovarianceMatrix& gamma,
                          std::span<const int> indices);

// Vacuum covariance (C = 0) on k modes.
Mat vacuum_covariance(int k);
Mat direct_sum(const Mat& x, const Mat& y);

}  // namespace fgneg
