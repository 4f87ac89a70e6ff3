#include "fgneg/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "fgneg/errors.hpp"

namespace fgneg {

namespace {

double max_eig_abs(const Mat& antisym) {
  if (antisym.rows() == 0) return 0.0;
  CMat h = cplx(0, 1) * antisym.cast<cplx>();
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

CovarianceDiagnostics validate_covariance(const Mat& m) {
  CovarianceDiagnostics d;
  d.even_dimension = m.rows() == m.cols() && m.rows() % 2 == 0;
  if (!d.even_dimension) return d;
  d.antisymmetry_violation =
      m.rows() ? (m + m.transpose()).cwiseAbs().maxCoeff() : 0.0;
  d.is_antisymmetric = d.antisymmetry_violation <= kStructuralTol;
  d.max_abs_eigenvalue = max_eig_abs(0.5 * (m - m.transpose()));
  d.is_physical = d.is_antisymmetric && d.max_abs_eigenvalue <= 1.0 + kSpectralTol;
  return d;
}

CovarianceMatrix::CovarianceMatrix(const Mat& m) {
  auto d = validate_covariance(m);
  if (!d.even_dimension) {
    throw StructuralError("covariance matrix must be square of even dimension");
  }
  if (!d.is_antisymmetric) {
    std::ostringstream os;
    os << "covariance matrix not antisymmetric (violation "
       << d.antisymmetry_violation << ")";
    throw StructuralError(os.str());
  }
  if (!d.is_physical) {
    std::ostringstream os;
    os << "covariance matrix unphysical: max |eig(i gamma)| = "
       << d.max_abs_eigenvalue;
    throw PhysicalityError(os.str());
  }
  data_ = 0.5 * (m - m.transpose());
}

CovarianceMatrix CovarianceMatrix::unchecked(Mat m) {
  CovarianceMatrix g;
  g.data_ = std::move(m);
  return g;
}

CorrelationMatrix::CorrelationMatrix(const CMat& c) {
  if (c.rows() != c.cols()) {
    throw StructuralError("correlation matrix must be square");
  }
  double herm = c.rows() ? (c - c.adjoint()).cwiseAbs().maxCoeff() : 0.0;
  if (herm > kStructuralTol) {
    throw StructuralError("correlation matrix not Hermitian");
  }
  data_ = 0.5 * (c + c.adjoint());
  if (data_.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<CMat> es(data_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kSpectralTol ||
        es.eigenvalues().maxCoeff() > 1.0 + kSpectralTol) {
      throw PhysicalityError("correlation matrix spectrum outside [0, 1]");
    }
  }
}

CorrelationMatrix CorrelationMatrix::from_real(const Mat& c) {
  return CorrelationMatrix(c.cast<cplx>());
}

bool CorrelationMatrix::is_real(double tol) const {
  return data_.rows() == 0 || data_.imag().cwiseAbs().maxCoeff() <= tol;
}

CorrelationMatrix CorrelationMatrix::restrict(std::span<const int> modes) const {
  const int n = static_cast<int>(modes.size());
  CMat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = data_(modes[i], modes[j]);
  CorrelationMatrix r;
  r.data_ = out;
  return r;
}

Bipartition Bipartition::contiguous(int na, int nb) {
  Bipartition p;
  for (int i = 0; i < na; ++i) p.a.push_back(i);
  for (int i = 0; i < nb; ++i) p.b.push_back(na + i);
  return p;
}

std::vector<int> Bipartition::modes() const {
  std::vector<int> all(a);
  all.insert(all.end(), b.begin(), b.end());
  return all;
}

void Bipartition::validate(int total_modes) const {
  if (a.empty() || b.empty()) {
    throw StructuralError("bipartition sides must be non-empty");
  }
  std::set<int> seen;
  for (int m : modes()) {
    if (m < 0 || m >= total_modes) {
      throw StructuralError("bipartition index out of range");
    }
    if (!seen.insert(m).second) {
      throw StructuralError("bipartition sides overlap or repeat a mode");
    }
  }
}

Mat TwoModeNormalForm::matrix() const {
  Mat g(4, 4);
  g << 0, a, 0, -b,
       -a, 0, -c, 0,
       0, c, 0, d,
       b, 0, -d, 0;
  return g;
}

TwoModeNormalForm two_mode_normal_form(const Mat& gamma4) {
  if (gamma4.rows() != 4 || gamma4.cols() != 4) {
    throw StructuralError("two-mode covariance must be 4x4");
  }
  Eigen::Matrix2d k = gamma4.block(0, 2, 2, 2);
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double det_u = svd.matrixU().determinant() < 0 ? -1.0 : 1.0;
  const double det_v = svd.matrixV().determinant() < 0 ? -1.0 : 1.0;
  // Proper rotations U' = U diag(1, det U), V' likewise leave
  // U'^T K V' = diag(s1, det_u det_v s2).  A further quarter turn on B puts
  // the block in the [[0, -b], [-c, 0]] layout.
  TwoModeNormalForm nf;
  nf.a = gamma4(0, 1);
  nf.d = gamma4(2, 3);
  nf.b = svd.singularValues()(0);
  nf.c = -det_u * det_v * svd.singularValues()(1);
  return nf;
}

CovarianceMatrix correlation_to_covariance(const CorrelationMatrix& c) {
  const int k = c.modes();
  Mat g = Mat::Zero(2 * k, 2 * k);
  for (int j = 0; j < k; ++j) {
    for (int l = 0; l < k; ++l) {
      const double re = 2.0 * c.data()(j, l).real() - (j == l ? 1.0 : 0.0);
      const double im = c.data()(j, l).imag();
      g(2 * j, 2 * l + 1) = re;
      g(2 * j + 1, 2 * l) = -re;
      g(2 * j, 2 * l) = -2.0 * im;
      g(2 * j + 1, 2 * l + 1) = -2.0 * im;
    }
  }
  g = 0.5 * (g - g.transpose());
  return CovarianceMatrix::unchecked(g);
}

CorrelationMatrix covariance_to_correlation(const CovarianceMatrix& gamma,
                                            double tol) {
  const int k = gamma.modes();
  const Mat& g = gamma.data();
  CMat c(k, k);
  double violation = 0.0;
  for (int j = 0; j < k; ++j) {
    for (int l = 0; l < k; ++l) {
      violation = std::max(violation,
                           std::abs(g(2 * j, 2 * l) - g(2 * j + 1, 2 * l + 1)));
      violation = std::max(violation,
                           std::abs(g(2 * j, 2 * l + 1) + g(2 * j + 1, 2 * l)));
      c(j, l) = cplx((g(2 * j, 2 * l + 1) + (j == l ? 1.0 : 0.0)) / 2.0,
                     -g(2 * j, 2 * l) / 2.0);
    }
  }
  if (violation > tol) {
    throw StructuralError("covariance matrix does not conserve particle number");
  }
  return CorrelationMatrix(0.5 * (c + c.adjoint()));
}

NormalForm normal_form(const CovarianceMatrix& gamma) {
  const Mat& g = gamma.data();
  const int n = static_cast<int>(g.rows());
  NormalForm nf;
  nf.rotation = Mat::Identity(n, n);
  if (n == 0) return nf;

  // Hermitian route: i*g has eigenpairs (lambda, a + i b) with g a = lambda b
  // and g b = -lambda a, so sqrt(2) a, sqrt(2) b span one block. Degenerate
  // levels stay orthonormal this way; a real Schur of the full matrix does not
  // always deflate them.
  const CMat h = cplx(0, 1) * g.cast<cplx>();
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const auto& lam = es.eigenvalues();
  const CMat& v = es.eigenvectors();
  const double small = 1e-7 * std::max(1.0, g.cwiseAbs().maxCoeff());

  Mat o(n, n);
  int row = 0;
  std::vector<int> low;
  for (int k = 0; k < n; ++k) {
    if (std::abs(lam(k)) <= small) {
      low.push_back(k);
    } else if (lam(k) > 0.0) {
      o.row(row++) = std::sqrt(2.0) * v.col(k).real().transpose();
      o.row(row++) = std::sqrt(2.0) * v.col(k).imag().transpose();
    }
  }
  if (!low.empty()) {
    // Near-null subspace: real orthonormal basis, then a small Schur inside it.
    Mat span(n, 2 * low.size());
    for (std::size_t k = 0; k < low.size(); ++k) {
      span.col(2 * k) = v.col(low[k]).real();
      span.col(2 * k + 1) = v.col(low[k]).imag();
    }
    Eigen::JacobiSVD<Mat> svd(span, Eigen::ComputeThinU);
    const int m = static_cast<int>(low.size());
    const Mat q = svd.matrixU().leftCols(m);
    const Mat sub = q.transpose() * g * q;
    Eigen::RealSchur<Mat> schur(0.5 * (sub - sub.transpose()));
    const Mat basis = q * schur.matrixU();
    for (int k = 0; k < m; ++k) o.row(row++) = basis.col(k).transpose();
  }
  if (row != n) throw NumericalError("normal form: unpaired Majorana modes");
  if (o.determinant() < 0) o.row(0).swap(o.row(1));

  Mat b = o * g * o.transpose();
  Mat blocks = Mat::Zero(n, n);
  nf.x.resize(n / 2);
  for (int j = 0; j < n / 2; ++j) {
    double x = -0.5 * (b(2 * j, 2 * j + 1) - b(2 * j + 1, 2 * j));
    x = std::clamp(x, -1.0, 1.0);
    nf.x[j] = x;
    blocks(2 * j, 2 * j + 1) = -x;
    blocks(2 * j + 1, 2 * j) = x;
  }
  const double resid = (b - blocks).cwiseAbs().maxCoeff();
  if (resid > 1e-8 * std::max(1.0, g.cwiseAbs().maxCoeff()) + 1e-9) {
    throw NumericalError("normal form did not converge to block diagonal form");
  }
  nf.rotation = o;
  return nf;
}

std::vector<int> majorana_indices(std::span<const int> modes) {
  std::vector<int> idx;
  idx.reserve(2 * modes.size());
  for (int m : modes) {
    idx.push_back(2 * m);
    idx.push_back(2 * m + 1);
  }
  return idx;
}

CovarianceMatrix reduced_covariance(const CovarianceMatrix& gamma,
                                    std::span<const int> modes) {
  std::set<int> seen;
  for (int m : modes) {
    if (m < 0 || m >= gamma.modes()) {
      throw StructuralError("mode index out of range");
    }
    if (!seen.insert(m).second) throw StructuralError("repeated mode index");
  }
  auto idx = majorana_indices(modes);
  const int n = static_cast<int>(idx.size());
  Mat r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = gamma(idx[i], idx[j]);
  return CovarianceMatrix::unchecked(r);
}

CovarianceMatrix restrict_to(const CovarianceMatrix& gamma,
                             const Bipartition& part) {
  part.validate(gamma.modes());
  auto modes = part.modes();
  return reduced_covariance(gamma, modes);
}

Bipartition local_partition(const Bipartition& part) {
  return Bipartition::contiguous(part.size_a(), part.size_b());
}

std::vector<Mat> pinch(const CovarianceMatrix& gamma,
                       std::span<const std::pair<int, int>> pairing) {
  std::vector<Mat> out;
  std::set<int> seen;
  for (auto [p, q] : pairing) {
    if (!seen.insert(p).second || !seen.insert(q).second) {
      throw StructuralError("pairing uses a mode more than once");
    }
    const int modes[2] = {p, q};
    out.push_back(reduced_covariance(gamma, modes).data());
  }
  return out;
}

double pfaffian(Mat a) {
  const int n = static_cast<int>(a.rows());
  if (n != a.cols()) throw StructuralError("pfaffian needs a square matrix");
  if (n % 2 == 1) return 0.0;
  double pf = 1.0;
  // Parlett-Reid style reduction with partial pivoting.
  for (int k = 0; k + 1 < n; k += 2) {
    int kp = k + 1;
    double best = std::abs(a(k + 1, k));
    for (int r = k + 2; r < n; ++r) {
      if (std::abs(a(r, k)) > best) {
        best = std::abs(a(r, k));
        kp = r;
      }
    }
    if (kp != k + 1) {
      a.row(k + 1).swap(a.row(kp));
      a.col(k + 1).swap(a.col(kp));
      pf = -pf;
    }
    if (a(k + 1, k) == 0.0) return 0.0;
    pf *= a(k, k + 1);
    if (k + 2 < n) {
      const int rest = n - k - 2;
      Vec tau = a.row(k).tail(rest).transpose() / a(k, k + 1);
      Vec col = a.col(k + 1).tail(rest);
      a.bottomRightCorner(rest, rest) +=
          tau * col.transpose() - col * tau.transpose();
    }
  }
  return pf;
}

double majorana_moment(const CovarianceMatrix& gamma,
                       std::span<const int> indices) {
  const int n = static_cast<int>(indices.size());
  std::set<int> seen;
  for (int i : indices) {
    if (i < 0 || i >= 2 * gamma.modes()) {
      throw StructuralError("Majorana index out of range");
    }
    if (!seen.insert(i).second) throw StructuralError("repeated Majorana index");
  }
  if (n % 2 == 1) return 0.0;
  Mat sub(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sub(i, j) = gamma(indices[i], indices[j]);
  return pfaffian(sub);
}

cplx majorana_expectation(const CovarianceMatrix& gamma,
                          std::span<const int> indices) {
  const int p = static_cast<int>(indices.size()) / 2;
  const double pf = majorana_moment(gamma, indices);
  static const cplx phases[4] = {1.0, cplx(0, -1), -1.0, cplx(0, 1)};
  return phases[p % 4] * pf;
}

Mat vacuum_covariance(int k) {
  Mat g = Mat::Zero(2 * k, 2 * k);
  for (int j = 0; j < k; ++j) {
    g(2 * j, 2 * j + 1) = -1.0;
    g(2 * j + 1, 2 * j) = 1.0;
  }
  return g;
}

Mat direct_sum(const Mat& x, const Mat& y) {
  Mat out = Mat::Zero(x.rows() + y.rows(), x.cols() + y.cols());
  out.topLeftCorner(x.rows(), x.cols()) = x;
  out.bottomRightCorner(y.rows(), y.cols()) = y;
  return out;
}

}  // namespace fgneg
