#include "fgneg/product_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "fgneg/errors.hpp"

namespace fgneg {

namespace {

// sqrt((1+z)/2) + sqrt((1-z)/2): one mode's contribution to tr rho^{1/2}.
double sqrt_weight(double z) {
  z = std::clamp(z, -1.0, 1.0);
  return std::sqrt(0.5 * (1.0 + z)) + std::sqrt(0.5 * (1.0 - z));
}

// Positive-half spectrum of the real antisymmetric matrix s.
std::vector<double> antisym_zeta(const Mat& s) {
  const int n = static_cast<int>(s.rows());
  if (n == 0) return {};
  CMat h = cplx(0, 1) * (0.5 * (s - s.transpose())).cast<cplx>();
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  // Eigenvalues come as +-z; the top half (ascending order) are the z >= 0.
  std::vector<double> z(n / 2);
  for (int j = 0; j < n / 2; ++j) {
    z[j] = std::min(1.0, std::abs(es.eigenvalues()(n - 1 - j)));
  }
  return z;
}

CMat inverse_with_shift(const CMat& x, bool& shifted) {
  Eigen::JacobiSVD<CMat> svd(x);
  const auto& sv = svd.singularValues();
  shifted = sv.size() && sv(sv.size() - 1) < 1e-12 * std::max(1.0, sv(0));
  if (!shifted) return x.inverse();
  return (x + 1e-12 * CMat::Identity(x.rows(), x.cols())).inverse();
}

}  // namespace

std::pair<GaussianOperatorRep, GaussianOperatorRep> gamma_pm(
    const CovarianceMatrix& gamma, const Bipartition& part) {
  CovarianceMatrix local = restrict_to(gamma, part);
  const int n = 2 * local.modes();
  const int na2 = 2 * part.size_a();
  const cplx i(0, 1);
  CVec tp = CVec::Ones(n);
  for (int r = na2; r < n; ++r) tp(r) = i;
  const CMat g = local.data().cast<cplx>();
  GaussianOperatorRep plus, minus;
  plus.gamma = tp.asDiagonal() * g * tp.asDiagonal();
  minus.gamma = plus.gamma.conjugate();
  // Z = tdet(1 + e^W) = tdet(2 (1 + i g)^{-1}).
  for (GaussianOperatorRep* rep : {&plus, &minus}) {
    CMat m = CMat::Identity(n, n) + i * rep->gamma;
    bool shifted = false;
    CMat inv = inverse_with_shift(m, shifted);
    if (shifted) {
      rep->log_norm = std::numeric_limits<double>::infinity();
      continue;
    }
    // Half the log determinant, summed eigenvalue by eigenvalue so the
    // branch follows each factor.
    Eigen::ComplexEigenSolver<CMat> es(2.0 * inv, false);
    rep->log_norm = 0.0;
    for (int r = 0; r < n; ++r) rep->log_norm += 0.5 * std::log(es.eigenvalues()(r));
  }
  return {plus, minus};
}

CrossState gamma_cross(const GaussianOperatorRep& plus,
                       const GaussianOperatorRep& minus) {
  const int n = static_cast<int>(plus.gamma.rows());
  const cplx i(0, 1);
  const CMat id = CMat::Identity(n, n);
  CrossState cs;
  CMat inv = inverse_with_shift(id - plus.gamma * minus.gamma, cs.regularized);
  // In this sign convention the product O+ O- pairs with (1 - i g).
  cs.gamma_x = -i * (id - (id - i * minus.gamma) * inv * (id - i * plus.gamma));
  // i gamma_x has real eigenvalues +-zeta; keep one magnitude per pair.
  Eigen::ComplexEigenSolver<CMat> es(i * cs.gamma_x, false);
  std::vector<double> v;
  for (int r = 0; r < n; ++r) v.push_back(std::abs(es.eigenvalues()(r).real()));
  std::sort(v.rbegin(), v.rend());
  for (int r = 0; r < n; r += 2) cs.zeta.push_back(std::min(1.0, v[r]));
  return cs;
}

CVec cross_spectrum_similar(const GaussianOperatorRep& plus,
                            const GaussianOperatorRep& minus) {
  const int n = static_cast<int>(plus.gamma.rows());
  const CMat id = CMat::Identity(n, n);
  bool shifted = false;
  CMat m = inverse_with_shift(id - plus.gamma * minus.gamma, shifted) *
           (plus.gamma + minus.gamma);
  Eigen::ComplexEigenSolver<CMat> es(m, false);
  return es.eigenvalues();
}

std::vector<double> cross_zeta(const Mat& gamma, int na) {
  const int n = static_cast<int>(gamma.rows());
  const int na2 = 2 * na;
  Mat k = Mat::Zero(n, n);
  k.topLeftCorner(na2, na2) = gamma.topLeftCorner(na2, na2);
  k.bottomRightCorner(n - na2, n - na2) = -gamma.bottomRightCorner(n - na2, n - na2);
  Mat m = 0.5 * (Mat::Identity(n, n) - gamma * gamma);
  m = 0.5 * (m + m.transpose());
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("(1 - gamma^2)/2 is not positive definite");
  }
  Mat l_inv = llt.matrixL().solve(Mat::Identity(n, n));
  return antisym_zeta(l_inv * k * l_inv.transpose());
}

TildeDet tilde_det(const CMat& m, double rel_tol) {
  const int n = static_cast<int>(m.rows());
  if (n != m.cols() || n % 2 != 0) {
    throw StructuralError("tilde_det needs an even square matrix");
  }
  TildeDet td;
  if (n == 0) return td;
  Eigen::ComplexEigenSolver<CMat> es(m, false);
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<bool> used(n, false);
  for (int p = 0; p < n; ++p) {
    if (used[p]) continue;
    used[p] = true;
    int best = -1;
    double gap = std::numeric_limits<double>::infinity();
    for (int q = p + 1; q < n; ++q) {
      if (used[q]) continue;
      const double d = std::abs(ev[p] - ev[q]);
      if (d < gap) {
        gap = d;
        best = q;
      }
    }
    used[best] = true;
    const double rel = gap / std::max(1.0, std::abs(ev[p]));
    td.worst_gap = std::max(td.worst_gap, rel);
    td.value *= 0.5 * (ev[p] + ev[best]);
  }
  if (td.worst_gap > rel_tol) {
    std::ostringstream os;
    os << "spectrum is not doubly degenerate (worst relative pair gap "
       << td.worst_gap << ")";
    throw DegenerateError(os.str());
  }
  return td;
}

std::vector<double> state_zeta(const CovarianceMatrix& gamma) {
  return antisym_zeta(gamma.data());
}

double renyi_entropy(std::span<const double> zeta, double alpha) {
  if (!(alpha > 0.0)) throw StructuralError("Renyi index must be positive");
  double s = 0.0;
  for (double z : zeta) {
    const double p = std::clamp(0.5 * (1.0 + z), 0.0, 1.0);
    const double q = 1.0 - p;
    if (alpha == 1.0) {
      if (p > 0) s -= p * std::log(p);
      if (q > 0) s -= q * std::log(q);
    } else {
      s += std::log(std::pow(p, alpha) + std::pow(q, alpha)) / (1.0 - alpha);
    }
  }
  return s;
}

double renyi_entropy(const CovarianceMatrix& gamma, double alpha) {
  auto z = state_zeta(gamma);
  return renyi_entropy(z, alpha);
}

double renyi_entropy(const CrossState& cross, double alpha) {
  return renyi_entropy(cross.zeta, alpha);
}

EntanglementSpectrum entanglement_spectrum(std::span<const double> zeta) {
  EntanglementSpectrum es;
  const double inf = std::numeric_limits<double>::infinity();
  for (double z : zeta) {
    if (std::abs(z) >= 1.0 - 1e-15) {
      es.eps.push_back(z > 0 ? inf : -inf);
      ++es.infinite;
    } else {
      es.eps.push_back(2.0 * std::atanh(z));
    }
  }
  std::sort(es.eps.begin(), es.eps.end());
  return es;
}

namespace {

ProductBound assemble(std::vector<double> zeta_state,
                      std::vector<double> zeta_cross) {
  ProductBound pb;
  double log_tr = 0.0;
  for (double z : zeta_cross) log_tr += std::log(sqrt_weight(z));
  double log_z = 0.0;
  for (double z : zeta_state) log_z += std::log(0.5 * (1.0 + z * z));
  pb.log_trace_sqrt_cross = log_tr;
  pb.log_z_ratio = log_z;
  pb.e_hat = log_tr + 0.5 * log_z;
  pb.e_upper = pb.e_hat + 0.5 * std::log(2.0);
  pb.n_upper = 0.5 * (std::sqrt(2.0) * std::exp(pb.e_hat) - 1.0);
  pb.renyi_half_cross = renyi_entropy(zeta_cross, 0.5);
  pb.renyi_two_state = renyi_entropy(zeta_state, 2.0);
  pb.zeta_state = std::move(zeta_state);
  pb.zeta_cross = std::move(zeta_cross);
  return pb;
}

}  // namespace

ProductBound log_trace_norm_upper(const CovarianceMatrix& gamma,
                                  const Bipartition& part) {
  CovarianceMatrix local = restrict_to(gamma, part);
  return assemble(state_zeta(local), cross_zeta(local.data(), part.size_a()));
}

CMat real_cross_matrix(const Mat& g, int na) {
  const int n = static_cast<int>(g.rows());
  const cplx i(0, 1);
  CMat gp = g.cast<cplx>(), gm;
  gp.block(0, na, na, n - na) *= i;
  gp.block(na, 0, n - na, na) *= i;
  gp.bottomRightCorner(n - na, n - na) *= -1.0;
  gm = gp.conjugate();
  const CMat id = CMat::Identity(n, n);
  return (id + gm) * (id + gp * gm).inverse() * (id + gp) - id;
}

ProductBound real_variant(const CorrelationMatrix& c, const Bipartition& part) {
  part.validate(c.modes());
  if (!c.is_real(1e-12)) {
    return log_trace_norm_upper(correlation_to_covariance(c), part);
  }
  const int na = part.size_a();
  Mat g = 2.0 * c.restrict(part.modes()).real() -
          Mat::Identity(part.size_a() + part.size_b(), part.size_a() + part.size_b());
  const int n = static_cast<int>(g.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  std::vector<double> zs(es.eigenvalues().data(), es.eigenvalues().data() + n);

  Mat k = Mat::Zero(n, n);
  k.topLeftCorner(na, na) = g.topLeftCorner(na, na);
  k.bottomRightCorner(n - na, n - na) = -g.bottomRightCorner(n - na, n - na);
  Mat m = 0.5 * (Mat::Identity(n, n) + g * g);
  m = 0.5 * (m + m.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(k, m, Eigen::EigenvaluesOnly);
  std::vector<double> zx(n);
  for (int r = 0; r < n; ++r) zx[r] = std::clamp(ges.eigenvalues()(r), -1.0, 1.0);
  return assemble(std::move(zs), std::move(zx));
}

}  // namespace fgneg
