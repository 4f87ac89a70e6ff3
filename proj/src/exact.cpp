#include "fgneg/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "fgneg/errors.hpp"

namespace fgneg {

namespace {

void check_modes(int k, int cap) {
  if (k < 0) throw StructuralError("negative mode count");
  if (k > std::min(cap, kHardMaxDenseModes)) {
    throw ResourceError("dense computation on " + std::to_string(k) +
                        " modes exceeds the cap of " +
                        std::to_string(std::min(cap, kHardMaxDenseModes)));
  }
}

// Action of m_a on basis state s: m_a|s> = phase * |s ^ flip>.
struct MajoranaAction {
  std::uint32_t flip;
  cplx phase;
};

MajoranaAction act(int a, int k, std::uint32_t s) {
  const int mode = a / 2;
  const int pos = k - 1 - mode;
  const std::uint32_t bit = 1u << pos;
  const int string_parity = std::popcount(s >> (pos + 1)) & 1;
  cplx phase = string_parity ? -1.0 : 1.0;
  if (a % 2 == 1) phase *= (s & bit) ? cplx(0, -1) : cplx(0, 1);
  return {bit, phase};
}

}  // namespace

std::vector<CMat> jw_majoranas(int k) {
  check_modes(k, kHardMaxDenseModes);
  const int dim = 1 << k;
  std::vector<CMat> ms;
  ms.reserve(2 * k);
  for (int a = 0; a < 2 * k; ++a) {
    CMat m = CMat::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
      auto [flip, phase] = act(a, k, static_cast<std::uint32_t>(s));
      m(s ^ flip, s) = phase;
    }
    ms.push_back(std::move(m));
  }
  return ms;
}

CMat apply_majorana(int a, int k, const CMat& x) {
  const int dim = 1 << k;
  CMat out(dim, x.cols());
  for (int s = 0; s < dim; ++s) {
    auto [flip, phase] = act(a, k, static_cast<std::uint32_t>(s));
    out.row(s ^ flip) = phase * x.row(s);
  }
  return out;
}

DenseOperator gaussian_state_dense(const CovarianceMatrix& gamma) {
  const int k = gamma.modes();
  check_modes(k, kHardMaxDenseModes);
  const int dim = 1 << k;
  NormalForm nf = normal_form(gamma);
  const Mat& o = nf.rotation;

  // rho = prod_j (1 + i g_j mt_{2j} mt_{2j+1}) / 2 with mt = O m and
  // g_j = (O gamma O^T)_{2j,2j+1} = -x_j.  Exact for pure states as well.
  CMat rho = CMat::Identity(dim, dim);
  for (int j = 0; j < k; ++j) {
    const double g = -nf.x[j];
    CMat y = CMat::Zero(dim, dim);
    for (int d = 0; d < 2 * k; ++d) {
      const double w = o(2 * j + 1, d);
      if (w != 0.0) y += w * apply_majorana(d, k, rho);
    }
    CMat z = CMat::Zero(dim, dim);
    for (int c = 0; c < 2 * k; ++c) {
      const double w = o(2 * j, c);
      if (w != 0.0) z += w * apply_majorana(c, k, y);
    }
    rho = 0.5 * (rho + cplx(0, g) * z);
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return {rho, k};
}

DenseOperator gaussian_operator_dense(const CMat& gamma_sigma) {
  if (gamma_sigma.rows() != gamma_sigma.cols() || gamma_sigma.rows() % 2 != 0) {
    throw StructuralError("operator covariance must be square of even size");
  }
  const int n = static_cast<int>(gamma_sigma.rows());
  const int k = n / 2;
  check_modes(k, kHardMaxDenseModes);
  if (n && (gamma_sigma + gamma_sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw StructuralError("operator covariance must be antisymmetric");
  }
  const cplx i(0, 1);
  const CMat id = CMat::Identity(n, n);
  const CMat plus = id + i * gamma_sigma;
  const CMat minus = id - i * gamma_sigma;
  Eigen::JacobiSVD<CMat> sp(plus), sm(minus);
  auto rcond = [](const Eigen::JacobiSVD<CMat>& s) {
    const auto& v = s.singularValues();
    return v.size() ? v(v.size() - 1) / v(0) : 1.0;
  };
  if (n && (rcond(sp) < 1e-12 || rcond(sm) < 1e-12)) {
    throw DegenerateError(
        "1 +- i*gamma is singular; the operator is a pure-state limit. "
        "Shrink the covariance by a factor (1 - eps) to approach it");
  }
  CMat w = (plus * minus.inverse()).log();

  const int dim = 1 << k;
  // Q = (1/4) sum_a m_a V_a with V_a = sum_b W_ab m_b.
  CMat q = CMat::Zero(dim, dim);
  for (int a = 0; a < n; ++a) {
    CMat v = CMat::Zero(dim, dim);
    for (int b = 0; b < n; ++b) {
      if (w(a, b) == 0.0) continue;
      for (int s = 0; s < dim; ++s) {
        auto [flip, phase] = act(b, k, static_cast<std::uint32_t>(s));
        v(s ^ flip, s) += w(a, b) * phase;
      }
    }
    q += 0.25 * apply_majorana(a, k, v);
  }
  CMat e = q.exp();
  const cplx z = e.trace();
  if (std::abs(z) < 1e-300 || !std::isfinite(std::abs(z))) {
    throw DegenerateError("Gaussian operator has vanishing or infinite trace");
  }
  return {e / z, k};
}

DenseOperator partial_transpose_dense(const DenseOperator& rho,
                                      const Bipartition& part) {
  const int k = rho.modes;
  const int nb = part.size_b();
  for (int i = 0; i < nb; ++i) {
    if (part.b[i] != k - nb + i) {
      throw UnsupportedError(
          "partial transpose requires B to be the trailing block of modes");
    }
  }
  for (int m : part.a) {
    if (m < 0 || m >= k - nb) throw StructuralError("A mode out of range");
  }
  const int dim = 1 << k;
  const int db = 1 << nb;
  const int da = dim / db;
  CMat out(dim, dim);
  for (int ra = 0; ra < da; ++ra)
    for (int rb = 0; rb < db; ++rb)
      for (int ca = 0; ca < da; ++ca)
        for (int cb = 0; cb < db; ++cb)
          out(ra * db + rb, ca * db + cb) = rho.data(ra * db + cb, ca * db + rb);
  return {out, k};
}

double trace_norm_hermitian(const CMat& h) {
  CMat herm = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

ExactNegativityResult negativity_exact(const CovarianceMatrix& gamma,
                                       const Bipartition& part, int max_modes) {
  CovarianceMatrix local = restrict_to(gamma, part);
  check_modes(local.modes(), max_modes);
  DenseOperator rho = gaussian_state_dense(local);
  DenseOperator pt = partial_transpose_dense(rho, local_partition(part));
  ExactNegativityResult r;
  r.trace_norm = trace_norm_hermitian(pt.data);
  r.negativity = 0.5 * (r.trace_norm - 1.0);
  r.log_negativity = std::log(r.trace_norm);
  return r;
}

double h_function(const TwoModeNormalForm& nf) {
  const double a = nf.a, b = nf.b, c = nf.c, d = nf.d;
  const double cross = a * d + b * c;
  const double t1 = std::sqrt((a + d) * (a + d) + (b - c) * (b - c)) - cross;
  const double t2 = std::sqrt((a - d) * (a - d) + (b + c) * (b + c)) + cross;
  return 0.5 + 0.5 * std::max({1.0, t1, t2});
}

double two_mode_negativity(const TwoModeNormalForm& nf) {
  return 0.5 * (h_function(nf) - 1.0);
}

CMat two_mode_density_matrix(const TwoModeNormalForm& nf) {
  const double a = nf.a, b = nf.b, c = nf.c, d = nf.d;
  const double cross = a * d + b * c;
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = -(a + d) + cross;
  m(1, 1) = (a - d) - cross;
  m(2, 2) = -(a - d) - cross;
  m(3, 3) = (a + d) + cross;
  m(0, 3) = m(3, 0) = b + c;
  m(1, 2) = m(2, 1) = b - c;
  return (0.25 * (Mat::Identity(4, 4) + m)).cast<cplx>();
}

double two_mode_negativity_matrix_route(const TwoModeNormalForm& nf) {
  DenseOperator rho{two_mode_density_matrix(nf), 2};
  Bipartition p = Bipartition::contiguous(1, 1);
  return 0.5 * (trace_norm_hermitian(partial_transpose_dense(rho, p).data) - 1.0);
}

double g_function(double a) {
  return 1.0 + std::sqrt(std::max(0.0, 1.0 - a * a));
}

double pure_state_negativity(const CovarianceMatrix& gamma,
                             const Bipartition& part) {
  CovarianceMatrix local = restrict_to(gamma, part);
  const Mat& g = local.data();
  const int n = static_cast<int>(g.rows());
  const double impurity = (g * g + Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  if (impurity > 1e-8) {
    throw PhysicalityError("state on A u B is not pure (|gamma^2 + 1| = " +
                           std::to_string(impurity) + ")");
  }
  const int na = part.size_a();
  CovarianceMatrix ga = CovarianceMatrix::unchecked(g.topLeftCorner(2 * na, 2 * na));
  NormalForm nf = normal_form(ga);
  double prod = 1.0;
  for (double a : nf.x) prod *= g_function(a);
  return 0.5 * (prod - 1.0);
}

double block_product_negativity(std::span<const TwoModeNormalForm> blocks) {
  double prod = 1.0;
  for (const auto& b : blocks) prod *= h_function(b);
  return 0.5 * (prod - 1.0);
}

DenseOperator substitute_b_majoranas(const DenseOperator& op,
                                     const Bipartition& part, cplx factor) {
  const int k = op.modes;
  check_modes(k, kHardMaxDenseModes);
  const int n = 2 * k;
  const int dim = 1 << k;
  std::uint64_t b_mask = 0;
  for (int m : part.b) {
    if (m < 0 || m >= k) throw StructuralError("B mode out of range");
    b_mask |= (std::uint64_t{3} << (2 * m));
  }
  std::vector<cplx> powers(n + 1, 1.0);
  for (int p = 1; p <= n; ++p) powers[p] = powers[p - 1] * factor;

  CMat out = CMat::Zero(dim, dim);
  std::vector<std::uint32_t> target(dim);
  std::vector<cplx> phase(dim);
  for (std::uint64_t tau = 0; tau < (std::uint64_t{1} << n); ++tau) {
    // Monomial m^tau = m_{i1} m_{i2} ... with ascending indices.
    for (int s = 0; s < dim; ++s) {
      std::uint32_t st = static_cast<std::uint32_t>(s);
      cplx ph = 1.0;
      for (int a = n - 1; a >= 0; --a) {
        if (!((tau >> a) & 1)) continue;
        auto [flip, p] = act(a, k, st);
        ph *= p;
        st ^= flip;
      }
      target[s] = st;
      phase[s] = ph;
    }
    // Coefficient tr(m^tau^dag op) / 2^k.
    cplx coeff = 0.0;
    for (int s = 0; s < dim; ++s) coeff += std::conj(phase[s]) * op.data(target[s], s);
    coeff /= static_cast<double>(dim);
    if (std::abs(coeff) < 1e-16) continue;
    const int pb = std::popcount(tau & b_mask);
    const cplx w = coeff * powers[pb];
    for (int s = 0; s < dim; ++s) out(target[s], s) += w * phase[s];
  }
  return {out, k};
}

DenseOperator rhoTB_gaussian_decomposition(const CovarianceMatrix& gamma,
                                           const Bipartition& part,
                                           int max_modes) {
  CovarianceMatrix local = restrict_to(gamma, part);
  check_modes(local.modes(), max_modes);
  const int na = part.size_a();
  const int n = 2 * local.modes();
  const cplx i(0, 1);
  CVec tp = CVec::Ones(n), tm = CVec::Ones(n);
  for (int r = 2 * na; r < n; ++r) {
    tp(r) = i;
    tm(r) = -i;
  }
  const CMat g = local.data().cast<cplx>();
  const CMat gp = tp.asDiagonal() * g * tp.asDiagonal();
  const CMat gm = tm.asDiagonal() * g * tm.asDiagonal();
  DenseOperator op = gaussian_operator_dense(gp);
  DenseOperator om = gaussian_operator_dense(gm);
  CMat out = 0.5 * (1.0 - i) * op.data + 0.5 * (1.0 + i) * om.data;
  return {out, local.modes()};
}

double twisted_trace_norm(const CovarianceMatrix& gamma, const Bipartition& part,
                          int max_modes) {
  CovarianceMatrix local = restrict_to(gamma, part);
  check_modes(local.modes(), max_modes);
  DenseOperator rho = gaussian_state_dense(local);
  DenseOperator op = substitute_b_majoranas(rho, local_partition(part), cplx(0, 1));
  Eigen::JacobiSVD<CMat> svd(op.data);
  return svd.singularValues().sum();
}

}  // namespace fgneg
