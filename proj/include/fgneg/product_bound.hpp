#pragma once

#include <span>
#include <utility>
#include <vector>

#include "fgneg/covariance.hpp"

namespace fgneg {

struct GaussianOperatorRep {
  CMat gamma;
  cplx log_norm = 0.0;  // ln Z = (1/2) ln det(1 + e^W) = (1/2) ln det 2(1 + i g)^{-1}
};

// gamma_pm = T gamma T with T = 1 on A and +-i on B, on the A-first
// restriction to A u B.
std::pair<GaussianOperatorRep, GaussianOperatorRep> gamma_pm(
    const CovarianceMatrix& gamma, const Bipartition& part);

struct CrossState {
  CMat gamma_x;             // from the closed product formula
  std::vector<double> zeta;  // one |zeta_x| per mode
  bool regularized = false;  // (1 - g+ g-) needed a Tikhonov shift
};

// gamma_x of rho_x = O+ O- / tr(O+ O-).
CrossState gamma_cross(const GaussianOperatorRep& plus,
                       const GaussianOperatorRep& minus);

// Eigenvalues of (1 - g+ g-)^{-1} (g+ + g-), the similarity-equivalent form.
CVec cross_spectrum_similar(const GaussianOperatorRep& plus,
                            const GaussianOperatorRep& minus);

// |zeta_x| from the symmetric-definite pencil
// ((1 - gamma^2)/2, gamma_A (+) -gamma_B); gamma must be A-first on A u B.
std::vector<double> cross_zeta(const Mat& gamma, int na);

struct TildeDet {
  cplx value = 1.0;
  double worst_gap = 0.0;
};

// Product over one eigenvalue per degenerate pair.  Throws DegenerateError
// if the spectrum does not pair up within relative tolerance rel_tol.
TildeDet tilde_det(const CMat& m, double rel_tol = 1e-6);

struct ProductBound {
  double e_hat = 0.0;    // ln tr (O+ O-)^{1/2}
  double e_upper = 0.0;  // e_hat + ln sqrt 2
  double n_upper = 0.0;  // (sqrt 2 e^{e_hat} - 1) / 2
  double log_trace_sqrt_cross = 0.0;  // ln tr rho_x^{1/2}
  double log_z_ratio = 0.0;           // ln Z_x / (Z+ Z-)
  double renyi_half_cross = 0.0;      // S_{1/2}(rho_x)
  double renyi_two_state = 0.0;       // S_2(rho_{A u B})
  std::vector<double> zeta_state;
  std::vector<double> zeta_cross;
};

ProductBound log_trace_norm_upper(const CovarianceMatrix& gamma,
                                  const Bipartition& part);

// Same bound from G = 2C - 1 with ordinary determinants.  Complex C falls
// back to the Majorana path.
ProductBound real_variant(const CorrelationMatrix& c, const Bipartition& part);

// G_x from the G-path product formula, for cross-checks.  Complex in
// general; its spectrum is real.
CMat real_cross_matrix(const Mat& g, int na);

// Nonnegative per-mode zetas (normal-form values) of a covariance matrix.
std::vector<double> state_zeta(const CovarianceMatrix& gamma);

// S_alpha from per-mode zetas; alpha = 1 gives the von Neumann entropy.
double renyi_entropy(std::span<const double> zeta, double alpha);
double renyi_entropy(const CovarianceMatrix& gamma, double alpha);
double renyi_entropy(const CrossState& cross, double alpha);

struct EntanglementSpectrum {
  std::vector<double> eps;  // sorted; |zeta| = 1 maps to +-infinity
  int infinite = 0;
};

EntanglementSpectrum entanglement_spectrum(std::span<const double> zeta);

}  // namespace fgneg
