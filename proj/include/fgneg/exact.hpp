#pragma once

#include <span>
#include <vector>

#include "fgneg/covariance.hpp"

namespace fgneg {

inline constexpr int kDefaultMaxDenseModes = 10;
inline constexpr int kHardMaxDenseModes = 12;

struct DenseOperator {
  CMat data;
  int modes = 0;
};

struct ExactNegativityResult {
  double trace_norm = 1.0;
  double negativity = 0.0;
  double log_negativity = 0.0;
};

// Jordan-Wigner Majoranas. Mode 0 is the most significant qubit:
// m_{2j} = Z^{(x)j} (x) X (x) 1, m_{2j+1} = Z^{(x)j} (x) Y (x) 1.
std::vector<CMat> jw_majoranas(int k);

// Left-multiplies x by Majorana m_a of a k-mode register, without
// materializing m_a.
CMat apply_majorana(int a, int k, const CMat& x);

DenseOperator gaussian_state_dense(const CovarianceMatrix& gamma);

// Unit-trace Gaussian operator with a complex covariance gamma_sigma,
// built as exp(sum W_kl m_k m_l / 4) / Z with W = ln[(1+i g)(1-i g)^{-1}].
DenseOperator gaussian_operator_dense(const CMat& gamma_sigma);

// Qubit partial transpose over the trailing modes listed in part.b.
DenseOperator partial_transpose_dense(const DenseOperator& rho,
                                      const Bipartition& part);

double trace_norm_hermitian(const CMat& h);

ExactNegativityResult negativity_exact(const CovarianceMatrix& gamma,
                                       const Bipartition& part,
                                       int max_modes = kDefaultMaxDenseModes);

double h_function(const TwoModeNormalForm& nf);
double two_mode_negativity(const TwoModeNormalForm& nf);

// The explicit 4x4 two-qubit density matrix of a two-mode normal form and the
// negativity obtained from its qubit partial transpose.
CMat two_mode_density_matrix(const TwoModeNormalForm& nf);
double two_mode_negativity_matrix_route(const TwoModeNormalForm& nf);

double g_function(double a);
double pure_state_negativity(const CovarianceMatrix& gamma,
                             const Bipartition& part);
double block_product_negativity(std::span<const TwoModeNormalForm> blocks);

// rho^{T_B} = (1-i)/2 O_+ + (1+i)/2 O_-, with O_pm built from gamma_pm.
DenseOperator rhoTB_gaussian_decomposition(const CovarianceMatrix& gamma,
                                           const Bipartition& part,
                                           int max_modes = kDefaultMaxDenseModes);

// Replaces every B Majorana by factor * m_b in the monomial expansion of op.
// With factor = +-i this yields O_pm directly from rho, for any rho.
DenseOperator substitute_b_majoranas(const DenseOperator& op,
                                     const Bipartition& part, cplx factor);

// Trace norm of O_+ (the twisted partial transpose), from the dense state.
double twisted_trace_norm(const CovarianceMatrix& gamma, const Bipartition& part,
                          int max_modes = kDefaultMaxDenseModes);

}  // namespace fgneg
