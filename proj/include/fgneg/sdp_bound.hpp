#pragma once

#include <vector>

#include "fgneg/conic.hpp"
#include "fgneg/covariance.hpp"

namespace fgneg {

// Gamma = [[A, B], [-B^T, D]], a covariance matrix on twice the modes.
struct DoubledCovariance {
  Mat a, b, d;

  Mat matrix() const;
  void validate(double tol = 1e-9) const;
};

struct MapOutput {
  CovarianceMatrix gamma;
  bool pseudo_inverse = false;  // (1 + gamma D) was singular
};

// gamma -> B (gamma^{-1} + D)^{-1} B^T + A, evaluated as
// B (1 + gamma D)^{-1} gamma B^T + A so gamma is never inverted.
MapOutput gaussian_map_apply(const DoubledCovariance& g, const CovarianceMatrix& gamma);

// eta(alpha, beta) = -[[0, a, 0, -b], [-a, 0, -b, 0], [0, b, 0, a], [b, 0, -a, 0]].
Mat eta_block(double alpha, double beta);
// G = J (+) J with J = [[0, 1], [-1, 0]].
Mat g_matrix();

struct EtaBound {
  double tr_g_eta = 0.0;      // = 4 alpha
  double tr_g_eta_inv = 0.0;  // = -4 alpha / (alpha^2 + beta^2)
  double printed = 0.0;       // -1/2 + (1/8) sqrt(16 - tr(G eta^{-1})^2)
  double corrected = 0.0;     // (1/8) sqrt(16 - tr(G eta^{-1})^2)
  Mat eta_inverse;
};

// Requires eta^{-1} to be a covariance matrix (alpha^2 + beta^2 >= 1).
EtaBound two_mode_eta_bound(double alpha, double beta);

struct SdpOptions {
  conic::SolverOptions solver;
  int grid = 5;          // outer grid points per channel parameter
  int refine_rounds = 3;
  double certificate_tol = 1e-7;
  // The printed program is solved in full up to this many modes per side;
  // larger instances certify infeasibility from the eta block alone.
  int literal_full_cap = 2;
};

struct LiteralResult {
  conic::Status status = conic::Status::solver_failure;
  double phase1 = 0.0;       // min s with all constraints shifted by s feasible
  bool full_program = false;  // false: only the eta constraint was tested
};

struct SdpResult {
  conic::Status status = conic::Status::solver_failure;
  // (prod_j T_j - 1)/2 with T_j the twisted trace norm of pair j. Bounds N
  // whenever ||rho^{T_B}||_1 <= ||O_+||_1 holds for the input.
  double bound_n = 0.0;
  // (sqrt 2 prod_j T_j - 1)/2, valid without that assumption.
  double bound_n_unconditional = 0.0;
  std::vector<double> v;          // |alpha_j| + |delta_j| at the chosen point
  std::vector<double> pair_negativity;  // ordinary negativity of each pair
  std::vector<double> pair_twisted;     // T_j
  double t_a = 1.0, t_b = 1.0;    // channel contractions
  double min_eig = 0.0;           // certificate, worst over all LMI blocks
  double primal_residual = 0.0, dual_residual = 0.0, gap = 0.0;
  int solves = 0;
  bool fallback = false;  // no certified point; both bounds are (2^n - 1)/2
  LiteralResult literal;
};

// The program as printed: variables A, B, D (split by side), eta blocks and
// v_j, with the constraints i[[gamma - A, B], [-B^T, eta + D]] >= 0,
// i eta >= 1, 1 - i Gamma >= 0 and v_j >= +-tr(G eta_j).
conic::LmiProgram literal_program(const CovarianceMatrix& gamma, const Bipartition& part);

// Resource program for fixed channel contractions (t_a, t_b), in the local
// frame where the A-B block is diagonal. gamma must be the padded, rotated
// matrix with equal sides.
conic::LmiProgram resource_program(const Mat& gamma, double t_a, double t_b);

SdpResult sdp_upper_bound(const CovarianceMatrix& gamma, const Bipartition& part,
                          const SdpOptions& opt = {});

}  // namespace fgneg
