#pragma once

#include <limits>
#include <span>
#include <vector>

#include "fgneg/covariance.hpp"

namespace fgneg {

// Open SSH chain with hoppings t+ = 1 + delta on odd bonds (1-2, 3-4, ...)
// and t- = 1 - delta on even bonds.
struct ChainSpec {
  int sites = 0;
  double delta = 0.0;
};

struct ThermalSpec {
  double beta = std::numeric_limits<double>::infinity();
  static ThermalSpec ground_state() { return {}; }
  bool is_ground_state() const { return beta == std::numeric_limits<double>::infinity(); }
};

struct SingleParticle {
  Mat hamiltonian;  // h in H = sum h_jl f_j^dag f_l
  Vec energies;     // ascending
  Mat modes;        // columns are eigenvectors
};

SingleParticle ssh_single_particle(const ChainSpec& chain);

// Occupation 1/(e^{beta w} + 1); at beta = inf zero modes (|w| <= tol) get 1/2.
double fermi_occupation(double omega, double beta, double zero_tol = 1e-10);

CorrelationMatrix thermal_correlation(const ChainSpec& chain,
                                      const ThermalSpec& thermal);

// C_d = (1/pi) int_0^pi cos(q d) / (e^{-beta cos q} + 1) dq for the
// uniform infinite tight-binding chain at half filling.
double infinite_chain_kernel(int distance, double beta);

// C_0 .. C_max_distance in one pass.
std::vector<double> infinite_chain_kernels(int max_distance, double beta);

// Toeplitz correlation matrix restricted to the given (integer) sites.
CorrelationMatrix infinite_chain_correlation(std::span<const int> sites,
                                             double beta);

}  // namespace fgneg
