#include "fgneg/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fgneg/errors.hpp"

namespace fgneg {

SingleParticle ssh_single_particle(const ChainSpec& chain) {
  if (chain.sites <= 0 || chain.sites % 2 != 0) {
    throw ConfigError("SSH chain needs a positive even number of sites");
  }
  if (!(std::abs(chain.delta) <= 1.0)) {
    throw ConfigError("dimerization must lie in [-1, 1]");
  }
  const int n = chain.sites;
  const double tp = 1.0 + chain.delta;
  const double tm = 1.0 - chain.delta;
  SingleParticle sp;
  sp.hamiltonian = Mat::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) {
    // 0-based bond (j, j+1): bonds 0-1, 2-3, ... carry t+.
    const double t = (j % 2 == 0) ? tp : tm;
    sp.hamiltonian(j, j + 1) = -0.5 * t;
    sp.hamiltonian(j + 1, j) = -0.5 * t;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(sp.hamiltonian);
  sp.energies = es.eigenvalues();
  sp.modes = es.eigenvectors();
  return sp;
}

double fermi_occupation(double omega, double beta, double zero_tol) {
  if (std::isinf(beta)) {
    if (omega < -zero_tol) return 1.0;
    if (omega > zero_tol) return 0.0;
    return 0.5;
  }
  return 0.5 * (1.0 - std::tanh(0.5 * beta * omega));
}

CorrelationMatrix thermal_correlation(const ChainSpec& chain,
                                      const ThermalSpec& thermal) {
  if (!(thermal.beta > 0.0)) throw ConfigError("beta must be positive");
  auto sp = ssh_single_particle(chain);
  Vec occ(sp.energies.size());
  for (int k = 0; k < occ.size(); ++k) {
    occ(k) = fermi_occupation(sp.energies(k), thermal.beta);
  }
  // Real eigenvectors, so C_{mn} = sum_k phi_k(m) phi_k(n) f(w_k).
  Mat c = sp.modes * occ.asDiagonal() * sp.modes.transpose();
  c = 0.5 * (c + c.transpose());
  return CorrelationMatrix::from_real(c);
}

namespace {

double kernel_gk(int d, double beta) {
  constexpr double pi = std::numbers::pi;
  auto f = [d, beta](double q) {
    return std::cos(q * d) * 0.5 * (1.0 + std::tanh(0.5 * beta * std::cos(q)));
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double lo = GK::integrate(f, 0.0, pi / 2.0, 20, 1e-12);
  const double hi = GK::integrate(f, pi / 2.0, pi, 20, 1e-12);
  return (lo + hi) / pi;
}

}  // namespace

std::vector<double> infinite_chain_kernels(int max_distance, double beta) {
  if (max_distance < 0) throw ConfigError("distance range must be non-negative");
  constexpr double pi = std::numbers::pi;
  std::vector<double> k(max_distance + 1);
  if (std::isinf(beta)) {
    for (int d = 0; d <= max_distance; ++d) k[d] = infinite_chain_kernel(d, beta);
    return k;
  }
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  // The periodic trapezoid rule on M points returns sum_j C_{d + jM}. C_x
  // decays like exp(-kappa x) with kappa = asinh(pi / beta).
  const double kappa = std::asinh(pi / beta);
  const double need = max_distance + 42.0 / kappa + 64.0;
  constexpr double m_cap = 1 << 20;
  if (need > m_cap) {
    for (int d = 0; d <= max_distance; ++d) k[d] = kernel_gk(d, beta);
    return k;
  }
  const long m = 2 * static_cast<long>(std::ceil(need / 2.0));
  std::vector<double> cosine(m), occ(m);
  for (long j = 0; j < m; ++j) {
    cosine[j] = std::cos(2.0 * pi * static_cast<double>(j) / static_cast<double>(m));
    occ[j] = 0.5 * (1.0 + std::tanh(0.5 * beta * cosine[j]));
  }
  for (int d = 0; d <= max_distance; ++d) {
    double s = 0.0;
    long idx = 0;
    for (long j = 0; j < m; ++j) {
      s += cosine[idx] * occ[j];
      idx += d;
      if (idx >= m) idx -= m;
    }
    k[d] = s / static_cast<double>(m);
  }
  return k;
}

double infinite_chain_kernel(int distance, double beta) {
  const int d = std::abs(distance);
  constexpr double pi = std::numbers::pi;
  if (std::isinf(beta)) {
    if (d == 0) return 0.5;
    return std::sin(pi * d / 2.0) / (pi * d);
  }
  return infinite_chain_kernels(d, beta)[d];
}

CorrelationMatrix infinite_chain_correlation(std::span<const int> sites,
                                             double beta) {
  const int n = static_cast<int>(sites.size());
  int max_dist = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      max_dist = std::max(max_dist, std::abs(sites[i] - sites[j]));
  const auto kernel = infinite_chain_kernels(max_dist, beta);
  Mat c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = kernel[std::abs(sites[i] - sites[j])];
  return CorrelationMatrix::from_real(c);
}

}  // namespace fgneg
