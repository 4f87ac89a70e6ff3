#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fgneg/lower_bound.hpp"
#include "json.hpp"

namespace fgneg {

struct BoundSelection {
  bool exact = true;
  bool lower = true;
  bool product = true;
  bool sdp = false;
};

struct RunConfig {
  // Model used by report: "ssh" (open chain of `sites`) or "infinite".
  std::string model = "ssh";
  int sites = 8;
  int ell = 2;  // segment length; the two segments sit at the chain center
  double delta = 0.5;
  double beta = std::numeric_limits<double>::infinity();

  std::vector<double> deltas;
  std::vector<double> betas;
  std::vector<int> lengths{16, 32, 64, 128, 256};
  std::vector<int> thermal_lengths{16, 32, 50, 100, 200};
  std::vector<double> thermal_betas{2.0, 5.0, 10.0};
  std::vector<double> spectra_betas;
  int unequal_total = 200;
  std::vector<int> unequal_first{10, 30, 50, 70, 90, 110, 130, 150, 170, 190};

  BoundSelection bounds;
  LowerStrategy lower_strategy = LowerStrategy::svd;
  double sdp_tol = 1e-8;
  int workers = 1;
  std::string out = "out";
  std::uint64_t seed = 1;

  RunConfig();
  // Throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  // FNV-1a of the canonical JSON dump.
  std::uint64_t hash() const;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
  std::string to_csv(std::uint64_t config_hash) const;
};

void write_text(const std::string& path, const std::string& text);

struct FitResult {
  std::string model;
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<std::vector<double>> covariance;
  double residual_norm = 0.0;
  std::vector<double> grid;

  double param(const std::string& name) const;
  nlohmann::json to_json() const;
};

// y ~ sum_j p_j f_j(x) by least squares; names label the basis functions.
FitResult linear_fit(const std::string& model, const std::vector<double>& x,
                     const std::vector<double>& y,
                     const std::vector<std::string>& names,
                     const std::vector<std::function<double(double)>>& basis);

// Lowest level of the doubled product spectrum,
//   eps(l) = a pi^2 / (2 (ln 2l + b)) + c / l,
// Gauss-Newton from the best point of a seed grid over a in [1, 2], b in [0, 3].
FitResult fit_lowest_level(const std::vector<double>& ell,
                           const std::vector<double>& eps);

// Runs body(i) for i < n on up to `workers` threads. The first failing index
// (lowest i) rethrows.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

// Segments of length ell each side of the center of an open chain.
Bipartition central_segments(int sites, int ell);

// Columns delta, E_exact, E_lower, E_hat[, E_sdp]. Every row is checked
// against E_lower <= E_exact <= E_hat + ln sqrt 2.
Table run_fig_groundstate(const RunConfig& cfg);
// Columns delta, beta, E_exact, E_lower, E_hat[, E_sdp], for the two halves
// of the chain (ell is ignored).
Table run_fig_thermal(const RunConfig& cfg);

struct ScalingResult {
  Table equal;      // ell, E_hat, S_half_cross, S_two_cross, S_half, S_two
  Table unequal;    // ell1, ell2, x = ln(l1 l2/(l1+l2)), E_hat, offset
  FitResult slope;  // E_hat = s ln l + c0
  FitResult equal_vs_x;  // equal segments against ln(l/2)
  double collapse_residual = 0.0;  // max distance of unequal rows from equal fit
  // S = s ln l + c0 + d / l for the cross and state entropies.
  std::vector<FitResult> entropy_fits;
  double ratio_half = 0.0, ratio_two = 0.0;
  // Same ratios from the two-parameter fits, for reference.
  double ratio_half_plain = 0.0, ratio_two_plain = 0.0;
  nlohmann::json summary() const;
};
ScalingResult run_scaling(const RunConfig& cfg);

struct SpectraResult {
  Table spectra;  // ell, beta, k, eps_cross, eps_state
  Table lowest;   // ell, beta, eps_min_cross, eps_min_state
  FitResult ansatz;
  int excluded = 0;  // lengths whose lowest level had no degenerate partner
  // Lowest positive cross level at the largest ell, per beta; decreases as
  // beta decreases.
  std::vector<double> flatten_beta, flatten_level;
  bool flatten_monotone = true;
  nlohmann::json summary() const;
};
SpectraResult run_spectra(const RunConfig& cfg);

struct ThermalScalingResult {
  Table table;  // beta, ell, E_hat, x = ln[(beta/pi) tanh(l pi/beta)], offset, E_hat_per_ell
  std::vector<double> betas, saturation;  // E_hat(l_max) - E_hat(largest l <= l_max / 2)
  double offset = 0.0;             // mean of E_hat - x/4 over finite beta
  double collapse_residual = 0.0;  // max |E_hat - x/4 - offset|
  nlohmann::json summary() const;
};
ThermalScalingResult run_thermal_scaling(const RunConfig& cfg);

// Aggregates every selected bound for the configured single instance.
nlohmann::json run_report(const RunConfig& cfg);

}  // namespace fgneg
