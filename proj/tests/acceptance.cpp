// One line per acceptance criterion. Exit status is nonzero if any gating
// criterion fails; criterion 11 only reports.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fgneg/exact.hpp"
#include "fgneg/experiments.hpp"
#include "fgneg/lower_bound.hpp"
#include "fgneg/models.hpp"
#include "fgneg/product_bound.hpp"
#include "fgneg/sdp_bound.hpp"
#include "support.hpp"

using namespace fgneg;
using fgneg::testing::random_covariance;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail,
            bool gating = true) {
  const char* tag = pass ? "PASS" : (gating ? "FAIL" : "FAIL (monitor only)");
  std::printf("[%s] %d. %s: %s\n", tag, id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass && gating) ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Majorana block of the modes in `modes`.
Mat side_block(const CovarianceMatrix& g, const std::vector<int>& modes) {
  const int n = static_cast<int>(modes.size());
  Mat s(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j)
      s(i, j) = g.data()(2 * modes[i / 2] + i % 2, 2 * modes[j / 2] + j % 2);
  return s;
}

// Instances of the regression grid, for criterion 11.
struct Finding {
  std::string where;
  double lower, exact, hat;
};
std::mutex findings_mu;
std::vector<Finding> findings;
int monitored = 0;
int rounding = 0;

// E_hat comes from a non-normal eigenproblem and is good to about 1e-7 (the
// tightness tolerance); smaller excursions are counted, not reported.
void monitor(const std::string& where, double e_lower, double e_exact, double e_hat) {
  std::lock_guard<std::mutex> lk(findings_mu);
  ++monitored;
  const double over = std::max(e_lower - e_exact, e_exact - e_hat);
  if (over > 1e-7) {
    findings.push_back({where, e_lower, e_exact, e_hat});
  } else if (over > 1e-9) {
    ++rounding;
  }
}

double log_of(double n) { return std::log(2.0 * n + 1.0); }

void criterion_1() {
  const auto t0 = clock_type::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    auto g = random_covariance(2, rng, trial % 4 == 0);
    auto nf = two_mode_normal_form(g.data());
    const double h = two_mode_negativity(nf);
    const double m = two_mode_negativity_matrix_route(nf);
    const double d =
        negativity_exact(CovarianceMatrix::unchecked(nf.matrix()), Bipartition::contiguous(1, 1))
            .negativity;
    worst = std::max({worst, std::abs(h - m), std::abs(h - d), std::abs(m - d)});
  }
  const double t = seconds_since(t0);
  report(1, worst < 1e-9 && t < 30.0, "two-mode equivalence",
         fmt("10000 normal forms, max |diff| %.2e (tol 1e-9), %.1f s (limit 30 s)", worst, t));
}

void criterion_2() {
  std::mt19937_64 rng(1002);
  double worst_oracle = 0.0, worst_identity = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = trial % 2 == 0 ? 2 : 3;
    auto g = random_covariance(2 * m, rng, true);
    auto part = Bipartition::contiguous(m, m);
    const double formula = pure_state_negativity(g, part);
    const double dense = negativity_exact(g, part).negativity;
    // (tr rho_A^{1/2})^2 from the dense reduced state.
    auto rho_a = gaussian_state_dense(CovarianceMatrix::unchecked(side_block(g, part.a)));
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (rho_a.data + rho_a.data.adjoint()),
                                           Eigen::EigenvaluesOnly);
    double tr_sqrt = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      tr_sqrt += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
    const double identity = 0.5 * (tr_sqrt * tr_sqrt - 1.0);
    worst_oracle = std::max(worst_oracle, std::abs(formula - dense));
    worst_identity = std::max(worst_identity, std::abs(formula - identity));
  }
  report(2, worst_oracle < 1e-8 && worst_identity < 1e-8, "pure-state formula",
         fmt("200 pure 2x2/3x3 states, |formula - oracle| %.2e, |formula - (tr rho_A^1/2)^2 route| "
             "%.2e (tol 1e-8)",
             worst_oracle, worst_identity));
}

struct SandwichCase {
  std::string name;
  CovarianceMatrix gamma;
  Bipartition part;
  std::optional<CorrelationMatrix> corr;
};

void criterion_3() {
  const auto t0 = clock_type::now();
  std::vector<SandwichCase> cases;
  std::mt19937_64 rng(1003);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + trial % 4;  // 2..5 modes
    const int na = 1 + static_cast<int>(rng() % (k - 1));
    cases.push_back({fmt("random #%d (k=%d, |A|=%d)", trial, k, na),
                     random_covariance(k, rng, trial % 5 == 0), Bipartition::contiguous(na, k - na),
                     std::nullopt});
  }
  RunConfig grid;
  for (double beta : grid.betas)
    for (double delta : grid.deltas)
      for (int ell : {2, 4}) {
        auto c = thermal_correlation({8, delta}, ThermalSpec{beta});
        cases.push_back({fmt("SSH N=8 l=%d delta=%.2f beta=%g", ell, delta, beta),
                         correlation_to_covariance(c), central_segments(8, ell), c});
      }
  const int n = static_cast<int>(cases.size());
  std::vector<double> slack(n), slack_cond(n);
  std::vector<int> fallbacks(n);
  parallel_for(n, 8, [&](int i) {
    const auto& cs = cases[i];
    const double exact = negativity_exact(cs.gamma, cs.part).negativity;
    const double lower = optimize_rotation(cs.gamma, cs.part, LowerStrategy::svd).bound.value;
    const auto pb = cs.corr ? real_variant(*cs.corr, cs.part) : log_trace_norm_upper(cs.gamma, cs.part);
    const auto sdp = sdp_upper_bound(cs.gamma, cs.part);
    fallbacks[i] = sdp.fallback;
    const double upper = std::min(sdp.bound_n_unconditional, pb.n_upper);
    slack[i] = std::min(exact - lower, upper - exact);
    slack_cond[i] = sdp.bound_n - exact;
    monitor(cs.name, log_of(lower), log_of(exact), pb.e_hat);
  });
  const double t = seconds_since(t0);
  const int worst = static_cast<int>(std::min_element(slack.begin(), slack.end()) - slack.begin());
  const double worst_cond = *std::min_element(slack_cond.begin(), slack_cond.end());
  const int fb = static_cast<int>(std::count(fallbacks.begin(), fallbacks.end(), 1));
  report(3, slack[worst] >= -1e-6 && t < 600.0, "bound sandwich",
         fmt("%d instances, worst slack %.2e at %s (tol -1e-6); SDP fallbacks %d; conditional SDP "
             "slack %.2e; %.1f s (limit 600 s)",
             n, slack[worst], cases[worst].name.c_str(), fb, worst_cond, t));
}

void criterion_4() {
  RunConfig c;
  c.deltas = {1.0, -1.0};
  auto t = run_fig_groundstate(c);
  const int e = t.column("E_exact");
  const double d1 = std::abs(t.rows[0][e]);
  const double d2 = std::abs(t.rows[1][e] - std::log(2.0));
  report(4, d1 < 1e-9 && d2 < 1e-9, "ground-state anchors",
         fmt("E(delta=1) = %.2e, E(delta=-1) - ln 2 = %.2e (tol 1e-9)", d1, d2));
}

void criterion_5() {
  // Pure instances: every cut of SSH chains N <= 8 into A = first m sites and
  // B = the rest, plus random pure states on up to 8 modes.
  RunConfig grid;
  struct Case {
    std::string name;
    CorrelationMatrix c;
    CovarianceMatrix g;
    Bipartition part;
  };
  std::vector<Case> cases;
  for (int sites : {2, 4, 6, 8})
    for (double delta : grid.deltas)
      for (int m = 1; m < sites; ++m) {
        auto c = thermal_correlation({sites, delta}, ThermalSpec{kInf});
        cases.push_back({fmt("SSH N=%d delta=%.2f |A|=%d", sites, delta, m), c,
                         correlation_to_covariance(c), Bipartition::contiguous(m, sites - m)});
      }
  std::mt19937_64 rng(1005);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + trial % 7;
    const int na = 1 + static_cast<int>(rng() % (k - 1));
    cases.push_back({fmt("random pure #%d (k=%d)", trial, k), CorrelationMatrix{},
                     random_covariance(k, rng, true), Bipartition::contiguous(na, k - na)});
  }
  const int n = static_cast<int>(cases.size());
  std::vector<double> gap(n);
  parallel_for(n, 8, [&](int i) {
    const auto& cs = cases[i];
    const double e_hat = cs.c.modes() ? real_variant(cs.c, cs.part).e_hat
                                      : log_trace_norm_upper(cs.g, cs.part).e_hat;
    const double e = negativity_exact(cs.g, cs.part).log_negativity;
    gap[i] = std::abs(e_hat - e);
    monitor(cs.name, e, e, e_hat);
  });
  const int worst = static_cast<int>(std::max_element(gap.begin(), gap.end()) - gap.begin());
  report(5, gap[worst] < 1e-7, "pure-state tightness",
         fmt("%d instances, max |E_hat - E| %.2e at %s (tol 1e-7)", n, gap[worst],
             cases[worst].name.c_str()));
}

double unequal_residual = 0.0;
int unequal_total = 0;

void criterion_6_to_8() {
  RunConfig c;
  c.workers = 8;
  const auto t0 = clock_type::now();
  auto s = run_scaling(c);
  const double t = seconds_since(t0);
  const double slope = s.slope.param("s");
  report(6, std::abs(slope - 0.25) <= 0.02 && t < 120.0, "ground-state scaling",
         fmt("slope %.4f over l = 16..256 (target 0.25 +- 0.02), residual %.1e, %.1f s (limit 120 s)",
             slope, s.slope.residual_norm, t));

  auto sp = run_spectra(c);
  const double a = sp.ansatz.param("a"), b = sp.ansatz.param("b");
  report(7, std::abs(a - 1.325) <= 0.05 && std::abs(b - 1.655) <= 0.1, "spectra ansatz",
         fmt("a = %.4f (1.325 +- 0.05), b = %.4f (1.655 +- 0.1), c = %.4f, %d excluded", a, b,
             sp.ansatz.param("c"), sp.excluded));

  const double rh = s.ratio_half, r2 = s.ratio_two;
  const bool ok8 = std::abs(rh / 1.5 - 1.0) <= 0.05 && std::abs(r2 / 1.5 - 1.0) <= 0.05;
  report(8, ok8, "entropy ratio",
         fmt("alpha=1/2: %.4f, alpha=2: %.4f (3/2 +- 5%%, fit s ln l + c0 + d/l); two-parameter "
             "fit: %.4f, %.4f",
             rh, r2, s.ratio_half_plain, s.ratio_two_plain));

  unequal_residual = s.collapse_residual;
  unequal_total = c.unequal_total;
}

void criterion_10() {
  report(10, unequal_residual < 0.02, "unequal segments",
         fmt("l1 + l2 = %d, max deviation from the equal-segment curve %.4f (tol 0.02)",
             unequal_total, unequal_residual));
}

void criterion_9() {
  RunConfig c;
  c.workers = 8;
  c.thermal_betas = {2.0, 5.0, 10.0};
  c.thermal_lengths = {16, 32, 50, 100, 200};
  auto r = run_thermal_scaling(c);
  double worst_inc = 0.0;
  std::string incs;
  for (std::size_t j = 0; j < r.betas.size(); ++j) {
    if (std::isinf(r.betas[j])) continue;
    worst_inc = std::max(worst_inc, std::abs(r.saturation[j]));
    incs += fmt("%s%g: %.1e", incs.empty() ? "" : ", ", r.betas[j], r.saturation[j]);
  }
  report(9, worst_inc < 0.01 && r.collapse_residual < 0.05, "thermal area law",
         fmt("E_hat(200) - E_hat(100) {beta %s} (tol 0.01), collapse residual %.4f (tol 0.05)",
             incs.c_str(), r.collapse_residual));
}

void criterion_11() {
  const bool ok = findings.empty();
  report(11, ok, "conjecture monitor",
         fmt("E_lower <= E <= E_hat on %d regression instances, %zu violations (tol 1e-7), "
             "%d excursions between 1e-9 and 1e-7",
             monitored, findings.size(), rounding),
         false);
  for (std::size_t i = 0; i < std::min<std::size_t>(findings.size(), 10); ++i) {
    const auto& f = findings[i];
    std::printf("    finding: %s: E_lower %.10f, E %.10f, E_hat %.10f\n", f.where.c_str(), f.lower,
                f.exact, f.hat);
  }
}

}  // namespace

void guarded(int id, const char* name, void (*fn)()) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, false, name, std::string("aborted: ") + e.what(), id != 11);
  }
}

int main() {
  guarded(1, "two-mode equivalence", criterion_1);
  guarded(2, "pure-state formula", criterion_2);
  guarded(3, "bound sandwich", criterion_3);
  guarded(4, "ground-state anchors", criterion_4);
  guarded(5, "pure-state tightness", criterion_5);
  guarded(6, "ground-state scaling, spectra ansatz, entropy ratio", criterion_6_to_8);
  guarded(9, "thermal area law", criterion_9);
  guarded(10, "unequal segments", criterion_10);
  guarded(11, "conjecture monitor", criterion_11);
  std::printf("%s: %d gating failure(s)\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
