#include "fgneg/sdp_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include <Eigen/LU>
#include <Eigen/QR>

#include "fgneg/errors.hpp"
#include "fgneg/exact.hpp"
#include "fgneg/lower_bound.hpp"

namespace fgneg {

using conic::LmiProgram;
using conic::Status;

Mat DoubledCovariance::matrix() const {
  const int m = static_cast<int>(a.rows());
  Mat g(2 * m, 2 * m);
  g << a, b, -b.transpose(), d;
  return g;
}

void DoubledCovariance::validate(double tol) const {
  const int m = static_cast<int>(a.rows());
  if (a.cols() != m || b.rows() != m || b.cols() != m || d.rows() != m || d.cols() != m) {
    throw StructuralError("doubled covariance blocks must be square and equal");
  }
  auto diag = validate_covariance(matrix());
  if (!diag.even_dimension || diag.antisymmetry_violation > tol) {
    throw StructuralError("doubled covariance is not antisymmetric");
  }
  if (diag.max_abs_eigenvalue > 1.0 + tol) {
    throw PhysicalityError("doubled covariance violates i Gamma <= 1");
  }
}

MapOutput gaussian_map_apply(const DoubledCovariance& g, const CovarianceMatrix& gamma) {
  const int m = static_cast<int>(g.a.rows());
  if (gamma.data().rows() != m) throw StructuralError("map and input sizes differ");
  const Mat& x = gamma.data();
  Mat k = Mat::Identity(m, m) + x * g.d;
  MapOutput out;
  Eigen::JacobiSVD<Mat> svd(k);
  const auto& sv = svd.singularValues();
  Mat inner;
  if (m && sv(m - 1) < 1e-12 * std::max(1.0, sv(0))) {
    out.pseudo_inverse = true;
    inner = k.completeOrthogonalDecomposition().pseudoInverse() * x;
  } else {
    inner = k.partialPivLu().solve(x);
  }
  out.gamma = CovarianceMatrix(g.b * inner * g.b.transpose() + g.a);
  return out;
}

Mat eta_block(double alpha, double beta) {
  Mat e(4, 4);
  e << 0, alpha, 0, -beta,
      -alpha, 0, -beta, 0,
      0, beta, 0, alpha,
      beta, 0, -alpha, 0;
  return -e;
}

Mat g_matrix() {
  Mat g = Mat::Zero(4, 4);
  g(0, 1) = g(2, 3) = 1.0;
  g(1, 0) = g(3, 2) = -1.0;
  return g;
}

EtaBound two_mode_eta_bound(double alpha, double beta) {
  const double r2 = alpha * alpha + beta * beta;
  if (r2 < 1.0 - 1e-12) {
    throw PhysicalityError("eta^{-1} is not a covariance matrix (alpha^2 + beta^2 < 1)");
  }
  EtaBound eb;
  const Mat eta = eta_block(alpha, beta);
  eb.eta_inverse = eta.inverse();
  const Mat g = g_matrix();
  eb.tr_g_eta = (g * eta).trace();
  eb.tr_g_eta_inv = (g * eb.eta_inverse).trace();
  const double root = std::sqrt(std::max(0.0, 16.0 - eb.tr_g_eta_inv * eb.tr_g_eta_inv)) / 8.0;
  eb.printed = -0.5 + root;
  eb.corrected = root;
  return eb;
}

namespace {

// Upper-triangle entries of i*M for a real matrix variable placed at
// (r0, c0) of a Hermitian block; coef multiplies the unit entry.
void herm_unit(LmiProgram& p, int block, int r, int c, cplx coef, int var) {
  if (r < c) {
    p.add_herm(block, r, c, coef, var);
  } else if (r > c) {
    p.add_herm(block, c, r, std::conj(coef), var);
  }
}

int padded_modes(const Bipartition& part) { return std::max(part.size_a(), part.size_b()); }

}  // namespace

LmiProgram literal_program(const CovarianceMatrix& gamma, const Bipartition& part) {
  const Mat g = padded_covariance(gamma, part).data();
  const int n = padded_modes(part);
  const int h = 2 * n;   // Majoranas per side
  const int w = 4 * n;   // Majoranas of the pair
  const cplx i(0, 1);
  LmiProgram p;
  const int cf = p.add_block(4 * w, "i[[gamma - A, B], [-B^T, eta + D]] >= 0");
  const int ce = p.add_block(4 * w, "1 - i[[A, B], [-B^T, D]] >= 0");
  const int ie = p.add_block(2 * w, "i eta - 1 >= 0");

  for (int r = 0; r < w; ++r) {
    p.add_herm(ce, r, r, 1.0);
    p.add_herm(ce, w + r, w + r, 1.0);
    p.add_herm(ie, r, r, -1.0);
    for (int c = r + 1; c < w; ++c) p.add_herm(cf, r, c, i * g(r, c));
  }
  for (int s = 0; s < 2; ++s) {
    const int off = s * h;
    const char side = s == 0 ? '1' : '2';
    for (int a = 0; a < h; ++a)
      for (int b = a + 1; b < h; ++b) {
        int va = p.add_var(std::string("A") + side + "_" + std::to_string(a) + "_" + std::to_string(b));
        herm_unit(p, cf, off + a, off + b, -i, va);
        herm_unit(p, ce, off + a, off + b, -i, va);
        int vd = p.add_var(std::string("D") + side + "_" + std::to_string(a) + "_" + std::to_string(b));
        herm_unit(p, cf, w + off + a, w + off + b, i, vd);
        herm_unit(p, ce, w + off + a, w + off + b, -i, vd);
      }
    for (int a = 0; a < h; ++a)
      for (int b = 0; b < h; ++b) {
        int vb = p.add_var(std::string("B") + side + "_" + std::to_string(a) + "_" + std::to_string(b));
        herm_unit(p, cf, off + a, w + off + b, i, vb);
        herm_unit(p, ce, off + a, w + off + b, -i, vb);
      }
  }
  const Mat ua = eta_block(1.0, 0.0), ub = eta_block(0.0, 1.0);
  for (int j = 0; j < n; ++j) {
    const int idx[4] = {2 * j, 2 * j + 1, h + 2 * j, h + 2 * j + 1};
    const int va = p.add_var("alpha_" + std::to_string(j));
    const int vb = p.add_var("beta_" + std::to_string(j));
    const int vv = p.add_var("v_" + std::to_string(j), 1.0);
    for (int u = 0; u < 4; ++u)
      for (int t = u + 1; t < 4; ++t) {
        if (ua(u, t) != 0.0) {
          herm_unit(p, cf, w + idx[u], w + idx[t], i * ua(u, t), va);
          herm_unit(p, ie, idx[u], idx[t], i * ua(u, t), va);
        }
        if (ub(u, t) != 0.0) {
          herm_unit(p, cf, w + idx[u], w + idx[t], i * ub(u, t), vb);
          herm_unit(p, ie, idx[u], idx[t], i * ub(u, t), vb);
        }
      }
    // v_j >= +-tr(G eta_j) = +-4 alpha_j.
    const double tg = (g_matrix() * ua).trace();
    for (double sgn : {1.0, -1.0}) {
      const int lp = p.add_block(1, "v_" + std::to_string(j) + " >= |tr(G eta_j)|");
      p.add_sym(lp, 0, 0, 1.0, vv);
      p.add_sym(lp, 0, 0, -sgn * tg, va);
    }
  }
  return p;
}

namespace {

// Only the i eta >= 1 part of the printed program.
LmiProgram eta_only_program(int n) {
  const cplx i(0, 1);
  LmiProgram p;
  const int ie = p.add_block(8 * n, "i eta - 1 >= 0");
  for (int r = 0; r < 4 * n; ++r) p.add_herm(ie, r, r, -1.0);
  const Mat ua = eta_block(1.0, 0.0), ub = eta_block(0.0, 1.0);
  for (int j = 0; j < n; ++j) {
    const int idx[4] = {2 * j, 2 * j + 1, 2 * n + 2 * j, 2 * n + 2 * j + 1};
    const int va = p.add_var("alpha_" + std::to_string(j));
    const int vb = p.add_var("beta_" + std::to_string(j));
    for (int u = 0; u < 4; ++u)
      for (int t = u + 1; t < 4; ++t) {
        if (ua(u, t) != 0.0) herm_unit(p, ie, idx[u], idx[t], i * ua(u, t), va);
        if (ub(u, t) != 0.0) herm_unit(p, ie, idx[u], idx[t], i * ub(u, t), vb);
      }
  }
  return p;
}

}  // namespace

LmiProgram resource_program(const Mat& gamma, double t_a, double t_b) {
  const int n = static_cast<int>(gamma.rows()) / 4;
  const int h = 2 * n;
  const double tau = t_a * t_b;
  const cplx i(0, 1);
  LmiProgram p;
  std::vector<int> alpha(n), delta(n);
  for (int j = 0; j < n; ++j) {
    alpha[j] = p.add_var("alpha_" + std::to_string(j));
    delta[j] = p.add_var("delta_" + std::to_string(j));
  }
  for (int j = 0; j < n; ++j) {
    // xi_j = [[alpha J, K_j / tau], [-K_j^T / tau, delta J]], 1 - i xi_j >= 0.
    const int bx = p.add_block(8, "1 - i xi_" + std::to_string(j) + " >= 0");
    for (int r = 0; r < 4; ++r) p.add_herm(bx, r, r, 1.0);
    for (int u = 0; u < 2; ++u)
      for (int t = 0; t < 2; ++t) {
        const double k = tau > 0 ? gamma(2 * j + u, h + 2 * j + t) / tau : 0.0;
        if (k != 0.0) p.add_herm(bx, u, 2 + t, -i * k);
      }
    p.add_herm(bx, 0, 1, -i, alpha[j]);
    p.add_herm(bx, 2, 3, -i, delta[j]);
  }
  // Local noise: (1 - t^2) - i (gamma_side - t^2 (+) x_j J) >= 0.
  for (int s = 0; s < 2; ++s) {
    const double t = s == 0 ? t_a : t_b;
    const int off = s * h;
    const int bl = p.add_block(2 * h, s == 0 ? "channel noise on A" : "channel noise on B");
    for (int r = 0; r < h; ++r) {
      p.add_herm(bl, r, r, 1.0 - t * t);
      for (int c = r + 1; c < h; ++c) {
        if (gamma(off + r, off + c) != 0.0) p.add_herm(bl, r, c, -i * gamma(off + r, off + c));
      }
    }
    for (int j = 0; j < n; ++j) p.add_herm(bl, 2 * j, 2 * j + 1, i * t * t, s == 0 ? alpha[j] : delta[j]);
  }
  for (int j = 0; j < n; ++j) {
    for (int which = 0; which < 2; ++which) {
      const int x = which == 0 ? alpha[j] : delta[j];
      const int ab = p.add_var((which == 0 ? "u_" : "w_") + std::to_string(j), 1.0);
      for (double sgn : {1.0, -1.0}) {
        const int lp = p.add_block(1, "abs bound");
        p.add_sym(lp, 0, 0, 1.0, ab);
        p.add_sym(lp, 0, 0, sgn, x);
      }
    }
  }
  return p;
}

namespace {

struct PointResult {
  bool ok = false;
  double bound = std::numeric_limits<double>::infinity();
  double unconditional = 0.0;
  conic::Solution sol;
  std::vector<double> v, pn, ph;
};

// The SVD frame fixes the A-B block but not which Majoranas form a mode.
// Greedily pair A Majoranas by |gamma_A| + |gamma_B| on their partners and
// apply the same permutation to both sides, so the A-B block stays diagonal.
Mat pair_majoranas(const Mat& g, int n) {
  const int h = 2 * n;
  std::vector<std::tuple<double, int, int>> edges;
  for (int r = 0; r < h; ++r)
    for (int c = r + 1; c < h; ++c)
      edges.emplace_back(std::abs(g(r, c)) + std::abs(g(h + r, h + c)), r, c);
  std::stable_sort(edges.begin(), edges.end(),
                   [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });
  std::vector<bool> used(h, false);
  std::vector<int> order;
  for (const auto& [w, r, c] : edges) {
    if (used[r] || used[c]) continue;
    used[r] = used[c] = true;
    order.push_back(r);
    order.push_back(c);
  }
  Mat p = Mat::Zero(h, h);
  for (int k = 0; k < h; ++k) p(k, order[k]) = 1.0;
  // Keep both factors in SO(2n).
  if (p.determinant() < 0) p.row(0) *= -1.0;
  Mat full = direct_sum(p, p);
  return full * g * full.transpose();
}

PointResult evaluate_point(const Mat& g, double t_a, double t_b, const SdpOptions& opt) {
  const int n = static_cast<int>(g.rows()) / 4;
  const int h = 2 * n;
  PointResult pr;
  LmiProgram prog = resource_program(g, t_a, t_b);
  conic::SolverOptions so = opt.solver;
  so.classify_failures = false;
  pr.sol = conic::solve(prog, so);
  if (pr.sol.status != Status::optimal && pr.sol.status != Status::near_optimal) return pr;
  if (!(pr.sol.min_eig >= -opt.certificate_tol)) return pr;
  const double tau = t_a * t_b;
  double prod = 1.0;
  for (int j = 0; j < n; ++j) {
    const double a = pr.sol.x[2 * j], d = pr.sol.x[2 * j + 1];
    Mat xi = Mat::Zero(4, 4);
    xi(0, 1) = a;
    xi(1, 0) = -a;
    xi(2, 3) = d;
    xi(3, 2) = -d;
    for (int u = 0; u < 2; ++u)
      for (int t = 0; t < 2; ++t) {
        const double k = tau > 0 ? g(2 * j + u, h + 2 * j + t) / tau : 0.0;
        xi(u, 2 + t) = k;
        xi(2 + t, u) = -k;
      }
    // The ordinary pair negativity is not monotone under the local channel,
    // so pairs are scored by the twisted trace norm.
    const CovarianceMatrix cx = CovarianceMatrix::unchecked(xi);
    const double tw = twisted_trace_norm(cx, Bipartition::contiguous(1, 1));
    pr.ph.push_back(tw);
    pr.pn.push_back(two_mode_negativity(two_mode_normal_form(xi)));
    pr.v.push_back(std::abs(a) + std::abs(d));
    prod *= tw;
  }
  pr.bound = 0.5 * (prod - 1.0);
  pr.unconditional = 0.5 * (std::sqrt(2.0) * prod - 1.0);
  pr.ok = true;
  return pr;
}

}  // namespace

SdpResult sdp_upper_bound(const CovarianceMatrix& gamma, const Bipartition& part,
                          const SdpOptions& opt) {
  const int n = padded_modes(part);
  if (n > 64) throw ResourceError("SDP bound is capped at 64 modes per side");
  SdpResult res;

  // The printed program.
  conic::SolverOptions lo = opt.solver;
  lo.tol = std::max(lo.tol, 1e-7);
  res.literal.full_program = n <= opt.literal_full_cap;
  conic::Solution lit = conic::feasibility(
      res.literal.full_program ? literal_program(gamma, part) : eta_only_program(n), lo);
  res.literal.status = lit.status;
  res.literal.phase1 = lit.phase1;

  // Resource program in the frame where the A-B block is diagonal.
  CovarianceMatrix padded = padded_covariance(gamma, part);
  LocalRotation rot = svd_rotation(gamma, part);
  Mat o = direct_sum(rot.o_a, rot.o_b);
  Mat g = o * padded.data() * o.transpose();
  const int h = 2 * n;
  g = pair_majoranas(g, n);
  double sigma = 0.0;
  for (int r = 0; r < h; ++r) sigma = std::max(sigma, std::abs(g(r, h + r)));
  const double tau_min = std::clamp(sigma, 1e-3, 1.0);
  const double log_tau = std::log(tau_min);

  // Channel parameters t_a = tau_min^x, t_b = tau_min^y with x, y >= 0 and
  // x + y <= 1.
  std::map<std::pair<double, double>, PointResult> cache;
  auto point = [&](double x, double y) -> const PointResult& {
    x = std::clamp(x, 0.0, 1.0);
    y = std::clamp(y, 0.0, 1.0 - x);
    auto key = std::make_pair(x, y);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    ++res.solves;
    const bool pinned = sigma >= 1.0 - 1e-12;
    const double ta = pinned ? 1.0 : std::exp(x * log_tau);
    const double tb = pinned ? 1.0 : std::exp(y * log_tau);
    return cache.emplace(key, evaluate_point(g, ta, tb, opt)).first->second;
  };

  double bx = 0.0, by = 0.0;
  double best = std::numeric_limits<double>::infinity();
  const int k = std::max(2, opt.grid);
  const double step0 = 1.0 / (k - 1);
  const bool pinned = sigma >= 1.0 - 1e-12;
  for (int a = 0; a < k; ++a)
    for (int b = 0; a + b < k; ++b) {
      const PointResult& pr = point(a * step0, b * step0);
      if (pr.ok && pr.bound < best) {
        best = pr.bound;
        bx = a * step0;
        by = b * step0;
      }
      if (pinned) break;
    }
  if (!pinned && std::isfinite(best)) {
    double step = step0;
    for (int round = 0; round < opt.refine_rounds; ++round) {
      step *= 0.5;
      const double cx = bx, cy = by;
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
          if (!dx && !dy) continue;
          const PointResult& pr = point(cx + dx * step, cy + dy * step);
          if (pr.ok && pr.bound < best) {
            best = pr.bound;
            bx = std::clamp(cx + dx * step, 0.0, 1.0);
            by = std::clamp(cy + dy * step, 0.0, 1.0 - bx);
          }
        }
    }
  }

  if (!std::isfinite(best)) {
    res.fallback = true;
    res.status = Status::solver_failure;
    res.bound_n = res.bound_n_unconditional = 0.5 * (std::pow(2.0, n) - 1.0);
    return res;
  }
  const PointResult& pr = point(bx, by);
  res.status = pr.sol.status;
  res.bound_n = std::max(0.0, pr.bound);
  res.bound_n_unconditional = std::max(0.0, pr.unconditional);
  res.v = pr.v;
  res.pair_negativity = pr.pn;
  res.pair_twisted = pr.ph;
  res.t_a = pinned ? 1.0 : std::exp(bx * log_tau);
  res.t_b = pinned ? 1.0 : std::exp(by * log_tau);
  res.min_eig = pr.sol.min_eig;
  res.primal_residual = pr.sol.primal_residual;
  res.dual_residual = pr.sol.dual_residual;
  res.gap = pr.sol.gap;
  return res;
}

}  // namespace fgneg
