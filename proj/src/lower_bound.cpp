#include "fgneg/lower_bound.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fgneg/errors.hpp"
#include "fgneg/exact.hpp"

namespace fgneg {

namespace {

// Mode order of the padded frame, expressed as indices into
// [A..., B..., ancillas...].
std::vector<int> padded_order(int na, int nb) {
  const int n = std::max(na, nb);
  std::vector<int> order;
  int anc = na + nb;
  for (int i = 0; i < n; ++i) order.push_back(i < na ? i : anc++);
  for (int i = 0; i < n; ++i) order.push_back(i < nb ? na + i : anc++);
  return order;
}

Mat rotate(const Mat& g, const LocalRotation& rot) {
  Mat o = direct_sum(rot.o_a, rot.o_b);
  return o * g * o.transpose();
}

std::vector<std::pair<int, int>> default_pairing(int n) {
  std::vector<std::pair<int, int>> p;
  for (int i = 0; i < n; ++i) p.emplace_back(i, i);
  return p;
}

LowerBoundResult finish(std::vector<TwoModeNormalForm> blocks) {
  LowerBoundResult r;
  double prod = 1.0;
  for (const auto& b : blocks) prod *= h_function(b);
  r.raw = 0.5 * (prod - 1.0);
  r.value = std::max(0.0, r.raw);
  r.vacuous = r.raw <= 0.0;
  r.blocks = std::move(blocks);
  return r;
}

LowerBoundResult pinch_rotated(const Mat& g, int n,
                               std::span<const std::pair<int, int>> pairing) {
  std::vector<TwoModeNormalForm> blocks;
  blocks.reserve(pairing.size());
  for (auto [i, j] : pairing) {
    const int idx[4] = {2 * i, 2 * i + 1, 2 * (n + j), 2 * (n + j) + 1};
    Mat b(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) b(r, c) = g(idx[r], idx[c]);
    blocks.push_back(two_mode_normal_form(b));
  }
  return finish(std::move(blocks));
}

void fix_det(Mat& o) {
  if (o.determinant() < 0) o.row(o.rows() - 1) *= -1.0;
}

}  // namespace

LocalRotation LocalRotation::identity(int n) {
  return {Mat::Identity(2 * n, 2 * n), Mat::Identity(2 * n, 2 * n)};
}

void LocalRotation::validate(int n) const {
  for (const Mat* o : {&o_a, &o_b}) {
    if (o->rows() != 2 * n || o->cols() != 2 * n) {
      throw StructuralError("local rotation has the wrong size");
    }
    const double ortho =
        (*o * o->transpose() - Mat::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff();
    if (ortho > 1e-10 || o->determinant() < 0) {
      throw StructuralError("local rotation is not in SO(2n)");
    }
  }
}

CovarianceMatrix padded_covariance(const CovarianceMatrix& gamma,
                                   const Bipartition& part) {
  CovarianceMatrix local = restrict_to(gamma, part);
  const int na = part.size_a(), nb = part.size_b();
  if (na == nb) return local;
  const int extra = std::abs(na - nb);
  Mat full = direct_sum(local.data(), vacuum_covariance(extra));
  auto order = padded_order(na, nb);
  return reduced_covariance(CovarianceMatrix::unchecked(full), order);
}

LowerBoundResult lower_bound_pinching(
    const CovarianceMatrix& gamma, const Bipartition& part,
    const LocalRotation& rot, std::span<const std::pair<int, int>> pairing) {
  CovarianceMatrix padded = padded_covariance(gamma, part);
  const int n = padded.modes() / 2;
  rot.validate(n);
  auto def = default_pairing(n);
  if (pairing.empty()) pairing = def;
  std::vector<int> used_a(n, 0), used_b(n, 0);
  for (auto [i, j] : pairing) {
    if (i < 0 || i >= n || j < 0 || j >= n || used_a[i]++ || used_b[j]++) {
      throw StructuralError("invalid pairing");
    }
  }
  return pinch_rotated(rotate(padded.data(), rot), n, pairing);
}

LowerBoundResult lower_bound_particle_conserving(const CorrelationMatrix& c,
                                                 const Bipartition& part) {
  part.validate(c.modes());
  const int na = part.size_a(), nb = part.size_b();
  const int n = std::max(na, nb);
  CorrelationMatrix local = c.restrict(part.modes());
  // Unoccupied ancillas: C = 0 on the padded modes.
  CMat full = CMat::Zero(2 * n, 2 * n);
  auto order = padded_order(na, nb);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j)
      if (order[i] < na + nb && order[j] < na + nb)
        full(i, j) = local.data()(order[i], order[j]);

  Eigen::JacobiSVD<CMat> svd(full.block(0, n, n, n),
                             Eigen::ComputeFullU | Eigen::ComputeFullV);
  CMat u = CMat::Zero(2 * n, 2 * n);
  u.topLeftCorner(n, n) = svd.matrixU().adjoint();
  u.bottomRightCorner(n, n) = svd.matrixV().adjoint();
  CMat rotated = u * full * u.adjoint();

  std::vector<TwoModeNormalForm> blocks;
  for (int j = 0; j < n; ++j) {
    Mat cj(2, 2);
    cj << rotated(j, j).real(), svd.singularValues()(j),
        svd.singularValues()(j), rotated(n + j, n + j).real();
    auto gj = correlation_to_covariance(CorrelationMatrix::from_real(cj));
    blocks.push_back(two_mode_normal_form(gj.data()));
  }
  return finish(std::move(blocks));
}

std::optional<LowerStrategy> parse_lower_strategy(const std::string& s) {
  if (s == "identity") return LowerStrategy::identity;
  if (s == "svd") return LowerStrategy::svd;
  if (s == "search") return LowerStrategy::search;
  return std::nullopt;
}

std::string to_string(LowerStrategy s) {
  switch (s) {
    case LowerStrategy::identity: return "identity";
    case LowerStrategy::svd: return "svd";
    case LowerStrategy::search: return "search";
  }
  return "unknown";
}

LocalRotation svd_rotation(const CovarianceMatrix& gamma, const Bipartition& part) {
  CovarianceMatrix padded = padded_covariance(gamma, part);
  const int n = padded.modes() / 2;
  Mat k = padded.data().block(0, 2 * n, 2 * n, 2 * n);
  Eigen::JacobiSVD<Mat> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  LocalRotation rot{svd.matrixU().transpose(), svd.matrixV().transpose()};
  fix_det(rot.o_a);
  fix_det(rot.o_b);
  return rot;
}

OptimizedRotation optimize_rotation(const CovarianceMatrix& gamma,
                                    const Bipartition& part,
                                    LowerStrategy strategy,
                                    const SearchBudget& budget) {
  CovarianceMatrix padded = padded_covariance(gamma, part);
  const int n = padded.modes() / 2;
  auto pairing = default_pairing(n);
  auto evaluate = [&](const LocalRotation& r) {
    return pinch_rotated(rotate(padded.data(), r), n, pairing);
  };

  OptimizedRotation best{LocalRotation::identity(n), {}};
  best.bound = evaluate(best.rotation);
  if (strategy == LowerStrategy::identity) return best;

  auto consider = [&](const LocalRotation& r, const LowerBoundResult& b) {
    if (b.raw > best.bound.raw) best = {r, b};
  };
  LocalRotation svd_rot = svd_rotation(gamma, part);
  consider(svd_rot, evaluate(svd_rot));
  if (strategy == LowerStrategy::svd) return best;

  // Random-restart hill climbing over Givens rotations. Restart r draws from
  // its own generator so the outcome does not depend on evaluation order.
  for (int restart = 0; restart < budget.restarts; ++restart) {
    std::mt19937_64 rng(budget.seed + 0x9e3779b97f4a7c15ULL * (restart + 1));
    std::uniform_int_distribution<int> side(0, 1), idx(0, 2 * n - 1);
    std::normal_distribution<double> angle;
    LocalRotation cur = (restart % 2 == 0) ? svd_rot : LocalRotation::identity(n);
    if (restart >= 2) {
      for (int s = 0; s < 4 * n; ++s) {
        int p = idx(rng), q = idx(rng);
        if (p == q) continue;
        const double t = 0.5 * angle(rng);
        Mat& o = side(rng) ? cur.o_a : cur.o_b;
        Eigen::RowVectorXd rp = o.row(p), rq = o.row(q);
        o.row(p) = std::cos(t) * rp - std::sin(t) * rq;
        o.row(q) = std::sin(t) * rp + std::cos(t) * rq;
      }
    }
    LowerBoundResult cur_b = evaluate(cur);
    double scale = 0.3;
    for (int step = 0; step < budget.steps; ++step) {
      int p = idx(rng), q = idx(rng);
      if (p == q) continue;
      const double t = scale * angle(rng);
      LocalRotation trial = cur;
      Mat& o = side(rng) ? trial.o_a : trial.o_b;
      Eigen::RowVectorXd rp = o.row(p), rq = o.row(q);
      o.row(p) = std::cos(t) * rp - std::sin(t) * rq;
      o.row(q) = std::sin(t) * rp + std::cos(t) * rq;
      LowerBoundResult b = evaluate(trial);
      if (b.raw > cur_b.raw) {
        cur = std::move(trial);
        cur_b = std::move(b);
      } else {
        scale = std::max(1e-3, scale * 0.98);
      }
    }
    consider(cur, cur_b);
  }
  return best;
}

}  // namespace fgneg
