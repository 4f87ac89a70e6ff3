#include "fgneg/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "fgneg/errors.hpp"

namespace fgneg::conic {

int LmiProgram::add_block(int size, std::string label) {
  if (size <= 0) throw StructuralError("block size must be positive");
  sizes_.push_back(size);
  labels_.push_back(std::move(label));
  return num_blocks() - 1;
}

int LmiProgram::add_var(std::string name, double cost) {
  cost_.push_back(cost);
  names_.push_back(std::move(name));
  fi_.emplace_back();
  return num_vars() - 1;
}

void LmiProgram::add_sym(int block, int r, int c, double v, int var) {
  if (block < 0 || block >= num_blocks() || r < 0 || c < 0 ||
      r >= sizes_[block] || c >= sizes_[block] || var < -1 || var >= num_vars()) {
    throw StructuralError("LMI entry out of range");
  }
  if (v == 0.0) return;
  auto& dst = var < 0 ? f0_ : fi_[var];
  dst.push_back({block, r, c, v});
  if (r != c) dst.push_back({block, c, r, v});
}

void LmiProgram::add_herm(int block, int r, int c, cplx v, int var) {
  const int k = sizes_.at(block) / 2;
  if (r == c) {
    add_sym(block, r, r, v.real(), var);
    add_sym(block, k + r, k + r, v.real(), var);
    return;
  }
  // H(r,c) = v, H(c,r) = conj(v); Re part symmetric, Im part antisymmetric.
  add_sym(block, r, c, v.real(), var);
  add_sym(block, k + r, k + c, v.real(), var);
  const double im = v.imag();
  if (im != 0.0) {
    auto& dst = var < 0 ? f0_ : fi_[var];
    // Lower-left block Im H, upper-right -Im H = (Im H)^T.
    dst.push_back({block, k + r, c, im});
    dst.push_back({block, c, k + r, im});
    dst.push_back({block, k + c, r, -im});
    dst.push_back({block, r, k + c, -im});
  }
}

Mat LmiProgram::block_value(int block, const std::vector<double>& x) const {
  Mat m = Mat::Zero(sizes_[block], sizes_[block]);
  for (const auto& e : f0_)
    if (e.block == block) m(e.row, e.col) += e.value;
  for (int i = 0; i < num_vars(); ++i)
    for (const auto& e : fi_[i])
      if (e.block == block) m(e.row, e.col) += x[i] * e.value;
  return m;
}

double LmiProgram::min_eigenvalue(const std::vector<double>& x) const {
  double lo = std::numeric_limits<double>::infinity();
  for (int b = 0; b < num_blocks(); ++b) {
    Eigen::SelfAdjointEigenSolver<Mat> es(block_value(b, x), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues()(0));
  }
  return lo;
}

nlohmann::json LmiProgram::to_json() const {
  using nlohmann::json;
  auto entries = [](const std::vector<Entry>& es) {
    json a = json::array();
    for (const auto& e : es) a.push_back({e.block, e.row, e.col, e.value});
    return a;
  };
  json j;
  j["form"] = "minimize c^T x subject to F0 + sum_i x_i F_i >= 0";
  j["entry_layout"] = {"block", "row", "col", "value"};
  j["blocks"] = json::array();
  for (int b = 0; b < num_blocks(); ++b) {
    j["blocks"].push_back({{"size", sizes_[b]}, {"label", labels_[b]}});
  }
  j["constant"] = entries(f0_);
  j["vars"] = json::array();
  for (int i = 0; i < num_vars(); ++i) {
    j["vars"].push_back({{"name", names_[i]}, {"cost", cost_[i]}, {"entries", entries(fi_[i])}});
  }
  return j;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::near_optimal: return "near-optimal";
    case Status::infeasible: return "infeasible";
    case Status::solver_failure: return "solver-failure";
  }
  return "unknown";
}

namespace {

using Blocks = std::vector<Mat>;

double inner(const std::vector<Entry>& es, const Blocks& y) {
  double s = 0.0;
  for (const auto& e : es) s += e.value * y[e.block](e.row, e.col);
  return s;
}

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

double fro(const Blocks& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

void add_entries(Blocks& dst, const std::vector<Entry>& es, double scale) {
  for (const auto& e : es) dst[e.block](e.row, e.col) += scale * e.value;
}

// Largest alpha with x + alpha dx >= 0 (infinity if unbounded).
double max_step(const Blocks& x, const Blocks& dx) {
  double step = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < x.size(); ++k) {
    Eigen::LLT<Mat> llt(x[k]);
    if (llt.info() != Eigen::Success) return 0.0;
    Mat li = llt.matrixL().solve(Mat::Identity(x[k].rows(), x[k].cols()));
    Mat w = li * dx[k] * li.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (w + w.transpose()), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    if (lo < 0) step = std::min(step, -1.0 / lo);
  }
  return step;
}

struct Direction {
  std::vector<double> dy;
  Blocks dx, dz;
};

class Ipm {
 public:
  Ipm(const LmiProgram& p, const SolverOptions& o) : prog_(p), opt_(o) {
    nb_ = p.num_blocks();
    m_ = p.num_vars();
    dim_ = 0;
    for (int s : p.block_sizes()) dim_ += s;
    f0_.resize(nb_);
    for (int b = 0; b < nb_; ++b) f0_[b] = Mat::Zero(p.block_sizes()[b], p.block_sizes()[b]);
    add_entries(f0_, p.constant(), 1.0);
    double scale = 1.0;
    for (const auto& m : f0_) scale = std::max(scale, m.cwiseAbs().maxCoeff());
    for (double c : p.cost()) scale = std::max(scale, std::abs(c));
    c_norm_ = Eigen::Map<const Vec>(p.cost().data(), m_).norm();
    f0_norm_ = fro(f0_);
    x_.resize(nb_);
    z_.resize(nb_);
    for (int b = 0; b < nb_; ++b) {
      const int s = p.block_sizes()[b];
      x_[b] = 10.0 * scale * Mat::Identity(s, s);
      z_[b] = 10.0 * scale * Mat::Identity(s, s);
    }
    y_.assign(m_, 0.0);
  }

  Solution run() {
    Solution sol;
    for (int it = 0; it < opt_.max_iter; ++it) {
      sol.iterations = it;
      residuals();
      if (pinf_ < opt_.tol && dinf_ < opt_.tol && gap_ < opt_.tol) {
        return finish(Status::optimal, sol);
      }
      if (!prepare()) break;
      Direction aff = direction(0.0, nullptr);
      const double ap = std::min(1.0, max_step(x_, aff.dx));
      const double ad = std::min(1.0, max_step(z_, aff.dz));
      double mu_aff = 0.0;
      for (int b = 0; b < nb_; ++b) {
        mu_aff += ((x_[b] + ap * aff.dx[b]).cwiseProduct(z_[b] + ad * aff.dz[b])).sum();
      }
      mu_aff /= dim_;
      const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu_, 3.0), 0.0, 1.0);
      Blocks corr(nb_);
      for (int b = 0; b < nb_; ++b) corr[b] = aff.dx[b] * aff.dz[b];
      Direction d = direction(sigma * mu_, &corr);
      const double sp = std::min(1.0, 0.95 * max_step(x_, d.dx));
      const double sd = std::min(1.0, 0.95 * max_step(z_, d.dz));
      if (!(sp > 1e-12) && !(sd > 1e-12)) break;
      for (int b = 0; b < nb_; ++b) {
        x_[b] += sp * d.dx[b];
        z_[b] += sd * d.dz[b];
        x_[b] = 0.5 * (x_[b] + x_[b].transpose());
        z_[b] = 0.5 * (z_[b] + z_[b].transpose());
      }
      for (int i = 0; i < m_; ++i) y_[i] += sd * d.dy[i];
      double big = 0.0;
      for (const auto& m : x_) big = std::max(big, m.cwiseAbs().maxCoeff());
      for (double v : y_) big = std::max(big, std::abs(v));
      if (!std::isfinite(big) || big > 1e12) break;
    }
    residuals();
    const bool near = pinf_ < opt_.near_tol && dinf_ < opt_.near_tol && gap_ < opt_.near_tol;
    return finish(near ? Status::near_optimal : Status::solver_failure, sol);
  }

 private:
  void residuals() {
    Blocks fy = f0_;
    for (int i = 0; i < m_; ++i) add_entries(fy, prog_.coefficients(i), y_[i]);
    rd_.resize(nb_);
    for (int b = 0; b < nb_; ++b) rd_[b] = fy[b] - z_[b];
    double pn = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double r = inner(prog_.coefficients(i), x_) - prog_.cost()[i];
      pn += r * r;
    }
    const double xz = inner(x_, z_);
    mu_ = xz / dim_;
    double cy = 0.0;
    for (int i = 0; i < m_; ++i) cy += prog_.cost()[i] * y_[i];
    const double fx = inner(f0_, x_);
    pinf_ = std::sqrt(pn) / (1.0 + c_norm_);
    dinf_ = fro(rd_) / (1.0 + f0_norm_);
    gap_ = std::abs(xz) / (1.0 + std::abs(cy) + std::abs(fx));
    obj_ = cy;
  }

  bool prepare() {
    zinv_.resize(nb_);
    for (int b = 0; b < nb_; ++b) {
      Eigen::LLT<Mat> llt(z_[b]);
      if (llt.info() != Eigen::Success) return false;
      zinv_[b] = llt.solve(Mat::Identity(z_[b].rows(), z_[b].cols()));
    }
    Mat schur = Mat::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      const auto& fi = prog_.coefficients(i);
      for (int j = i; j < m_; ++j) {
        const auto& fj = prog_.coefficients(j);
        double s = 0.0;
        for (const auto& e : fi)
          for (const auto& f : fj)
            if (e.block == f.block) {
              s += e.value * f.value * x_[e.block](e.col, f.row) * zinv_[e.block](f.col, e.row);
            }
        schur(i, j) = schur(j, i) = s;
      }
    }
    const double diag = m_ ? schur.diagonal().cwiseAbs().maxCoeff() : 0.0;
    Mat reg = schur;
    reg.diagonal().array() += 1e-14 * std::max(diag, 1e-300);
    schur_ = reg.ldlt();
    return schur_.info() == Eigen::Success;
  }

  // HKM direction for target sigma mu with an optional second-order term.
  Direction direction(double target, const Blocks* corr) {
    Blocks h(nb_), base(nb_);
    for (int b = 0; b < nb_; ++b) {
      const int s = static_cast<int>(x_[b].rows());
      Mat t = target * Mat::Identity(s, s);
      if (corr) t -= (*corr)[b];
      h[b] = t * zinv_[b];
      base[b] = h[b] - x_[b] * rd_[b] * zinv_[b];
    }
    Vec rhs(m_);
    for (int i = 0; i < m_; ++i) rhs(i) = -prog_.cost()[i] + inner(prog_.coefficients(i), base);
    Vec dy = schur_.solve(rhs);
    Direction d;
    d.dy.assign(dy.data(), dy.data() + m_);
    d.dz = rd_;
    for (int i = 0; i < m_; ++i) add_entries(d.dz, prog_.coefficients(i), dy(i));
    d.dx.resize(nb_);
    for (int b = 0; b < nb_; ++b) {
      Mat t = h[b] - x_[b] - x_[b] * d.dz[b] * zinv_[b];
      d.dx[b] = 0.5 * (t + t.transpose());
    }
    return d;
  }

  Solution finish(Status st, Solution sol) {
    sol.status = st;
    sol.x = y_;
    sol.objective = obj_;
    sol.primal_residual = pinf_;
    sol.dual_residual = dinf_;
    sol.gap = gap_;
    sol.min_eig = prog_.min_eigenvalue(y_);
    return sol;
  }

  const LmiProgram& prog_;
  SolverOptions opt_;
  int nb_ = 0, m_ = 0, dim_ = 0;
  Blocks f0_, x_, z_, rd_, zinv_;
  std::vector<double> y_;
  Eigen::LDLT<Mat> schur_;
  double c_norm_ = 0.0, f0_norm_ = 0.0;
  double pinf_ = 0.0, dinf_ = 0.0, gap_ = 0.0, mu_ = 0.0, obj_ = 0.0;
};

LmiProgram shifted(const LmiProgram& p) {
  LmiProgram q;
  for (int b = 0; b < p.num_blocks(); ++b) q.add_block(p.block_sizes()[b], p.block_labels()[b]);
  for (int i = 0; i < p.num_vars(); ++i) q.add_var(p.var_names()[i], 0.0);
  const int s = q.add_var("shift", 1.0);
  const int lb = q.add_block(1, "shift >= -1");
  q.add_sym(lb, 0, 0, 1.0);
  q.add_sym(lb, 0, 0, 1.0, s);
  for (int b = 0; b < p.num_blocks(); ++b)
    for (int r = 0; r < p.block_sizes()[b]; ++r) q.add_sym(b, r, r, 1.0, s);
  return q;
}

// Copies the entries of p into q (which already has the same blocks/vars).
void copy_entries(const LmiProgram& p, LmiProgram& q) {
  for (const auto& e : p.constant())
    if (e.row <= e.col) q.add_sym(e.block, e.row, e.col, e.value);
  for (int i = 0; i < p.num_vars(); ++i)
    for (const auto& e : p.coefficients(i))
      if (e.row <= e.col) q.add_sym(e.block, e.row, e.col, e.value, i);
}

}  // namespace

Solution feasibility(const LmiProgram& prog, const SolverOptions& opt) {
  LmiProgram q = shifted(prog);
  copy_entries(prog, q);
  SolverOptions o = opt;
  o.classify_failures = false;
  Solution s = Ipm(q, o).run();
  Solution out = s;
  out.x.assign(s.x.begin(), s.x.begin() + prog.num_vars());
  out.phase1 = s.x.back();
  out.phase1_solved = s.status == Status::optimal || s.status == Status::near_optimal;
  out.min_eig = prog.min_eigenvalue(out.x);
  if (out.phase1_solved && out.phase1 > std::sqrt(opt.near_tol)) out.status = Status::infeasible;
  return out;
}

Solution solve(const LmiProgram& prog, const SolverOptions& opt) {
  Solution s = Ipm(prog, opt).run();
  if (s.status != Status::solver_failure || !opt.classify_failures) return s;
  Solution f = feasibility(prog, opt);
  s.phase1 = f.phase1;
  s.phase1_solved = f.phase1_solved;
  if (f.status == Status::infeasible) s.status = Status::infeasible;
  return s;
}

}  // namespace fgneg::conic
