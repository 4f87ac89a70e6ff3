#pragma once

#include <string>
#include <vector>

#include "fgneg/types.hpp"
#include "json.hpp"

namespace fgneg::conic {

// One coefficient of a symmetric block. Entries are stored in full: an
// off-diagonal coefficient appears as both (row, col) and (col, row).
struct Entry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// minimize c^T x  subject to  F0 + sum_i x_i F_i >= 0, block diagonal.
// Scalar inequalities are 1x1 blocks.
class LmiProgram {
 public:
  int add_block(int size, std::string label = {});
  int add_var(std::string name, double cost = 0.0);

  // Adds v at (r, c) and, off the diagonal, at (c, r). var = -1 targets F0.
  void add_sym(int block, int r, int c, double v, int var = -1);

  // Hermitian block H of size k embedded as [[Re H, -Im H], [Im H, Re H]]
  // in a real block of size 2k. Adds v to H(r, c) and conj(v) to H(c, r).
  void add_herm(int block, int r, int c, cplx v, int var = -1);

  int num_blocks() const { return static_cast<int>(sizes_.size()); }
  int num_vars() const { return static_cast<int>(cost_.size()); }
  const std::vector<int>& block_sizes() const { return sizes_; }
  const std::vector<std::string>& block_labels() const { return labels_; }
  const std::vector<double>& cost() const { return cost_; }
  const std::vector<std::string>& var_names() const { return names_; }
  const std::vector<Entry>& constant() const { return f0_; }
  const std::vector<Entry>& coefficients(int var) const { return fi_[var]; }

  // F(x) restricted to one block.
  Mat block_value(int block, const std::vector<double>& x) const;
  double min_eigenvalue(const std::vector<double>& x) const;

  nlohmann::json to_json() const;

 private:
  std::vector<int> sizes_;
  std::vector<std::string> labels_;
  std::vector<double> cost_;
  std::vector<std::string> names_;
  std::vector<Entry> f0_;
  std::vector<std::vector<Entry>> fi_;
};

enum class Status { optimal, near_optimal, infeasible, solver_failure };

std::string to_string(Status s);

struct SolverOptions {
  double tol = 1e-8;
  double near_tol = 1e-5;
  int max_iter = 120;
  // Classify failures by solving the feasibility problem min s, F + s >= 0.
  bool classify_failures = true;
};

struct Solution {
  Status status = Status::solver_failure;
  std::vector<double> x;
  double objective = 0.0;
  double primal_residual = 0.0;  // relative, equality side
  double dual_residual = 0.0;    // relative, LMI side
  double gap = 0.0;              // relative duality gap
  double min_eig = 0.0;          // of F(x)
  int iterations = 0;
  // Smallest shift s with F(x) + s >= 0 feasible; only set when the
  // feasibility problem was solved.
  double phase1 = 0.0;
  bool phase1_solved = false;
};

// Infeasible-start primal-dual interior point method, HKM search direction
// with Mehrotra predictor-corrector.
Solution solve(const LmiProgram& prog, const SolverOptions& opt = {});

// min s subject to F(x) + s I >= 0 and s >= -1.
Solution feasibility(const LmiProgram& prog, const SolverOptions& opt = {});

}  // namespace fgneg::conic
