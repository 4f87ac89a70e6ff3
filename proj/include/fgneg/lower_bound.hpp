#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fgneg/covariance.hpp"

namespace fgneg {

// Local mode rotations acting on the (padded) A and B Majoranas.
struct LocalRotation {
  Mat o_a;
  Mat o_b;
  static LocalRotation identity(int n);
  // Throws StructuralError unless both factors are in SO(2n).
  void validate(int n) const;
};

struct LowerBoundResult {
  double value = 0.0;   // max(raw, 0)
  double raw = 0.0;     // (prod h - 1) / 2
  bool vacuous = true;  // raw <= 0
  std::vector<TwoModeNormalForm> blocks;
};

// Covariance of A u B ordered A first, with vacuum ancillas appended to the
// smaller side so that both sides have max(|A|, |B|) modes.
CovarianceMatrix padded_covariance(const CovarianceMatrix& gamma,
                                   const Bipartition& part);

// Pinching bound. pairing lists (A index, B index) pairs in the padded local
// frame; empty means pair i with i.
LowerBoundResult lower_bound_pinching(
    const CovarianceMatrix& gamma, const Bipartition& part,
    const LocalRotation& rot,
    std::span<const std::pair<int, int>> pairing = {});

// SVD construction for number-conserving states.
LowerBoundResult lower_bound_particle_conserving(const CorrelationMatrix& c,
                                                 const Bipartition& part);

enum class LowerStrategy { identity, svd, search };

std::optional<LowerStrategy> parse_lower_strategy(const std::string& s);
std::string to_string(LowerStrategy s);

struct SearchBudget {
  int restarts = 64;
  int steps = 200;
  std::uint64_t seed = 0x5eed;
};

struct OptimizedRotation {
  LocalRotation rotation;
  LowerBoundResult bound;
};

// SVD of the off-diagonal Majorana block, determinants fixed to +1.
LocalRotation svd_rotation(const CovarianceMatrix& gamma, const Bipartition& part);

OptimizedRotation optimize_rotation(const CovarianceMatrix& gamma,
                                    const Bipartition& part,
                                    LowerStrategy strategy,
                                    const SearchBudget& budget = {});

}  // namespace fgneg
