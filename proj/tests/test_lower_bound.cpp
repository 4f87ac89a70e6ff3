#include "doctest.h"

#include <cmath>

#include "fgneg/errors.hpp"
#include "fgneg/exact.hpp"
#include "fgneg/lower_bound.hpp"
#include "fgneg/models.hpp"
#include "support.hpp"

using namespace fgneg;
using fgneg::testing::random_correlation;
using fgneg::testing::random_covariance;
using fgneg::testing::random_orthogonal;

TEST_CASE("pinching bound on trivial inputs") {
  TwoModeNormalForm s{0, 1, 1, 0};
  auto p11 = Bipartition::contiguous(1, 1);
  auto r = lower_bound_pinching(CovarianceMatrix(s.matrix()), p11, LocalRotation::identity(1));
  CHECK(r.value == doctest::Approx(0.5));
  CHECK_FALSE(r.vacuous);

  std::mt19937_64 rng(201);
  Mat oa = random_orthogonal(4, rng), ob = random_orthogonal(4, rng);
  auto z = lower_bound_pinching(CovarianceMatrix(Mat::Zero(8, 8)),
                                Bipartition::contiguous(2, 2), {oa, ob});
  CHECK(z.value == 0.0);
  CHECK(z.vacuous);

  Mat bad = Mat::Identity(4, 4);
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(lower_bound_pinching(CovarianceMatrix(Mat::Zero(8, 8)),
                                       Bipartition::contiguous(2, 2),
                                       {bad, Mat::Identity(4, 4)}),
                  StructuralError);
}

TEST_CASE("pinching bound never exceeds the exact negativity") {
  std::mt19937_64 rng(203);
  auto p = Bipartition::contiguous(1, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    auto g = random_covariance(2, rng, trial % 7 == 0);
    auto lb = lower_bound_pinching(g, p, LocalRotation::identity(1));
    CHECK(lb.value <= negativity_exact(g, p).negativity + 1e-9);
  }
  for (int trial = 0; trial < 60; ++trial) {
    const int na = 1 + trial % 2, nb = 1 + (trial / 2) % 3;
    auto g = random_covariance(na + nb, rng);
    auto part = Bipartition::contiguous(na, nb);
    const double exact = negativity_exact(g, part).negativity;
    for (auto st : {LowerStrategy::identity, LowerStrategy::svd}) {
      CHECK(optimize_rotation(g, part, st).bound.value <= exact + 1e-9);
    }
  }
}

TEST_CASE("particle-conserving SVD construction") {
  Mat c(2, 2);
  c << 0.5, 0.5, 0.5, 0.5;
  auto r = lower_bound_particle_conserving(CorrelationMatrix::from_real(c),
                                           Bipartition::contiguous(1, 1));
  CHECK(r.value == doctest::Approx(0.5));
  REQUIRE(r.blocks.size() == 1);
  CHECK(r.blocks[0].a == doctest::Approx(0.0));
  CHECK(r.blocks[0].d == doctest::Approx(0.0));

  auto z = lower_bound_particle_conserving(
      CorrelationMatrix::from_real(0.5 * Mat::Identity(2, 2)),
      Bipartition::contiguous(1, 1));
  CHECK(z.value == 0.0);

  std::mt19937_64 rng(207);
  for (int trial = 0; trial < 40; ++trial) {
    const int na = 1 + trial % 3, nb = 1 + (trial / 3) % 3;
    auto cm = random_correlation(na + nb, rng, trial % 2 == 1);
    auto part = Bipartition::contiguous(na, nb);
    auto lb = lower_bound_particle_conserving(cm, part);
    auto g = correlation_to_covariance(cm);
    CHECK(lb.value <= negativity_exact(g, part).negativity + 1e-9);
    if (!cm.is_real()) continue;
    // The general SVD strategy on the Majorana block reproduces it.
    auto svd = optimize_rotation(g, part, LowerStrategy::svd);
    CHECK(svd.bound.raw >= lb.raw - 1e-9);
    auto direct = lower_bound_pinching(g, part, svd_rotation(g, part));
    CHECK(direct.raw == doctest::Approx(lb.raw).epsilon(1e-9));
  }
}

TEST_CASE("SVD diagonalizes the cross correlations") {
  std::mt19937_64 rng(209);
  auto cm = random_correlation(6, rng);
  Mat cab = cm.real().block(0, 3, 3, 3);
  Eigen::JacobiSVD<Mat> svd(cab, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat d = 2.0 * svd.matrixU().transpose() * cab * svd.matrixV();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) CHECK(d(i, i) >= -1e-10);
      else CHECK(std::abs(d(i, j)) < 1e-10);
    }
  auto lb = lower_bound_particle_conserving(cm, Bipartition::contiguous(3, 3));
  for (int j = 0; j < 3; ++j) {
    // |b| and |c| of each normal form carry the singular value 2 s_j.
    CHECK(std::abs(lb.blocks[j].b) == doctest::Approx(2.0 * svd.singularValues()(j)));
  }
}

TEST_CASE("SSH ground state with strong central singlet") {
  const double inf = std::numeric_limits<double>::infinity();
  auto c = thermal_correlation({8, -0.9}, ThermalSpec{inf});
  Bipartition part{{2, 3}, {4, 5}};
  auto lb = lower_bound_particle_conserving(c, part);
  auto exact = negativity_exact(correlation_to_covariance(c), part);
  const double e_lb = std::log(2.0 * lb.value + 1.0);
  CHECK(e_lb <= exact.log_negativity + 1e-9);
  CHECK(e_lb >= 0.9 * exact.log_negativity);
}

TEST_CASE("search strategy improves on identity and is reproducible") {
  std::mt19937_64 rng(211);
  SearchBudget budget{8, 100, 42};
  auto part = Bipartition::contiguous(2, 2);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = random_covariance(4, rng);
    auto id = optimize_rotation(g, part, LowerStrategy::identity);
    auto s1 = optimize_rotation(g, part, LowerStrategy::search, budget);
    auto s2 = optimize_rotation(g, part, LowerStrategy::search, budget);
    CHECK(s1.bound.raw >= id.bound.raw);
    CHECK(s1.bound.raw == s2.bound.raw);
    CHECK(s1.bound.value <= negativity_exact(g, part).negativity + 1e-9);
    CHECK_NOTHROW(s1.rotation.validate(2));
  }
}

TEST_CASE("bound is invariant under compensated local rotations") {
  std::mt19937_64 rng(213);
  auto part = Bipartition::contiguous(2, 2);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = random_covariance(4, rng);
    Mat ra = random_orthogonal(4, rng), rb = random_orthogonal(4, rng);
    Mat r = direct_sum(ra, rb);
    CovarianceMatrix rotated = CovarianceMatrix::unchecked(r * g.data() * r.transpose());
    auto base = lower_bound_pinching(g, part, LocalRotation::identity(2));
    auto undone = lower_bound_pinching(rotated, part, {ra.transpose(), rb.transpose()});
    CHECK(undone.raw == doctest::Approx(base.raw).epsilon(1e-10));
  }
}

TEST_CASE("unequal subsystems are padded with vacuum modes") {
  std::mt19937_64 rng(215);
  auto part = Bipartition::contiguous(1, 2);
  auto g = random_covariance(3, rng);
  auto padded = padded_covariance(g, part);
  CHECK(padded.modes() == 4);
  // Ancilla sits right after A: mode 1 of the padded frame.
  CHECK(padded(2, 3) == doctest::Approx(-1.0));
  CHECK(padded(0, 1) == doctest::Approx(g(0, 1)));
  auto lb = optimize_rotation(g, part, LowerStrategy::svd);
  CHECK(lb.bound.value <= negativity_exact(g, part).negativity + 1e-9);
  CHECK(parse_lower_strategy("search") == LowerStrategy::search);
  CHECK_FALSE(parse_lower_strategy("bogus").has_value());
}
