#include "doctest.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "fgneg/errors.hpp"
#include "fgneg/exact.hpp"
#include "support.hpp"

using namespace fgneg;
using fgneg::testing::random_covariance;

namespace {

// (i/2) tr(rho [m_j, m_l]) / tr(rho) from dense Majoranas.
CMat dense_moments(const CMat& rho, const std::vector<CMat>& ms) {
  const int n = static_cast<int>(ms.size());
  CMat g(n, n);
  const cplx tr = rho.trace();
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      g(j, l) = cplx(0, 0.5) * (rho * (ms[j] * ms[l] - ms[l] * ms[j])).trace() / tr;
  return g;
}

Mat flip_odd_b(const Mat& g, int na, int nb) {
  Vec f = Vec::Ones(2 * (na + nb));
  for (int j = na; j < na + nb; ++j) f(2 * j + 1) = -1.0;
  return f.asDiagonal() * g * f.asDiagonal();
}

TwoModeNormalForm random_normal_form(std::mt19937_64& rng) {
  auto g = random_covariance(2, rng);
  return two_mode_normal_form(g.data());
}

}  // namespace

TEST_CASE("Jordan-Wigner Majoranas") {
  auto m1 = jw_majoranas(1);
  REQUIRE(m1.size() == 2);
  CMat x(2, 2), y(2, 2);
  x << 0, 1, 1, 0;
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  CHECK((m1[0] - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((m1[1] - y).cwiseAbs().maxCoeff() == 0.0);

  auto m3 = jw_majoranas(3);
  const CMat id = CMat::Identity(8, 8);
  for (int a = 0; a < 6; ++a) {
    CHECK((m3[a] - m3[a].adjoint()).cwiseAbs().maxCoeff() == 0.0);
    for (int b = 0; b < 6; ++b) {
      CMat ac = m3[a] * m3[b] + m3[b] * m3[a];
      CMat expected = (a == b ? 2.0 : 0.0) * id;
      CHECK((ac - expected).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  CMat parity = id;
  for (const auto& m : m3) parity = parity * m;
  parity *= std::pow(cplx(0, 1), 3);
  Eigen::ComplexEigenSolver<CMat> es(parity);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(std::abs(es.eigenvalues()(i).real()) - 1.0) < 1e-12);
  CHECK((parity * parity - id).cwiseAbs().maxCoeff() < 1e-12);

  CMat x4 = CMat::Random(8, 8);
  for (int a = 0; a < 6; ++a)
    CHECK((apply_majorana(a, 3, x4) - m3[a] * x4).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(jw_majoranas(13), ResourceError);
}

TEST_CASE("dense Gaussian states reproduce their covariance") {
  auto rho0 = gaussian_state_dense(CovarianceMatrix(Mat::Zero(4, 4)));
  CHECK((rho0.data - 0.25 * CMat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);

  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = 1 + trial % 5;
    auto g = random_covariance(k, rng, trial % 4 == 0);
    auto rho = gaussian_state_dense(g);
    auto ms = jw_majoranas(k);
    CHECK(std::abs(rho.data.trace() - 1.0) < 1e-12);
    CMat mom = dense_moments(rho.data, ms);
    CHECK((mom - g.data().cast<cplx>()).cwiseAbs().maxCoeff() < 1e-7);
    Eigen::SelfAdjointEigenSolver<CMat> es(rho.data);
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
    if (k >= 2) {
      // Four-point function: tr(rho m0 m1 m2 m3) = (-i)^2 Pf.
      const int idx[] = {0, 1, 2, 3};
      cplx dense = (rho.data * ms[0] * ms[1] * ms[2] * ms[3]).trace();
      CHECK(std::abs(dense - majorana_expectation(g, idx)) < 1e-8);
    }
  }
}

TEST_CASE("BCS pair at a = 0 is a pure maximally entangled state") {
  TwoModeNormalForm s{0, 1, 1, 0};
  auto rho = gaussian_state_dense(CovarianceMatrix(s.matrix()));
  CHECK(std::abs((rho.data * rho.data).trace() - 1.0) < 1e-12);
  auto r = negativity_exact(CovarianceMatrix(s.matrix()), Bipartition::contiguous(1, 1));
  CHECK(r.negativity == doctest::Approx(0.5));
  CHECK(r.log_negativity == doctest::Approx(std::log(2.0)));
  CHECK(r.trace_norm == doctest::Approx(2.0));
}

TEST_CASE("Gaussian operators from complex covariances") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 1 + trial % 3;
    auto g = random_covariance(k, rng);
    auto rho = gaussian_state_dense(g);
    auto op = gaussian_operator_dense(g.data().cast<cplx>());
    CHECK((rho.data - op.data).cwiseAbs().maxCoeff() < 1e-7);
  }
  // O_pm: moments reproduce gamma_pm, O_+^dag = O_-, and the exponential form
  // agrees with direct substitution m_b -> +-i m_b.
  for (int trial = 0; trial < 10; ++trial) {
    const int na = 1 + trial % 2, nb = 1 + (trial / 2) % 2;
    const int k = na + nb;
    auto g = random_covariance(k, rng);
    CVec tp = CVec::Ones(2 * k);
    for (int r = 2 * na; r < 2 * k; ++r) tp(r) = cplx(0, 1);
    CMat gp = tp.asDiagonal() * g.data().cast<cplx>() * tp.asDiagonal();
    CMat gm = gp.conjugate();
    auto op = gaussian_operator_dense(gp);
    auto om = gaussian_operator_dense(gm);
    auto ms = jw_majoranas(k);
    CHECK((dense_moments(op.data, ms) - gp).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((op.data.adjoint() - om.data).cwiseAbs().maxCoeff() < 1e-8);
    auto part = Bipartition::contiguous(na, nb);
    auto rho = gaussian_state_dense(g);
    auto sp = substitute_b_majoranas(rho, part, cplx(0, 1));
    CHECK((sp.data - op.data).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(std::abs(op.data.trace() - 1.0) < 1e-12);
  }
  // Product state: gamma_pm real, O_pm Hermitian.
  auto ga = random_covariance(1, rng), gb = random_covariance(1, rng);
  Mat gpm = direct_sum(ga.data(), -gb.data());
  auto o = gaussian_operator_dense(gpm.cast<cplx>());
  CHECK((o.data - o.data.adjoint()).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(gaussian_operator_dense(vacuum_covariance(1).cast<cplx>()),
                  DegenerateError);
}

TEST_CASE("qubit partial transpose") {
  // Singlet on two qubits.
  CMat psi = CMat::Zero(4, 1);
  psi(1) = 1.0 / std::sqrt(2.0);
  psi(2) = -1.0 / std::sqrt(2.0);
  DenseOperator rho{psi * psi.adjoint(), 2};
  auto pt = partial_transpose_dense(rho, Bipartition::contiguous(1, 1));
  Eigen::SelfAdjointEigenSolver<CMat> es(pt.data);
  CHECK(es.eigenvalues().minCoeff() == doctest::Approx(-0.5));

  std::mt19937_64 rng(107);
  auto ga = random_covariance(2, rng), gb = random_covariance(1, rng);
  auto r = negativity_exact(CovarianceMatrix(direct_sum(ga.data(), gb.data())),
                            Bipartition::contiguous(2, 1));
  CHECK(r.trace_norm == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.negativity == doctest::Approx(0.0).epsilon(1e-10));

  DenseOperator r3{CMat::Identity(8, 8) / 8.0, 3};
  Bipartition bad{{2}, {0, 1}};
  CHECK_THROWS_AS(partial_transpose_dense(r3, bad), UnsupportedError);
  CHECK(negativity_exact(CovarianceMatrix(Mat::Zero(4, 4)),
                         Bipartition::contiguous(1, 1)).negativity ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(negativity_exact(CovarianceMatrix(Mat::Zero(22, 22)),
                                   Bipartition::contiguous(5, 6)),
                  ResourceError);
}

TEST_CASE("fermionic decomposition of rho^TB versus the qubit partial transpose") {
  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 12; ++trial) {
    const int na = 1 + trial % 2, nb = 1 + (trial / 2) % 2;
    auto g = random_covariance(na + nb, rng);
    auto part = Bipartition::contiguous(na, nb);
    auto tb = rhoTB_gaussian_decomposition(g, part);
    CHECK((tb.data - tb.data.adjoint()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(tb.data.trace() - 1.0) < 1e-10);
    // The qubit transpose of rho equals the fermionic one of the state whose
    // odd B Majoranas are reflected (Y^T = -Y).
    auto flipped = gaussian_state_dense(
        CovarianceMatrix::unchecked(flip_odd_b(g.data(), na, nb)));
    auto pt = partial_transpose_dense(flipped, part);
    CHECK((tb.data - pt.data).cwiseAbs().maxCoeff() < 1e-7);
    // Same trace norm as the qubit transpose of rho itself.
    auto pt0 = partial_transpose_dense(gaussian_state_dense(g), part);
    CHECK(trace_norm_hermitian(tb.data) ==
          doctest::Approx(trace_norm_hermitian(pt0.data)).epsilon(1e-8));
  }
  // Product state: both O_pm equal the state with gamma_B negated, which is
  // the fermionic transpose of rho_B; the trace norm stays 1.
  auto ga = random_covariance(1, rng), gb = random_covariance(1, rng);
  CovarianceMatrix prod(direct_sum(ga.data(), gb.data()));
  auto tb = rhoTB_gaussian_decomposition(prod, Bipartition::contiguous(1, 1));
  auto reflected = gaussian_state_dense(
      CovarianceMatrix::unchecked(direct_sum(ga.data(), -gb.data())));
  CHECK((tb.data - reflected.data).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(trace_norm_hermitian(tb.data) == doctest::Approx(1.0));
}

TEST_CASE("two-mode closed form") {
  CHECK(h_function({0, 1, 1, 0}) == doctest::Approx(2.0));
  CHECK(two_mode_negativity({0, 1, 1, 0}) == doctest::Approx(0.5));
  CHECK(h_function({0, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(two_mode_negativity({0, 0, 0, 0}) == doctest::Approx(0.0));

  std::mt19937_64 rng(113);
  for (int trial = 0; trial < 2000; ++trial) {
    auto nf = random_normal_form(rng);
    CHECK(two_mode_negativity(nf) ==
          doctest::Approx(two_mode_negativity_matrix_route(nf)).epsilon(1e-12));
  }
  for (int trial = 0; trial < 200; ++trial) {
    auto g = random_covariance(2, rng, trial % 5 == 0);
    auto nf = two_mode_normal_form(g.data());
    auto exact = negativity_exact(g, Bipartition::contiguous(1, 1));
    CHECK(std::abs(two_mode_negativity(nf) - exact.negativity) < 1e-9);
    auto exact_nf = negativity_exact(CovarianceMatrix(nf.matrix()),
                                     Bipartition::contiguous(1, 1));
    CHECK(std::abs(exact_nf.negativity - exact.negativity) < 1e-9);
    // The explicit two-qubit matrix and the Jordan-Wigner state differ by a
    // local basis change; their spectra and transposed spectra agree.
    auto rho = gaussian_state_dense(CovarianceMatrix(nf.matrix()));
    CMat closed_form = two_mode_density_matrix(nf);
    auto spec = [](const CMat& m) {
      Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
      return Vec(es.eigenvalues());
    };
    CHECK((spec(rho.data) - spec(closed_form)).cwiseAbs().maxCoeff() < 1e-9);
    auto p11 = Bipartition::contiguous(1, 1);
    CHECK((spec(partial_transpose_dense(rho, p11).data) -
           spec(partial_transpose_dense({closed_form, 2}, p11).data))
              .cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("pure-state negativity") {
  CHECK(g_function(1.0) == 1.0);
  CHECK(g_function(0.0) == 2.0);
  std::mt19937_64 rng(127);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 3;
    auto g = random_covariance(2 * n, rng, true);
    auto part = Bipartition::contiguous(n, n);
    const double formula = pure_state_negativity(g, part);
    auto exact = negativity_exact(g, part);
    CHECK(std::abs(formula - exact.negativity) < 1e-8);
    // (tr rho_A^{1/2})^2 from the reduced spectrum.
    auto ga = reduced_covariance(g, part.a);
    auto rho_a = gaussian_state_dense(ga);
    Eigen::SelfAdjointEigenSolver<CMat> es(rho_a.data);
    double s = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      s += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
    CHECK(std::abs(s * s - exact.trace_norm) < 1e-8);
  }
  CHECK_THROWS_AS(pure_state_negativity(random_covariance(2, rng),
                                        Bipartition::contiguous(1, 1)),
                  PhysicalityError);
  // Product of pure local states: all a_j = +-1.
  CovarianceMatrix vac(vacuum_covariance(4));
  CHECK(pure_state_negativity(vac, Bipartition::contiguous(2, 2)) == doctest::Approx(0.0));
}

TEST_CASE("block product negativity") {
  TwoModeNormalForm s{0, 1, 1, 0}, id{0, 0, 0, 0};
  std::vector<TwoModeNormalForm> one{s};
  CHECK(block_product_negativity(one) == doctest::Approx(two_mode_negativity(s)));
  std::vector<TwoModeNormalForm> with_id{s, id};
  CHECK(block_product_negativity(with_id) == doctest::Approx(0.5));
  std::vector<TwoModeNormalForm> two{s, s};
  CHECK(block_product_negativity(two) == doctest::Approx(1.5));
  // Dense: modes ordered (A1, A2, B1, B2) with pairs (A1,B1), (A2,B2).
  Mat g = Mat::Zero(8, 8);
  const int idx[2][4] = {{0, 1, 4, 5}, {2, 3, 6, 7}};
  for (int p = 0; p < 2; ++p)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) g(idx[p][i], idx[p][j]) = s.matrix()(i, j);
  auto r = negativity_exact(CovarianceMatrix(g), Bipartition::contiguous(2, 2));
  CHECK(r.negativity == doctest::Approx(1.5));
}
