#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "chiralloc/dynamics.hpp"
#include "chiralloc/error.hpp"
#include "chiralloc/model.hpp"

using namespace chiralloc;

namespace {

constexpr double kPi = std::numbers::pi;

SystemParams make(int n, double d, double xi, double w) {
  SystemParams p;
  p.n_sites = n;
  p.directionality = d;
  p.xi = xi;
  p.disorder_strength = w;
  return p;
}

double max_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(SnapshotGrid, EvenlySpacedAndInclusive) {
  const auto g = snapshot_grid(10.0, 2.5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.back(), 10.0);
  EXPECT_THROW(snapshot_grid(10.0, 3.0), std::invalid_argument);
  EXPECT_THROW(snapshot_grid(-1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(snapshot_grid(10.0, 0.0), std::invalid_argument);
}

TEST(Propagate, SingleEmitterDecay) {
  auto p = make(1, 0, 0, 0);
  p.gamma = 2.0;
  p.gamma_nr = 0.5;
  const auto tr = propagate(build_coupling_matrix(p, zero_disorder(1)), 1, 4.0, 0.25);
  for (int k = 0; k < tr.snapshots(); ++k) {
    EXPECT_NEAR(tr.total[k], std::exp(-2.5 * tr.times[k]), 1e-10);
  }
}

TEST(Propagate, TwoSiteReciprocalClosedForm) {
  // M = -1/2 [[1, 1], [1, 1]]: modes (1, 1) decaying at rate 1 and (1, -1) dark.
  const auto p = make(2, 0, 0, 0);
  const auto tr = propagate(build_coupling_matrix(p, zero_disorder(2)), 1, 10.0, 0.5);
  for (int k = 0; k < tr.snapshots(); ++k) {
    const double e = std::exp(-tr.times[k]);
    EXPECT_NEAR(tr.amplitudes(k, 0).real(), (1 + e) / 2, 1e-10);
    EXPECT_NEAR(tr.amplitudes(k, 1).real(), (e - 1) / 2, 1e-10);
    EXPECT_NEAR(tr.amplitudes(k, 0).imag(), 0.0, 1e-12);
  }
}

TEST(Propagate, ThreeSiteCascadeClosedForm) {
  // Start at site 1 of a chiral chain; integrating the triangular system by hand:
  // a1 = e^{-t/2}, a2 = -e^{-i xi} t e^{-t/2}, a3 = e^{-2 i xi} (t^2/2 - t) e^{-t/2}.
  auto p = make(3, 1.0, 0.4, 0);
  p.initial_site = 1;
  const auto tr = propagate(build_coupling_matrix(p, zero_disorder(3)), 1, 12.0, 0.5);
  for (int k = 0; k < tr.snapshots(); ++k) {
    const double t = tr.times[k];
    const double env = std::exp(-t / 2);
    EXPECT_LT(std::abs(tr.amplitudes(k, 0) - env), 1e-10);
    EXPECT_LT(std::abs(tr.amplitudes(k, 1) + std::polar(t * env, -0.4)), 1e-10);
    EXPECT_LT(std::abs(tr.amplitudes(k, 2) -
                       std::polar((t * t / 2 - t) * env, -0.8)),
              1e-10);
  }
}

TEST(Propagate, StrideMatchesStepwise) {
  const auto p = make(17, 0.4, 0.3 * kPi, 0.5);
  const auto m = build_coupling_matrix(p, sample_disorder(p, 6));
  PropagateOptions stepwise;
  stepwise.mode = StepMode::Stepwise;
  const auto a = propagate(m, p.start_site(), 20.0, 2.0);
  const auto b = propagate(m, p.start_site(), 20.0, 2.0, stepwise);
  EXPECT_LT(max_diff(a.amplitudes, b.amplitudes), 1e-10);
}

TEST(Propagate, AgreesWithMatrixExponential) {
  for (std::uint64_t s = 0; s < 4; ++s) {
    auto p = make(12 + 5 * s, -0.5 + 0.4 * s, 0.25 * kPi * s, 0.2 * s);
    p.gamma_nr = 0.05 * s;
    const auto m = build_coupling_matrix(p, sample_disorder(p, s));
    const auto rk = propagate(m, p.start_site(), 30.0, 3.0);
    const auto ex = propagate_expm(m, p.start_site(), rk.times);
    EXPECT_LT(max_diff(rk.amplitudes, ex.amplitudes), 1e-8) << "case " << s;
  }
}

TEST(Propagate, NormIsNonIncreasing) {
  const auto p = make(30, -0.3, 0.8, 0.7);
  const auto tr = propagate(build_coupling_matrix(p, sample_disorder(p, 2)),
                            p.start_site(), 150.0, 0.5);
  EXPECT_NEAR(tr.total.front(), 1.0, 1e-15);
  for (std::size_t k = 1; k < tr.total.size(); ++k) {
    EXPECT_LE(tr.total[k], tr.total[k - 1] + 1e-12);
  }
}

TEST(Propagate, DarkStateSaturation) {
  const auto p = make(11, 0, 0, 0);
  const auto tr = propagate(build_coupling_matrix(p, zero_disorder(11)),
                            p.start_site(), 200.0, 50.0);
  EXPECT_NEAR(tr.total.back(), 1.0 - 1.0 / 11.0, 1e-6);
}

TEST(Propagate, PopulationsMatchAmplitudes) {
  const auto p = make(9, 0.2, 1.0, 0.3);
  const auto tr = propagate(build_coupling_matrix(p, sample_disorder(p, 1)),
                            p.start_site(), 5.0, 1.0);
  EXPECT_LT((tr.populations - tr.amplitudes.cwiseAbs2()).cwiseAbs().maxCoeff(), 1e-15);
  for (int k = 0; k < tr.snapshots(); ++k) {
    EXPECT_NEAR(tr.total[k], tr.populations.row(k).sum(), 1e-14);
  }
}

TEST(Propagate, DropsAmplitudesOnRequest) {
  const auto p = make(5, 0, 0, 0);
  PropagateOptions o;
  o.keep_amplitudes = false;
  const auto tr = propagate(build_coupling_matrix(p, zero_disorder(5)), 3, 2.0, 1.0, o);
  EXPECT_EQ(tr.amplitudes.size(), 0);
  EXPECT_EQ(tr.populations.rows(), 3);
}

TEST(Propagate, RejectsBadStartSite) {
  const auto p = make(5, 0, 0, 0);
  const auto m = build_coupling_matrix(p, zero_disorder(5));
  EXPECT_THROW(propagate(m, 0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(propagate(m, 6, 1.0, 1.0), std::invalid_argument);
}

TEST(Propagate, StepShrinksForStiffGenerators) {
  const auto small = make(5, 0, 0, 0);
  auto big = make(5, 0, 0, 0);
  big.gamma = 400.0;
  PropagateOptions o;
  const double h_small =
      integrator_step(build_coupling_matrix(small, zero_disorder(5)).entries(), o);
  const double h_big =
      integrator_step(build_coupling_matrix(big, zero_disorder(5)).entries(), o);
  EXPECT_LE(h_small, o.max_step);
  EXPECT_LT(h_big, h_small);
}

TEST(Cascaded, ClosedFormMatchesIntegration) {
  const auto p = make(31, 1.0, 0.3 * kPi, 0.6);
  const auto dis = sample_disorder(p, 9);
  const auto rk = propagate(build_coupling_matrix(p, dis), p.start_site(), 60.0, 2.0);
  const auto cf = cascaded_solution(p, dis, rk.times);
  EXPECT_LT(max_diff(rk.amplitudes, cf.amplitudes), 1e-8);
}

TEST(Cascaded, ClosedFormMatchesExponentialAtLongTimes) {
  const auto p = make(41, 1.0, kPi / 2, 0.5);
  const auto dis = sample_disorder(p, 3);
  const std::vector<double> times = {0.0, 50.0, 200.0, 600.0};
  const auto ex = propagate_expm(build_coupling_matrix(p, dis), p.start_site(), times);
  const auto cf = cascaded_solution(p, dis, times);
  EXPECT_LT(max_diff(ex.amplitudes, cf.amplitudes), 1e-8);
}

TEST(Cascaded, RejectsNonCascadedInput) {
  const auto p = make(5, 0.9, 0, 0);
  EXPECT_THROW(cascaded_solution(p, zero_disorder(5), std::vector<double>{0.0}),
               std::invalid_argument);
  auto q = make(5, 1.0, 0, 0.1);
  q.disorder_mode = DisorderMode::OnsitePotential;
  EXPECT_THROW(cascaded_solution(q, zero_disorder(5), std::vector<double>{0.0}),
               std::invalid_argument);
}

TEST(Symmetry, MirrorPhaseAndDisorder) {
  const auto p = make(21, 0.3, 0.2 * kPi, 0.4);
  const auto q = make(21, 0.3, 0.8 * kPi, 0.4);
  const auto dis = sample_disorder(p, 17);
  const auto a = propagate(build_coupling_matrix(p, dis), 11, 40.0, 1.0);
  const auto b = propagate(build_coupling_matrix(q, mirrored(dis)), 11, 40.0, 1.0);
  EXPECT_LT((a.populations - b.populations).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Symmetry, OnsiteDisorderSurvivesCascade) {
  // Onsite energies are not a gauge: cascaded populations feel the disorder.
  auto p = make(15, 1.0, 0.5, 0.5);
  p.disorder_mode = DisorderMode::OnsitePotential;
  const auto clean = propagate(build_coupling_matrix(p, zero_disorder(15)), 8, 20.0, 1.0);
  const auto dirty = propagate(build_coupling_matrix(p, sample_disorder(p, 4)), 8, 20.0, 1.0);
  EXPECT_GT((clean.populations - dirty.populations).cwiseAbs().maxCoeff(), 1e-3);
}
