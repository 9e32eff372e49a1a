#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chiralloc/error.hpp"
#include "chiralloc/observables.hpp"
#include "chiralloc/oracles.hpp"

using namespace chiralloc;

namespace {

std::vector<double> exponential_profile(int n, int center, double n_l) {
  std::vector<double> p(n);
  for (int s = 1; s <= n; ++s) p[s - 1] = 3.0 * std::exp(-std::abs(s - center) / n_l);
  return p;
}

Eigen::VectorXcd random_state(std::mt19937_64& gen, int n) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(g(gen), g(gen));
  return v.normalized() * std::sqrt(u(gen));
}

}  // namespace

TEST(LocalizationFit, RecoversExactExponential) {
  const auto fit = localization_fit(exponential_profile(51, 26, 4.0), 26);
  ASSERT_TRUE(fit.ok) << fit.failure;
  EXPECT_NEAR(fit.n_l, 4.0, 1e-10);
  EXPECT_NEAR(fit.zeta_l, 8.0 * std::numbers::ln2, 1e-10);
  EXPECT_NEAR(fit.amplitude, 3.0, 1e-9);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.points, 50);
}

TEST(LocalizationFit, OffCentreAndOneSided) {
  auto p = exponential_profile(30, 5, 2.5);
  const auto fit = localization_fit(p, 5);
  ASSERT_TRUE(fit.ok);
  EXPECT_NEAR(fit.n_l, 2.5, 1e-10);
}

TEST(LocalizationFit, FloorDropsTinySites) {
  auto p = exponential_profile(51, 26, 1.0);
  const auto fit = localization_fit(p, 26, 1e-6);
  ASSERT_TRUE(fit.ok);
  // e^{-d} >= 1e-6 keeps |d| <= 13.
  EXPECT_EQ(fit.first_site, 13);
  EXPECT_EQ(fit.last_site, 39);
}

TEST(LocalizationFit, DegenerateProfilesFailWithoutThrowing) {
  const std::vector<double> flat(21, 0.05);
  auto fit = localization_fit(flat, 11);
  EXPECT_FALSE(fit.ok);
  EXPECT_FALSE(fit.failure.empty());
  fit = localization_fit(std::vector<double>(9, 0.0), 5);
  EXPECT_FALSE(fit.ok);
  std::vector<double> spike(9, 0.0);
  spike[4] = 1.0;
  spike[3] = 0.1;
  fit = localization_fit(spike, 5);
  EXPECT_FALSE(fit.ok);
  EXPECT_THROW(localization_fit(flat, 0), std::invalid_argument);
}

TEST(ParticipationRatio, IdenticalProfilesGiveZero) {
  const auto p = normalized(exponential_profile(15, 8, 2.0));
  EXPECT_EQ(relative_participation_ratio(p, p), 0.0);
}

TEST(ParticipationRatio, UniformExcessCountsSites) {
  // Weight moved evenly from 2 sites onto 4 others: positive part spans 4 sites.
  std::vector<double> ref(6, 1.0 / 6), avg(6, 0.0);
  for (int i = 0; i < 4; ++i) avg[i] = 0.25;
  EXPECT_NEAR(relative_participation_ratio(avg, ref), 4.0, 1e-12);
}

TEST(ParticipationRatio, InvariantUnderRelabelAndBounded) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + trial % 20;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = u(gen);
      b[i] = u(gen);
    }
    a = normalized(a);
    b = normalized(b);
    const double r = relative_participation_ratio(a, b);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, n);
    std::vector<double> ra(a.rbegin(), a.rend()), rb(b.rbegin(), b.rend());
    EXPECT_NEAR(relative_participation_ratio(ra, rb), r, 1e-12);
  }
}

TEST(ParticipationRatio, RejectsUnnormalizedInput) {
  std::vector<double> a = {0.5, 0.6}, b = {0.5, 0.5};
  EXPECT_THROW(relative_participation_ratio(a, b), std::invalid_argument);
}

TEST(Entropy, BinaryEntropyValues) {
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.5), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(binary_entropy(0.2), binary_entropy(0.8), 1e-15);
}

TEST(Entropy, MatchesPartialTraceOnRandomStates) {
  std::mt19937_64 gen(77);
  for (int k = 0; k < 300; ++k) {
    const int n = 2 + k % 9;
    const int split = 1 + (k / 9) % (n - 1);
    const auto psi = random_state(gen, n);
    const auto fast = entropy_bipartite(psi, split);
    const auto slow = entropy_partial_trace(psi, split);
    EXPECT_NEAR(fast.a, slow.a, 1e-10);
    EXPECT_NEAR(fast.b, slow.b, 1e-10);
  }
}

TEST(Entropy, ProductStatesHaveNone) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(6);
  psi(1) = 1.0;
  const auto e = entropy_bipartite(psi, 3);
  EXPECT_NEAR(e.a, 0.0, 1e-15);
  EXPECT_NEAR(e.b, 0.0, 1e-15);
}

TEST(Entropy, BellPairAcrossTheCut) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
  psi(1) = psi(2) = 1.0 / std::sqrt(2.0);
  const auto e = entropy_bipartite(psi, 2);
  EXPECT_NEAR(e.a, std::numbers::ln2, 1e-14);
  EXPECT_NEAR(e.b, std::numbers::ln2, 1e-14);
}

TEST(PowerLaw, RecoversExponent) {
  std::vector<double> t, s;
  for (int k = 1; k <= 200; ++k) {
    t.push_back(k * 10.0);
    s.push_back(0.7 * std::pow(k * 10.0, -1.3));
  }
  auto fit = powerlaw_exponent(t, s, 100.0);
  ASSERT_TRUE(fit.ok);
  EXPECT_NEAR(fit.beta, 1.3, 1e-10);
  EXPECT_NEAR(fit.prefactor, 0.7, 1e-9);
  fit = powerlaw_exponent(t, s, 100.0, 1e-12, 8, 1000.0);
  ASSERT_TRUE(fit.ok);
  EXPECT_EQ(fit.points, 91);
  fit = powerlaw_exponent(t, s, 1950.0);
  EXPECT_FALSE(fit.ok);
}

TEST(PowerLaw, RatioOfExponents) {
  std::vector<double> t, a, b;
  for (int k = 1; k <= 100; ++k) {
    t.push_back(k);
    a.push_back(std::pow(k, -0.5));
    b.push_back(std::pow(k, -2.0));
  }
  const auto r = exponent_ratio(t, a, b, 5.0, 50.0);
  ASSERT_TRUE(r.ok);
  EXPECT_NEAR(r.ratio, 0.25, 1e-10);
}

TEST(ReferenceTime, InterpolatesCrossing) {
  const std::vector<double> t = {0, 1, 2, 3};
  const std::vector<double> p = {1.0, 0.5, 0.2, 0.05};
  EXPECT_NEAR(reference_time(t, p, 0.1), 2.0 + 0.1 / 0.15, 1e-12);
  EXPECT_EQ(reference_time(t, p, 1.0), 0.0);
  EXPECT_THROW(reference_time(t, p, 0.01), NumericalError);
  EXPECT_THROW(reference_time(t, p, 0.0), std::invalid_argument);
}

TEST(TailStart, FirstDropAfterPeak) {
  const std::vector<double> t = {0, 1, 2, 3, 4, 5};
  const std::vector<double> s = {0.0, 0.05, 0.6, 0.3, 0.08, 0.01};
  EXPECT_EQ(entropy_tail_start(t, s, 0.1), 4.0);
  EXPECT_THROW(entropy_tail_start(t, s, 0.001), NumericalError);
}

TEST(ProfileAt, LinearInterpolation) {
  const std::vector<double> t = {0, 2};
  Eigen::MatrixXd g(2, 2);
  g << 1, 0, 0, 1;
  const auto p = profile_at(t, g, 0.5);
  EXPECT_DOUBLE_EQ(p[0], 0.75);
  EXPECT_DOUBLE_EQ(p[1], 0.25);
  EXPECT_THROW(profile_at(t, g, 3.0), std::invalid_argument);
}

TEST(Transport, StaysNearCentreIsLocalized) {
  const int n = 11, c = 6;
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(5, n), avg = ref;
  for (int k = 0; k < 5; ++k) {
    ref(k, c - 1 + k) = 1.0;  // walks right to site 10
    avg(k, c - 1) = 1.0;
  }
  TransportRecord rec;
  EXPECT_EQ(classify_transport(avg, ref, c, 2, &rec), TransportPhase::Localized);
  EXPECT_EQ(rec.max_excursion, 0);
  avg(4, c - 1) = 0.0;
  avg(4, c + 2) = 1.0;  // site 9, within 2 of site 10
  EXPECT_EQ(classify_transport(avg, ref, c, 2), TransportPhase::Delocalized);
}

TEST(Transport, ArgmaxPrefersLowestSiteOnTies) {
  Eigen::MatrixXd p(1, 4);
  p << 0.2, 0.4, 0.4, 0.0;
  EXPECT_EQ(transport_record(p, 2).argmax_sites[0], 2);
}
