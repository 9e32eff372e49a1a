#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "chiralloc/experiments.hpp"

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

ScanOptions small_scan(int r, double horizon, double stride) {
  ScanOptions o;
  o.ensemble.realizations = r;
  o.ensemble.horizon = horizon;
  o.ensemble.stride = stride;
  o.ensemble.base_seed = 3;
  return o;
}

}  // namespace

TEST(Grids, LinearAndLogarithmic) {
  const auto l = linspace(0.0, kPi, 9);
  ASSERT_EQ(l.size(), 9u);
  EXPECT_EQ(l.front(), 0.0);
  EXPECT_EQ(l.back(), kPi);
  EXPECT_NEAR(l[4], kPi / 2, 1e-15);
  const auto g = logspace(0.01, 1.0, 3);
  EXPECT_NEAR(g[0], 0.01, 1e-15);
  EXPECT_NEAR(g[1], 0.1, 1e-15);
  EXPECT_NEAR(g[2], 1.0, 1e-15);
}

TEST(CellSeed, DependsOnDirectionalityAndDisorderOnly) {
  const auto s = cell_seed(1, 0.2, 0.3);
  EXPECT_EQ(s, cell_seed(1, 0.2, 0.3));
  EXPECT_NE(s, cell_seed(2, 0.2, 0.3));
  EXPECT_NE(s, cell_seed(1, 0.3, 0.2));
  EXPECT_NE(s, cell_seed(1, 0.2, 0.30000000000000004));
}

TEST(Excluded, OnlyReciprocalAtRealCoupling) {
  EXPECT_TRUE(excluded_regime(0.0, 0.0));
  EXPECT_TRUE(excluded_regime(0.0, kPi));
  EXPECT_FALSE(excluded_regime(0.0, kPi / 2));
  EXPECT_FALSE(excluded_regime(0.1, 0.0));
  EXPECT_EQ(to_string(CellLabel::Excluded), "X");
}

TEST(Boundary, ExtractsTransitionsAndSkipsExcluded) {
  using enum CellLabel;
  const std::vector<double> w = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const std::vector<CellLabel> labels = {Delocalized, Excluded, Localized,
                                         Localized, Delocalized, Localized};
  const auto col = extract_boundary(0.4, w, labels);
  ASSERT_TRUE(col.first_localized.has_value());
  EXPECT_EQ(*col.first_localized, 0.3);
  ASSERT_EQ(col.transitions.size(), 3u);
  EXPECT_EQ(col.transitions[0].w_below, 0.1);
  EXPECT_EQ(col.transitions[0].w_above, 0.3);
  EXPECT_EQ(col.transitions[1].from, Localized);
  EXPECT_EQ(col.transitions[1].to, Delocalized);
  EXPECT_EQ(col.transitions[2].w_above, 0.6);

  const std::vector<CellLabel> none = {Delocalized, Delocalized};
  EXPECT_FALSE(extract_boundary(0.4, std::vector<double>{0.1, 0.2}, none)
                   .first_localized.has_value());
  EXPECT_THROW(extract_boundary(0.4, w, none), std::invalid_argument);
}

TEST(Boundary, CascadedColumnNeverLocalizes) {
  const auto base = make(21, 0.0, 0.0, 0.0);
  const auto opts = small_scan(6, 40.0, 1.0);
  const std::vector<double> d = {1.0};
  const std::vector<double> w = {0.2, 0.6, 1.0};
  const auto scan = scan_phase_boundary(base, kPi / 2, d, w, opts);
  ASSERT_EQ(scan.cells.size(), 3u);
  for (const auto& c : scan.cells) {
    EXPECT_EQ(c.label, CellLabel::Delocalized) << "w = " << c.disorder_strength;
  }
  EXPECT_FALSE(scan.columns[0].first_localized.has_value());
}

TEST(Boundary, MirroredPhaseGivesSameCell) {
  const auto base = make(21, 0.0, 0.0, 0.0);
  auto opts = small_scan(6, 40.0, 1.0);
  const auto a = classify_cell(base, 0.3 * kPi, 0.3, 0.5, opts);
  opts.ensemble.mirror_disorder = true;
  const auto b = classify_cell(base, 0.7 * kPi, 0.3, 0.5, opts);
  EXPECT_EQ(a.label, b.label);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.min_site, b.min_site);
  EXPECT_EQ(a.max_site, b.max_site);
  EXPECT_NEAR(a.final_total, b.final_total, 1e-9);
}

TEST(Boundary, ExcludedCellKeepsComputedPhase) {
  const auto cell = classify_cell(make(11, 0, 0, 0), 0.0, 0.0, 0.3,
                                  small_scan(2, 10.0, 1.0));
  EXPECT_EQ(cell.label, CellLabel::Excluded);
}

TEST(Reentrance, PatternCollapsesRuns) {
  const std::vector<double> r = {0.1, 0.2, 0.6, 0.7, std::nan(""), 0.3, 0.4};
  EXPECT_EQ(crossing_pattern(r, 0.5), "LDL");
  EXPECT_EQ(crossing_pattern(std::vector<double>{0.9, 0.8}, 0.5), "D");
  EXPECT_EQ(crossing_pattern(std::vector<double>{}, 0.5), "");

  ReentranceCurve curve;
  curve.points.resize(3);
  curve.points[0].ok = true;
  curve.points[0].ratio = 0.2;
  curve.points[1].ok = false;
  curve.points[1].ratio = 0.9;
  curve.points[2].ok = true;
  curve.points[2].ratio = 0.3;
  EXPECT_EQ(crossing_pattern(curve), "L");
}

TEST(Reentrance, CleanChainHasUnitRatio) {
  const auto p = make(11, 0.2, kPi / 2, 0.0);
  auto opts = small_scan(4, 400.0, 1.0);
  opts.tail_decades = 0.0;
  const auto pt = reentrance_point(p, kPi / 2, opts);
  ASSERT_TRUE(pt.ok) << pt.failure;
  EXPECT_NEAR(pt.ratio, 1.0, 1e-12);
  EXPECT_EQ(pt.tail_end, 400.0);
}

TEST(Reentrance, CascadedEntropyIgnoresDisorder) {
  // The gauge leaves populations, and hence block weights, unchanged.
  const auto p = make(11, 1.0, 0.0, 0.7);
  auto opts = small_scan(4, 60.0, 0.5);
  opts.tail_decades = 0.0;
  opts.entropy_level = 0.3;
  const auto pt = reentrance_point(p, 0.4, opts);
  ASSERT_TRUE(pt.ok) << pt.failure;
  EXPECT_NEAR(pt.ratio, 1.0, 1e-6);
  EXPECT_NEAR(pt.b.ratio, 1.0, 1e-6);
}

TEST(Reentrance, ShortHorizonFailsWithoutThrowing) {
  const auto p = make(11, 0.2, 0.0, 0.3);
  auto opts = small_scan(2, 5.0, 1.0);
  const auto pt = reentrance_point(p, kPi / 2, opts);
  EXPECT_FALSE(pt.ok);
  EXPECT_FALSE(pt.failure.empty());
}

TEST(Zeta, FitsInjectedProfile) {
  EnsembleResult e;
  e.params = make(41, 0.2, 0.0, 0.3);
  e.times = {0.0, 10.0};
  e.avg_populations = Eigen::MatrixXd::Zero(2, 41);
  for (int s = 1; s <= 41; ++s) {
    e.avg_populations(1, s - 1) = 0.2 * std::exp(-std::abs(s - 21) / 2.5);
  }
  const auto fit = fit_profile(e, 10.0);
  ASSERT_TRUE(fit.ok);
  EXPECT_NEAR(fit.zeta_l, 5.0 * std::numbers::ln2, 1e-10);
  // Halfway in time the profile is half as tall but equally wide.
  EXPECT_NEAR(fit_profile(e, 5.0).n_l, 2.5, 1e-10);
}

TEST(Rpr, ZeroForReferenceItself) {
  Eigen::MatrixXd g(2, 3);
  g << 1, 0, 0, 0.2, 0.5, 0.3;
  const auto r = rpr_series(g, g);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_EQ(r[1], 0.0);
  Eigen::MatrixXd other(2, 3);
  other << 0, 1, 0, 0.45, 0.0, 0.55;
  EXPECT_NEAR(rpr_series(other, g)[1], 2.0, 1e-12);
  EXPECT_THROW(rpr_series(other, Eigen::MatrixXd(1, 3)), std::invalid_argument);
}
