#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lobkit/metaorder/metaorder.hpp"

using namespace lobkit;

namespace {

TimMarket sqrt_tim(double sigma = 0.0) { return {Kernel::power_law(1.0, 0.5, 0.0), ImpactFunction::power(0.5), sigma}; }

TimMarket permanent_tim() { return {Kernel::constant(1.0), ImpactFunction::power(0.5), 0.0}; }

// Constant-rate path of the square-root propagator with G(l) = l^(-1/2).
double sqrt_tim_path(double eta, double T, double t) {
  return 2.0 * std::sqrt(eta) * (std::sqrt(t) - (t > T ? std::sqrt(t - T) : 0.0));
}

ExecutionPlan plan_with(std::size_t children, std::size_t samples, double post = 0.0) {
  ExecutionPlan p;
  p.children = children;
  p.samples = samples;
  p.post_horizon = post;
  return p;
}

ExecutionRecord synthetic_record(int sign, double phi, double move) {
  ExecutionRecord r;
  r.order = Metaorder{sign, phi * 1e6, 1e6, 0.02, 1.0};
  r.times = {0.0, 1.0};
  r.log_price = {0.0, sign * move};
  r.logp_end = sign * move;
  r.peak = move;
  return r;
}

}  // namespace

TEST(Metaorder, DerivedQuantities) {
  const Metaorder m = Metaorder::from_participation(1, 0.03, 0.1, 5e6, 0.02);
  EXPECT_NEAR(m.fraction(), 0.03, 1e-12);
  EXPECT_NEAR(m.participation(), 0.1, 1e-12);
  EXPECT_NEAR(m.duration, 0.3, 1e-12);
  EXPECT_NO_THROW(m.validate());
  EXPECT_THROW((Metaorder{1, 2e6, 1e6, 0.02, 1.0}.validate()), InvalidArgument);
  EXPECT_THROW((Metaorder{0, 1.0, 1e6, 0.02, 1.0}.validate()), InvalidArgument);
  EXPECT_THROW((Metaorder{1, 1.0, 1e6, 0.0, 1.0}.validate()), InvalidArgument);
}

TEST(Execution, ZeroSizeGivesEmptyRecord) {
  const ExecutionRecord r = execute_metaorder({1, 0.0, 1e6, 0.02, 1.0}, {}, sqrt_tim(), 1);
  EXPECT_TRUE(r.children.sizes.empty());
  EXPECT_EQ(r.impact(), 0.0);
  EXPECT_EQ(r.peak, 0.0);
}

TEST(Execution, ChildOrdersFollowSchedule) {
  const Metaorder m{1, 1e5, 1e6, 0.02, 1.0};
  const ExecutionPlan p = ExecutionPlan::front_loaded(2.0);
  const ChildOrders c = slice_schedule(m, p);
  ASSERT_EQ(c.sizes.size(), p.children);
  EXPECT_NEAR(c.total(), m.size, 1e-6);
  for (std::size_t k = 1; k < c.sizes.size(); ++k) EXPECT_LT(c.sizes[k], c.sizes[k - 1]);
  const ChildOrders whole = slice_schedule(m, p, true);
  EXPECT_EQ(whole.total(), m.size);
  for (double v : whole.sizes) EXPECT_EQ(v, std::round(v));
}

TEST(Execution, SizeMismatchThrows) {
  const Metaorder m{1, 1e5, 1e6, 0.02, 1.0};
  ChildOrders c = slice_schedule(m, {});
  c.sizes.back() += 1.0;
  EXPECT_THROW(execute_children(m, c, {}, sqrt_tim(), 1), InvalidArgument);
}

TEST(Execution, ConstantRateMatchesConvolution) {
  const Metaorder m = Metaorder::from_participation(1, 0.04, 0.1);
  const ExecutionRecord r = execute_metaorder(m, plan_with(100, 41, 2.0), sqrt_tim(), 1);
  ASSERT_NEAR(r.times.back(), 3.0 * m.duration, 1e-12);
  for (std::size_t k = 0; k < r.times.size(); ++k)
    EXPECT_NEAR(r.log_price[k], sqrt_tim_path(0.1, m.duration, r.times[k]), 1e-10) << r.times[k];
  for (std::size_t k = 1; k < 41; ++k) {
    EXPECT_GT(r.log_price[k], r.log_price[k - 1]);
    if (k > 1) {
      EXPECT_LT(r.log_price[k] - r.log_price[k - 1], r.log_price[k - 1] - r.log_price[k - 2] + 1e-15);
    }
  }
  EXPECT_NEAR(r.impact(), 2.0 * std::sqrt(0.04), 1e-12);
}

TEST(Execution, FrontLoadedRevertsBeforeEnd) {
  const Metaorder m = Metaorder::from_participation(-1, 0.04, 0.1);
  const ExecutionRecord r = execute_metaorder(m, [] {
    ExecutionPlan p = ExecutionPlan::front_loaded(2.0);
    p.samples = 101;
    return p;
  }(), sqrt_tim(), 1);
  std::size_t argmax = 0;
  for (std::size_t k = 0; k < 101; ++k)
    if (r.signed_move(r.times[k]) > r.signed_move(r.times[argmax])) argmax = k;
  EXPECT_GT(argmax, 0u);
  EXPECT_LT(argmax, 100u);
  EXPECT_LT(r.peak, r.max_excursion - 1e-3);
  EXPECT_GT(r.peak, 0.0);
}

TEST(Execution, BookMarketExecutesChildOrders) {
  BookMarket model;
  model.background.limit = {1.0, 0.8, 0.6, 0.4, 0.2};
  model.background.cancel = {0.05};
  model.background.market_buy = 0.5;
  model.background.market_sell = 0.5;
  model.initial = BookState::symmetric(200, 0.01, 99, 2, 10, 20);
  model.time_scale = 200.0;
  const Metaorder m{1, 60.0, 1000.0, 0.02, 0.5};
  ExecutionPlan p = plan_with(20, 11);
  RunningStats buys;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ExecutionRecord r = execute_metaorder(m, p, model, s);
    EXPECT_EQ(r.children.total(), 60.0);
    buys.push(r.impact());
  }
  EXPECT_GT(buys.mean(), 0.0);
  const ExecutionPlan odd = plan_with(7, 11);
  EXPECT_THROW(execute_children(m, slice_schedule(m, odd), odd, model, 1), InvalidArgument);
}

TEST(Execution, LatentBookPathIsSelfConsistentTrajectory) {
  LatentBookMarket model;
  model.params = {1.0, 1e-4, 0.01};
  model.options.nodes = 64;
  const Metaorder m{1, 4.0, 1000.0, 0.02, 1.0};
  const ExecutionRecord r = execute_metaorder(m, plan_with(10, 11), model, 1);
  const ImpactScaling s = impact_scaling(4.0, 1.0, model.params, model.options);
  EXPECT_NEAR(r.impact(), s.impact, 1e-6 * s.impact);
}

TEST(MeasureImpact, SignConventionAndZero) {
  std::vector<ExecutionRecord> recs;
  for (int i = 0; i < 40; ++i) recs.push_back(synthetic_record(i % 2 ? 1 : -1, 0.001 * (1 + i % 4), 0.003));
  const std::vector<double> edges{0.0005, 0.0015, 0.0025, 0.0035, 0.0045, 1.0};
  const ImpactCurve c = measure_impact(recs, edges);
  ASSERT_EQ(c.bins.size(), 4u);
  ASSERT_EQ(c.notices.size(), 1u);
  for (const auto& b : c.bins) {
    EXPECT_NEAR(b.impact, 0.003, 1e-15);
    EXPECT_EQ(b.count, 10u);
  }
  for (auto& r : recs) r.logp_end = 0.0;
  for (const auto& b : measure_impact(recs, edges).bins) EXPECT_EQ(b.impact, 0.0);
}

TEST(MeasureImpact, ZeroNoiseEnsembleEqualsConvolution) {
  std::vector<ExecutionRecord> recs;
  const std::vector<double> phis{0.001, 0.004, 0.016, 0.064};
  for (double phi : phis)
    for (int s : {1, -1}) recs.push_back(execute_metaorder(Metaorder::from_participation(s, phi, 0.2), plan_with(50, 2), sqrt_tim(), 7));
  const std::vector<double> edges{0.0005, 0.002, 0.008, 0.03, 0.1};
  const ImpactCurve c = measure_impact(recs, edges);
  ASSERT_EQ(c.bins.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(c.bins[i].impact, 2.0 * std::sqrt(phis[i]), 1e-8);
}

TEST(MeasureImpact, SignFlipInvariance) {
  std::vector<ExecutionRecord> buy, sell;
  for (double phi : {0.002, 0.01, 0.05}) {
    buy.push_back(execute_metaorder(Metaorder::from_participation(1, phi, 0.1), plan_with(20, 11, 1.0), sqrt_tim(), 3));
    sell.push_back(execute_metaorder(Metaorder::from_participation(-1, phi, 0.1), plan_with(20, 11, 1.0), sqrt_tim(), 3));
  }
  const std::vector<double> edges{0.001, 0.005, 0.02, 0.1};
  const auto a = measure_impact(buy, edges), b = measure_impact(sell, edges);
  for (std::size_t i = 0; i < a.bins.size(); ++i) EXPECT_DOUBLE_EQ(a.bins[i].impact, b.bins[i].impact);
  const std::vector<double> lags{0.5, 1.0};
  EXPECT_DOUBLE_EQ(decay_profile(buy, lags).ratio[1], decay_profile(sell, lags).ratio[1]);
  EXPECT_DOUBLE_EQ(impact_trajectory(buy)[0].mean[10], impact_trajectory(sell)[0].mean[10]);
}

TEST(MeasureImpact, SurfaceBins) {
  std::vector<ExecutionRecord> recs;
  for (double T : {0.1, 0.4})
    for (double eta : {0.01, 0.1}) recs.push_back(synthetic_record(1, eta * T, 0.01));
  for (std::size_t i = 0; i < recs.size(); ++i) recs[i].order.duration = i < 2 ? 0.1 : 0.4;
  const std::vector<double> te{0.05, 0.2, 1.0}, ee{0.005, 0.05, 0.5, 0.9};
  const ImpactSurface s = measure_impact_surface(recs, te, ee);
  EXPECT_EQ(s.cells.size(), 4u);
  EXPECT_EQ(s.notices.size(), 2u);
  const ImpactSurface back = impact_surface_from_csv(impact_surface_to_csv(s));
  ASSERT_EQ(back.cells.size(), 4u);
  EXPECT_EQ(back.cells[3].participation, s.cells[3].participation);
}

TEST(SqrtLaw, PlantedLaws) {
  for (auto [Y, e] : {std::pair{1.0, 0.5}, std::pair{0.5, 0.6}}) {
    ImpactCurve c;
    for (double phi : logspace(1e-4, 1e-1, 12)) c.bins.push_back({0, 0, phi, Y * 0.02 * std::pow(phi, e), 0.0, 1});
    const SqrtLawFit f = fit_sqrt_law(c, 0.02);
    EXPECT_NEAR(f.prefactor, Y, 1e-10);
    EXPECT_NEAR(f.exponent, e, 1e-10);
    if (e == 0.5) {
      EXPECT_NEAR(f.prefactor_half, Y, 1e-10);
    }
  }
}

TEST(SqrtLaw, NonPositiveBinsExcludedWithWarning) {
  ImpactCurve c;
  for (double phi : logspace(1e-4, 1e-1, 6)) c.bins.push_back({0, 0, phi, std::sqrt(phi), 0.0, 1});
  c.bins.push_back({0, 0, 0.2, -0.1, 0.0, 1});
  const SqrtLawFit f = fit_sqrt_law(c, 1.0);
  EXPECT_EQ(f.excluded, 1u);
  EXPECT_FALSE(f.warning.empty());
  EXPECT_NEAR(f.exponent, 0.5, 1e-12);
}

TEST(SqrtLaw, LatentBookSquareRootRegime) {
  LatentBookMarket model;
  model.params = {1.0, 1e-4, 0.01};
  model.options.nodes = 64;
  std::vector<ExecutionRecord> recs;
  // J = 1 per day: eta_book = Q in [200, 2e4], deep in the square-root regime.
  const std::vector<double> sizes = logspace(200.0, 2e4, 5);
  for (double q : sizes) recs.push_back(execute_metaorder({1, q, 1e6, 0.02, 1.0}, plan_with(10, 2), model, 1));
  std::vector<double> edges;
  for (double q : sizes) edges.push_back(q / 1e6 * 0.9);
  edges.push_back(sizes.back() / 1e6 * 1.1);
  const SqrtLawFit f = fit_sqrt_law(measure_impact(recs, edges), 0.02);
  EXPECT_NEAR(f.exponent, 0.5, 0.05);
}

TEST(Surface, PlantedPowerLaw) {
  std::vector<SurfacePoint> pts;
  for (double T : logspace(1e-2, 1e0, 5))
    for (double eta : logspace(1e-3, 0.3, 5)) pts.push_back({T, eta, 0.207 * std::pow(T, 0.54) * std::pow(eta, 0.52)});
  const SurfaceFit f = fit_surface(pts);
  EXPECT_NEAR(f.amplitude, 0.207, 1e-6);
  EXPECT_NEAR(f.duration_exponent, 0.54, 1e-6);
  EXPECT_NEAR(f.participation_exponent, 0.52, 1e-6);
}

TEST(Surface, ConstantImpactAndSharedPhi) {
  std::vector<SurfacePoint> pts;
  for (double T : {0.1, 0.3, 1.0})
    for (double eta : {0.01, 0.05, 0.2}) pts.push_back({T, eta, 0.01});
  const SurfaceFit f = fit_surface(pts);
  EXPECT_NEAR(f.duration_exponent, 0.0, 1e-12);
  EXPECT_NEAR(f.participation_exponent, 0.0, 1e-12);
  std::vector<SurfacePoint> shared;
  for (double eta : {0.01, 0.02, 0.05, 0.1, 0.2}) shared.push_back({0.01 / eta, eta, 0.05});
  EXPECT_THROW(fit_surface(shared), InvalidArgument);
}

TEST(Surface, FunctionOfPhiGivesEqualExponents) {
  std::vector<SurfacePoint> pts;
  for (double T : logspace(1e-2, 1e0, 4))
    for (double eta : logspace(1e-3, 1e-1, 4)) pts.push_back({T, eta, std::log1p(T * eta / 1e-3)});
  const SurfaceFit f = fit_surface(pts);
  EXPECT_NEAR(f.duration_exponent, f.participation_exponent, 1e-10);
}

TEST(Surface, ZeroNoiseSqrtTimEnsemble) {
  std::vector<ExecutionRecord> recs;
  for (double T : logspace(1e-2, 1e0, 5))
    for (double eta : logspace(1e-3, 0.3, 5))
      recs.push_back(execute_metaorder({1, eta * T * 1e6, 1e6, 0.02, T}, plan_with(10, 2), sqrt_tim(), 1));
  const SurfaceFit f = fit_surface(recs);
  EXPECT_NEAR(f.duration_exponent, 0.5, 0.05);
  EXPECT_NEAR(f.participation_exponent, 0.5, 0.05);
}

TEST(Surface, DoubleLogPlaceholder) {
  std::vector<SurfacePoint> pts;
  for (double T : logspace(1e-2, 1e0, 6))
    for (double eta : logspace(1e-3, 0.3, 6))
      pts.push_back({T, eta, 0.3 * std::log1p(T / 0.05) * std::log1p(eta / 0.01)});
  const DoubleLogFit f = fit_double_log_surface(pts, 0.2, 0.05);
  EXPECT_TRUE(f.converged);
  EXPECT_NEAR(f.amplitude, 0.3, 1e-6);
  EXPECT_NEAR(f.duration_scale, 0.05, 1e-6);
  EXPECT_NEAR(f.participation_scale, 0.01, 1e-6);
  EXPECT_FALSE(f.assumption.empty());
}

TEST(LogLaw, PlantedLaw) {
  ImpactCurve c;
  for (double phi : logspace(1e-4, 1e0, 20)) c.bins.push_back({0, 0, phi, 2.0 * std::log1p(phi / 0.01), 0.0, 1});
  const LogLawFit f = fit_log_law(c);
  EXPECT_TRUE(f.converged) << f.message;
  EXPECT_NEAR(f.amplitude, 2.0, 1e-6);
  EXPECT_NEAR(f.scale, 0.01, 1e-6 * 0.01);
  EXPECT_NEAR(f.initial_slope(), 200.0, 1e-3);
  EXPECT_TRUE(f.log_law_preferred());
}

TEST(LogLaw, LatentBookCurveAcrossRegimes) {
  const LlobParams book{1.0, 1e-4, 0.01};
  TrajectoryOptions opt;
  opt.nodes = 64;
  ImpactCurve c;
  for (double q : logspace(1e-2, 1e2, 13)) c.bins.push_back({0, 0, q, impact_scaling(q, 1.0, book, opt).impact, 0.0, 1});
  const LogLawFit f = fit_log_law(c);
  EXPECT_LT(f.residual, f.power_residual);
}

TEST(Trajectory, PermanentImpactIsMonotone) {
  std::vector<ExecutionRecord> recs;
  for (int i = 0; i < 30; ++i)
    recs.push_back(execute_metaorder(Metaorder::from_participation(i % 2 ? 1 : -1, 0.01, 0.1), plan_with(20, 21),
                                     permanent_tim(), static_cast<std::uint64_t>(i)));
  const auto g = impact_trajectory(recs);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_FALSE(g[0].undersized);
  for (std::size_t k = 1; k < g[0].mean.size(); ++k) EXPECT_GE(g[0].mean[k], g[0].mean[k - 1]);
}

TEST(Trajectory, FrontLoadedInteriorMaximum) {
  ExecutionPlan p = ExecutionPlan::front_loaded(2.0);
  p.samples = 51;
  std::vector<ExecutionRecord> recs{execute_metaorder(Metaorder::from_participation(1, 0.01, 0.1), p, sqrt_tim(), 1)};
  const auto g = impact_trajectory(recs, 51);
  ASSERT_TRUE(g[0].undersized);
  const auto it = std::max_element(g[0].mean.begin(), g[0].mean.end());
  EXPECT_LT(g[0].rescaled_time[static_cast<std::size_t>(it - g[0].mean.begin())], 1.0);
  EXPECT_GT(*it, g[0].mean.back());
}

TEST(Trajectory, ZeroImpactIsFlatWithinNoise) {
  TimMarket noise{Kernel::constant(0.0), ImpactFunction::power(0.5), 0.02};
  std::vector<ExecutionRecord> recs;
  for (int i = 0; i < 400; ++i)
    recs.push_back(execute_metaorder(Metaorder::from_participation(i % 2 ? 1 : -1, 0.01, 0.1), plan_with(5, 11),
                                     noise, static_cast<std::uint64_t>(i)));
  const auto g = impact_trajectory(recs, 11);
  for (std::size_t k = 0; k < 11; ++k) EXPECT_LT(std::abs(g[0].mean[k]), 4.0 * g[0].std_error[k] + 1e-15);
}

TEST(Decay, PlantedTwoThirdsPlateau) {
  std::vector<ExecutionRecord> recs;
  for (int i = 0; i < 50; ++i) {
    ExecutionRecord r;
    const double peak = 0.01 * (1 + i % 5);
    const int sign = i % 2 ? 1 : -1;
    r.order = {sign, 1e4, 1e6, 0.02, 1.0};
    for (double t : linspace(0.0, 31.0, 311)) {
      r.times.push_back(t);
      const double move = t <= 1.0 ? peak * t : peak * (2.0 / 3.0 + std::exp(-3.0 * (t - 1.0)) / 3.0);
      r.log_price.push_back(sign * move);
    }
    recs.push_back(std::move(r));
  }
  const std::vector<double> lags = linspace(1.0, 30.0, 30);
  const DecayProfile d = decay_profile(recs, lags);
  EXPECT_NEAR(d.asymptotic, 2.0 / 3.0, 1e-3);
  EXPECT_EQ(DecayProfile::fair_pricing_reference, 2.0 / 3.0);
}

TEST(Decay, TransientKernelDecaysToZero) {
  std::vector<ExecutionRecord> recs{
      execute_metaorder(Metaorder::from_participation(1, 0.01, 0.1), plan_with(50, 11, 10.0), sqrt_tim(), 1)};
  const std::vector<double> lags = linspace(0.5, 10.0, 20);
  const DecayProfile d = decay_profile(recs, lags);
  for (std::size_t i = 1; i < d.ratio.size(); ++i) EXPECT_LT(d.ratio[i], d.ratio[i - 1]);
  EXPECT_LT(d.ratio.back(), 0.2);
  EXPECT_NEAR(d.ratio.back(), std::sqrt(11.0) - std::sqrt(10.0), 1e-10);
  EXPECT_NEAR(d.asymptotic, 0.0, 0.02);
}

TEST(Decay, PermanentImpactRatioIsOne) {
  std::vector<ExecutionRecord> recs{
      execute_metaorder(Metaorder::from_participation(-1, 0.01, 0.1), plan_with(50, 11, 5.0), permanent_tim(), 1)};
  const std::vector<double> lags{0.5, 1.0, 2.0, 5.0};
  for (double r : decay_profile(recs, lags).ratio) EXPECT_NEAR(r, 1.0, 1e-12);
}

TEST(Decay, SignPersistenceRaisesPlateau) {
  // T = 0.2 day; the lag of 14 T reaches into the following three days.
  ExecutionPlan p = plan_with(10, 2, 15.0);
  p.post_samples = 30;
  auto ratio_at = [&](double persistence) {
    std::vector<Metaorder> days;
    for (int s : persistent_signs(400, persistence, 11)) days.push_back(Metaorder::from_participation(s, 0.02, 0.1));
    const auto recs = execute_daily_sequence(days, 1.0, p, sqrt_tim(), 5);
    const std::vector<double> lags{14.0};
    return decay_profile(std::span(recs).first(396), lags).ratio[0];
  };
  EXPECT_GT(ratio_at(0.8), ratio_at(0.0) + 0.05);
}

TEST(Variance, GrowsLinearlyInDuration) {
  std::vector<double> per_time;
  for (double T : {0.25, 0.5, 1.0, 2.0}) {
    RunningStats s;
    for (int i = 0; i < 4000; ++i) {
      const Metaorder m{i % 2 ? 1 : -1, 0.05 * T * 1e6, 1e6, 0.02, T};
      s.push(execute_metaorder(m, plan_with(4, 2), sqrt_tim(0.02), derive_seed(9, static_cast<std::uint64_t>(i) + 10000 * static_cast<std::uint64_t>(T * 4))).impact());
    }
    per_time.push_back(s.variance() / T);
  }
  for (double v : per_time) EXPECT_NEAR(v / (0.02 * 0.02), 1.0, 0.1);
}

TEST(Shortfall, ClosedForms) {
  const double Q = 5e4, T = 0.5, V = 1e6, Y = 0.8, sigma = 0.02, k = 1e-7;
  const PositionPath path = PositionPath::constant_rate(Q, T);
  EXPECT_NEAR(implementation_shortfall(path, ImpactLaw::linear(k)), k * Q * Q / 2.0, 1e-8 * k * Q * Q / 2.0);
  const double sqrt_cost = 2.0 / 3.0 * Y * sigma * Q * std::sqrt(Q / V);
  EXPECT_NEAR(implementation_shortfall(path, ImpactLaw::square_root(Y, sigma, V)), sqrt_cost, 1e-8 * sqrt_cost);
  const ImpactLaw general = ImpactLaw::custom([&](double x, double) { return Y * sigma * std::sqrt(std::abs(x) / V); });
  EXPECT_NEAR(implementation_shortfall(path, general), sqrt_cost, 1e-8 * sqrt_cost);
  EXPECT_EQ(implementation_shortfall(path, ImpactLaw::linear(0.0)), 0.0);
  const PositionPath fl = PositionPath::from_schedule(MetaorderSchedule::front_loaded(Q, T, 2.0), 64);
  EXPECT_NEAR(implementation_shortfall(fl, ImpactLaw::linear(k)), k * Q * Q / 2.0, 1e-8 * k * Q * Q / 2.0);
}

TEST(Csv, DatasetRoundTrip) {
  std::vector<ExecutionRecord> recs;
  for (int i = 0; i < 3; ++i) {
    recs.push_back(execute_metaorder(Metaorder::from_participation(i % 2 ? 1 : -1, 0.01 * (i + 1), 0.1, 1e6, 0.02),
                                     plan_with(10, 5), sqrt_tim(0.01), static_cast<std::uint64_t>(i)));
    recs.back().path_ref = "paths/" + std::to_string(i) + ".csv";
  }
  const std::string csv = records_to_csv(recs);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "id,sign,Q,V,sigma,T,eta,phi,logp_start,logp_end,peak,path_ref");
  const auto back = records_from_csv(csv);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].order.size, recs[i].order.size);
    EXPECT_EQ(back[i].logp_end, recs[i].logp_end);
    EXPECT_EQ(back[i].impact(), recs[i].impact());
    EXPECT_EQ(back[i].path_ref, recs[i].path_ref);
  }
  EXPECT_EQ(records_to_csv(back), csv);
  const auto t = two_columns_from_csv(path_to_csv(recs[0]), "t", "logp");
  EXPECT_EQ(t.second, recs[0].log_price);
  const std::vector<double> edges{0.005, 0.015, 0.025, 0.035};
  const ImpactCurve c = measure_impact(recs, edges);
  EXPECT_EQ(impact_curve_to_csv(impact_curve_from_csv(impact_curve_to_csv(c))), impact_curve_to_csv(c));
}
