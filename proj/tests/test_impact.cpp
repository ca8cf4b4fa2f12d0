#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "lobkit/core/random.hpp"
#include "lobkit/flow/splitting.hpp"
#include "lobkit/impact/cross_impact.hpp"
#include "lobkit/impact/hdim.hpp"
#include "lobkit/impact/propagator.hpp"
#include "lobkit/impact/regression.hpp"
#include "lobkit/impact/tim.hpp"
#include "lobkit/flow/zero_intelligence.hpp"
#include "lobkit/lob/ofi.hpp"
#include "lobkit/stats/autocorrelation.hpp"
#include "lobkit/stats/response.hpp"

using namespace lobkit;

namespace {

std::vector<int> iid_signs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> s(n);
  for (int& e : s) e = random_sign(rng);
  return s;
}

const Kernel kInvSqrt = Kernel::power_law(1.0, 0.5, 0.0);

std::vector<std::int64_t> positive_lags(std::int64_t k) {
  std::vector<std::int64_t> out;
  for (std::int64_t l = 1; l <= k; ++l) out.push_back(l);
  return out;
}

// Brute-force double integral of the single-asset cost on a fine midpoint grid.
double brute_force_cost(const Strategy& s, const Kernel& g, double horizon, int steps) {
  const double h = horizon / steps;
  std::vector<double> rate(static_cast<std::size_t>(steps), 0.0);
  for (int k = 0; k < steps; ++k) {
    const double t = (k + 0.5) * h;
    for (const auto& seg : s)
      if (t >= seg.t_start && t < seg.t_end) rate[static_cast<std::size_t>(k)] = seg.rate;
  }
  double c = 0.0;
  for (int a = 0; a < steps; ++a)
    for (int b = 0; b <= a; ++b) {
      const double w = a == b ? g.second_primitive(h) : g(h * (a - b)) * h * h;
      c += rate[static_cast<std::size_t>(a)] * rate[static_cast<std::size_t>(b)] * w;
    }
  return c;
}

}  // namespace

TEST(Tim, SingleBuyFollowsKernel) {
  const std::vector<TimEvent> ev{{0, 0, 1.0}};
  const auto p = tim_price(ev, ImpactSpec::single(kInvSqrt), 10, 1);
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 1.0);
  EXPECT_DOUBLE_EQ(p[4], 0.5);
}

TEST(Tim, NoEventsNoNoiseIsConstant) {
  ImpactSpec spec = ImpactSpec::single(kInvSqrt);
  spec.start_price = 100.0;
  for (double v : tim_price({}, spec, 50, 1)) EXPECT_EQ(v, 100.0);
}

TEST(Tim, OppositeOrdersCancel) {
  const std::vector<TimEvent> ev{{3, 0, 2.0}, {3, 0, -2.0}};
  const ImpactSpec spec = ImpactSpec::single(kInvSqrt, ImpactFunction::power(0.5));
  for (double v : tim_price(ev, spec, 20, 1)) EXPECT_EQ(v, 0.0);
}

TEST(Tim, RejectsUnknownTypeAndDisorder) {
  const ImpactSpec spec = ImpactSpec::single(kInvSqrt);
  EXPECT_THROW(tim_price(std::vector<TimEvent>{{0, 1, 1.0}}, spec, 5, 1), InvalidArgument);
  EXPECT_THROW(tim_price(std::vector<TimEvent>{{2, 0, 1.0}, {1, 0, 1.0}}, spec, 5, 1), InvalidArgument);
}

TEST(Tim, FftPathMatchesDirectConvolution) {
  const auto signs = iid_signs(12000, 5);
  const auto ev = unit_orders(signs);
  const ImpactSpec spec = ImpactSpec::single(Kernel::power_law(0.3, 0.6, 1.0));
  const auto p = tim_price(ev, spec, 12000, 1);  // 1.44e8 pairs: FFT branch
  std::vector<double> direct(12001, 0.0);
  for (std::size_t s = 0; s < 2000; ++s)
    for (std::size_t t = s + 1; t <= 2000; ++t) direct[t] += spec.kernels[0](static_cast<double>(t - s)) * signs[s];
  for (std::size_t t = 0; t <= 2000; ++t) EXPECT_NEAR(p[t], direct[t], 1e-9);
}

TEST(Tim, IidResponseEqualsKernel) {
  const auto signs = iid_signs(200000, 9);
  const Kernel g = Kernel::power_law(0.5, 0.5, 1.0);
  const auto p = tim_price(unit_orders(signs), ImpactSpec::single(g, {}, 0.1), 200000, 3);
  const auto lags = positive_lags(20);
  const Curve r = response_function(signs, p, lags);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r.value[i], g(r.x[i]), 4 * r.std_error[i]);
}

TEST(Hdim, ZeroInfluenceIsImmediateImpact) {
  HdimSpec spec;
  spec.immediate = {0.7, 0.2};
  spec.influence = {{nullptr, nullptr}, {nullptr, nullptr}};
  const std::vector<int> e{1, -1, 1, 1};
  const std::vector<std::size_t> types{0, 1, 1, 0};
  const auto p = hdim_price(e, types, spec, 1);
  EXPECT_DOUBLE_EQ(p[1] - p[0], 0.7);
  EXPECT_DOUBLE_EQ(p[2] - p[1], -0.2);
  EXPECT_DOUBLE_EQ(p[3] - p[2], 0.2);
  EXPECT_DOUBLE_EQ(p[4] - p[3], 0.7);
}

TEST(Hdim, SingleTypeReproducesPropagatorPath) {
  const auto signs = iid_signs(3000, 2);
  const Kernel g = Kernel::power_law(0.4, 0.5, 1.0);
  const auto tim = tim_price(unit_orders(signs), ImpactSpec::single(g), 3000, 1);
  const auto hdim = hdim_price(signs, {}, HdimSpec::from_propagator(g), 1);
  ASSERT_EQ(tim.size(), hdim.size());
  for (std::size_t t = 0; t < tim.size(); ++t) EXPECT_NEAR(tim[t], hdim[t], 1e-10);
}

TEST(Hdim, ExactForecastSurpriseGivesUncorrelatedIncrements) {
  // AR(1) flow with exact linear predictor a * e_{t-1}: the price moves with the surprise only.
  const double a = 0.6, g1 = 0.3;
  Rng rng(4);
  std::vector<double> flow(50000);
  double prev = 0.0;
  for (double& e : flow) prev = e = a * prev + standard_normal(rng);
  HdimSpec spec;
  spec.immediate = {g1};
  spec.influence = {{[=](std::int64_t l) { return l == 1 ? -g1 * a : 0.0; }}};
  spec.support = 1;
  const auto p = hdim_price(flow, {}, spec, 1);
  std::vector<double> dp(p.size() - 1);
  for (std::size_t t = 0; t + 1 < p.size(); ++t) dp[t] = p[t + 1] - p[t];
  const double m = mean(dp);
  double c0 = 0.0;
  for (double x : dp) c0 += (x - m) * (x - m);
  for (std::size_t lag = 1; lag <= 5; ++lag) {
    double c = 0.0;
    for (std::size_t t = 0; t + lag < dp.size(); ++t) c += (dp[t] - m) * (dp[t + lag] - m);
    EXPECT_LT(std::abs(c / c0), 3.0 / std::sqrt(static_cast<double>(dp.size())));
  }
}

TEST(Propagator, ModelResponseMatchesSimulationWithCorrelatedSigns) {
  SplittingPopulation pop;
  pop.agents = 10;
  const SignSeries s = simulate_splitting_agents(pop, 200000, 17);
  const Kernel g = Kernel::power_law(0.5, 0.6, 1.0);
  const auto p = tim_price(unit_orders(s.signs), ImpactSpec::single(g), static_cast<std::int64_t>(s.size()), 1);
  const auto corr = dense_correlation(sign_autocorr(s, 5000).curve);
  for (std::int64_t tau : {1, 5, 20, -1, -5, -20}) {
    const std::vector<std::int64_t> lag{tau};
    const Curve emp = response_function(s.signs, p, lag);
    EXPECT_NEAR(emp.value[0], model_response(g, corr, tau), 0.05 * std::abs(emp.value[0]) + 4 * emp.std_error[0])
        << "tau " << tau;
  }
}

TEST(Propagator, RecoversPowerLawExponent) {
  const auto signs = iid_signs(200000, 21);
  const Kernel truth = Kernel::power_law(0.4, 0.5, 1.0);
  const auto p = tim_price(unit_orders(signs), ImpactSpec::single(truth, {}, 0.2), 200000, 8);
  const auto lags = positive_lags(100);
  const Curve emp = response_function(signs, p, lags);
  const auto corr = dense_correlation(sign_autocorr(SignSeries{signs, {}, {}}, 100).curve);
  const PropagatorFit fit = calibrate_propagator(emp, corr);
  EXPECT_TRUE(fit.converged) << fit.message;
  EXPECT_NEAR(fit.kernel.gamma(), 0.5, 0.05);
  EXPECT_NEAR(fit.kernel.g0(), 0.4, 0.05);
}

TEST(Propagator, WhiteNoisePricesGiveNoAmplitude) {
  const auto signs = iid_signs(50000, 3);
  Rng rng(5);
  std::vector<double> p{0.0};
  for (std::size_t t = 0; t < signs.size(); ++t) p.push_back(p.back() + standard_normal(rng));
  const Curve emp = response_function(signs, p, positive_lags(50));
  const auto corr = dense_correlation(sign_autocorr(SignSeries{signs, {}, {}}, 50).curve);
  for (auto fam : {Kernel::Family::PowerLaw, Kernel::Family::Exponential, Kernel::Family::Constant}) {
    CalibrationOptions opt;
    opt.family = fam;
    const PropagatorFit fit = calibrate_propagator(emp, corr, opt);
    EXPECT_LT(std::abs(fit.unconstrained_g0), 3 * fit.g0_stderr);
    EXPECT_LT(fit.kernel.g0(), 3 * fit.g0_stderr);
  }
}

TEST(Propagator, UnderestimatesBackwardResponseOfChasingFlow) {
  const Kernel g = Kernel::power_law(0.3, 0.5, 1.0);
  const ChasingFlow cf = simulate_price_chasing(g, 1.0, 0.4, 20000, 6);
  const Curve emp = response_function(cf.signs, cf.prices, symmetric_lags(20));
  const auto corr = dense_correlation(sign_autocorr(SignSeries{cf.signs, {}, {}}, 200).curve);
  const PropagatorFit fit = calibrate_propagator(emp, corr);
  for (std::int64_t k : {1, 5, 10}) {
    const double model = std::abs(model_response(fit.kernel, corr, -k));
    const std::size_t i = static_cast<std::size_t>(20 - k);
    ASSERT_EQ(emp.x[i], static_cast<double>(-k));
    EXPECT_GT(std::abs(emp.value[i]) - model, 3 * emp.std_error[i]) << "lag " << -k;
  }
}

TEST(Regression, OfiExactLine) {
  const std::vector<double> ofi{1, -2, 3, 0.5, -1};
  std::vector<double> dp;
  for (double x : ofi) dp.push_back(2 * x);
  const LinearFit f = ofi_regression(dp, ofi);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_THROW(ofi_regression(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InvalidArgument);
  EXPECT_THROW(ofi_regression(std::vector<double>{1, 2, 3}, std::vector<double>{1, 1, 1}), InvalidArgument);
}

TEST(Regression, OfiIndependentSlopeNearZero) {
  Rng rng(2);
  std::vector<double> a(5000), b(5000);
  for (double& x : a) x = standard_normal(rng);
  for (double& x : b) x = standard_normal(rng);
  const LinearFit f = ofi_regression(a, b);
  EXPECT_LT(std::abs(f.slope), 3 * f.slope_stderr);
}

namespace {

// Simulates the structural VAR(1) with A0 = [[1, g], [0, 1]].
void simulate_var(double g, const Eigen::Matrix2d& a1, std::size_t n, std::uint64_t seed, std::vector<double>& dp,
                  std::vector<double>& f) {
  Rng rng(seed);
  Eigen::Matrix2d a0;
  a0 << 1, g, 0, 1;
  const Eigen::Matrix2d inv = a0.inverse();
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  dp.clear();
  f.clear();
  for (std::size_t t = 0; t < n; ++t) {
    const Eigen::Vector2d xi(standard_normal(rng), standard_normal(rng));
    x = inv * (a1 * x + xi);
    dp.push_back(x(0));
    f.push_back(x(1));
  }
}

}  // namespace

TEST(Regression, VarRecoversImmediateImpact) {
  std::vector<double> dp, f;
  simulate_var(0.5, Eigen::Matrix2d::Zero(), 20000, 3, dp, f);
  const VarFit fit = var_fit(dp, f, 1);
  EXPECT_NEAR(fit.g, 0.5, 0.05);
  EXPECT_NEAR(fit.immediate_impact(), -0.5, 0.05);
}

TEST(Regression, VarWhiteNoise) {
  Rng rng(8);
  std::vector<double> dp(20000), f(20000);
  for (double& x : dp) x = standard_normal(rng);
  for (double& x : f) x = standard_normal(rng);
  const VarFit fit = var_fit(dp, f, 2);
  EXPECT_LT(std::abs(fit.g), 3 * fit.g_stderr);
  for (std::size_t i = 0; i < 2; ++i)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) EXPECT_LT(std::abs(fit.lags[i](r, c)), 3.5 * fit.lag_stderr[i](r, c));
}

TEST(Regression, VarRecoversLagMatrix) {
  Eigen::Matrix2d a1;
  a1 << 0.2, -0.1, 0.05, 0.4;
  std::vector<double> dp, f;
  simulate_var(0.3, a1, 30000, 11, dp, f);
  const VarFit fit = var_fit(dp, f, 1);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(fit.lags[0](r, c), a1(r, c), 3 * fit.lag_stderr[0](r, c));
  EXPECT_THROW(var_fit(std::vector<double>(100, 1.0), std::vector<double>(100, 1.0), 1), InvalidArgument);
}

TEST(CrossImpact, ZeroRatesConstantPrices) {
  const auto spec = CrossImpactSpec::linear({{kInvSqrt, kInvSqrt}, {kInvSqrt, kInvSqrt}});
  const auto p = multi_tim_price({}, spec, {0.5, 1.0, 2.0}, 1);
  for (const auto& row : p)
    for (double v : row) EXPECT_EQ(v, 0.0);
}

TEST(CrossImpact, ConstantRateSquareRootKernel) {
  CrossImpactSpec spec = CrossImpactSpec::linear({{kInvSqrt}});
  spec.impact[0][0].scale = 0.3;
  const double rate = 2.0, T = 4.0;
  const auto p = multi_tim_price({{0.0, T, 0, rate}}, spec, {T}, 1);
  EXPECT_NEAR(p[0][0], 2.0 * rate * std::sqrt(T) * 0.3, 1e-12);
}

TEST(CrossImpact, CrossKernelScalesImpact) {
  const Kernel g = Kernel::power_law(1.0, 0.5, 0.1);
  const auto spec = CrossImpactSpec::linear({{g, Kernel::zero()}, {Kernel::power_law(0.2, 0.5, 0.1), g}});
  const auto p = multi_tim_price({{0.0, 1.0, 0, 1.5}}, spec, {0.5, 1.0, 3.0}, 1);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(p[1][k], p[0][k] / 5.0, 1e-12);
}

TEST(CrossImpact, RejectsOverlappingSegments) {
  const auto spec = CrossImpactSpec::linear({{kInvSqrt}});
  EXPECT_THROW(multi_tim_price({{0, 2, 0, 1}, {1, 3, 0, 1}}, spec, {1.0}, 1), InvalidArgument);
  EXPECT_THROW(multi_tim_price({{0, 2, 1, 1}}, spec, {1.0}, 1), InvalidArgument);
}

TEST(RoundTrip, ZeroStrategyCostsNothing) {
  const auto spec = CrossImpactSpec::linear({{Kernel::exponential(1, 1)}});
  EXPECT_EQ(roundtrip_cost({}, spec), 0.0);
}

TEST(RoundTrip, PermanentImpactCostsNothing) {
  const auto spec = CrossImpactSpec::linear({{Kernel::constant(0.7)}});
  EXPECT_NEAR(roundtrip_cost({{0, 1, 0, 1.0}, {1, 2, 0, -1.0}}, spec), 0.0, 1e-14);
}

TEST(RoundTrip, DecayingKernelCostsAndMatchesBruteForce) {
  const Kernel g = Kernel::exponential(1.0, 2.0);
  const auto spec = CrossImpactSpec::linear({{g}});
  const Strategy s{{0, 1, 0, 1.0}, {1, 2, 0, -1.0}};
  const double c = roundtrip_cost(s, spec);
  EXPECT_GT(c, 0.0);
  EXPECT_NEAR(c, brute_force_cost(s, g, 2.0, 4000), 1e-3 * c);
}

TEST(RoundTrip, RejectsOpenPositionUnlessAllowed) {
  const auto spec = CrossImpactSpec::linear({{Kernel::exponential(1, 1)}});
  const Strategy s{{0, 1, 0, 1.0}};
  EXPECT_THROW(roundtrip_cost(s, spec), InvalidArgument);
  EXPECT_GT(roundtrip_cost(s, spec, true), 0.0);
}

TEST(RoundTrip, GlobalFlipInvariantForOddImpact) {
  CrossImpactSpec spec = CrossImpactSpec::linear({{Kernel::exponential(1, 1), Kernel::exponential(0.3, 2)},
                                                  {Kernel::exponential(0.1, 1), Kernel::power_law(1, 0.5, 0.5)}});
  spec.impact[0][1] = ImpactFunction::power(0.5, 0.4);
  spec.impact[1][1] = ImpactFunction::power(0.7);
  Strategy s{{0, 1, 0, 1.0}, {1, 3, 0, -0.5}, {0.5, 1.5, 1, -2.0}, {2, 4, 1, 1.0}};
  const double c = roundtrip_cost(s, spec);
  for (auto& seg : s) seg.rate = -seg.rate;
  EXPECT_NEAR(roundtrip_cost(s, spec), c, 1e-13 * std::abs(c));
}

TEST(RoundTrip, CostMatrixAgreesWithSegmentCost) {
  const auto spec = CrossImpactSpec::linear({{Kernel::exponential(1, 1), Kernel::exponential(0.3, 2)},
                                            {Kernel::exponential(0.1, 1), Kernel::power_law(1, 0.5, 0.5)}});
  const Eigen::MatrixXd m = cost_matrix(spec, 2.0, 8);
  Rng rng(3);
  std::vector<std::vector<double>> rates(2, std::vector<double>(8));
  Eigen::VectorXd r(16);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 8; ++k) r(static_cast<Eigen::Index>(i * 8 + k)) = rates[i][k] = standard_normal(rng);
  const double direct = roundtrip_cost(strategy_on_grid(rates, 2.0), spec, true);
  EXPECT_NEAR(r.dot(m * r), direct, 1e-12 * std::abs(direct));
}

TEST(Manipulation, SymmetricDecayingSpecHasNone) {
  const Kernel g = Kernel::exponential(1.0, 1.0), h = Kernel::exponential(0.4, 1.0);
  const auto spec = CrossImpactSpec::linear({{g, h}, {h, g}});
  const ManipulationResult r = manipulation_search(spec, {2.0, 16, 1.0}, {4, 300, 7});
  EXPECT_GE(r.cost, -1e-10);
  // Spectrum of the symmetric part restricted to round trips is non-negative.
  const Eigen::MatrixXd m = cost_matrix(spec, 2.0, 16);
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(32, 30);
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 15; ++k) {
      basis(a * 16 + k, a * 15 + k) = 1.0;
      basis(a * 16 + k + 1, a * 15 + k) = -1.0;
    }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(32, 30);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.transpose() * sym * q);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(Manipulation, AsymmetricCrossKernelsAdmitProfitableRoundTrip) {
  const Kernel g = Kernel::exponential(1.0, 1.0);
  const auto spec = CrossImpactSpec::linear({{g, Kernel::exponential(0.6, 1.0)}, {Kernel::zero(), g}});
  const ManipulationResult r = manipulation_search(spec, {1.0, 24, 1.0}, {4, 400, 3});
  EXPECT_LT(r.cost, -1e-6);
  EXPECT_TRUE(is_round_trip(r.strategy, 2));
  EXPECT_NEAR(roundtrip_cost(r.strategy, spec), r.cost, 1e-15);
}

TEST(Manipulation, ConstantKernelIsCostless) {
  const auto spec = CrossImpactSpec::linear({{Kernel::constant(1.0)}});
  const ManipulationResult r = manipulation_search(spec, {1.0, 10, 1.0}, {2, 50, 1});
  EXPECT_NEAR(r.cost, 0.0, 1e-12);
}

TEST(StrategyCsv, RoundTrip) {
  const Strategy s{{0, 0.5, 0, 1.25}, {0.5, 1.0, 1, -3.0}};
  const std::string text = strategy_to_csv(s);
  EXPECT_EQ(text.substr(0, text.find('\n')), "t_start,t_end,asset,rate");
  EXPECT_EQ(strategy_from_csv(text), s);
}

TEST(Regression, OfiExplainsLargeTickPriceChanges) {
  // Large-tick regime: the spread sits at one tick most of the time.
  PoissonRates r;
  r.limit = {1.0, 1.0, 0.5};
  r.cancel = {0.1};
  r.market_buy = r.market_sell = 1.0;
  const BookState b0 = BookState::symmetric(400, 0.01, 199, 1, 6, 10);
  const EventStream ev = simulate_zi(r, b0, 20000.0, 5);
  const OfiSeries s = ofi_windows(b0, ev, 20.0, 20000.0);
  const LinearFit f = ofi_regression(s.price_change, s.ofi);
  EXPECT_GT(f.slope, 0.0);
  EXPECT_GT(f.r_squared, 0.3);
}
