#include <gtest/gtest.h>

#include <cmath>

#include "lobkit/core/ks.hpp"
#include "lobkit/flow/hawkes.hpp"
#include "lobkit/flow/splitting.hpp"
#include "lobkit/flow/zero_intelligence.hpp"
#include "lobkit/stats/autocorrelation.hpp"
#include "lobkit/stats/diagonal.hpp"

using namespace lobkit;

namespace {

BookState start_book() { return BookState::symmetric(200, 0.01, 99, 2, 10, 20); }

PoissonRates background() {
  PoissonRates r;
  r.limit = {1.0, 0.8, 0.6, 0.4, 0.2};
  r.cancel = {0.05};
  r.market_buy = 0.5;
  r.market_sell = 0.5;
  return r;
}

std::size_t count_kind(const EventStream& ev, EventKind k, Side s) {
  std::size_t n = 0;
  for (const Event& e : ev) n += e.kind == k && e.side == s;
  return n;
}

}  // namespace

TEST(ZeroIntelligence, ZeroRatesGiveEmptyStream) {
  EXPECT_TRUE(simulate_zi(PoissonRates{}, start_book(), 100.0, 1).empty());
}

TEST(ZeroIntelligence, MarketOrderCountIsPoisson) {
  PoissonRates r;
  r.market_buy = 1.0;
  BookState b = BookState::symmetric(200, 0.01, 99, 2, 10, 100000);
  const EventStream ev = simulate_zi(r, b, 1e4, 7);
  const double n = static_cast<double>(count_kind(ev, EventKind::MarketOrder, Side::Buy));
  EXPECT_NEAR(n, 1e4, 3.0 * std::sqrt(1e4));
}

TEST(ZeroIntelligence, StreamReplaysCleanly) {
  const BookState b0 = start_book();
  const EventStream ev = simulate_zi(background(), b0, 2000.0, 3);
  ASSERT_FALSE(ev.empty());
  EXPECT_EQ(validate_stream(ev), "");
  EXPECT_NO_THROW(replay(b0, ev));
  EXPECT_EQ(simulate_zi(background(), b0, 2000.0, 3).size(), ev.size());
}

TEST(ZeroIntelligence, MarketSignsAreUncorrelated) {
  const EventStream ev = simulate_zi(background(), start_book(), 2e4, 11);
  const SignSeries s = market_order_signs(ev);
  const auto ac = sign_autocorr(s, 1);
  EXPECT_LT(std::abs(ac.curve.value[0]), 3.0 / std::sqrt(static_cast<double>(s.size())));
}

TEST(QueueReactive, ConstantMapMatchesZiCounts) {
  const PoissonRates r = background();
  const EventStream a = simulate_zi(r, start_book(), 5000.0, 21);
  const EventStream b =
      simulate_queue_reactive([&r](const BookState&) { return r; }, start_book(), 5000.0, 22, 1e6);
  const double na = static_cast<double>(count_kind(a, EventKind::MarketOrder, Side::Buy));
  const double nb = static_cast<double>(count_kind(b, EventKind::MarketOrder, Side::Buy));
  EXPECT_NEAR(na, nb, 4.0 * std::sqrt(na + nb));
}

TEST(QueueReactive, ZeroMapGivesEmptyStream) {
  EXPECT_TRUE(simulate_queue_reactive([](const BookState&) { return PoissonRates{}; }, start_book(), 100.0, 1, 10.0)
                  .empty());
}

TEST(QueueReactive, RequiresFiniteCap) {
  const auto map = [](const BookState&) { return PoissonRates{}; };
  EXPECT_THROW(simulate_queue_reactive(map, start_book(), 1.0, 1, INFINITY), InvalidArgument);
  const PoissonRates r = background();
  EXPECT_THROW(simulate_queue_reactive([&r](const BookState&) { return r; }, start_book(), 100.0, 1, 0.5),
               InvalidArgument);
}

TEST(QueueReactive, SpreadSensitiveLiquidityNarrowsSpread) {
  const PoissonRates base = background();
  auto mean_spread = [](const BookState& b0, const EventStream& ev) {
    BookState b = b0;
    double acc = 0.0;
    std::size_t n = 0;
    for (const Event& e : ev) {
      b.apply(e);
      if (b.has_bid() && b.has_ask()) {
        acc += b.spread_ticks();
        ++n;
      }
    }
    return acc / static_cast<double>(n);
  };
  double sum_const = 0.0;
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    sum_const += mean_spread(start_book(), simulate_zi(base, start_book(), 4000.0, 100 + seed));
  // Limit rate proportional to the spread, normalised so that its average over
  // the constant-rate spread distribution equals the constant rate.
  const double typical = sum_const / 4.0;
  const auto reactive = [base, typical](const BookState& b) {
    PoissonRates r = base;
    const double s = (b.has_bid() && b.has_ask()) ? b.spread_ticks() : typical;
    for (double& l : r.limit) l *= s / typical;
    return r;
  };
  double sum_react = 0.0;
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    sum_react += mean_spread(start_book(), simulate_queue_reactive(reactive, start_book(), 4000.0, 200 + seed, 1e6));
  EXPECT_LT(sum_react, sum_const);
}

TEST(Hawkes, IntensityClosedForm) {
  HawkesSpec s = HawkesSpec::independent({0.1});
  s.kernels[0][0] = Kernel::exponential(2.0, 1.0);
  EXPECT_DOUBLE_EQ(intensity_at(s, {}, 1.0)[0], 0.1);
  EXPECT_NEAR(intensity_at(s, {{0.0, 0}}, 1.0)[0], 0.1 + 2.0 * std::exp(-1.0), 1e-12);
  EXPECT_DOUBLE_EQ(intensity_at(s, {{2.0, 0}}, 1.0)[0], 0.1);
}

TEST(Hawkes, NoKernelIsPoisson) {
  const HawkesSpec s = HawkesSpec::independent({2.0, 0.5});
  const PointStream p = simulate_hawkes(s, 5000.0, 5);
  std::size_t n0 = 0, n1 = 0;
  for (const auto& x : p) (x.component == 0 ? n0 : n1)++;
  EXPECT_NEAR(static_cast<double>(n0), 1e4, 3.0 * 100.0);
  EXPECT_NEAR(static_cast<double>(n1), 2500.0, 3.0 * 50.0);
}

TEST(Hawkes, ZeroHorizonIsEmpty) {
  EXPECT_TRUE(simulate_hawkes(HawkesSpec::independent({1.0}), 0.0, 1).empty());
}

TEST(Hawkes, StationaryMeanCount) {
  HawkesSpec s = HawkesSpec::independent({1.0});
  s.kernels[0][0] = Kernel::exponential(0.5, 1.0);
  const PointStream p = simulate_hawkes(s, 1e4, 17);
  // Var[N] ~ mu T / (1-n)^3 for a stationary Hawkes process.
  const double sd = std::sqrt(1e4 / std::pow(0.5, 3));
  EXPECT_NEAR(static_cast<double>(p.size()), 2e4, 3.0 * sd);
}

TEST(Hawkes, RejectsSupercritical) {
  HawkesSpec s = HawkesSpec::independent({1.0});
  s.kernels[0][0] = Kernel::exponential(1.5, 1.0);
  EXPECT_THROW(simulate_hawkes(s, 10.0, 1), InvalidArgument);
}

TEST(Hawkes, SeedDeterminism) {
  HawkesSpec s = HawkesSpec::independent({1.0, 1.0});
  s.kernels[0][1] = Kernel::exponential(0.3, 2.0);
  s.kernels[1][0] = Kernel::power_law(0.2, 1.5, 1.0);
  EXPECT_EQ(simulate_hawkes(s, 500.0, 9), simulate_hawkes(s, 500.0, 9));
  EXPECT_NE(simulate_hawkes(s, 500.0, 9), simulate_hawkes(s, 500.0, 10));
}

TEST(Hawkes, TimeChangeResidualsAreUnitExponential) {
  HawkesSpec s = HawkesSpec::independent({0.5, 0.5});
  s.kernels[0][0] = Kernel::exponential(0.4, 1.0);
  s.kernels[1][0] = Kernel::exponential(0.2, 0.5);
  s.kernels[1][1] = Kernel::power_law(0.3, 2.0, 1.0);
  const PointStream p = simulate_hawkes(s, 1.5e4, 31);
  const auto res = time_change_residuals(s, p);
  for (const auto& r : res) {
    ASSERT_GT(r.size(), 5000u);
    EXPECT_GT(ks_test_unit_exponential(r).p_value, 0.01);
  }
}

TEST(Hawkes, PowerLawApproximationWithinTolerance) {
  const Kernel k = Kernel::power_law(0.3, 1.5, 1.0);
  const ExpSum e = k.as_exp_sum(1e4);
  EXPECT_LE(k.relative_l1_error(e, 1e-3, 1e4), 0.01);
}

TEST(Hawkes, DiagonalKernelsProduceDiagonalEffect) {
  HawkesSpec s = HawkesSpec::independent({0.3, 0.3, 0.3});
  for (std::size_t i = 0; i < 3; ++i) s.kernels[i][i] = Kernel::exponential(0.6, 2.0);
  s.kernels[0][1] = Kernel::exponential(0.1, 2.0);
  const PointStream p = simulate_hawkes(s, 2e4, 41);
  std::vector<std::size_t> types;
  for (const auto& x : p) types.push_back(static_cast<std::size_t>(x.component));
  const DiagonalEffect d = diagonal_effect(types, 3);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_GT(d.excess(k), 0.0) << "type " << k;
}

TEST(Hawkes, MarksBuildEvents) {
  HawkesSpec s = HawkesSpec::independent({1.0, 1.0});
  s.marks = {ComponentMark{EventKind::MarketOrder, Side::Buy, 0, 1, 0},
             ComponentMark{EventKind::LimitOrder, Side::Sell, 120, 2, 0}};
  const EventStream ev = to_events(s, simulate_hawkes(s, 50.0, 2));
  ASSERT_FALSE(ev.empty());
  for (const Event& e : ev) EXPECT_EQ(e.level.has_value(), e.kind != EventKind::MarketOrder);
}

TEST(Splitting, SingleAgentEmitsRuns) {
  SplittingPopulation pop;
  const SignSeries s = simulate_splitting_agents(pop, 2000, 4);
  std::size_t runs = 1;
  for (std::size_t i = 1; i < s.size(); ++i) runs += s.signs[i] != s.signs[i - 1];
  EXPECT_LT(runs, s.size() / 2);
  for (auto l : s.labels) EXPECT_EQ(l, 0);
}

TEST(Splitting, SlowlyDecayingPositiveCorrelation) {
  SplittingPopulation pop;
  pop.agents = 10;
  const SignSeries s = simulate_splitting_agents(pop, 300000, 8);
  const auto ac = sign_autocorr(s, std::vector<std::size_t>{1, 10, 100});
  for (double c : ac.curve.value) EXPECT_GT(c, 0.0);
  EXPECT_GT(ac.curve.value[2], 3.0 / std::sqrt(static_cast<double>(s.size())));
}

TEST(Splitting, RejectsBadPopulation) {
  SplittingPopulation pop;
  pop.alpha = 1.0;
  EXPECT_THROW(simulate_splitting_agents(pop, 10, 1), InvalidArgument);
  pop.alpha = 1.5;
  pop.agents = 0;
  EXPECT_THROW(simulate_splitting_agents(pop, 10, 1), InvalidArgument);
}

TEST(Splitting, EmbeddedInLiveBook) {
  SplittingPopulation pop;
  pop.agents = 3;
  const SignSeries s = simulate_splitting_agents(pop, 500, 12);
  MarketOrderSource src;
  src.rate = 0.5;
  src.signs = s.signs;
  src.traders = agent_labels(s);
  PoissonRates bg = background();
  bg.market_buy = bg.market_sell = 0.0;
  const BookState b0 = start_book();
  const EventStream ev = simulate_zi_with_market_orders(bg, src, b0, 5000.0, 13);
  const SignSeries back = market_order_signs(ev);
  ASSERT_GT(back.size(), 100u);
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back.signs[i], s.signs[i]);
  EXPECT_NO_THROW(replay(b0, ev));
}

TEST(ZeroIntelligence, ScheduledMarketOrdersFireAtTheirTimes) {
  MarketOrderSource src;
  src.times = {1.0, 2.5, 7.0};
  src.sizes = {3, 1, 2};
  src.signs = {1, -1, 1};
  src.traders = {"meta", "meta", "meta"};
  const EventStream ev = simulate_zi_with_market_orders(background(), src, start_book(), 5.0, 3);
  std::vector<const Event*> mine;
  for (const Event& e : ev)
    if (e.trader == "meta") mine.push_back(&e);
  ASSERT_EQ(mine.size(), 2u);
  EXPECT_EQ(mine[0]->time, 1.0);
  EXPECT_EQ(mine[0]->size, 3);
  EXPECT_EQ(mine[0]->side, Side::Buy);
  EXPECT_EQ(mine[1]->time, 2.5);
  EXPECT_EQ(mine[1]->side, Side::Sell);
  for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_GE(ev[i].time, ev[i - 1].time);
  src.sizes.pop_back();
  EXPECT_THROW(simulate_zi_with_market_orders(background(), src, start_book(), 5.0, 3), InvalidArgument);
}
