#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lobkit/core/error.hpp"
#include "lobkit/core/random.hpp"
#include "lobkit/lob/book.hpp"

namespace lobkit {

/// Rates of the independent Poisson components of zero-intelligence flow.
///
/// `limit[d-1]` is the per-side arrival rate (events/s) of unit limit orders
/// placed d ticks away from the opposite best quote (buys at ask - d, sells at
/// bid + d). `cancel[d-1]` is the per-share cancellation rate of shares resting
/// d ticks from the opposite best quote; the last entry extends to larger d.
struct PoissonRates {
  std::vector<double> limit;
  std::vector<double> cancel;
  double market_buy = 0.0;
  double market_sell = 0.0;

  double cancel_rate(std::int32_t distance) const {
    if (cancel.empty() || distance < 1) return 0.0;
    const auto i = static_cast<std::size_t>(distance - 1);
    return i < cancel.size() ? cancel[i] : cancel.back();
  }

  void validate() const {
    for (double r : limit)
      if (!(r >= 0.0)) throw InvalidArgument("limit-order rates must be >= 0");
    for (double r : cancel)
      if (!(r >= 0.0)) throw InvalidArgument("cancellation rates must be >= 0");
    if (!(market_buy >= 0.0) || !(market_sell >= 0.0)) throw InvalidArgument("market-order rates must be >= 0");
  }

  bool operator==(const PoissonRates&) const = default;
};

/// State-dependent rates: the queue-reactive intensity map.
using IntensityMap = std::function<PoissonRates(const BookState&)>;

/// Exogenous labelled market orders injected while the background flow runs:
/// at Poisson times (`rate`) or, when `times` is non-empty, at those fixed
/// increasing times with the given `sizes` (unit size when empty).
struct MarketOrderSource {
  double rate = 0.0;
  std::vector<int> signs;
  std::vector<std::string> traders;
  std::vector<double> times;
  std::vector<std::int64_t> sizes;

  bool scheduled() const { return !times.empty(); }
};

namespace detail {

struct QuoteRefs {
  std::int32_t ask_ref;
  std::int32_t bid_ref;
};

inline QuoteRefs quote_refs(const BookState& b) {
  const std::int32_t centre = b.levels() / 2;
  QuoteRefs r{};
  if (b.has_ask())
    r.ask_ref = *b.best_ask();
  else
    r.ask_ref = b.has_bid() ? *b.best_bid() + 1 : centre + 1;
  if (b.has_bid())
    r.bid_ref = *b.best_bid();
  else
    r.bid_ref = b.has_ask() ? *b.best_ask() - 1 : centre;
  return r;
}

// Gillespie simulation of state-dependent Poisson flow: rates are re-read from
// the map after every event, which is exact because the book only changes at events.
inline EventStream gillespie_flow(const IntensityMap& map, BookState book, double horizon, std::uint64_t seed,
                                  std::optional<double> cap, const MarketOrderSource* external) {
  EventStream out;
  if (!(horizon > 0.0)) return out;
  Rng rng(seed);
  double t = 0.0;
  std::size_t next_external = 0;
  const std::int32_t K = book.levels();
  std::vector<double> cancel_weight(static_cast<std::size_t>(K), 0.0);
  while (true) {
    const PoissonRates rates = map(book);
    rates.validate();
    const QuoteRefs refs = quote_refs(book);
    double limit_total = 0.0;
    for (double r : rates.limit) limit_total += r;
    double cancel_total = 0.0;
    for (std::int32_t l = 1; l <= K; ++l) {
      double w = 0.0;
      if (const auto own = book.owner(l)) {
        const std::int32_t dist = *own == Side::Buy ? refs.ask_ref - l : l - refs.bid_ref;
        w = rates.cancel_rate(dist) * static_cast<double>(book.queue(l));
      }
      cancel_weight[static_cast<std::size_t>(l - 1)] = w;
      cancel_total += w;
    }
    const bool pending = external && next_external < external->signs.size();
    const bool scheduled = pending && external->scheduled();
    const double ext_rate = pending && !scheduled ? external->rate : 0.0;
    const double total = 2.0 * limit_total + rates.market_buy + rates.market_sell + cancel_total + ext_rate;
    if (cap && total > *cap)
      throw InvalidArgument("intensity map returned total rate " + std::to_string(total) + " above cap " +
                            std::to_string(*cap));
    const double candidate = total > 0.0 ? t + exponential(rng, total) : std::numeric_limits<double>::infinity();
    // A scheduled order preempts the candidate event; the candidate is
    // discarded, which is exact because the background flow is memoryless.
    if (scheduled && external->times[next_external] <= std::min(candidate, horizon)) {
      t = external->times[next_external];
      const int s = external->signs[next_external];
      const std::int64_t size = next_external < external->sizes.size() ? external->sizes[next_external] : 1;
      std::string who = next_external < external->traders.size() ? external->traders[next_external] : std::string{};
      Event ev = Event::market(t, side_of_sign(s), size, std::move(who));
      book.apply(ev);
      out.push_back(std::move(ev));
      ++next_external;
      continue;
    }
    if (!(total > 0.0)) break;
    t = candidate;
    if (t > horizon) break;

    double u = uniform01(rng) * total;
    std::optional<Event> ev;
    if (u < 2.0 * limit_total) {
      const Side side = u < limit_total ? Side::Buy : Side::Sell;
      double v = side == Side::Buy ? u : u - limit_total;
      std::size_t d = 0;
      for (; d + 1 < rates.limit.size(); ++d) {
        if (v < rates.limit[d]) break;
        v -= rates.limit[d];
      }
      const auto dist = static_cast<std::int32_t>(d + 1);
      const std::int32_t level = side == Side::Buy ? refs.ask_ref - dist : refs.bid_ref + dist;
      if (level >= 1 && level <= K) ev = Event::limit(t, side, level);
    } else if ((u -= 2.0 * limit_total) < rates.market_buy) {
      ev = Event::market(t, Side::Buy);
    } else if ((u -= rates.market_buy) < rates.market_sell) {
      ev = Event::market(t, Side::Sell);
    } else if ((u -= rates.market_sell) < cancel_total) {
      std::int32_t l = 1;
      for (; l < K; ++l) {
        const double w = cancel_weight[static_cast<std::size_t>(l - 1)];
        if (u < w) break;
        u -= w;
      }
      while (l > 1 && !book.owner(l)) --l;
      if (const auto own = book.owner(l)) ev = Event::cancel(t, *own, l);
    } else if (external) {
      const int s = external->signs[next_external];
      std::string who = next_external < external->traders.size() ? external->traders[next_external] : std::string{};
      ev = Event::market(t, side_of_sign(s), 1, std::move(who));
      ++next_external;
    }
    if (ev) {
      book.apply(*ev);
      out.push_back(std::move(*ev));
    }
  }
  return out;
}

}  // namespace detail

/// Zero-intelligence flow: independent Poisson limit orders, market orders
/// and per-share cancellations, all of unit size.
inline EventStream simulate_zi(const PoissonRates& rates, const BookState& book0, double horizon,
                               std::uint64_t seed) {
  rates.validate();
  return detail::gillespie_flow([&rates](const BookState&) { return rates; }, book0, horizon, seed, std::nullopt,
                                nullptr);
}

/// Queue-reactive flow: conditionally Poisson given the current book. `cap`
/// bounds the total event rate; a map exceeding it is rejected.
inline EventStream simulate_queue_reactive(const IntensityMap& map, const BookState& book0, double horizon,
                                           std::uint64_t seed, double cap) {
  if (!map) throw InvalidArgument("queue-reactive simulation needs an intensity map");
  if (!(cap > 0.0) || !std::isfinite(cap)) throw InvalidArgument("queue-reactive simulation needs a finite cap");
  return detail::gillespie_flow(map, book0, horizon, seed, cap, nullptr);
}

/// Zero-intelligence background with exogenous labelled market orders
/// injected at Poisson times (`source.rate`).
inline EventStream simulate_zi_with_market_orders(const PoissonRates& background, const MarketOrderSource& source,
                                                  const BookState& book0, double horizon, std::uint64_t seed) {
  background.validate();
  if (!(source.rate >= 0.0)) throw InvalidArgument("market-order source rate must be >= 0");
  if (source.scheduled()) {
    if (source.times.size() != source.signs.size()) throw InvalidArgument("one time per scheduled market order required");
    if (!source.sizes.empty() && source.sizes.size() != source.times.size())
      throw InvalidArgument("scheduled sizes must be empty (unit orders) or one per market order");
    for (std::size_t i = 0; i < source.times.size(); ++i) {
      if (!(source.times[i] >= 0.0) || (i > 0 && source.times[i] < source.times[i - 1]))
        throw InvalidArgument("scheduled market-order times must be non-negative and non-decreasing");
      if (i < source.sizes.size() && source.sizes[i] < 1) throw InvalidArgument("scheduled market orders need size >= 1");
    }
  }
  return detail::gillespie_flow([&background](const BookState&) { return background; }, book0, horizon, seed,
                                std::nullopt, &source);
}

}  // namespace lobkit
