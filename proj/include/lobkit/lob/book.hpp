#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lobkit/core/error.hpp"
#include "lobkit/lob/event.hpp"

namespace lobkit {

/// Per-side share accounting. For every side and at all times
///   resting + limit_traded + cancelled == limit_submitted
///   market_traded + market_unfilled   == market_submitted.
struct ShareLedger {
  std::int64_t limit_submitted = 0;
  std::int64_t limit_traded = 0;
  std::int64_t cancelled = 0;
  std::int64_t market_submitted = 0;
  std::int64_t market_traded = 0;
  std::int64_t market_unfilled = 0;
};

struct ApplyResult {
  std::vector<Trade> trades;
  /// Market-order shares left unfilled because the opposite side ran dry.
  std::int64_t unfilled = 0;

  bool has_unfilled() const noexcept { return unfilled > 0; }
};

/// Level-I view of the book: best quotes and the queues standing there.
/// An empty side reports level 0 (bid) or K+1 (ask) with a zero queue.
struct LevelOne {
  std::int32_t bid = 0;
  std::int64_t bid_size = 0;
  std::int32_t ask = 0;
  std::int64_t ask_size = 0;

  bool operator==(const LevelOne&) const = default;
};

/// K-level limit order book on a fixed tick grid with FIFO queues.
///
/// Levels are numbered 1..K and level l sits at price l * tick_size. A level
/// holds orders of at most one side; bids live strictly below asks. The book
/// is a value type: copies are independent snapshots.
class BookState {
public:
  BookState(std::int32_t levels, double tick_size) : tick_size_(tick_size), levels_(levels) {
    if (levels < 2) throw InvalidArgument("book needs at least two levels");
    if (!(tick_size > 0.0)) throw InvalidArgument("tick size must be positive");
    queue_.assign(static_cast<std::size_t>(levels), Queue{});
    best_ask_ = levels + 1;
  }

  /// Book with `depth` shares on each of `per_side` levels either side of a
  /// spread of `spread_ticks` above `best_bid`.
  static BookState symmetric(std::int32_t levels, double tick_size, std::int32_t best_bid,
                             std::int32_t spread_ticks, std::int32_t per_side, std::int64_t depth) {
    BookState b(levels, tick_size);
    for (std::int32_t i = 0; i < per_side; ++i) {
      const std::int32_t bl = best_bid - i;
      const std::int32_t al = best_bid + spread_ticks + i;
      if (bl >= 1) b.apply(Event::limit(0.0, Side::Buy, bl, depth));
      if (al <= levels) b.apply(Event::limit(0.0, Side::Sell, al, depth));
    }
    return b;
  }

  std::int32_t levels() const noexcept { return levels_; }
  double tick_size() const noexcept { return tick_size_; }
  double price_of(std::int32_t level) const noexcept { return level * tick_size_; }

  bool has_bid() const noexcept { return best_bid_ >= 1; }
  bool has_ask() const noexcept { return best_ask_ <= levels_; }

  std::optional<std::int32_t> best_bid() const {
    return has_bid() ? std::optional<std::int32_t>(best_bid_) : std::nullopt;
  }
  std::optional<std::int32_t> best_ask() const {
    return has_ask() ? std::optional<std::int32_t>(best_ask_) : std::nullopt;
  }

  /// Shares resting at a level (either side).
  std::int64_t queue(std::int32_t level) const {
    check_level(level);
    return queue_[idx(level)].total;
  }
  /// Side owning a non-empty level.
  std::optional<Side> owner(std::int32_t level) const {
    check_level(level);
    const Queue& q = queue_[idx(level)];
    return q.total > 0 ? std::optional<Side>(q.side) : std::nullopt;
  }

  std::int64_t resting(Side s) const {
    std::int64_t sum = 0;
    for (const Queue& q : queue_)
      if (q.total > 0 && q.side == s) sum += q.total;
    return sum;
  }

  const ShareLedger& ledger(Side s) const { return ledger_[static_cast<std::size_t>(s)]; }

  LevelOne level_one() const {
    LevelOne l1;
    l1.bid = best_bid_;
    l1.bid_size = has_bid() ? queue_[idx(best_bid_)].total : 0;
    l1.ask = best_ask_;
    l1.ask_size = has_ask() ? queue_[idx(best_ask_)].total : 0;
    return l1;
  }

  /// Midprice in price units.
  double midprice() const {
    require_quotes();
    return 0.5 * (best_bid_ + best_ask_) * tick_size_;
  }
  /// Spread in price units.
  double spread() const {
    require_quotes();
    return (best_ask_ - best_bid_) * tick_size_;
  }
  double mid_ticks() const {
    require_quotes();
    return 0.5 * (best_bid_ + best_ask_);
  }
  std::int32_t spread_ticks() const {
    require_quotes();
    return best_ask_ - best_bid_;
  }

  /// Applies one event in place. On a thrown BookError the book is unchanged.
  ApplyResult apply(const Event& e) {
    if (e.size < 1) throw BookError("event size must be >= 1");
    ApplyResult out;
    switch (e.kind) {
      case EventKind::MarketOrder: {
        if (e.level) throw BookError("market orders carry no level");
        auto& led = ledger_[static_cast<std::size_t>(e.side)];
        const std::int64_t filled = execute(e, e.side == Side::Buy ? levels_ : 1, out.trades);
        led.market_submitted += e.size;
        led.market_traded += filled;
        led.market_unfilled += e.size - filled;
        out.unfilled = e.size - filled;
        break;
      }
      case EventKind::LimitOrder: {
        const std::int32_t lvl = require_level(e);
        auto& led = ledger_[static_cast<std::size_t>(e.side)];
        const std::int64_t filled = execute(e, lvl, out.trades);
        led.limit_submitted += e.size;
        led.limit_traded += filled;
        if (filled < e.size) rest(e.side, lvl, e.size - filled, e.trader);
        break;
      }
      case EventKind::Cancellation: {
        const std::int32_t lvl = require_level(e);
        Queue& q = queue_[idx(lvl)];
        if (q.total == 0 || q.side != e.side)
          throw BookError("cancellation at level " + std::to_string(lvl) +
                          " targets an empty queue or the wrong side");
        if (e.size > q.total)
          throw BookError("cancellation of " + std::to_string(e.size) + " exceeds queue of " +
                          std::to_string(q.total) + " at level " + std::to_string(lvl));
        remove_from_tail(q, e.size);
        ledger_[static_cast<std::size_t>(e.side)].cancelled += e.size;
        if (q.total == 0) refresh_best(e.side);
        break;
      }
    }
    return out;
  }

  bool operator==(const BookState& o) const {
    return tick_size_ == o.tick_size_ && levels_ == o.levels_ && best_bid_ == o.best_bid_ &&
           best_ask_ == o.best_ask_ && queue_ == o.queue_;
  }

private:
  struct Lot {
    std::int64_t size;
    std::string trader;
    bool operator==(const Lot&) const = default;
  };
  struct Queue {
    Side side = Side::Buy;
    std::int64_t total = 0;
    std::deque<Lot> lots;
    bool operator==(const Queue&) const = default;
  };

  static std::size_t idx(std::int32_t level) { return static_cast<std::size_t>(level - 1); }

  void check_level(std::int32_t level) const {
    if (level < 1 || level > levels_)
      throw BookError("level " + std::to_string(level) + " outside grid 1.." + std::to_string(levels_));
  }

  std::int32_t require_level(const Event& e) const {
    if (!e.level) throw BookError("limit orders and cancellations need a level");
    check_level(*e.level);
    return *e.level;
  }

  void require_quotes() const {
    if (!has_bid() || !has_ask()) throw UndefinedQuote("quote undefined: one side of the book is empty");
  }

  // Consumes opposite liquidity at prices no worse than `limit`; returns shares filled.
  std::int64_t execute(const Event& e, std::int32_t limit, std::vector<Trade>& trades) {
    std::int64_t remaining = e.size;
    const Side passive = opposite(e.side);
    auto& passive_led = ledger_[static_cast<std::size_t>(passive)];
    while (remaining > 0) {
      if (e.side == Side::Buy) {
        if (!has_ask() || best_ask_ > limit) break;
      } else {
        if (!has_bid() || best_bid_ < limit) break;
      }
      const std::int32_t lvl = e.side == Side::Buy ? best_ask_ : best_bid_;
      Queue& q = queue_[idx(lvl)];
      const std::int64_t take = std::min(remaining, q.total);
      remove_from_head(q, take);
      passive_led.limit_traded += take;
      remaining -= take;
      trades.push_back(Trade{e.time, lvl, take, e.side});
      if (q.total == 0) refresh_best(passive);
    }
    return e.size - remaining;
  }

  void rest(Side s, std::int32_t lvl, std::int64_t size, const std::string& trader) {
    Queue& q = queue_[idx(lvl)];
    if (q.total > 0 && q.side != s) throw BookError("level already owned by the other side");
    q.side = s;
    q.total += size;
    q.lots.push_back(Lot{size, trader});
    if (s == Side::Buy)
      best_bid_ = std::max(best_bid_, lvl);
    else
      best_ask_ = std::min(best_ask_, lvl);
  }

  static void remove_from_head(Queue& q, std::int64_t n) {
    q.total -= n;
    while (n > 0) {
      Lot& lot = q.lots.front();
      const std::int64_t take = std::min(n, lot.size);
      lot.size -= take;
      n -= take;
      if (lot.size == 0) q.lots.pop_front();
    }
  }

  // Cancellations remove the most recent shares first.
  static void remove_from_tail(Queue& q, std::int64_t n) {
    q.total -= n;
    while (n > 0) {
      Lot& lot = q.lots.back();
      const std::int64_t take = std::min(n, lot.size);
      lot.size -= take;
      n -= take;
      if (lot.size == 0) q.lots.pop_back();
    }
  }

  void refresh_best(Side s) {
    if (s == Side::Buy) {
      std::int32_t l = std::min(best_bid_, levels_);
      while (l >= 1 && !(queue_[idx(l)].total > 0 && queue_[idx(l)].side == Side::Buy)) --l;
      best_bid_ = l;
    } else {
      std::int32_t l = std::max(best_ask_, 1);
      while (l <= levels_ && !(queue_[idx(l)].total > 0 && queue_[idx(l)].side == Side::Sell)) ++l;
      best_ask_ = l;
    }
  }

  double tick_size_;
  std::int32_t levels_;
  std::int32_t best_bid_ = 0;
  std::int32_t best_ask_;
  std::vector<Queue> queue_;
  std::array<ShareLedger, 2> ledger_{};
};

/// Pure form of BookState::apply: returns the successor state and trades.
inline std::pair<BookState, ApplyResult> apply_event(BookState book, const Event& e) {
  ApplyResult r = book.apply(e);
  return {std::move(book), std::move(r)};
}

inline double midprice(const BookState& b) { return b.midprice(); }
inline double spread(const BookState& b) { return b.spread(); }

/// Replays a stream from `book0`, collecting every trade and the level-I
/// snapshot after each event (snapshot 0 is the initial state).
struct Replay {
  BookState final_book;
  std::vector<Trade> trades;
  std::vector<LevelOne> snapshots;
  std::int64_t unfilled = 0;
};

inline Replay replay(BookState book, const EventStream& events) {
  Replay r{book, {}, {}, 0};
  r.snapshots.reserve(events.size() + 1);
  r.snapshots.push_back(book.level_one());
  for (const Event& e : events) {
    ApplyResult res = book.apply(e);
    r.unfilled += res.unfilled;
    r.trades.insert(r.trades.end(), res.trades.begin(), res.trades.end());
    r.snapshots.push_back(book.level_one());
  }
  r.final_book = std::move(book);
  return r;
}

}  // namespace lobkit
