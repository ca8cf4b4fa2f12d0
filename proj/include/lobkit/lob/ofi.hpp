#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lobkit/lob/book.hpp"

namespace lobkit {

/// Contribution of one level-I update from `prev` to `cur`:
///   e = 1{b >= b'} q_b - 1{b <= b'} q_b' - 1{a <= a'} q_a + 1{a >= a'} q_a'
/// (primes denote the previous snapshot).
inline std::int64_t ofi_increment(const LevelOne& prev, const LevelOne& cur) {
  std::int64_t e = 0;
  if (cur.bid >= prev.bid) e += cur.bid_size;
  if (cur.bid <= prev.bid) e -= prev.bid_size;
  if (cur.ask <= prev.ask) e -= cur.ask_size;
  if (cur.ask >= prev.ask) e += prev.ask_size;
  return e;
}

/// Order flow imbalance over consecutive snapshots (snapshots[0] is the
/// state before the first update).
inline std::int64_t ofi(std::span<const LevelOne> snapshots) {
  std::int64_t total = 0;
  for (std::size_t n = 1; n < snapshots.size(); ++n) total += ofi_increment(snapshots[n - 1], snapshots[n]);
  return total;
}

/// OFI of a window of events applied to `book` (advanced in place).
inline std::int64_t ofi(BookState& book, std::span<const Event> window) {
  std::int64_t total = 0;
  LevelOne prev = book.level_one();
  for (const Event& e : window) {
    book.apply(e);
    const LevelOne cur = book.level_one();
    total += ofi_increment(prev, cur);
    prev = cur;
  }
  return total;
}

/// Midprice changes (ticks) and OFI over consecutive fixed-length time windows
/// of a replayed stream. Windows without a two-sided quote at either end are skipped.
struct OfiSeries {
  std::vector<double> price_change;
  std::vector<double> ofi;
};

inline OfiSeries ofi_windows(BookState book, const EventStream& events, double window, double horizon) {
  if (!(window > 0.0)) throw InvalidArgument("ofi window must be positive");
  OfiSeries out;
  std::size_t k = 0;
  for (double start = 0.0; start + window <= horizon + 1e-12; start += window) {
    const bool open_ok = book.has_bid() && book.has_ask();
    const double mid0 = open_ok ? book.mid_ticks() : 0.0;
    std::int64_t total = 0;
    LevelOne prev = book.level_one();
    while (k < events.size() && events[k].time < start + window) {
      book.apply(events[k]);
      const LevelOne cur = book.level_one();
      total += ofi_increment(prev, cur);
      prev = cur;
      ++k;
    }
    if (open_ok && book.has_bid() && book.has_ask()) {
      out.price_change.push_back(book.mid_ticks() - mid0);
      out.ofi.push_back(static_cast<double>(total));
    }
  }
  return out;
}

}  // namespace lobkit
