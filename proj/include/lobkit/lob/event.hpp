#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lobkit {

enum class EventKind : std::uint8_t { LimitOrder, MarketOrder, Cancellation };
enum class Side : std::uint8_t { Buy, Sell };

constexpr Side opposite(Side s) noexcept { return s == Side::Buy ? Side::Sell : Side::Buy; }
constexpr int sign_of(Side s) noexcept { return s == Side::Buy ? 1 : -1; }
constexpr Side side_of_sign(int sign) noexcept { return sign >= 0 ? Side::Buy : Side::Sell; }

/// One marked order-book event. `level` is a tick index in 1..K and is
/// absent exactly for market orders.
struct Event {
  double time = 0.0;
  EventKind kind = EventKind::LimitOrder;
  Side side = Side::Buy;
  std::optional<std::int32_t> level;
  std::int64_t size = 1;
  std::string trader;

  static Event limit(double t, Side s, std::int32_t lvl, std::int64_t sz = 1, std::string who = {}) {
    return Event{t, EventKind::LimitOrder, s, lvl, sz, std::move(who)};
  }
  static Event market(double t, Side s, std::int64_t sz = 1, std::string who = {}) {
    return Event{t, EventKind::MarketOrder, s, std::nullopt, sz, std::move(who)};
  }
  static Event cancel(double t, Side s, std::int32_t lvl, std::int64_t sz = 1, std::string who = {}) {
    return Event{t, EventKind::Cancellation, s, lvl, sz, std::move(who)};
  }

  bool operator==(const Event&) const = default;
};

using EventStream = std::vector<Event>;

/// An execution. `price_level` is the tick index of the consumed quote.
struct Trade {
  double time = 0.0;
  std::int32_t price_level = 0;
  std::int64_t size = 0;
  Side aggressor = Side::Buy;

  bool operator==(const Trade&) const = default;
};

/// Checks the per-event invariants and time ordering; returns a description
/// of the first problem or an empty string.
inline std::string validate_stream(const EventStream& events) {
  double last = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    const std::string where = "event " + std::to_string(i) + ": ";
    if (!(e.time >= 0.0)) return where + "negative time";
    if (i > 0 && e.time < last) return where + "time decreases";
    if (e.size < 1) return where + "size must be >= 1";
    if ((e.kind == EventKind::MarketOrder) == e.level.has_value())
      return where + "level must be present iff the event is not a market order";
    last = e.time;
  }
  return {};
}

}  // namespace lobkit
