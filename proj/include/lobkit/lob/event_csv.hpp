#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lobkit/io/csv.hpp"
#include "lobkit/lob/event.hpp"

namespace lobkit {

inline const char* kind_code(EventKind k) {
  switch (k) {
    case EventKind::LimitOrder: return "LO";
    case EventKind::MarketOrder: return "MO";
    case EventKind::Cancellation: return "CA";
  }
  return "?";
}

inline const char* side_code(Side s) { return s == Side::Buy ? "B" : "S"; }

inline EventKind parse_kind(const std::string& s) {
  if (s == "LO") return EventKind::LimitOrder;
  if (s == "MO") return EventKind::MarketOrder;
  if (s == "CA") return EventKind::Cancellation;
  throw InvalidArgument("unknown event kind '" + s + "'");
}

inline Side parse_side(const std::string& s) {
  if (s == "B") return Side::Buy;
  if (s == "S") return Side::Sell;
  throw InvalidArgument("unknown side '" + s + "'");
}

/// Event log: `t,kind,side,level,size,trader`.
inline std::string events_to_csv(const EventStream& events) {
  io::CsvWriter w({"t", "kind", "side", "level", "size", "trader"});
  for (const Event& e : events)
    w.row(e.time, kind_code(e.kind), side_code(e.side), e.level ? std::to_string(*e.level) : std::string{},
          e.size, e.trader);
  return w.str();
}

inline EventStream events_from_csv(std::string_view text) {
  const io::Table t = io::parse_csv(text);
  const std::size_t ct = t.column("t"), ck = t.column("kind"), cs = t.column("side"), cl = t.column("level"),
                    cz = t.column("size"), cw = t.column("trader");
  EventStream out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    Event e;
    e.time = io::parse_double(r[ct], "t");
    e.kind = parse_kind(r[ck]);
    e.side = parse_side(r[cs]);
    if (!r[cl].empty()) e.level = static_cast<std::int32_t>(io::parse_int(r[cl], "level"));
    e.size = io::parse_int(r[cz], "size");
    e.trader = r[cw];
    out.push_back(std::move(e));
  }
  if (auto err = validate_stream(out); !err.empty()) throw InvalidArgument("event log: " + err);
  return out;
}

/// Trades: `t,price,size,aggressor` with decimal prices.
inline std::string trades_to_csv(const std::vector<Trade>& trades, double tick_size) {
  io::CsvWriter w({"t", "price", "size", "aggressor"});
  for (const Trade& tr : trades) w.row(tr.time, tr.price_level * tick_size, tr.size, side_code(tr.aggressor));
  return w.str();
}

inline std::vector<Trade> trades_from_csv(std::string_view text, double tick_size) {
  const io::Table t = io::parse_csv(text);
  const std::size_t ct = t.column("t"), cp = t.column("price"), cz = t.column("size"), ca = t.column("aggressor");
  std::vector<Trade> out;
  for (const auto& r : t.rows) {
    Trade tr;
    tr.time = io::parse_double(r[ct], "t");
    tr.price_level = static_cast<std::int32_t>(std::lround(io::parse_double(r[cp], "price") / tick_size));
    tr.size = io::parse_int(r[cz], "size");
    tr.aggressor = parse_side(r[ca]);
    out.push_back(tr);
  }
  return out;
}

}  // namespace lobkit
