#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lobkit/core/error.hpp"
#include "lobkit/io/csv.hpp"
#include "lobkit/lob/event.hpp"

namespace lobkit {

/// Market-order signs in event time, with optional volumes and trader labels.
struct SignSeries {
  std::vector<int> signs;
  std::vector<double> volumes;
  std::vector<std::int64_t> labels;

  std::size_t size() const { return signs.size(); }
  bool labelled() const { return !labels.empty(); }

  void validate() const {
    if (signs.empty()) throw InvalidArgument("sign series is empty");
    for (int s : signs)
      if (s != 1 && s != -1) throw InvalidArgument("signs must be +1 or -1");
    if (!volumes.empty() && volumes.size() != signs.size())
      throw InvalidArgument("volumes must cover every sign");
    if (!labels.empty() && labels.size() != signs.size())
      throw InvalidArgument("labels must cover every sign");
  }
};

/// Extracts the market orders of a stream; string trader labels are mapped to
/// integers in order of first appearance (an empty label is its own trader).
inline SignSeries market_order_signs(const EventStream& events) {
  SignSeries s;
  std::map<std::string, std::int64_t> ids;
  for (const Event& e : events) {
    if (e.kind != EventKind::MarketOrder) continue;
    s.signs.push_back(sign_of(e.side));
    s.volumes.push_back(static_cast<double>(e.size));
    auto [it, inserted] = ids.try_emplace(e.trader, static_cast<std::int64_t>(ids.size()));
    s.labels.push_back(it->second);
  }
  return s;
}

/// `index,sign,volume,agent`; volume and agent are empty when absent.
inline std::string signs_to_csv(const SignSeries& s) {
  s.validate();
  io::CsvWriter w({"index", "sign", "volume", "agent"});
  for (std::size_t i = 0; i < s.size(); ++i)
    w.row(i, s.signs[i], s.volumes.empty() ? std::string{} : io::format_double(s.volumes[i]),
          s.labels.empty() ? std::string{} : std::to_string(s.labels[i]));
  return w.str();
}

inline SignSeries signs_from_csv(std::string_view text) {
  const io::Table t = io::parse_csv(text);
  const auto ci = t.column("index"), cs = t.column("sign"), cv = t.column("volume"), ca = t.column("agent");
  SignSeries s;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (io::parse_int(row[ci], "index") != static_cast<long long>(r)) throw InvalidArgument("sign rows must be in index order");
    s.signs.push_back(static_cast<int>(io::parse_int(row[cs], "sign")));
    if (!row[cv].empty()) s.volumes.push_back(io::parse_double(row[cv], "volume"));
    if (!row[ca].empty()) s.labels.push_back(io::parse_int(row[ca], "agent"));
  }
  s.validate();
  return s;
}

}  // namespace lobkit
