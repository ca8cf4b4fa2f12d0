#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "lobkit/core/error.hpp"
#include "lobkit/lob/event.hpp"

namespace lobkit {

/// Event-type classifier: kind x side, optionally refined by size bin.
/// `size_edges` are increasing upper bounds; sizes above the last edge fall
/// in the final bin, so there are size_edges.size() + 1 bins.
struct EventClassifier {
  std::vector<std::int64_t> size_edges;

  std::size_t size_bins() const { return size_edges.size() + 1; }
  std::size_t type_count() const { return 6 * size_bins(); }

  std::size_t size_bin(std::int64_t size) const {
    std::size_t b = 0;
    while (b < size_edges.size() && size > size_edges[b]) ++b;
    return b;
  }

  std::size_t operator()(const Event& e) const {
    const std::size_t base = static_cast<std::size_t>(e.kind) * 2 + static_cast<std::size_t>(e.side);
    return base * size_bins() + size_bin(e.size);
  }
};

struct DiagonalEffect {
  /// transition[k][j] = P(type_{n+1} = j | type_n = k); rows of unseen types are zero.
  std::vector<std::vector<double>> transition;
  std::vector<double> frequency;
  std::vector<std::int64_t> from_count;

  /// Diagonal excess P(k|k) - P(k); NaN for a type that never precedes another event.
  double excess(std::size_t k) const {
    return from_count[k] > 0 ? transition[k][k] - frequency[k] : std::numeric_limits<double>::quiet_NaN();
  }
};

inline DiagonalEffect diagonal_effect(std::span<const std::size_t> types, std::size_t type_count) {
  if (types.size() < 2) throw InvalidArgument("diagonal effect needs at least two events");
  DiagonalEffect out;
  out.transition.assign(type_count, std::vector<double>(type_count, 0.0));
  out.frequency.assign(type_count, 0.0);
  out.from_count.assign(type_count, 0);
  for (std::size_t n = 0; n < types.size(); ++n) {
    if (types[n] >= type_count) throw InvalidArgument("event type out of range");
    out.frequency[types[n]] += 1.0;
    if (n + 1 < types.size()) {
      out.transition[types[n]][types[n + 1]] += 1.0;
      ++out.from_count[types[n]];
    }
  }
  for (std::size_t k = 0; k < type_count; ++k) {
    out.frequency[k] /= static_cast<double>(types.size());
    if (out.from_count[k] > 0)
      for (double& p : out.transition[k]) p /= static_cast<double>(out.from_count[k]);
  }
  return out;
}

inline DiagonalEffect diagonal_effect(const EventStream& events, const EventClassifier& classify = {}) {
  std::vector<std::size_t> types;
  types.reserve(events.size());
  for (const Event& e : events) types.push_back(classify(e));
  return diagonal_effect(types, classify.type_count());
}

}  // namespace lobkit
