#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "lobkit/core/error.hpp"
#include "lobkit/core/stats.hpp"
#include "lobkit/stats/curve.hpp"

namespace lobkit {

/// Response function in event time.
///
/// `flow[t]` is the signed flow f(v_t) of event t and `prices[t]` the price
/// just before event t (prices may extend past the last event). For tau > 0
///   R(tau)  = mean of flow[t] * (prices[t + tau] - prices[t]),
/// and for tau = -k < 0 the order at t is set against earlier prices:
///   R(-k)   = mean of flow[t] * (prices[t] - prices[t - k]).
/// R(0) is zero by construction. Standard errors treat the products as i.i.d.
inline Curve response_function(std::span<const double> flow, std::span<const double> prices,
                               std::span<const std::int64_t> lags) {
  if (flow.empty()) throw InvalidArgument("response function needs a non-empty flow");
  if (prices.size() < flow.size()) throw InvalidArgument("prices must be aligned with every flow entry");
  const auto n = static_cast<std::int64_t>(flow.size());
  const auto np = static_cast<std::int64_t>(prices.size());
  Curve out;
  for (std::int64_t tau : lags) {
    RunningStats acc;
    if (tau >= 0) {
      for (std::int64_t t = 0; t < n && t + tau < np; ++t)
        acc.push(flow[static_cast<std::size_t>(t)] *
                 (prices[static_cast<std::size_t>(t + tau)] - prices[static_cast<std::size_t>(t)]));
    } else {
      for (std::int64_t t = -tau; t < n; ++t)
        acc.push(flow[static_cast<std::size_t>(t)] *
                 (prices[static_cast<std::size_t>(t)] - prices[static_cast<std::size_t>(t + tau)]));
    }
    if (acc.count() == 0) throw InvalidArgument("lag " + std::to_string(tau) + " has no samples");
    out.push(static_cast<double>(tau), acc.mean(), acc.standard_error(), static_cast<std::int64_t>(acc.count()));
  }
  return out;
}

inline Curve response_function(std::span<const int> signs, std::span<const double> prices,
                               std::span<const std::int64_t> lags) {
  std::vector<double> flow(signs.begin(), signs.end());
  return response_function(flow, prices, lags);
}

/// Signed lags -k..k excluding 0.
inline std::vector<std::int64_t> symmetric_lags(std::int64_t k) {
  std::vector<std::int64_t> out;
  for (std::int64_t l = -k; l <= k; ++l)
    if (l != 0) out.push_back(l);
  return out;
}

/// R^{ij}: response of the price of asset i to the flow of asset j.
inline std::vector<std::vector<Curve>> cross_response(const std::vector<std::vector<double>>& flows,
                                                      const std::vector<std::vector<double>>& prices,
                                                      std::span<const std::int64_t> lags) {
  if (flows.size() != prices.size() || flows.empty())
    throw InvalidArgument("cross response needs one flow and one price series per asset");
  const std::size_t n = flows.front().size();
  for (std::size_t i = 0; i < flows.size(); ++i)
    if (flows[i].size() != n || prices[i].size() != prices.front().size())
      throw InvalidArgument("cross response series are not aligned");
  std::vector<std::vector<Curve>> out(flows.size(), std::vector<Curve>(flows.size()));
  for (std::size_t i = 0; i < flows.size(); ++i)
    for (std::size_t j = 0; j < flows.size(); ++j) out[i][j] = response_function(flows[j], prices[i], lags);
  return out;
}

}  // namespace lobkit
