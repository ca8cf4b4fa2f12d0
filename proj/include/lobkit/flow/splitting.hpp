#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "lobkit/core/error.hpp"
#include "lobkit/core/random.hpp"
#include "lobkit/stats/sign_series.hpp"

namespace lobkit {

/// Population of order-splitting agents.
///
/// Each agent works one metaorder at a time: a size L drawn from an integer
/// Pareto law P(L >= l) ~ l^-alpha and a sign, then emits L unit market
/// orders of that sign. At every market-order slot one agent is picked with
/// probability proportional to its submission rate. With probability
/// `herding` a new metaorder copies the sign of the latest market order
/// instead of drawing a fresh one.
struct SplittingPopulation {
  std::int32_t agents = 1;
  double alpha = 1.5;
  std::vector<double> rates;  ///< empty: all agents equally active
  double herding = 0.0;

  void validate() const {
    if (agents < 1) throw InvalidArgument("splitting population needs at least one agent");
    if (!(alpha > 1.0)) throw InvalidArgument("metaorder size tail exponent alpha must exceed 1");
    if (!rates.empty() && rates.size() != static_cast<std::size_t>(agents))
      throw InvalidArgument("one submission rate per agent required");
    for (double r : rates)
      if (!(r >= 0.0)) throw InvalidArgument("submission rates must be >= 0");
    if (!(herding >= 0.0 && herding <= 1.0)) throw InvalidArgument("herding weight must lie in [0,1]");
  }
};

/// Generates `count` market-order signs labelled by agent.
inline SignSeries simulate_splitting_agents(const SplittingPopulation& pop, std::size_t count, std::uint64_t seed) {
  pop.validate();
  Rng rng(seed);
  const auto m = static_cast<std::size_t>(pop.agents);
  std::vector<double> cumulative;
  if (!pop.rates.empty()) {
    double acc = 0.0;
    for (double r : pop.rates) cumulative.push_back(acc += r);
    if (!(acc > 0.0)) throw InvalidArgument("at least one agent must have a positive rate");
  }
  std::vector<std::int64_t> remaining(m, 0);
  std::vector<int> sign(m, 1);
  int last_sign = random_sign(rng);
  SignSeries out;
  out.signs.reserve(count);
  out.labels.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    std::size_t a;
    if (cumulative.empty()) {
      a = static_cast<std::size_t>(rng() % m);
    } else {
      const double u = uniform01(rng) * cumulative.back();
      a = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      if (a >= m) a = m - 1;
    }
    if (remaining[a] == 0) {
      remaining[a] = pareto_int(rng, pop.alpha);
      sign[a] = (pop.herding > 0.0 && bernoulli(rng, pop.herding)) ? last_sign : random_sign(rng);
    }
    out.signs.push_back(sign[a]);
    out.labels.push_back(static_cast<std::int64_t>(a));
    --remaining[a];
    last_sign = sign[a];
  }
  return out;
}

/// Trader labels ("agent<k>") for embedding a labelled series in an event stream.
inline std::vector<std::string> agent_labels(const SignSeries& s) {
  std::vector<std::string> out;
  out.reserve(s.labels.size());
  for (auto l : s.labels) out.push_back("agent" + std::to_string(l));
  return out;
}

}  // namespace lobkit
