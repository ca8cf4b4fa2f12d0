#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lobkit/core/error.hpp"
#include "lobkit/io/csv.hpp"

namespace lobkit {

/// A sampled curve: abscissa, estimate, standard error and sample count.
/// Used for response functions, autocorrelations and decay ratios.
struct Curve {
  std::vector<double> x;
  std::vector<double> value;
  std::vector<double> std_error;
  std::vector<std::int64_t> count;

  std::size_t size() const { return x.size(); }

  void push(double xi, double v, double se, std::int64_t n) {
    x.push_back(xi);
    value.push_back(v);
    std_error.push_back(se);
    count.push_back(n);
  }

  /// Value at abscissa `xi` (exact match required).
  double at(double xi) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] == xi) return value[i];
    throw InvalidArgument("curve has no point at x = " + std::to_string(xi));
  }

  bool operator==(const Curve&) const = default;
};

/// `tau,value,stderr,n`
inline std::string curve_to_csv(const Curve& c) {
  io::CsvWriter w({"tau", "value", "stderr", "n"});
  for (std::size_t i = 0; i < c.size(); ++i) w.row(c.x[i], c.value[i], c.std_error[i], c.count[i]);
  return w.str();
}

inline Curve curve_from_csv(std::string_view text) {
  const io::Table t = io::parse_csv(text);
  const auto cx = t.column("tau"), cv = t.column("value"), cs = t.column("stderr"), cn = t.column("n");
  Curve c;
  for (const auto& r : t.rows)
    c.push(io::parse_double(r[cx]), io::parse_double(r[cv]), io::parse_double(r[cs]), io::parse_int(r[cn]));
  return c;
}

}  // namespace lobkit
