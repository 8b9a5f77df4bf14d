#pragma once

#include "error.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace frdbw {

//! Side of the cutoff. `plus` holds x >= c (ties included), `minus` x < c.
enum class Side
{
  plus,
  minus
};

enum class Response
{
  y,
  d
};

inline std::string_view
to_string(Side side)
{
  return side == Side::plus ? "plus" : "minus";
}

inline bool
on_side(double x, double c, Side side)
{
  return side == Side::plus ? x >= c : x < c;
}

//! Observations (x_i, y_i, d_i) around a cutoff c.
struct Sample
{
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> d;
  double c = 0.0;

  std::size_t size() const { return x.size(); }

  const std::vector<double>& response(Response r) const
  {
    return r == Response::y ? y : d;
  }

  std::size_t count(Side side) const
  {
    std::size_t k = 0;
    for (double xi : x)
      k += on_side(xi, c, side) ? 1 : 0;
    return k;
  }
};

//! Throws ValidationError if the sample breaks any of its invariants.
inline void
validate(const Sample& s)
{
  const std::size_t n = s.x.size();
  if (s.y.size() != n || s.d.size() != n)
    fail(ErrorKind::validation, "x, y and d must have the same length");
  if (n < 2)
    fail(ErrorKind::validation, "sample needs at least 2 observations");
  if (!std::isfinite(s.c))
    fail(ErrorKind::validation, "cutoff must be finite");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || !std::isfinite(s.d[i]))
      fail(ErrorKind::validation,
           "non-finite value at observation " + std::to_string(i + 1));
    if (s.d[i] != 0.0 && s.d[i] != 1.0)
      fail(ErrorKind::validation,
           "treatment indicator not in {0,1} at observation " + std::to_string(i + 1));
  }
  if (s.count(Side::plus) == 0)
    fail(ErrorKind::validation, "no observations at or above the cutoff");
  if (s.count(Side::minus) == 0)
    fail(ErrorKind::validation, "no observations below the cutoff");
}

} // namespace frdbw
