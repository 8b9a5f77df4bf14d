#pragma once

#include "error.hpp"
#include "kernel.hpp"
#include "local_poly.hpp"
#include "sample.hpp"

#include <cmath>
#include <cstddef>
#include <string>

namespace frdbw {

struct FrdEstimate
{
  double tau = 0.0;
  double tauY = 0.0;
  double tauD = 0.0;
  double h_plus = 0.0;
  double h_minus = 0.0;
  std::size_t n_plus = 0;
  std::size_t n_minus = 0;
};

//! Below this |tau_D| the ratio is reported invalid instead of evaluated.
inline constexpr double denominator_floor = 1e-6;

//! Local linear ratio estimate with h_plus on x >= c and h_minus on x < c;
//! the same bandwidth serves Y and D within a side.
inline FrdEstimate
frd_estimate(const Sample& sample, double h_plus, double h_minus, KernelSpec kernel)
{
  const auto yp = fit_boundary(sample, Response::y, Side::plus, h_plus, 1, kernel);
  const auto ym = fit_boundary(sample, Response::y, Side::minus, h_minus, 1, kernel);
  const auto dp = fit_boundary(sample, Response::d, Side::plus, h_plus, 1, kernel);
  const auto dm = fit_boundary(sample, Response::d, Side::minus, h_minus, 1, kernel);

  FrdEstimate e;
  e.tauY = yp.coefficients[0] - ym.coefficients[0];
  e.tauD = dp.coefficients[0] - dm.coefficients[0];
  e.h_plus = h_plus;
  e.h_minus = h_minus;
  e.n_plus = yp.effective_n;
  e.n_minus = ym.effective_n;
  if (!(std::abs(e.tauD) >= denominator_floor))
    fail(ErrorKind::denominator_near_zero,
         "estimated treatment jump " + std::to_string(e.tauD) + " is numerically zero");
  e.tau = e.tauY / e.tauD;
  return e;
}

//! Outcome jump alone (denominator fixed at 1).
inline double
sharp_estimate(const Sample& sample, double h_plus, double h_minus, KernelSpec kernel)
{
  return estimate_level(sample, Response::y, Side::plus, h_plus, kernel) -
         estimate_level(sample, Response::y, Side::minus, h_minus, kernel);
}

} // namespace frdbw
