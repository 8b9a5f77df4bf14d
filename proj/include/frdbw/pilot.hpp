#pragma once

#include "error.hpp"
#include "kernel.hpp"
#include "local_poly.hpp"
#include "sample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace frdbw {

//! Plug-in estimates of every unknown entering the bandwidth criterion.
struct PilotEstimates
{
  double f = 0.0;
  double f1 = 0.0;
  double m2Y_plus = 0.0, m2Y_minus = 0.0;
  double m3Y_plus = 0.0, m3Y_minus = 0.0;
  double m2D_plus = 0.0, m2D_minus = 0.0;
  double m3D_plus = 0.0, m3D_minus = 0.0;
  double sig2Y_plus = 0.0, sig2Y_minus = 0.0;
  double sig2D_plus = 0.0, sig2D_minus = 0.0;
  double sigYD_plus = 0.0, sigYD_minus = 0.0;
  double tauD = 0.0;
  double tau = 0.0;
};

struct DensityEstimate
{
  double f = 0.0;
  double f1 = 0.0;
};

struct Derivatives
{
  double m2 = 0.0;
  double m3 = 0.0;
};

struct SideMoments
{
  double sig2Y = 0.0;
  double sig2D = 0.0;
  double sigYD = 0.0;
};

//! Smallest |tau_D| accepted before the ratio estimator is declared unstable.
inline constexpr double weak_discontinuity_threshold = 0.05;

namespace detail {

inline double
sample_sd(const std::vector<double>& v)
{
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v)
    mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

inline std::vector<double>
side_values(const std::vector<double>& v, const Sample& s, Side side)
{
  std::vector<double> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (on_side(s.x[i], s.c, side))
      out.push_back(v[i]);
  return out;
}

//! Rule-of-thumb local linear bandwidth 1.84 * sd * n^(-1/5).
inline double
rule_of_thumb_bandwidth(const std::vector<double>& x)
{
  return 1.84 * sample_sd(x) * std::pow(static_cast<double>(x.size()), -0.2);
}

} // namespace detail

//! Gaussian kernel density estimate of f(c) and f'(c) from the full sample.
//! Level bandwidth 1.06 sd n^(-1/5); the derivative uses the slower
//! n^(-1/7) rate with the same constant.
inline DensityEstimate
estimate_density(const Sample& sample)
{
  const std::size_t n = sample.size();
  if (n < 10)
    fail(ErrorKind::insufficient_data, "density estimation needs at least 10 observations");
  const auto [lo, hi] = std::minmax_element(sample.x.begin(), sample.x.end());
  const double sd = detail::sample_sd(sample.x);
  if (*lo == *hi || !(sd > 0.0))
    fail(ErrorKind::degenerate_sample, "assignment variable has zero spread");

  const double nd = static_cast<double>(n);
  const double h0 = 1.06 * sd * std::pow(nd, -0.2);
  const double h1 = h0 * std::pow(nd, 0.2 - 1.0 / 7.0);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  double s0 = 0.0, s1 = 0.0;
  for (double xi : sample.x) {
    const double u0 = (sample.c - xi) / h0;
    s0 += std::exp(-0.5 * u0 * u0);
    const double u1 = (sample.c - xi) / h1;
    s1 += -u1 * std::exp(-0.5 * u1 * u1);
  }
  return { norm * s0 / (nd * h0), norm * s1 / (nd * h1 * h1) };
}

//! Second and third derivatives at the cutoff from a global quartic fitted by
//! ordinary least squares to one side.
inline Derivatives
estimate_derivatives(const Sample& sample, Response response, Side side)
{
  const auto xs = detail::side_values(sample.x, sample, side);
  const auto ys = detail::side_values(sample.response(response), sample, side);
  if (xs.size() < 6)
    fail(ErrorKind::insufficient_data,
         "derivative pilot needs at least 6 observations on the " +
           std::string(to_string(side)) + " side");
  double scale = 0.0;
  for (double x : xs)
    scale = std::max(scale, std::abs(x - sample.c));
  const std::vector<double> w(xs.size(), 1.0);
  const auto beta = detail::weighted_poly_fit(xs, ys, w, sample.c, 4, scale);
  return { 2.0 * beta[2], 6.0 * beta[3] };
}

//! Conditional variances and covariance of (Y, D) at the cutoff from local
//! linear residuals on one side.
inline SideMoments
estimate_variances(const Sample& sample, Side side, KernelSpec kernel)
{
  const auto xs = detail::side_values(sample.x, sample, side);
  if (xs.size() < 10)
    fail(ErrorKind::insufficient_data,
         "variance pilot needs at least 10 observations on the " +
           std::string(to_string(side)) + " side");
  const double h = detail::rule_of_thumb_bandwidth(xs);
  const auto fy = fit_boundary(sample, Response::y, side, h, 1, kernel);
  const auto fd = fit_boundary(sample, Response::d, side, h, 1, kernel);
  if (fy.effective_n < 4)
    fail(ErrorKind::insufficient_data, "fewer than 4 observations inside the variance window");

  double syy = 0.0, sdd = 0.0, syd = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!on_side(sample.x[i], sample.c, side))
      continue;
    const double u = sample.x[i] - sample.c;
    if (!(eval_kernel(kernel, u / h) > 0.0))
      continue;
    const double ey = sample.y[i] - fy.coefficients[0] - fy.coefficients[1] * u;
    const double ed = sample.d[i] - fd.coefficients[0] - fd.coefficients[1] * u;
    syy += ey * ey;
    sdd += ed * ed;
    syd += ey * ed;
  }
  const double dof = static_cast<double>(fy.effective_n) - 2.0;
  SideMoments m{ syy / dof, sdd / dof, syd / dof };
  if (m.sig2D < 1e-12) {
    m.sig2D = 0.0;
    m.sigYD = 0.0;
  }
  const double bound = std::sqrt(m.sig2Y * m.sig2D);
  if (std::abs(m.sigYD) > bound)
    m.sigYD = std::copysign(bound, m.sigYD);
  return m;
}

namespace detail {

inline double
jump(const Sample& sample, Response response, double h, KernelSpec kernel)
{
  return estimate_level(sample, response, Side::plus, h, kernel) -
         estimate_level(sample, response, Side::minus, h, kernel);
}

} // namespace detail

//! Pilot bandwidth shared by the tau_D and tau pilots.
inline double
pilot_jump_bandwidth(const Sample& sample)
{
  return detail::rule_of_thumb_bandwidth(sample.x);
}

//! Sharp-design jump of E[D | X] at the cutoff.
inline double
estimate_tauD(const Sample& sample, KernelSpec kernel)
{
  const double tauD = detail::jump(sample, Response::d, pilot_jump_bandwidth(sample), kernel);
  if (!(std::abs(tauD) >= weak_discontinuity_threshold))
    fail(ErrorKind::weak_discontinuity,
         "estimated treatment jump " + std::to_string(tauD) + " is below " +
           std::to_string(weak_discontinuity_threshold) + " in magnitude");
  return tauD;
}

inline PilotEstimates
assemble_pilots(const Sample& sample, KernelSpec kernel)
{
  PilotEstimates p;
  const auto dens = estimate_density(sample);
  p.f = dens.f;
  p.f1 = dens.f1;
  if (!(p.f > 0.0))
    fail(ErrorKind::degenerate_sample, "estimated density at the cutoff is zero");

  const auto yp = estimate_derivatives(sample, Response::y, Side::plus);
  const auto ym = estimate_derivatives(sample, Response::y, Side::minus);
  const auto dp = estimate_derivatives(sample, Response::d, Side::plus);
  const auto dm = estimate_derivatives(sample, Response::d, Side::minus);
  p.m2Y_plus = yp.m2;
  p.m3Y_plus = yp.m3;
  p.m2Y_minus = ym.m2;
  p.m3Y_minus = ym.m3;
  p.m2D_plus = dp.m2;
  p.m3D_plus = dp.m3;
  p.m2D_minus = dm.m2;
  p.m3D_minus = dm.m3;

  const auto vp = estimate_variances(sample, Side::plus, kernel);
  const auto vm = estimate_variances(sample, Side::minus, kernel);
  p.sig2Y_plus = vp.sig2Y;
  p.sig2D_plus = vp.sig2D;
  p.sigYD_plus = vp.sigYD;
  p.sig2Y_minus = vm.sig2Y;
  p.sig2D_minus = vm.sig2D;
  p.sigYD_minus = vm.sigYD;

  p.tauD = estimate_tauD(sample, kernel);
  p.tau = detail::jump(sample, Response::y, pilot_jump_bandwidth(sample), kernel) / p.tauD;
  return p;
}

} // namespace frdbw
