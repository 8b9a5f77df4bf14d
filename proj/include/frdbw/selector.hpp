#pragma once

#include "error.hpp"
#include "kernel.hpp"
#include "pilot.hpp"
#include "sample.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

namespace frdbw {

//! fuzzy: full ratio criterion. sharp: numerator-only criterion (the
//! comparator that ignores the estimated denominator).
enum class Mode
{
  fuzzy,
  sharp
};

inline std::string_view
to_string(Mode mode)
{
  return mode == Mode::fuzzy ? "fuzzy" : "sharp";
}

struct AmseCoefficients
{
  double phi_plus = 0.0, phi_minus = 0.0;
  double psi_plus = 0.0, psi_minus = 0.0;
  double omega_plus = 0.0, omega_minus = 0.0;
  double v = 0.0;
  double f = 0.0;
  double tauD = 1.0;
  double n = 0.0;
};

enum class Regime
{
  opposite_sign,
  same_sign,
  boundary_clamped
};

inline std::string_view
to_string(Regime r)
{
  switch (r) {
    case Regime::opposite_sign:
      return "opposite_sign";
    case Regime::same_sign:
      return "same_sign";
    case Regime::boundary_clamped:
      return "boundary_clamped";
  }
  return "unknown";
}

struct BandwidthPair
{
  double h_plus = 0.0;
  double h_minus = 0.0;
  Regime regime = Regime::opposite_sign;
  double objective_value = 0.0;
};

//! Search box for (h_plus, h_minus).
struct BandwidthBounds
{
  double plus_lo = 0.0, plus_hi = 0.0;
  double minus_lo = 0.0, minus_hi = 0.0;
};

namespace detail {

//! Second-order bias coefficient of one conditional mean on one side. The
//! leading factor is -1 on the plus side and +1 on the minus side.
inline double
zeta(double m2, double m3, double f1_over_f, Side side, const KernelMoments& km)
{
  const double sign = side == Side::plus ? -1.0 : 1.0;
  const double half_m2_ratio = 0.5 * m2 * f1_over_f;
  return sign * (km.xi1 * (half_m2_ratio + m3 / 6.0) - km.xi2 * half_m2_ratio);
}

} // namespace detail

inline AmseCoefficients
compute_coefficients(const PilotEstimates& p,
                     const KernelMoments& km,
                     Mode mode,
                     double n)
{
  const double r = p.f1 / p.f;
  const double zY_plus = detail::zeta(p.m2Y_plus, p.m3Y_plus, r, Side::plus, km);
  const double zY_minus = detail::zeta(p.m2Y_minus, p.m3Y_minus, r, Side::minus, km);

  AmseCoefficients a;
  a.v = km.v;
  a.f = p.f;
  a.n = n;
  if (mode == Mode::sharp) {
    a.phi_plus = km.c1 * p.m2Y_plus;
    a.phi_minus = km.c1 * p.m2Y_minus;
    a.psi_plus = zY_plus;
    a.psi_minus = zY_minus;
    a.omega_plus = std::max(0.0, p.sig2Y_plus);
    a.omega_minus = std::max(0.0, p.sig2Y_minus);
    a.tauD = 1.0;
    return a;
  }

  const double t = p.tau;
  const double zD_plus = detail::zeta(p.m2D_plus, p.m3D_plus, r, Side::plus, km);
  const double zD_minus = detail::zeta(p.m2D_minus, p.m3D_minus, r, Side::minus, km);
  a.phi_plus = km.c1 * (p.m2Y_plus - t * p.m2D_plus);
  a.phi_minus = km.c1 * (p.m2Y_minus - t * p.m2D_minus);
  a.psi_plus = zY_plus - t * zD_plus;
  a.psi_minus = zY_minus - t * zD_minus;
  a.omega_plus = std::max(0.0, p.sig2Y_plus + t * t * p.sig2D_plus - 2.0 * t * p.sigYD_plus);
  a.omega_minus =
    std::max(0.0, p.sig2Y_minus + t * t * p.sig2D_minus - 2.0 * t * p.sigYD_minus);
  a.tauD = p.tauD;
  return a;
}

//! Plug-in criterion: squared first- and second-order bias plus variance.
inline double
mmse_objective(double h_plus, double h_minus, const AmseCoefficients& a)
{
  const double b1 = a.phi_plus * h_plus * h_plus - a.phi_minus * h_minus * h_minus;
  const double b2 = a.psi_plus * h_plus * h_plus * h_plus -
                    a.psi_minus * h_minus * h_minus * h_minus;
  return b1 * b1 + b2 * b2 +
         a.v / (a.n * a.f) * (a.omega_plus / h_plus + a.omega_minus / h_minus);
}

namespace detail {

inline constexpr std::size_t grid_size = 60;

//! Nelder-Mead in (log h_plus, log h_minus) with iterates projected onto the
//! box. Returns the best vertex; never worse than the start point.
template<class F>
std::array<double, 2>
nelder_mead_box(F&& obj,
                std::array<double, 2> start,
                std::array<double, 2> step,
                std::array<double, 2> lo,
                std::array<double, 2> hi,
                double xtol = 1e-10,
                int max_iter = 4000)
{
  using Pt = std::array<double, 2>;
  auto clamp = [&](Pt p) {
    for (int k = 0; k < 2; ++k)
      p[k] = std::clamp(p[k], lo[k], hi[k]);
    return p;
  };
  auto eval = [&](const Pt& p) { return obj(p); };

  std::array<Pt, 3> s{ start, start, start };
  s[1][0] += step[0];
  s[2][1] += step[1];
  // reflect the initial steps inward when they leave the box
  for (int k = 0; k < 2; ++k)
    if (s[k + 1][k] > hi[k])
      s[k + 1][k] = start[k] - step[k];
  for (auto& p : s)
    p = clamp(p);
  std::array<double, 3> fv{ eval(s[0]), eval(s[1]), eval(s[2]) };

  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> idx{ 0, 1, 2 };
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return fv[i] < fv[j]; });
    const int b = idx[0], m = idx[1], w = idx[2];

    double size = 0.0;
    for (int v : { m, w })
      for (int k = 0; k < 2; ++k)
        size = std::max(size, std::abs(s[v][k] - s[b][k]));
    if (size < xtol)
      break;

    Pt cen{ 0.5 * (s[b][0] + s[m][0]), 0.5 * (s[b][1] + s[m][1]) };
    auto along = [&](double t) {
      return clamp(Pt{ cen[0] + t * (s[w][0] - cen[0]), cen[1] + t * (s[w][1] - cen[1]) });
    };

    const Pt xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[b]) {
      const Pt xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        s[w] = xe;
        fv[w] = fe;
      } else {
        s[w] = xr;
        fv[w] = fr;
      }
      continue;
    }
    if (fr < fv[m]) {
      s[w] = xr;
      fv[w] = fr;
      continue;
    }
    const Pt xc = fr < fv[w] ? along(-0.5) : along(0.5);
    const double fc = eval(xc);
    if (fc < std::min(fr, fv[w])) {
      s[w] = xc;
      fv[w] = fc;
      continue;
    }
    for (int v : { m, w }) {
      for (int k = 0; k < 2; ++k)
        s[v][k] = s[b][k] + 0.5 * (s[v][k] - s[b][k]);
      fv[v] = eval(s[v]);
    }
  }
  const auto best = std::min_element(fv.begin(), fv.end()) - fv.begin();
  return s[best];
}

inline bool
on_bound(double h, double lo, double hi)
{
  constexpr double tol = 1e-6;
  return std::abs(std::log(h / lo)) < tol || std::abs(std::log(h / hi)) < tol;
}

} // namespace detail

//! Global minimizer of the plug-in criterion over the bounds box: a 60 x 60
//! logarithmic grid followed by a simplex polish from the best node.
inline BandwidthPair
minimize_mmse(const AmseCoefficients& a, const BandwidthBounds& bounds)
{
  if (!(bounds.plus_lo > 0.0 && bounds.plus_lo < bounds.plus_hi &&
        bounds.minus_lo > 0.0 && bounds.minus_lo < bounds.minus_hi))
    fail(ErrorKind::invalid_argument, "bandwidth bounds must satisfy 0 < lo < hi");
  if (a.omega_plus == 0.0 && a.omega_minus == 0.0)
    fail(ErrorKind::degenerate_objective,
         "both variance coefficients are zero; criterion has no interior minimum");

  const std::array<double, 2> lo{ std::log(bounds.plus_lo), std::log(bounds.minus_lo) };
  const std::array<double, 2> hi{ std::log(bounds.plus_hi), std::log(bounds.minus_hi) };
  constexpr std::size_t g = detail::grid_size;
  std::array<double, 2> step{ (hi[0] - lo[0]) / (g - 1), (hi[1] - lo[1]) / (g - 1) };

  std::vector<double> hp(g), hm(g);
  for (std::size_t i = 0; i < g; ++i) {
    hp[i] = i + 1 == g ? bounds.plus_hi : std::exp(lo[0] + step[0] * i);
    hm[i] = i + 1 == g ? bounds.minus_hi : std::exp(lo[1] + step[1] * i);
  }
  double best = std::numeric_limits<double>::infinity();
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      const double val = mmse_objective(hp[i], hm[j], a);
      if (val < best || (val == best && hp[i] + hm[j] < hp[bi] + hm[bj])) {
        best = val;
        bi = i;
        bj = j;
      }
    }
  }

  auto obj = [&](const std::array<double, 2>& p) {
    return mmse_objective(std::exp(p[0]), std::exp(p[1]), a);
  };
  const auto polished =
    detail::nelder_mead_box(obj, { std::log(hp[bi]), std::log(hm[bj]) }, step, lo, hi);

  BandwidthPair out;
  out.h_plus = std::clamp(std::exp(polished[0]), bounds.plus_lo, bounds.plus_hi);
  out.h_minus = std::clamp(std::exp(polished[1]), bounds.minus_lo, bounds.minus_hi);
  out.objective_value = mmse_objective(out.h_plus, out.h_minus, a);
  if (!(out.objective_value <= best)) {
    out.h_plus = hp[bi];
    out.h_minus = hm[bj];
    out.objective_value = best;
  }
  if (detail::on_bound(out.h_plus, bounds.plus_lo, bounds.plus_hi) ||
      detail::on_bound(out.h_minus, bounds.minus_lo, bounds.minus_hi))
    out.regime = Regime::boundary_clamped;
  else
    out.regime = a.phi_plus * a.phi_minus < 0.0 ? Regime::opposite_sign : Regime::same_sign;
  return out;
}

//! Closed-form asymptotically first-order optimal bandwidths. Opposite-sign
//! curvature gives the n^(-1/5) pair; same sign gives the n^(-1/7) pair that
//! cancels the first-order bias.
inline BandwidthPair
afo_bandwidths(const AmseCoefficients& a)
{
  const double prod = a.phi_plus * a.phi_minus;
  if (prod == 0.0)
    fail(ErrorKind::zero_curvature, "first-order bias coefficient is zero on a side");

  BandwidthPair out;
  if (prod < 0.0) {
    const double lambda =
      std::cbrt(-a.phi_plus * a.omega_minus / (a.phi_minus * a.omega_plus));
    const double denom =
      4.0 * a.f * a.phi_plus * (a.phi_plus - lambda * lambda * a.phi_minus);
    if (!(denom > 0.0) || !(a.omega_plus > 0.0))
      fail(ErrorKind::assumption_violated, "opposite-sign closed form is undefined");
    const double theta = std::pow(a.v * a.omega_plus / denom, 0.2);
    out.h_plus = theta * std::pow(a.n, -0.2);
    out.h_minus = lambda * out.h_plus;
    out.regime = Regime::opposite_sign;
  } else {
    const double lambda = std::sqrt(a.phi_plus / a.phi_minus);
    const double gap = a.psi_plus - lambda * lambda * lambda * a.psi_minus;
    if (gap == 0.0)
      fail(ErrorKind::assumption_violated,
           "second-order bias cancels on the first-order bias-free ray");
    const double theta = std::pow(
      a.v * (a.omega_plus + a.omega_minus / lambda) / (6.0 * a.f * gap * gap), 1.0 / 7.0);
    out.h_plus = theta * std::pow(a.n, -1.0 / 7.0);
    out.h_minus = lambda * out.h_plus;
    out.regime = Regime::same_sign;
  }
  out.objective_value = mmse_objective(out.h_plus, out.h_minus, a);
  return out;
}

//! Default search box: from the distance to the third-nearest distinct
//! support point up to the farthest point on each side.
inline BandwidthBounds
default_bounds(const Sample& sample)
{
  BandwidthBounds b;
  for (Side side : { Side::plus, Side::minus }) {
    std::vector<double> dist;
    for (double x : sample.x)
      if (on_side(x, sample.c, side) && x != sample.c)
        dist.push_back(std::abs(x - sample.c));
    std::sort(dist.begin(), dist.end());
    dist.erase(std::unique(dist.begin(), dist.end()), dist.end());
    if (dist.size() < 3)
      fail(ErrorKind::insufficient_data,
           "need 3 distinct support points on the " + std::string(to_string(side)) +
             " side");
    (side == Side::plus ? b.plus_lo : b.minus_lo) = dist[2];
    (side == Side::plus ? b.plus_hi : b.minus_hi) = dist.back();
  }
  return b;
}

struct Selection
{
  BandwidthPair bandwidths;
  PilotEstimates pilots;
  AmseCoefficients coefficients;
};

inline Selection
select_bandwidths(const Sample& sample, KernelSpec kernel, Mode mode)
{
  Selection s;
  s.pilots = assemble_pilots(sample, kernel);
  s.coefficients = compute_coefficients(
    s.pilots, compute_moments(kernel), mode, static_cast<double>(sample.size()));
  s.bandwidths = minimize_mmse(s.coefficients, default_bounds(sample));
  return s;
}

} // namespace frdbw
