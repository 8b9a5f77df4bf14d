#pragma once

#include "error.hpp"

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace frdbw {

enum class KernelFamily
{
  triangular,
  uniform,
  epanechnikov
};

//! Symmetric second-order kernel supported on [-1, 1].
struct KernelSpec
{
  KernelFamily family = KernelFamily::triangular;
};

inline std::string_view
to_string(KernelFamily family)
{
  switch (family) {
    case KernelFamily::triangular:
      return "triangular";
    case KernelFamily::uniform:
      return "uniform";
    case KernelFamily::epanechnikov:
      return "epanechnikov";
  }
  return "unknown";
}

inline KernelSpec
parse_kernel(std::string_view name)
{
  if (name == "triangular")
    return { KernelFamily::triangular };
  if (name == "uniform")
    return { KernelFamily::uniform };
  if (name == "epanechnikov")
    return { KernelFamily::epanechnikov };
  fail(ErrorKind::invalid_argument,
       "unknown kernel '" + std::string(name) +
         "' (expected triangular, uniform or epanechnikov)");
}

inline double
eval_kernel(KernelSpec spec, double u)
{
  const double a = std::abs(u);
  if (a > 1.0)
    return 0.0;
  switch (spec.family) {
    case KernelFamily::triangular:
      return 1.0 - a;
    case KernelFamily::uniform:
      return 0.5;
    case KernelFamily::epanechnikov:
      return 0.75 * (1.0 - u * u);
  }
  return 0.0;
}

//! One-sided kernel moments and the boundary constants derived from them.
//!
//! mu[j] = int_0^1 u^j K(u) du, nu[j] = int_0^1 u^j K(u)^2 du. The constants
//! c1, v, xi1, xi2 are the leading bias constant, the variance constant and
//! the two second-order bias constants of a local linear fit at a boundary.
struct KernelMoments
{
  std::array<double, 5> mu{};
  std::array<double, 3> nu{};
  double c1 = 0.0;
  double v = 0.0;
  double xi1 = 0.0;
  double xi2 = 0.0;
};

namespace detail {

inline KernelMoments
derive_constants(const std::array<double, 5>& mu, const std::array<double, 3>& nu)
{
  KernelMoments m;
  m.mu = mu;
  m.nu = nu;
  const double det = mu[0] * mu[2] - mu[1] * mu[1];
  if (!(mu[0] > 0.0) || !(det > 0.0))
    fail(ErrorKind::invalid_argument, "kernel moment matrix is not positive definite");
  m.c1 = (mu[2] * mu[2] - mu[1] * mu[3]) / (2.0 * det);
  m.v = (mu[2] * mu[2] * nu[0] - 2.0 * mu[1] * mu[2] * nu[1] +
         mu[1] * mu[1] * nu[2]) /
        (det * det);
  m.xi1 = (mu[2] * mu[3] - mu[1] * mu[4]) / det;
  m.xi2 = (mu[2] * mu[2] - mu[1] * mu[3]) * (mu[0] * mu[3] - mu[1] * mu[2]) /
          (det * det);
  return m;
}

} // namespace detail

//! Moments from closed-form integration of the polynomial kernel pieces.
inline KernelMoments
compute_moments(KernelSpec spec)
{
  std::array<double, 5> mu{};
  std::array<double, 3> nu{};
  for (int j = 0; j < 5; ++j) {
    const double a = j + 1.0;
    switch (spec.family) {
      case KernelFamily::triangular:
        mu[j] = 1.0 / (a * (a + 1.0));
        if (j < 3)
          nu[j] = 2.0 / (a * (a + 1.0) * (a + 2.0));
        break;
      case KernelFamily::uniform:
        mu[j] = 0.5 / a;
        if (j < 3)
          nu[j] = 0.25 / a;
        break;
      case KernelFamily::epanechnikov:
        mu[j] = 0.75 * (1.0 / a - 1.0 / (a + 2.0));
        if (j < 3)
          nu[j] = 0.5625 * (1.0 / a - 2.0 / (a + 2.0) + 1.0 / (a + 4.0));
        break;
    }
  }
  return detail::derive_constants(mu, nu);
}

//! Same moments by adaptive Gauss-Kronrod quadrature over [0, 1].
inline KernelMoments
compute_moments_quadrature(KernelSpec spec, double rel_tol = 1e-12)
{
  using boost::math::quadrature::gauss_kronrod;
  std::array<double, 5> mu{};
  std::array<double, 3> nu{};
  for (int j = 0; j < 5; ++j) {
    auto f = [&](double u) { return std::pow(u, j) * eval_kernel(spec, u); };
    mu[j] = gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 15, rel_tol);
    if (j < 3) {
      auto g = [&](double u) {
        const double k = eval_kernel(spec, u);
        return std::pow(u, j) * k * k;
      };
      nu[j] = gauss_kronrod<double, 31>::integrate(g, 0.0, 1.0, 15, rel_tol);
    }
  }
  return detail::derive_constants(mu, nu);
}

} // namespace frdbw
