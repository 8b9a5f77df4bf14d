#pragma once

#include "error.hpp"
#include "kernel.hpp"
#include "sample.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace frdbw {

//! Weighted polynomial fit anchored at the cutoff. coefficients[k] estimates
//! m^(k)(c) / k!.
struct BoundaryFit
{
  std::vector<double> coefficients;
  Side side = Side::plus;
  double h = 0.0;
  std::size_t effective_n = 0;
};

namespace detail {

//! Relative singular value floor below which a weighted design is singular.
inline constexpr double singular_tol = 1e-10;

//! Weighted least squares of y on (1, (x-c), ..., (x-c)^order) restricted to
//! rows with positive weight. The design is built in the scaled variable
//! (x-c)/scale, factored with Householder QR, and its conditioning is read
//! off the singular values of the triangular factor.
inline std::vector<double>
weighted_poly_fit(const std::vector<double>& x,
                  const std::vector<double>& y,
                  const std::vector<double>& w,
                  double c,
                  int order,
                  double scale)
{
  const auto m = static_cast<Eigen::Index>(x.size());
  const Eigen::Index p = order + 1;

  std::vector<double> distinct(x);
  std::sort(distinct.begin(), distinct.end());
  const auto n_distinct =
    std::unique(distinct.begin(), distinct.end()) - distinct.begin();
  if (n_distinct < p)
    fail(ErrorKind::singular_design,
         "only " + std::to_string(n_distinct) + " distinct x values carry weight; " +
           std::to_string(p) + " needed");

  Eigen::MatrixXd a(m, p);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sw = std::sqrt(w[i]);
    const double u = (x[i] - c) / scale;
    double pw = sw;
    for (Eigen::Index k = 0; k < p; ++k) {
      a(i, k) = pw;
      pw *= u;
    }
    b(i) = sw * y[i];
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd r =
    qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
  if (!(sv(p - 1) > singular_tol * sv(0)))
    fail(ErrorKind::singular_design, "weighted design is numerically singular");

  Eigen::VectorXd gamma = qr.solve(b);
  std::vector<double> beta(p);
  double s = 1.0;
  for (Eigen::Index k = 0; k < p; ++k) {
    beta[k] = gamma(k) / s;
    s *= scale;
  }
  return beta;
}

} // namespace detail

//! Kernel-weighted polynomial fit of `response` on one side of the cutoff with
//! weights K((x_i - c)/h). Only observations with positive weight enter.
inline BoundaryFit
fit_boundary(const Sample& sample,
             Response response,
             Side side,
             double h,
             int order,
             KernelSpec kernel)
{
  if (!(h > 0.0) || !std::isfinite(h))
    fail(ErrorKind::invalid_argument, "bandwidth must be positive and finite");
  if (order < 1)
    fail(ErrorKind::invalid_argument, "polynomial order must be at least 1");

  const auto& resp = sample.response(response);
  std::vector<double> xs, ys, ws;
  bool any_on_side = false;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!on_side(sample.x[i], sample.c, side))
      continue;
    any_on_side = true;
    const double w = eval_kernel(kernel, (sample.x[i] - sample.c) / h);
    if (w > 0.0) {
      xs.push_back(sample.x[i]);
      ys.push_back(resp[i]);
      ws.push_back(w);
    }
  }
  if (!any_on_side)
    fail(ErrorKind::empty_side,
         "no observations on the " + std::string(to_string(side)) + " side");

  BoundaryFit fit;
  fit.side = side;
  fit.h = h;
  fit.effective_n = xs.size();
  fit.coefficients = detail::weighted_poly_fit(xs, ys, ws, sample.c, order, h);
  return fit;
}

//! Local linear estimate of the one-sided limit of E[response | X = x] at c.
inline double
estimate_level(const Sample& sample,
               Response response,
               Side side,
               double h,
               KernelSpec kernel)
{
  return fit_boundary(sample, response, side, h, 1, kernel).coefficients[0];
}

} // namespace frdbw
