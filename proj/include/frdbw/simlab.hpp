#pragma once

#include "error.hpp"
#include "estimator.hpp"
#include "kernel.hpp"
#include "sample.hpp"
#include "selector.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string_view>
#include <thread>
#include <vector>

namespace frdbw::sim {

enum class Design
{
  design1,
  design2
};

enum class Method
{
  mmse_f,
  mmse_s
};

inline std::string_view
to_string(Method m)
{
  return m == Method::mmse_f ? "mmse-f" : "mmse-s";
}

inline std::string_view
to_string(Design d)
{
  return d == Design::design1 ? "design1" : "design2";
}

struct DgpSpec
{
  Design design = Design::design2;
  std::size_t n = 500;
  double error_sd = 0.1295;
  std::uint64_t seed = 42;
};

enum class Arm
{
  treated,
  control
};

//! Standard normal CDF.
inline double
normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

//! E[D | X = x]: normal CDF shifted by +1.28 at and above zero, -1.28 below.
inline double
treatment_prob(double x)
{
  return x >= 0.0 ? normal_cdf(x + 1.28) : normal_cdf(x - 1.28);
}

namespace detail {

struct Quintic
{
  double c1, c2, c3, c4, c5;
  double operator()(double x) const
  {
    return x * (c1 + x * (c2 + x * (c3 + x * (c4 + x * c5))));
  }
};

struct DesignSpec
{
  double alpha_treated, alpha_control;
  Quintic right, left;
};

inline const DesignSpec&
design_spec(Design d)
{
  static const DesignSpec d1{ -0.17,
                              4.13,
                              { 18.49, -54.8, 74.3, -45.02, 9.83 },
                              { 2.99, 3.28, 1.45, 0.22, 0.03 } };
  static const DesignSpec d2{ 0.0975,
                              0.0225,
                              { 5.76, -42.56, 120.90, -139.71, 55.59 },
                              { -2.26, -13.14, -30.89, -31.98, -12.1 } };
  return d == Design::design1 ? d1 : d2;
}

} // namespace detail

//! Mean potential outcome of one arm. The quintic switches at x > 0.
inline double
mean_outcome(Design design, Arm arm, double x)
{
  const auto& s = detail::design_spec(design);
  const double alpha = arm == Arm::treated ? s.alpha_treated : s.alpha_control;
  return alpha + (x > 0.0 ? s.right(x) : s.left(x));
}

//! Local average treatment effect at the cutoff implied by a design.
inline double
true_tau(Design design)
{
  const auto& s = detail::design_spec(design);
  return s.alpha_treated - s.alpha_control;
}

//! Engine for replication `rep_index`; depends only on (seed, rep_index).
inline std::mt19937_64
replication_engine(std::uint64_t seed, std::uint64_t rep_index)
{
  std::seed_seq seq{ static_cast<std::uint32_t>(seed),
                     static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(rep_index),
                     static_cast<std::uint32_t>(rep_index >> 32) };
  return std::mt19937_64(seq);
}

//! X = 2Z - 1 with Z ~ Beta(2, 4); D ~ Bernoulli(treatment_prob(X));
//! Y = mean_outcome(D, X) + N(0, error_sd^2). Cutoff at zero.
inline Sample
draw_sample(const DgpSpec& spec, std::uint64_t rep_index)
{
  if (spec.n < 50)
    fail(ErrorKind::invalid_argument, "simulated samples need n >= 50");
  if (!(spec.error_sd > 0.0))
    fail(ErrorKind::invalid_argument, "error_sd must be positive");

  auto eng = replication_engine(spec.seed, rep_index);
  std::gamma_distribution<double> ga(2.0, 1.0), gb(4.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec.error_sd);

  Sample s;
  s.c = 0.0;
  s.x.resize(spec.n);
  s.y.resize(spec.n);
  s.d.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double a = ga(eng);
    const double b = gb(eng);
    const double x = 2.0 * a / (a + b) - 1.0;
    const bool treated = unif(eng) < treatment_prob(x);
    s.x[i] = x;
    s.d[i] = treated ? 1.0 : 0.0;
    s.y[i] = mean_outcome(spec.design, treated ? Arm::treated : Arm::control, x) + noise(eng);
  }
  return s;
}

struct TrimmedStats
{
  double bias = 0.0;
  double rmse = 0.0;
};

//! Mean and root mean square of the errors after dropping the
//! ceil(trim_fraction * R) largest in absolute value.
inline TrimmedStats
trimmed_stats(const std::vector<double>& errors, double trim_fraction = 0.05)
{
  if (errors.empty())
    fail(ErrorKind::invalid_argument, "no errors to summarize");
  if (!(trim_fraction >= 0.0 && trim_fraction <= 1.0))
    fail(ErrorKind::invalid_argument, "trim fraction must lie in [0, 1]");
  const std::size_t r = errors.size();
  // the epsilon keeps products such as (1/6) * 6 from rounding up a whole unit
  const auto drop = static_cast<std::size_t>(std::ceil(trim_fraction * r - 1e-9));
  if (drop >= r)
    fail(ErrorKind::all_trimmed, "trimming removes every replication");

  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::abs(errors[i]) < std::abs(errors[j]);
  });
  const std::size_t keep = r - drop;
  double sum = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < keep; ++k) {
    const double e = errors[order[k]];
    sum += e;
    sq += e * e;
  }
  return { sum / keep, std::sqrt(sq / keep) };
}

struct CdfPoint
{
  double threshold = 0.0;
  double fraction = 0.0;
};

//! Fraction of `abs_errors` at or below each threshold.
inline std::vector<CdfPoint>
empirical_cdf(std::vector<double> abs_errors, const std::vector<double>& thresholds)
{
  std::sort(abs_errors.begin(), abs_errors.end());
  std::vector<CdfPoint> out;
  out.reserve(thresholds.size());
  const double r = static_cast<double>(abs_errors.size());
  for (double t : thresholds) {
    const auto k = std::upper_bound(abs_errors.begin(), abs_errors.end(), t) - abs_errors.begin();
    out.push_back({ t, r > 0 ? static_cast<double>(k) / r : 0.0 });
  }
  return out;
}

struct McSummary
{
  Method method = Method::mmse_f;
  double h_plus_mean = 0.0, h_plus_sd = 0.0;
  double h_minus_mean = 0.0, h_minus_sd = 0.0;
  double bias_trimmed = 0.0, rmse_trimmed = 0.0;
  std::vector<CdfPoint> cdf;
  std::size_t reps_total = 0;
  std::size_t reps_failed = 0;
};

struct Replication
{
  bool ok = false;
  double h_plus = 0.0;
  double h_minus = 0.0;
  double error = 0.0;
};

struct McOptions
{
  double trim_fraction = 0.05;
  std::size_t cdf_points = 200;
  //! Explicit CDF grid. When empty the grid spans (0, T] in equal steps, T
  //! being the largest |error| that survives trimming.
  std::vector<double> cdf_thresholds;
  //! 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
};

//! One replication: draw, select (fuzzy or numerator-only criterion), then
//! estimate the ratio with the selected pair. Library errors mark it failed.
inline Replication
run_replication(const DgpSpec& spec, Method method, std::uint64_t rep, KernelSpec kernel)
{
  Replication r;
  try {
    const Sample s = draw_sample(spec, rep);
    const auto sel =
      select_bandwidths(s, kernel, method == Method::mmse_f ? Mode::fuzzy : Mode::sharp);
    const auto est = frd_estimate(s, sel.bandwidths.h_plus, sel.bandwidths.h_minus, kernel);
    r.h_plus = sel.bandwidths.h_plus;
    r.h_minus = sel.bandwidths.h_minus;
    r.error = est.tau - true_tau(spec.design);
    r.ok = std::isfinite(r.error);
  } catch (const Error&) {
    r.ok = false;
  }
  return r;
}

namespace detail {

inline void
mean_sd(const std::vector<double>& v, double& mean, double& sd)
{
  mean = 0.0;
  sd = 0.0;
  if (v.empty())
    return;
  for (double x : v)
    mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2)
    return;
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

} // namespace detail

//! Replications run on a worker pool; each writes its own slot, and the
//! summary is reduced in replication order, so results do not depend on
//! scheduling.
inline McSummary
run_monte_carlo(const DgpSpec& spec,
                Method method,
                std::size_t reps,
                KernelSpec kernel,
                const McOptions& opts = {})
{
  if (reps < 1)
    fail(ErrorKind::invalid_argument, "reps must be at least 1");

  std::vector<Replication> out(reps);
  unsigned threads = opts.threads ? opts.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(reps)));
  std::atomic<std::size_t> next{ 0 };
  auto worker = [&] {
    for (std::size_t i = next++; i < reps; i = next++)
      out[i] = run_replication(spec, method, i, kernel);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(worker);
  }

  McSummary sum;
  sum.method = method;
  sum.reps_total = reps;
  std::vector<double> hp, hm, err;
  for (const auto& r : out) {
    if (!r.ok) {
      ++sum.reps_failed;
      continue;
    }
    hp.push_back(r.h_plus);
    hm.push_back(r.h_minus);
    err.push_back(r.error);
  }
  if (err.empty())
    return sum;

  detail::mean_sd(hp, sum.h_plus_mean, sum.h_plus_sd);
  detail::mean_sd(hm, sum.h_minus_mean, sum.h_minus_sd);
  // a lone replication is summarized untrimmed
  const double r = static_cast<double>(err.size());
  const auto ts = trimmed_stats(err, std::min(opts.trim_fraction, (r - 1.0) / r));
  sum.bias_trimmed = ts.bias;
  sum.rmse_trimmed = ts.rmse;

  std::vector<double> abs_err(err.size());
  std::transform(err.begin(), err.end(), abs_err.begin(), [](double e) { return std::abs(e); });
  std::vector<double> thresholds = opts.cdf_thresholds;
  if (thresholds.empty()) {
    std::vector<double> sorted = abs_err;
    std::sort(sorted.begin(), sorted.end());
    const auto drop = static_cast<std::size_t>(
      std::ceil(opts.trim_fraction * static_cast<double>(sorted.size()) - 1e-9));
    const double top = sorted[sorted.size() - 1 - std::min(drop, sorted.size() - 1)];
    const std::size_t k = std::max<std::size_t>(1, opts.cdf_points);
    for (std::size_t i = 1; i <= k; ++i)
      thresholds.push_back(top * static_cast<double>(i) / static_cast<double>(k));
  }
  sum.cdf = empirical_cdf(std::move(abs_err), thresholds);
  return sum;
}

} // namespace frdbw::sim
