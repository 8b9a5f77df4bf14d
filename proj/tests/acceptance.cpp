// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <frdbw/cli.hpp>
#include <frdbw/frdbw.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace frdbw;

namespace {

struct Outcome
{
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what)
  {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void
report(int id, const char* name, const std::function<void(Outcome&)>& body)
{
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s  criterion %d: %s (%.2fs)%s\n", o.pass ? "PASS" : "FAIL", id, name, secs,
              o.detail.str().c_str());
  std::fflush(stdout);
  if (!o.pass)
    ++failures;
}

AmseCoefficients
random_coeffs(std::mt19937_64& eng, bool opposite)
{
  std::uniform_real_distribution<double> mag(0.2, 5.0), om(0.05, 2.0), dens(0.3, 1.5);
  std::uniform_int_distribution<int> sz(200, 5000);
  AmseCoefficients a;
  a.phi_plus = mag(eng) * (eng() % 2 ? 1.0 : -1.0);
  a.phi_minus = (opposite ? -1.0 : 1.0) * std::copysign(mag(eng), a.phi_plus);
  a.omega_plus = om(eng);
  a.omega_minus = om(eng);
  a.v = 4.8;
  a.f = dens(eng);
  a.n = sz(eng);
  if (opposite) {
    a.psi_plus = 0.0;
    a.psi_minus = 0.0;
  } else {
    a.psi_plus = mag(eng) * (eng() % 2 ? 1.0 : -1.0);
    a.psi_minus = mag(eng) * (eng() % 2 ? 1.0 : -1.0);
  }
  return a;
}

double
rel(double a, double b)
{
  return std::abs(a - b) / std::abs(b);
}

} // namespace

int
main()
{
  report(1, "triangular kernel moments and constants", [](Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto m = compute_moments({ KernelFamily::triangular });
    const auto q = compute_moments_quadrature({ KernelFamily::triangular });
    const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double mu[] = { 1.0 / 2, 1.0 / 6, 1.0 / 12, 1.0 / 20, 1.0 / 30 };
    const double nu[] = { 1.0 / 3, 1.0 / 12, 1.0 / 30 };
    double worst = 0.0;
    for (int j = 0; j < 5; ++j)
      worst = std::max({ worst, std::abs(m.mu[j] - mu[j]), std::abs(q.mu[j] - mu[j]) });
    for (int j = 0; j < 3; ++j)
      worst = std::max({ worst, std::abs(m.nu[j] - nu[j]), std::abs(q.nu[j] - nu[j]) });
    for (const auto& k : { m, q })
      worst = std::max({ worst, std::abs(k.c1 + 0.05), std::abs(k.v - 4.8),
                         std::abs(k.xi1 + 0.1), std::abs(k.xi2 + 0.08) });
    o.detail << " max abs error " << worst;
    o.require(worst <= 1e-10, "tolerance 1e-10");
    o.require(secs < 1.0, "runtime < 1 s");
  });

  report(2, "local polynomial exactness on 200 random polynomials", [](Outcome& o) {
    std::mt19937_64 eng(20240601);
    std::uniform_real_distribution<double> coef(-5.0, 5.0), unif(-1.0, 1.0), bw(0.3, 2.0);
    const KernelSpec kernels[] = { { KernelFamily::triangular },
                                   { KernelFamily::uniform },
                                   { KernelFamily::epanechnikov } };
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const int order = 1 + trial % 4;
      const int degree = trial % (order + 1);
      std::vector<double> beta(order + 1, 0.0);
      for (int k = 0; k <= degree; ++k)
        beta[k] = coef(eng);
      Sample s;
      s.c = coef(eng);
      for (int i = 0; i < 100; ++i) {
        const double u = unif(eng);
        double y = 0.0, pw = 1.0;
        for (double b : beta) {
          y += b * pw;
          pw *= u;
        }
        s.x.push_back(s.c + u);
        s.y.push_back(y);
        s.d.push_back(0.0);
      }
      const double h = bw(eng);
      for (auto side : { Side::plus, Side::minus }) {
        const auto fit = fit_boundary(s, Response::y, side, h, order, kernels[trial % 3]);
        for (int k = 0; k <= order; ++k)
          worst = std::max(worst, std::abs(fit.coefficients[k] - beta[k]) /
                                    std::max(1.0, std::abs(beta[k])));
      }
    }
    o.detail << " max scaled coefficient error " << worst;
    o.require(worst <= 1e-8, "tolerance 1e-8");
  });

  report(3, "closed-form optimal bandwidths vs numerical minimization", [](Outcome& o) {
    std::mt19937_64 eng(777);
    const BandwidthBounds box{ 1e-4, 10.0, 1e-4, 10.0 };
    double worst_opp = 0.0;
    for (int t = 0; t < 100; ++t) {
      const auto a = random_coeffs(eng, true);
      const auto afo = afo_bandwidths(a);
      const auto got = minimize_mmse(a, box);
      worst_opp = std::max({ worst_opp, rel(got.h_plus, afo.h_plus), rel(got.h_minus, afo.h_minus) });
    }
    // same sign: minimize the second-order criterion along the curve that
    // removes the first-order bias, h_minus = sqrt(phi_plus h_plus^2 / phi_minus),
    // over a fine logarithmic grid in h_plus
    double worst_same = 0.0;
    for (int t = 0; t < 100; ++t) {
      const auto a = random_coeffs(eng, false);
      if (a.psi_plus - std::pow(a.phi_plus / a.phi_minus, 1.5) * a.psi_minus == 0.0)
        continue;
      auto amse2 = [&](double hp, double hm) {
        const double b = a.psi_plus * hp * hp * hp - a.psi_minus * hm * hm * hm;
        return b * b + a.v / (a.n * a.f) * (a.omega_plus / hp + a.omega_minus / hm);
      };
      const int g = 200001;
      double best = INFINITY, bp = 0.0, bm = 0.0;
      for (int i = 0; i < g; ++i) {
        const double hp = 1e-4 * std::pow(1e5, static_cast<double>(i) / (g - 1));
        const double hm = std::sqrt(a.phi_plus * hp * hp / a.phi_minus);
        const double val = amse2(hp, hm);
        if (val < best) {
          best = val;
          bp = hp;
          bm = hm;
        }
      }
      const double theta_oracle = bp * std::pow(a.n, 1.0 / 7.0);
      const double lambda_oracle = bm / bp;
      const auto afo = afo_bandwidths(a);
      const double theta = afo.h_plus * std::pow(a.n, 1.0 / 7.0);
      const double lambda = afo.h_minus / afo.h_plus;
      worst_same = std::max({ worst_same, rel(theta, theta_oracle), rel(lambda, lambda_oracle) });
    }
    o.detail << " opposite-sign max rel dev " << worst_opp << ", same-sign max rel dev "
             << worst_same;
    o.require(worst_opp <= 0.01, "opposite-sign within 1%");
    o.require(worst_same <= 0.01, "same-sign within 1%");
  });

  report(4, "bandwidth rates n^(-1/5) and n^(-1/7)", [](Outcome& o) {
    std::mt19937_64 eng(4242);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const bool opposite = t % 2 == 0;
      auto a = random_coeffs(eng, opposite);
      const auto h1 = afo_bandwidths(a);
      const double factor = opposite ? 32.0 : 128.0;
      a.n *= factor;
      const auto h2 = afo_bandwidths(a);
      const double rate = opposite ? 0.2 : 1.0 / 7.0;
      for (auto [x1, x2] : { std::pair{ h1.h_plus, h2.h_plus }, std::pair{ h1.h_minus, h2.h_minus } }) {
        worst = std::max(worst, std::abs(x2 / x1 - 0.5));
        worst = std::max(worst, std::abs(std::log(x2 / x1) / std::log(factor) + rate));
      }
    }
    o.detail << " max deviation " << worst;
    o.require(worst <= 1e-12, "exact scaling");
  });

  report(5, "simulation design fidelity at the cutoff", [](Outcome& o) {
    using boost::math::quadrature::gauss_kronrod;
    // normal CDF at the shift, by quadrature of the density
    auto shifted = [](double shift) {
      auto dens = [shift](double u) {
        return std::exp(-0.5 * (u + shift) * (u + shift)) / std::sqrt(2.0 * std::numbers::pi);
      };
      return gauss_kronrod<double, 61>::integrate(dens, -40.0, 0.0, 20, 1e-15);
    };
    const double oracle = shifted(1.28) - shifted(-1.28);
    const double jump = sim::treatment_prob(0.0) - sim::treatment_prob(std::nextafter(0.0, -1.0));
    const double j1 = sim::mean_outcome(sim::Design::design1, sim::Arm::treated, 0.0) -
                      sim::mean_outcome(sim::Design::design1, sim::Arm::control, 0.0);
    const double j2 = sim::mean_outcome(sim::Design::design2, sim::Arm::treated, 0.0) -
                      sim::mean_outcome(sim::Design::design2, sim::Arm::control, 0.0);
    o.detail.precision(10);
    o.detail << " treatment jump " << jump << " (quadrature " << oracle << ")"
             << ", outcome jumps " << j1 << ", " << j2;
    o.require(std::abs(jump - oracle) <= 1e-9, "treatment jump equals Phi(1.28)-Phi(-1.28) to 1e-9");
    o.require(std::round(jump * 1e4) / 1e4 == 0.7995, "treatment jump rounds to 0.7995");
    o.require(j1 == -0.17 - 4.13 && std::abs(j1 + 4.30) <= 1e-15, "design 1 jump -4.30");
    o.require(j2 == 0.0975 - 0.0225 && std::abs(j2 - 0.075) <= 1e-15, "design 2 jump 0.075");
  });

  sim::DgpSpec d1, d2;
  d1.design = sim::Design::design1;
  d2.design = sim::Design::design2;
  d1.seed = d2.seed = 42;
  const std::size_t reps = 1000;
  const KernelSpec tri{ KernelFamily::triangular };
  sim::McSummary d1f, d1s, d2f, d2s;

  report(6, "Monte Carlo bands (n = 500, 1000 reps)", [&](Outcome& o) {
    d2f = sim::run_monte_carlo(d2, sim::Method::mmse_f, reps, tri);
    d2s = sim::run_monte_carlo(d2, sim::Method::mmse_s, reps, tri);
    d1f = sim::run_monte_carlo(d1, sim::Method::mmse_f, reps, tri);
    d1s = sim::run_monte_carlo(d1, sim::Method::mmse_s, reps, tri);
    o.detail << "\n      design 2 mmse-f: h+ " << d2f.h_plus_mean << " h- " << d2f.h_minus_mean
             << " bias " << d2f.bias_trimmed << " rmse " << d2f.rmse_trimmed
             << "\n      design 2 mmse-s: h+ " << d2s.h_plus_mean << " h- " << d2s.h_minus_mean
             << " bias " << d2s.bias_trimmed << " rmse " << d2s.rmse_trimmed
             << "\n      design 1 mmse-f: h+ " << d1f.h_plus_mean << " h- " << d1f.h_minus_mean
             << " bias " << d1f.bias_trimmed << " rmse " << d1f.rmse_trimmed
             << "\n      design 1 mmse-s: h+ " << d1s.h_plus_mean << " h- " << d1s.h_minus_mean
             << " bias " << d1s.bias_trimmed << " rmse " << d1s.rmse_trimmed
             << "\n      failed reps: " << d2f.reps_failed << ", " << d2s.reps_failed << ", "
             << d1f.reps_failed << ", " << d1s.reps_failed;
    o.require(d2f.rmse_trimmed >= 0.057 && d2f.rmse_trimmed <= 0.090, "D2 mmse-f rmse in [0.057, 0.090]");
    o.require(std::abs(d2f.bias_trimmed) <= 0.02, "D2 mmse-f |bias| <= 0.02");
    o.require(std::abs(d2f.h_plus_mean - 0.226) <= 0.06, "D2 mean h+ within 0.226 +- 0.06");
    o.require(std::abs(d2f.h_minus_mean - 0.624) <= 0.16, "D2 mean h- within 0.624 +- 0.16");
    o.require(std::abs(d2f.rmse_trimmed - d2s.rmse_trimmed) <=
                0.10 * std::min(d2f.rmse_trimmed, d2s.rmse_trimmed),
              "D2 mmse-f and mmse-s rmse within 10%");
    o.require(d1f.rmse_trimmed < d1s.rmse_trimmed, "D1 mmse-f rmse < mmse-s rmse");
    o.require(d1f.rmse_trimmed / d1s.rmse_trimmed <= 0.7, "D1 rmse ratio <= 0.7");
    o.detail << "\n      design 1 rmse ratio " << d1f.rmse_trimmed / d1s.rmse_trimmed;
  });

  report(7, "design 1 error CDF: mmse-f dominates mmse-s", [&](Outcome& o) {
    // rerun both rules on one shared threshold grid
    const double top = std::max(d1f.cdf.back().threshold, d1s.cdf.back().threshold);
    sim::McOptions opts;
    for (int i = 1; i <= 200; ++i)
      opts.cdf_thresholds.push_back(top * i / 200.0);
    const auto f = sim::run_monte_carlo(d1, sim::Method::mmse_f, reps, tri, opts);
    const auto s = sim::run_monte_carlo(d1, sim::Method::mmse_s, reps, tri, opts);
    std::size_t start = 0;
    while (start < f.cdf.size() && f.cdf[start].fraction < 0.10)
      ++start;
    std::size_t violations = 0;
    double min_gap = INFINITY;
    for (std::size_t i = start; i < f.cdf.size(); ++i) {
      const double gap = f.cdf[i].fraction - s.cdf[i].fraction;
      min_gap = std::min(min_gap, gap);
      violations += gap < 0.0;
    }
    o.detail << " thresholds from " << f.cdf[std::min(start, f.cdf.size() - 1)].threshold
             << " (10th percentile of mmse-f), min gap " << min_gap << ", violations "
             << violations;
    o.require(start < f.cdf.size(), "10th percentile inside grid");
    o.require(violations == 0, "first-order dominance at every threshold");
  });

  report(8, "full 10000-replication mode (values not gated)", [&](Outcome& o) {
    const auto cfg = cli::parse_args({ "simulate", "--design", "2", "--full" });
    o.require(cfg.reps == 10000, "--full selects 10000 reps");
    const auto full = sim::run_monte_carlo(d2, sim::Method::mmse_f, cfg.reps, tri);
    o.require(full.reps_total == 10000, "all replications accounted for");
    o.detail << " design 2 mmse-f: h+ " << full.h_plus_mean << " h- " << full.h_minus_mean
             << " bias " << full.bias_trimmed << " rmse " << full.rmse_trimmed << " failed "
             << full.reps_failed;
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
