#pragma once

#include "error.hpp"
#include "estimator.hpp"
#include "pilot.hpp"
#include "sample.hpp"
#include "selector.hpp"
#include "simlab.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace frdbw {

namespace detail {

inline std::string
trim(std::string s)
{
  auto issp = [](unsigned char ch) { return std::isspace(ch) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
  return s;
}

inline std::vector<std::string>
split_csv_line(const std::string& line)
{
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ','))
    out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

inline bool
parse_double(const std::string& s, double& value)
{
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+')
    ++first;
  const auto res = std::from_chars(first, last, value);
  return res.ec == std::errc() && res.ptr == last && first != last;
}

} // namespace detail

//! Reads a header-led CSV with columns x, y, d (any order, any case; extra
//! columns ignored) and validates the resulting sample.
inline Sample
read_csv(std::istream& in, double cutoff)
{
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (!detail::trim(line).empty())
      break;
  }
  if (detail::trim(line).empty())
    fail(ErrorKind::parse, "missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line.erase(0, 3);

  const auto header = detail::split_csv_line(line);
  int ix = -1, iy = -1, id = -1;
  for (std::size_t k = 0; k < header.size(); ++k) {
    std::string name = header[k];
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (name == "x")
      ix = static_cast<int>(k);
    else if (name == "y")
      iy = static_cast<int>(k);
    else if (name == "d")
      id = static_cast<int>(k);
  }
  if (ix < 0 || iy < 0 || id < 0)
    fail(ErrorKind::parse, "header must contain columns x, y and d");
  const auto need = static_cast<std::size_t>(std::max({ ix, iy, id }));

  Sample s;
  s.c = cutoff;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (detail::trim(line).empty())
      continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() <= need)
      fail(ErrorKind::parse, "row " + std::to_string(row) + ": too few columns");
    double x, y, d;
    if (!detail::parse_double(cells[ix], x) || !detail::parse_double(cells[iy], y) ||
        !detail::parse_double(cells[id], d))
      fail(ErrorKind::parse, "row " + std::to_string(row) + ": malformed number");
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(d))
      fail(ErrorKind::validation, "row " + std::to_string(row) + ": non-finite value");
    if (d != 0.0 && d != 1.0)
      fail(ErrorKind::validation, "row " + std::to_string(row) + ": d must be 0 or 1");
    s.x.push_back(x);
    s.y.push_back(y);
    s.d.push_back(d);
  }
  if (s.count(Side::plus) == 0 || s.count(Side::minus) == 0)
    fail(ErrorKind::validation, "both sides of the cutoff need observations");
  validate(s);
  return s;
}

inline Sample
load_csv(const std::string& path, double cutoff)
{
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::parse, "cannot open '" + path + "'");
  return read_csv(in, cutoff);
}

//! Writes x,y,d with round-trip precision.
inline void
write_csv(std::ostream& out, const Sample& s)
{
  out << "x,y,d\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < s.size(); ++i)
    out << s.x[i] << ',' << s.y[i] << ',' << static_cast<int>(s.d[i]) << '\n';
}

inline nlohmann::json
to_json(const PilotEstimates& p)
{
  return { { "f", p.f },
           { "f1", p.f1 },
           { "m2Y_plus", p.m2Y_plus },
           { "m2Y_minus", p.m2Y_minus },
           { "m3Y_plus", p.m3Y_plus },
           { "m3Y_minus", p.m3Y_minus },
           { "m2D_plus", p.m2D_plus },
           { "m2D_minus", p.m2D_minus },
           { "m3D_plus", p.m3D_plus },
           { "m3D_minus", p.m3D_minus },
           { "sig2Y_plus", p.sig2Y_plus },
           { "sig2Y_minus", p.sig2Y_minus },
           { "sig2D_plus", p.sig2D_plus },
           { "sig2D_minus", p.sig2D_minus },
           { "sigYD_plus", p.sigYD_plus },
           { "sigYD_minus", p.sigYD_minus },
           { "tauD", p.tauD },
           { "tau", p.tau } };
}

inline nlohmann::json
to_json(const AmseCoefficients& a)
{
  return { { "phi_plus", a.phi_plus },     { "phi_minus", a.phi_minus },
           { "psi_plus", a.psi_plus },     { "psi_minus", a.psi_minus },
           { "omega_plus", a.omega_plus }, { "omega_minus", a.omega_minus },
           { "v", a.v },                   { "f", a.f },
           { "tauD", a.tauD },             { "n", a.n } };
}

inline nlohmann::json
to_json(const Selection& s)
{
  return { { "h_plus", s.bandwidths.h_plus },
           { "h_minus", s.bandwidths.h_minus },
           { "regime", std::string(to_string(s.bandwidths.regime)) },
           { "objective_value", s.bandwidths.objective_value },
           { "pilots", to_json(s.pilots) },
           { "coefficients", to_json(s.coefficients) } };
}

inline nlohmann::json
to_json(const FrdEstimate& e)
{
  return { { "tau", e.tau },         { "tauY", e.tauY },       { "tauD", e.tauD },
           { "h_plus", e.h_plus },   { "h_minus", e.h_minus }, { "n_plus", e.n_plus },
           { "n_minus", e.n_minus } };
}

inline nlohmann::json
to_json(const sim::McSummary& m)
{
  nlohmann::json cdf = nlohmann::json::array();
  for (const auto& p : m.cdf)
    cdf.push_back({ { "threshold", p.threshold }, { "fraction", p.fraction } });
  return { { "method", std::string(sim::to_string(m.method)) },
           { "h_plus_mean", m.h_plus_mean },
           { "h_plus_sd", m.h_plus_sd },
           { "h_minus_mean", m.h_minus_mean },
           { "h_minus_sd", m.h_minus_sd },
           { "bias_trimmed", m.bias_trimmed },
           { "rmse_trimmed", m.rmse_trimmed },
           { "cdf", cdf },
           { "reps_total", m.reps_total },
           { "reps_failed", m.reps_failed } };
}

inline void
write_cdf_csv(std::ostream& out, const sim::McSummary& m)
{
  out << "threshold,fraction\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : m.cdf)
    out << p.threshold << ',' << p.fraction << '\n';
}

//! One Table-1-style row per summary.
inline void
write_table_csv(std::ostream& out,
                sim::Design design,
                const std::vector<sim::McSummary>& rows)
{
  out << "design,method,h_plus_mean,h_plus_sd,h_minus_mean,h_minus_sd,bias,rmse,reps_total,"
         "reps_failed\n";
  out << std::setprecision(6);
  for (const auto& m : rows)
    out << (design == sim::Design::design1 ? 1 : 2) << ',' << sim::to_string(m.method) << ','
        << m.h_plus_mean << ',' << m.h_plus_sd << ',' << m.h_minus_mean << ','
        << m.h_minus_sd << ',' << m.bias_trimmed << ',' << m.rmse_trimmed << ','
        << m.reps_total << ',' << m.reps_failed << '\n';
}

} // namespace frdbw
