#pragma once

#include "error.hpp"
#include "estimator.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "selector.hpp"
#include "simlab.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace frdbw::cli {

enum class Command
{
  select,
  estimate,
  simulate,
  dgp_sample
};

struct RunConfig
{
  Command command = Command::select;
  std::optional<std::string> input_path;
  double cutoff = 0.0;
  KernelSpec kernel;
  Mode mode = Mode::fuzzy;
  //! Empty means standard output.
  std::string output_path;

  std::optional<double> h_plus;
  std::optional<double> h_minus;
  bool auto_bandwidth = false;

  sim::Design design = sim::Design::design2;
  sim::Method method = sim::Method::mmse_f;
  std::size_t n = 500;
  std::size_t reps = 1000;
  std::uint64_t seed = 42;
  std::uint64_t rep_index = 0;
  std::string out_dir = ".";
  unsigned threads = 0;

  //! Set when --help was requested; holds the usage text.
  std::optional<std::string> help;
};

//! Full 10,000-replication run size.
inline constexpr std::size_t full_reps = 10000;

inline RunConfig
parse_args(const std::vector<std::string>& args)
{
  RunConfig cfg;
  std::string kernel = "triangular";
  std::string mode = "fuzzy";
  std::string method = "mmse-f";
  int design = 0;
  bool full = false;
  double hp = 0.0, hm = 0.0;

  CLI::App app{ "Two-sided bandwidth selection for fuzzy regression discontinuity", "frdbw" };
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  const std::vector<std::string> kernels{ "triangular", "uniform", "epanechnikov" };
  auto add_data_opts = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input_path, "CSV file with header x,y,d")->required();
    sub->add_option("--cutoff", cfg.cutoff, "cutoff of the assignment variable");
    sub->add_option("--kernel", kernel, "kernel family")->check(CLI::IsMember(kernels));
    sub->add_option("--mode", mode, "bandwidth criterion")
      ->check(CLI::IsMember({ "fuzzy", "sharp" }));
    sub->add_option("--output", cfg.output_path, "JSON output file (default: stdout)");
  };

  auto* sel = app.add_subcommand("select", "choose (h_plus, h_minus) for a CSV sample");
  add_data_opts(sel);

  auto* est = app.add_subcommand("estimate", "fuzzy RD estimate for given or selected bandwidths");
  add_data_opts(est);
  auto* o_hp = est->add_option("--h-plus", hp, "bandwidth above the cutoff");
  auto* o_hm = est->add_option("--h-minus", hm, "bandwidth below the cutoff");
  auto* o_auto = est->add_flag("--auto", cfg.auto_bandwidth, "select bandwidths first");
  o_auto->excludes(o_hp)->excludes(o_hm);

  auto* simc = app.add_subcommand("simulate", "Monte Carlo experiment on a simulation design");
  simc->add_option("--design", design, "simulation design")
    ->required()
    ->check(CLI::IsMember({ 1, 2 }));
  simc->add_option("--method", method, "bandwidth rule")
    ->check(CLI::IsMember({ "mmse-f", "mmse-s" }));
  simc->add_option("--n", cfg.n, "observations per replication")->check(CLI::Range(50, 100000000));
  simc->add_option("--reps", cfg.reps, "replications")->check(CLI::PositiveNumber);
  simc->add_flag("--full", full, "run 10000 replications");
  simc->add_option("--seed", cfg.seed, "master seed");
  simc->add_option("--kernel", kernel, "kernel family")->check(CLI::IsMember(kernels));
  simc->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  simc->add_option("--output", cfg.output_path, "summary JSON file (default: stdout)");
  simc->add_option("--out-dir", cfg.out_dir, "directory for cdf.csv and table.csv");

  auto* dgp = app.add_subcommand("dgp-sample", "write one simulated sample as CSV");
  dgp->add_option("--design", design, "simulation design")
    ->required()
    ->check(CLI::IsMember({ 1, 2 }));
  dgp->add_option("--n", cfg.n, "observations")->check(CLI::Range(50, 100000000));
  dgp->add_option("--seed", cfg.seed, "master seed");
  dgp->add_option("--rep", cfg.rep_index, "replication index");
  dgp->add_option("--output", cfg.output_path, "CSV file (default: stdout)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    cfg.help = app.help();
    return cfg;
  } catch (const CLI::CallForAllHelp&) {
    cfg.help = app.help("", CLI::AppFormatMode::All);
    return cfg;
  } catch (const CLI::ParseError& e) {
    fail(ErrorKind::usage, e.what());
  }
  for (auto* sub : { sel, est, simc, dgp }) {
    if (sub->parsed() && sub->get_help_ptr()->count() > 0) {
      cfg.help = sub->help();
      return cfg;
    }
  }

  cfg.kernel = parse_kernel(kernel);
  cfg.mode = mode == "sharp" ? Mode::sharp : Mode::fuzzy;
  cfg.method = method == "mmse-s" ? sim::Method::mmse_s : sim::Method::mmse_f;
  cfg.design = design == 1 ? sim::Design::design1 : sim::Design::design2;

  if (sel->parsed()) {
    cfg.command = Command::select;
  } else if (est->parsed()) {
    cfg.command = Command::estimate;
    if (!cfg.auto_bandwidth) {
      if (o_hp->count() == 0 || o_hm->count() == 0)
        fail(ErrorKind::usage, "estimate needs --h-plus and --h-minus, or --auto");
      if (!(hp > 0.0) || !(hm > 0.0))
        fail(ErrorKind::usage, "bandwidths must be positive");
      cfg.h_plus = hp;
      cfg.h_minus = hm;
    }
  } else if (simc->parsed()) {
    cfg.command = Command::simulate;
    if (full)
      cfg.reps = full_reps;
  } else {
    cfg.command = Command::dgp_sample;
  }
  return cfg;
}

inline RunConfig
parse_args(int argc, const char* const* argv)
{
  return parse_args(std::vector<std::string>(argv + 1, argv + argc));
}

namespace detail {

template<class Fn>
void
with_output(const std::string& path, Fn&& fn)
{
  if (path.empty()) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out)
    fail(ErrorKind::invalid_argument, "cannot write '" + path + "'");
  fn(out);
}

} // namespace detail

//! Executes a parsed configuration. Returns the process exit status.
inline int
run(const RunConfig& cfg)
{
  if (cfg.help) {
    std::cout << *cfg.help;
    return 0;
  }
  switch (cfg.command) {
    case Command::select: {
      const Sample s = load_csv(*cfg.input_path, cfg.cutoff);
      const auto sel = select_bandwidths(s, cfg.kernel, cfg.mode);
      detail::with_output(cfg.output_path,
                          [&](std::ostream& o) { o << to_json(sel).dump(2) << '\n'; });
      return 0;
    }
    case Command::estimate: {
      const Sample s = load_csv(*cfg.input_path, cfg.cutoff);
      nlohmann::json j;
      double hp = cfg.h_plus.value_or(0.0), hm = cfg.h_minus.value_or(0.0);
      std::optional<Selection> sel;
      if (cfg.auto_bandwidth) {
        sel = select_bandwidths(s, cfg.kernel, cfg.mode);
        hp = sel->bandwidths.h_plus;
        hm = sel->bandwidths.h_minus;
      }
      j = to_json(frd_estimate(s, hp, hm, cfg.kernel));
      if (sel)
        j["selection"] = to_json(*sel);
      detail::with_output(cfg.output_path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
      return 0;
    }
    case Command::simulate: {
      sim::DgpSpec spec;
      spec.design = cfg.design;
      spec.n = cfg.n;
      spec.seed = cfg.seed;
      sim::McOptions opts;
      opts.threads = cfg.threads;
      const auto summary = sim::run_monte_carlo(spec, cfg.method, cfg.reps, cfg.kernel, opts);
      auto j = to_json(summary);
      j["design"] = cfg.design == sim::Design::design1 ? 1 : 2;
      j["n"] = cfg.n;
      j["seed"] = cfg.seed;
      j["kernel"] = std::string(to_string(cfg.kernel.family));
      j["true_tau"] = sim::true_tau(cfg.design);
      detail::with_output(cfg.output_path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });

      const std::filesystem::path dir(cfg.out_dir);
      std::filesystem::create_directories(dir);
      detail::with_output((dir / "cdf.csv").string(),
                          [&](std::ostream& o) { write_cdf_csv(o, summary); });
      detail::with_output((dir / "table.csv").string(),
                          [&](std::ostream& o) { write_table_csv(o, cfg.design, { summary }); });
      return 0;
    }
    case Command::dgp_sample: {
      sim::DgpSpec spec;
      spec.design = cfg.design;
      spec.n = cfg.n;
      spec.seed = cfg.seed;
      const Sample s = sim::draw_sample(spec, cfg.rep_index);
      detail::with_output(cfg.output_path, [&](std::ostream& o) { write_csv(o, s); });
      return 0;
    }
  }
  return 1;
}

//! Parses, runs and maps failures to "error: <Kind>: <message>" on stderr.
inline int
main_entry(int argc, const char* const* argv)
{
  try {
    return run(parse_args(argc, argv));
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return e.kind() == ErrorKind::usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << '\n';
    return 1;
  }
}

} // namespace frdbw::cli
