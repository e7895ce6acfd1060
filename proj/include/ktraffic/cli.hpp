#pragma once

// Command-line front end:
//
//   ktraffic <command> --config PATH [--out DIR] [--seed U64]
//                      [--format csv|json] [--workers N] [--timestamp TEXT]
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "ktraffic/config.hpp"
#include "ktraffic/experiments.hpp"
#include "ktraffic/output.hpp"

namespace ktraffic::cli {

inline constexpr std::array<std::string_view, 5> kCommands{"simulate", "compare", "sweep",
                                                           "contours", "relax-check"};

enum ExitCode : int { kOk = 0, kConfigError = 1, kRuntimeError = 2 };

inline constexpr double kRelaxTolerance = 0.02;

struct Options {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  unsigned workers = 1;
  std::string timestamp = "unset";
};

inline std::string usage() {
  return "usage: ktraffic <command> --config PATH [--out DIR] [--seed U64]\n"
         "                [--format csv|json] [--workers N] [--timestamp TEXT]\n"
         "commands:\n"
         "  simulate     moment trajectory of one run            -> moments.<fmt>\n"
         "  compare      unconstrained vs each sweep.nu0_list    -> compare.<fmt>\n"
         "  sweep        fundamental diagram over the rho grid   -> diagram.<fmt>\n"
         "  contours     speed histograms over time              -> contours.<fmt>\n"
         "  relax-check  monokinetic relaxation vs closed form   -> relax.<fmt>\n";
}

namespace detail {

inline std::vector<std::pair<std::string, std::string>> provenance(const RunManifest& m,
                                                                   std::string_view command) {
  auto meta = config_entries(m);
  meta.emplace_back("run.command", std::string(command));
  meta.emplace_back("run.version", m.version);
  meta.emplace_back("run.timestamp", m.timestamp);
  return meta;
}

inline std::vector<double> sampled_taus(const SimConfig& cfg) {
  std::vector<double> taus;
  const std::uint64_t total = steps_to(cfg.tau_end, cfg.scaling.dtau);
  for (std::uint64_t s = 0; s <= total; ++s) {
    if (ktraffic::detail::is_sample_step(s, total, cfg.sample_stride)) {
      taus.push_back(static_cast<double>(s) * cfg.scaling.dtau);
    }
  }
  return taus;
}

inline RelaxationSpec relaxation_spec(const RunManifest& m) {
  const SimConfig& s = m.sim;
  if (s.init.kind != InitDist::Kind::dirac) {
    throw ConfigError("relax-check needs init.kind = dirac");
  }
  if (s.strategy.kind() != ControlKind::desired_speed ||
      s.strategy.vd()->mode != DesiredSpeedSpec::Mode::constant) {
    throw ConfigError("relax-check needs control.kind = desired with a constant control.vd");
  }
  RelaxationSpec r;
  r.v0 = s.init.v0;
  r.vd = s.strategy.vd()->value;
  r.rho = s.rho.value();
  r.nu0 = s.strategy.nu0();
  r.epsilon = s.scaling.epsilon;
  r.tau_end = s.tau_end;
  r.tau_min = m.relax_tau_min;
  r.n_particles = s.n_particles;
  r.sample_stride = s.sample_stride;
  r.seed = s.seed;
  r.kernel = s.kernel;
  return r;
}

}  // namespace detail

/// Runs `command` for a resolved manifest and writes its outputs.
inline int dispatch(std::string_view command, const RunManifest& m, const Options& opts,
                    std::ostream& out, std::ostream& err) {
  try {
    const Format format = parse_format(opts.format);
    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    auto data_path = [&](std::string_view stem) {
      return (dir / (std::string(stem) + "." + std::string(extension(format)))).string();
    };
    {
      std::ofstream manifest_out(dir / "manifest.cfg", std::ios::binary | std::ios::trunc);
      manifest_out << "# run.command = " << command << "\n# run.timestamp = " << m.timestamp
                   << "\n"
                   << to_config_text(m);
      if (!manifest_out) throw std::runtime_error("cannot write manifest.cfg");
    }
    const auto meta = detail::provenance(m, command);
    int code = kOk;
    Table table;
    std::string stem;

    if (command == "simulate") {
      RunOptions run_opts;
      run_opts.workers = opts.workers;
      const MomentSeries series = run(m.sim, run_opts).series;
      const MomentSample& last = series.samples.back();
      out << "tau=" << last.tau << " V=" << last.mean << " E=" << last.energy
          << " variance=" << reported_variance(last) << "\n";
      table = moments_table(series);
      stem = "moments";
    } else if (command == "compare") {
      const auto legs = variance_comparison(m.sim, m.nu0_list, opts.workers);
      for (const auto& leg : legs) {
        const MomentSample& last = leg.series.samples.back();
        out << to_string(leg.strategy.kind()) << " nu0=" << leg.strategy.nu0()
            << " final V=" << last.mean << " variance=" << reported_variance(last) << "\n";
      }
      table = comparison_table(legs);
      stem = "compare";
    } else if (command == "sweep") {
      const auto rows = fundamental_diagram(m.sweep_spec(), opts.workers);
      out << rows.size() << " diagram rows\n";
      table = diagram_table(rows);
      stem = "diagram";
    } else if (command == "contours") {
      const auto taus = m.contour_taus.empty() ? detail::sampled_taus(m.sim) : m.contour_taus;
      table = contours_table(distribution_evolution(m.sim, m.n_bins, taus, opts.workers));
      out << taus.size() << " histogram slices of " << m.n_bins << " bins\n";
      stem = "contours";
    } else if (command == "relax-check") {
      const RelaxationReport report = relaxation_oracle(detail::relaxation_spec(m));
      out << "max relative error " << report.max_rel_error << " (tolerance " << kRelaxTolerance
          << "), monokinetic " << (report.monokinetic ? "yes" : "no") << "\n";
      if (report.max_rel_error > kRelaxTolerance || !report.monokinetic) {
        err << "relax-check failed\n";
        code = kRuntimeError;
      }
      table = relaxation_table(report);
      stem = "relax";
    } else {
      err << "unknown command '" << command << "'\n" << usage();
      return kConfigError;
    }
    table.metadata = meta;
    write_outputs(table, format, data_path(stem));
    return code;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

/// Full command-line entry point.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (argc < 2) {
    err << usage();
    return kConfigError;
  }
  const std::string_view command = argv[1];
  if (command == "--help" || command == "-h" || command == "help") {
    out << usage();
    return kOk;
  }
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    err << "unknown command '" << command << "'\n" << usage();
    return kConfigError;
  }

  Options opts;
  CLI::App app{"kinetic traffic simulator", "ktraffic " + std::string(command)};
  app.add_option("--config", opts.config, "run configuration file")->required();
  app.add_option("--out", opts.out_dir, "output directory");
  app.add_option("--seed", opts.seed, "override sim.seed");
  app.add_option("--format", opts.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", opts.workers, "worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--timestamp", opts.timestamp, "timestamp recorded in the provenance");
  try {
    app.parse(argc - 1, argv + 1);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << usage();
    return kConfigError;
  }

  RunManifest manifest;
  try {
    manifest = parse_config(opts.config);
    if (opts.seed) manifest.sim.seed = *opts.seed;
    manifest.timestamp = opts.timestamp;
  } catch (const std::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigError;
  }
  return dispatch(command, manifest, opts, out, err);
}

}  // namespace ktraffic::cli
