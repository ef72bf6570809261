// Batch front end: run scenario configs, audit nonlinearities, and extract
// plot-ready CSV tables from report files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "steklov/run.hpp"

namespace {

void print_report_summary(const steklov::RunReport& report, bool quiet) {
  if (quiet) return;
  std::printf("mesh: %zu nodes, %zu triangles, %zu boundary edges\n",
              report.n_nodes, report.n_triangles, report.n_boundary_edges);
  for (std::size_t i = 0; i < report.eigenvalues.size(); ++i)
    std::printf("mu_%zu = %.12g\n", i + 1, report.eigenvalues[i]);
  if (report.audit.has_value()) {
    for (const auto& [name, condition] : report.audit->items())
      std::printf("audit %-14s %s\n", name.c_str(),
                  steklov::to_string(condition->verdict));
  }
  for (std::size_t i = 0; i < report.solutions.size(); ++i) {
    const auto& s = report.solutions[i];
    std::printf(
        "solution %zu [%s]: J = %.6g, |grad| = %.3g, converged = %s, "
        "morse = (%d, %d)\n",
        i + 1, steklov::to_string(s.finder), s.J_value, s.grad_norm,
        s.converged ? "yes" : "no", s.morse_negatives, s.morse_near_zeros);
  }
  for (const auto& [pair, dist] : report.distances)
    std::printf("boundary distance %s = %.6g\n", pair.c_str(), dist);
  std::printf("status: %d\n", report.status);
}

steklov::RunConfig load_with_overrides(const std::string& config_path,
                                       const std::optional<std::string>& out,
                                       const std::optional<std::uint64_t>& seed) {
  steklov::RunConfig config = steklov::load_config(config_path);
  if (out.has_value()) config.out_dir = *out;
  if (seed.has_value()) config.seed = *seed;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steklov boundary-eigenvalue laboratory"};
  app.require_subcommand(1);

  std::string config_path, report_path, kind_name;
  std::optional<std::string> out_override;
  std::optional<std::uint64_t> seed_override;
  bool quiet = false;
  int plot_index = 0;

  app.add_flag("--quiet", quiet, "suppress progress output");

  CLI::App* cmd_run = app.add_subcommand("run", "execute a scenario config");
  cmd_run->fallthrough();
  cmd_run->add_option("config", config_path, "config file path")->required();
  cmd_run->add_option("--out", out_override, "output directory override");
  cmd_run->add_option("--seed", seed_override, "probe seed override");

  CLI::App* cmd_audit =
      app.add_subcommand("audit", "run only the hypothesis audit of a config");
  cmd_audit->fallthrough();
  cmd_audit->add_option("config", config_path, "config file path")->required();
  cmd_audit->add_option("--out", out_override, "output directory override");
  cmd_audit->add_option("--seed", seed_override, "probe seed override");

  CLI::App* cmd_plot =
      app.add_subcommand("plot", "extract plot-ready CSV from a report");
  cmd_plot->fallthrough();
  cmd_plot->add_option("report", report_path, "report.txt path")->required();
  cmd_plot->add_option("--kind", kind_name,
                       "convergence | path_profile | solution_trace | spectrum")
      ->required();
  cmd_plot->add_option("--index", plot_index,
                       "solution index for convergence/solution_trace");
  cmd_plot->add_option("--out", out_override, "output directory override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed() || cmd_audit->parsed()) {
      steklov::RunConfig config =
          load_with_overrides(config_path, out_override, seed_override);
      if (cmd_audit->parsed())
        config.scenario = steklov::Scenario::audit_only;
      const steklov::RunReport report = steklov::run(config);
      print_report_summary(report, quiet);
      if (!quiet)
        std::printf("report: %s\n",
                    (std::filesystem::path(config.out_dir) / "report.txt")
                        .string()
                        .c_str());
      return report.status;
    }

    const steklov::RunReport report = steklov::load_report(report_path);
    const steklov::PlotKind kind = steklov::plot_kind_from_string(kind_name);
    const std::string csv = steklov::emit_plot_data(report, kind, plot_index);
    const std::filesystem::path dir =
        out_override.has_value()
            ? std::filesystem::path(*out_override)
            : std::filesystem::path(report_path).parent_path();
    std::filesystem::create_directories(dir);
    std::string name = std::string("plot_") + steklov::to_string(kind);
    if (kind == steklov::PlotKind::convergence ||
        kind == steklov::PlotKind::solution_trace)
      name += "_" + std::to_string(plot_index + 1);
    const std::filesystem::path out_path = dir / (name + ".csv");
    std::ofstream out(out_path);
    if (!out) throw steklov::Error("cannot open " + out_path.string());
    out << csv;
    if (!quiet) std::printf("wrote %s\n", out_path.string().c_str());
    return 0;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}
