#pragma once

// Batch orchestration: flat-text run configs, scenario execution
// (mesh -> operators -> spectrum -> audit -> finders/probes), structured
// report files with sidecar artifacts, and plot-ready CSV extraction.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "steklov/critical.hpp"
#include "steklov/nonlinearity.hpp"

namespace steklov {

enum class Scenario { thm1, thm2, thm3_probe, thm4, spectrum_only, audit_only };
const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

/// Everything a run needs, parsed from flat key=value text with dotted keys
/// (e.g. `domain.shape=disk`).  Unknown keys are rejected.
struct RunConfig {
  std::string domain_shape = "disk";  ///< disk | square | file
  double domain_size = 1.0;           ///< Radius or side length.
  std::string domain_file;            ///< Mesh path when shape=file.
  double h = 0.1;
  int refinements = 0;

  std::string coefficient_name = "one";  ///< one | constant
  std::map<std::string, double> coefficient_params;

  std::string nonlinearity_name = "zero";
  std::map<std::string, double> nonlinearity_params;

  Scenario scenario = Scenario::spectrum_only;
  double tol = 1e-6;
  int max_iters = 20000;
  int k_eigenpairs = 5;
  int n_path = 32;
  double audit_u_max = 20.0;
  int audit_samples = 2001;
  std::uint64_t seed = 2024;
  std::string out_dir = ".";

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

struct SolutionSummary {
  Finder finder = Finder::global_min;
  double J_value = 0.0;
  double grad_norm = 0.0;
  double cerami_metric = 0.0;
  bool converged = false;
  int iterations = 0;
  int morse_negatives = -1;
  int morse_near_zeros = -1;
  bool constraint_active = false;
  double t_coefficient = 0.0;      ///< phi_1 component of the solution.
  double residual_recheck = 0.0;   ///< Gradient norm recomputed at report time.
  DiscreteFunction u;
  std::vector<IterateRow> log;
};

struct RunReport {
  RunConfig config;
  std::size_t n_nodes = 0, n_triangles = 0, n_boundary_edges = 0;
  double boundary_length = 0.0;
  std::vector<double> eigenvalues;
  std::optional<HypothesisAudit> audit;
  std::vector<SolutionSummary> solutions;
  /// Pairwise boundary-norm distances, keyed "i_j" with 1-based indices.
  std::map<std::string, double> distances;
  std::optional<MountainPassGeometryReport> mp_probe;
  std::optional<SaddleGeometryReport> saddle_probe;
  std::optional<LocalLinkingReport> linking_probe;
  PathProfile path_profile;
  std::vector<std::string> notes;
  /// Side-car file names, relative to the report's directory.
  std::map<std::string, std::string> artifacts;
  std::map<std::string, double> timings_ms;
  /// 0 full success, 2 when a finder failed to converge or had to be skipped.
  int status = 0;

  /// Carried so artifacts can be written and traces plotted.
  std::optional<Mesh> mesh_data;
  std::optional<SteklovSpectrum> spectrum_data;
};

/// Executes the configured scenario and writes report.txt plus sidecar
/// artifacts into config.out_dir.
RunReport run(const RunConfig& config);

/// Writes report.txt and all sidecars; returns the report path.  The names
/// of the side-car files written are recorded in report.artifacts.
std::string write_report(RunReport& report, const std::string& out_dir);

/// Reads back the plot-relevant subset of a report: config echo, spectrum,
/// solution summaries with their vectors and logs, path profile, mesh.
RunReport load_report(const std::string& report_path);

enum class PlotKind { convergence, path_profile, solution_trace, spectrum };
PlotKind plot_kind_from_string(const std::string& name);
const char* to_string(PlotKind kind);

/// Renders one plot-ready CSV table from a report.  `index` selects the
/// solution for the convergence and solution_trace kinds (0-based).
/// Missing data raises ParameterError.
std::string emit_plot_data(const RunReport& report, PlotKind kind,
                           int index = 0);

/// Plain-text persistence for solution vectors (`steklov-fun v1`).
void save_function(const DiscreteFunction& u, const std::string& path);
DiscreteFunction load_function(const std::string& path);

}  // namespace steklov
