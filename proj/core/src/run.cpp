#include "steklov/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "text_format.hpp"

namespace steklov {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("value for \"" + key + "\" is not a number: \"" + s +
                     "\"");
  }
}

long long to_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("value for \"" + key + "\" is not an integer: \"" + s +
                     "\"");
  }
}

std::uint64_t to_u64(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("value for \"" + key +
                     "\" is not a nonnegative integer: \"" + s + "\"");
  }
}

const std::vector<std::string>& known_nonlinearities() {
  static const std::vector<std::string> names = {
      "M1", "quartic-well", "M2", "bounded-gaussian", "M3", "zero"};
  return names;
}

void validate_config(const RunConfig& c) {
  if (c.domain_shape != "disk" && c.domain_shape != "square" &&
      c.domain_shape != "file")
    throw ParameterError("domain.shape must be disk, square, or file");
  if (c.domain_shape == "file" && c.domain_file.empty())
    throw ParameterError("domain.shape=file requires domain.file");
  if (c.domain_shape != "file" && !(c.domain_size > 0.0))
    throw ParameterError("domain.size must be positive");
  if (!(c.h > 0.0)) throw ParameterError("domain.h must be positive");
  if (c.refinements < 0 || c.refinements > 12)
    throw ParameterError("domain.refinements must lie in [0, 12]");
  if (c.coefficient_name != "one" && c.coefficient_name != "constant")
    throw ParameterError("coefficient.name must be one or constant");
  const auto& names = known_nonlinearities();
  if (std::find(names.begin(), names.end(), c.nonlinearity_name) ==
      names.end())
    throw ParameterError("unknown nonlinearity.name \"" + c.nonlinearity_name +
                         "\"");
  if (!(c.tol > 0.0)) throw ParameterError("tol must be positive");
  if (c.max_iters < 1) throw ParameterError("max_iters must be at least 1");
  if (c.k_eigenpairs < 1)
    throw ParameterError("k_eigenpairs must be at least 1");
  if (c.n_path < 4) throw ParameterError("n_path must be at least 4");
  if (!(c.audit_u_max > 0.0))
    throw ParameterError("audit.u_max must be positive");
  if (c.audit_samples < 101)
    throw ParameterError("audit.samples must be at least 101");
  if (c.out_dir.empty()) throw ParameterError("out must be nonempty");
}

}  // namespace

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::thm1:
      return "thm1";
    case Scenario::thm2:
      return "thm2";
    case Scenario::thm3_probe:
      return "thm3_probe";
    case Scenario::thm4:
      return "thm4";
    case Scenario::spectrum_only:
      return "spectrum_only";
    case Scenario::audit_only:
      return "audit_only";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  for (Scenario s : {Scenario::thm1, Scenario::thm2, Scenario::thm3_probe,
                     Scenario::thm4, Scenario::spectrum_only,
                     Scenario::audit_only})
    if (name == to_string(s)) return s;
  throw ParameterError("unknown scenario \"" + name + "\"");
}

const char* to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::convergence:
      return "convergence";
    case PlotKind::path_profile:
      return "path_profile";
    case PlotKind::solution_trace:
      return "solution_trace";
    case PlotKind::spectrum:
      return "spectrum";
  }
  return "unknown";
}

PlotKind plot_kind_from_string(const std::string& name) {
  for (PlotKind k : {PlotKind::convergence, PlotKind::path_profile,
                     PlotKind::solution_trace, PlotKind::spectrum})
    if (name == to_string(k)) return k;
  throw ParameterError("unknown plot kind \"" + name + "\"");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key=value", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);

    if (key == "domain.shape") {
      c.domain_shape = value;
    } else if (key == "domain.size") {
      c.domain_size = to_double(value, key);
    } else if (key == "domain.file") {
      c.domain_file = value;
    } else if (key == "domain.h") {
      c.h = to_double(value, key);
    } else if (key == "domain.refinements") {
      c.refinements = static_cast<int>(to_int(value, key));
    } else if (key == "coefficient.name") {
      c.coefficient_name = value;
    } else if (key.rfind("coefficient.params.", 0) == 0) {
      const std::string name = key.substr(std::string("coefficient.params.").size());
      if (name.empty()) throw ParseError("empty parameter name", line_no);
      c.coefficient_params[name] = to_double(value, key);
    } else if (key == "nonlinearity.name") {
      c.nonlinearity_name = value;
    } else if (key.rfind("nonlinearity.params.", 0) == 0) {
      const std::string name = key.substr(std::string("nonlinearity.params.").size());
      if (name.empty()) throw ParseError("empty parameter name", line_no);
      c.nonlinearity_params[name] = to_double(value, key);
    } else if (key == "scenario") {
      c.scenario = scenario_from_string(value);
    } else if (key == "tol") {
      c.tol = to_double(value, key);
    } else if (key == "max_iters") {
      c.max_iters = static_cast<int>(to_int(value, key));
    } else if (key == "k_eigenpairs") {
      c.k_eigenpairs = static_cast<int>(to_int(value, key));
    } else if (key == "n_path") {
      c.n_path = static_cast<int>(to_int(value, key));
    } else if (key == "audit.u_max") {
      c.audit_u_max = to_double(value, key);
    } else if (key == "audit.samples") {
      c.audit_samples = static_cast<int>(to_int(value, key));
    } else if (key == "seed") {
      c.seed = to_u64(value, key);
    } else if (key == "out") {
      c.out_dir = value;
    } else {
      throw ParseError("unknown config key \"" + key + "\"", line_no);
    }
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "domain.shape=" << c.domain_shape << "\n";
  out << "domain.size=" << detail::format_double(c.domain_size) << "\n";
  out << "domain.file=" << c.domain_file << "\n";
  out << "domain.h=" << detail::format_double(c.h) << "\n";
  out << "domain.refinements=" << c.refinements << "\n";
  out << "coefficient.name=" << c.coefficient_name << "\n";
  for (const auto& [k, v] : c.coefficient_params)
    out << "coefficient.params." << k << "=" << detail::format_double(v)
        << "\n";
  out << "nonlinearity.name=" << c.nonlinearity_name << "\n";
  for (const auto& [k, v] : c.nonlinearity_params)
    out << "nonlinearity.params." << k << "=" << detail::format_double(v)
        << "\n";
  out << "scenario=" << to_string(c.scenario) << "\n";
  out << "tol=" << detail::format_double(c.tol) << "\n";
  out << "max_iters=" << c.max_iters << "\n";
  out << "k_eigenpairs=" << c.k_eigenpairs << "\n";
  out << "n_path=" << c.n_path << "\n";
  out << "audit.u_max=" << detail::format_double(c.audit_u_max) << "\n";
  out << "audit.samples=" << c.audit_samples << "\n";
  out << "seed=" << c.seed << "\n";
  out << "out=" << c.out_dir << "\n";
  return out.str();
}

void save_function(const DiscreteFunction& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "steklov-fun v1\n";
  out << "n " << u.dim() << "\n";
  for (Eigen::Index i = 0; i < u.dim(); ++i)
    out << detail::format_double(u.coefficients[i]) << "\n";
  if (!out) throw Error("failed while writing " + path);
}

DiscreteFunction load_function(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open function file " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "steklov-fun v1")
    throw ParseError("bad header in " + path);
  if (!std::getline(in, line)) throw ParseError("missing size line in " + path);
  std::istringstream head(line);
  std::string tag;
  long long n = -1;
  head >> tag >> n;
  if (tag != "n" || n < 0) throw ParseError("bad size line in " + path);
  DiscreteFunction u;
  u.coefficients.resize(n);
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw ParseError("truncated coefficient list in " + path);
    u.coefficients[i] = to_double(trim(line), "coefficient");
  }
  u.mesh_id = 0;
  return u;
}

namespace {

std::string iterate_log_csv(const std::vector<IterateRow>& rows) {
  std::ostringstream out;
  out << "step,J,grad_norm,u_norm,cerami_metric,t_coefficient,w_norm\n";
  for (const IterateRow& r : rows)
    out << r.step << "," << detail::format_double(r.record.J_value) << ","
        << detail::format_double(r.record.grad_norm) << ","
        << detail::format_double(r.record.u_norm) << ","
        << detail::format_double(r.record.cerami_metric) << ","
        << detail::format_double(r.t_coefficient) << ","
        << detail::format_double(r.w_norm) << "\n";
  return out.str();
}

std::vector<IterateRow> parse_log_csv(const std::string& text,
                                      const std::string& origin) {
  std::vector<IterateRow> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;  // header
    }
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cols.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cols.size() != 7)
      throw ParseError("malformed iterate row in " + origin);
    IterateRow r;
    r.step = static_cast<int>(to_int(cols[0], "step"));
    r.record.J_value = to_double(cols[1], "J");
    r.record.grad_norm = to_double(cols[2], "grad_norm");
    r.record.u_norm = to_double(cols[3], "u_norm");
    r.record.cerami_metric = to_double(cols[4], "cerami_metric");
    r.t_coefficient = to_double(cols[5], "t_coefficient");
    r.w_norm = to_double(cols[6], "w_norm");
    rows.push_back(r);
  }
  return rows;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("failed while writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt_bool(bool b) { return b ? "1" : "0"; }

void emit_condition(std::ostringstream& out, const std::string& name,
                    const ConditionReport& report) {
  out << "audit." << name << ".verdict=" << to_string(report.verdict) << "\n";
  if (report.witness_u.has_value())
    out << "audit." << name
        << ".witness_u=" << detail::format_double(*report.witness_u) << "\n";
  if (report.witness_value.has_value())
    out << "audit." << name
        << ".witness_value=" << detail::format_double(*report.witness_value)
        << "\n";
  if (!report.note.empty())
    out << "audit." << name << ".note=" << report.note << "\n";
}

}  // namespace

std::string write_report(RunReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto in_dir = [&](const std::string& name) {
    return (fs::path(out_dir) / name).string();
  };

  std::map<std::string, std::string>& artifacts = report.artifacts;
  if (report.mesh_data.has_value()) {
    save_mesh(*report.mesh_data, in_dir("mesh.txt"));
    artifacts["mesh"] = "mesh.txt";
  }
  if (report.spectrum_data.has_value()) {
    save_spectrum(*report.spectrum_data, in_dir("spectrum.txt"));
    artifacts["spectrum"] = "spectrum.txt";
  }
  for (std::size_t i = 0; i < report.solutions.size(); ++i) {
    const std::string base = "sol_" + std::to_string(i + 1);
    save_function(report.solutions[i].u, in_dir(base + ".txt"));
    write_text_file(in_dir(base + "_log.csv"),
                    iterate_log_csv(report.solutions[i].log));
    artifacts["solution_" + std::to_string(i + 1)] = base + ".txt";
    artifacts["solution_" + std::to_string(i + 1) + "_log"] = base + "_log.csv";
  }
  if (!report.path_profile.empty()) {
    std::ostringstream csv;
    csv << "s,J\n";
    for (const PathSample& p : report.path_profile)
      csv << detail::format_double(p.s) << "," << detail::format_double(p.J)
          << "\n";
    write_text_file(in_dir("path_profile.csv"), csv.str());
    artifacts["path_profile"] = "path_profile.csv";
  }

  std::ostringstream out;
  out << "steklov-report v1\n";
  {
    std::istringstream cfg(serialize_config(report.config));
    std::string line;
    while (std::getline(cfg, line)) out << "config." << line << "\n";
  }
  out << "mesh.n_nodes=" << report.n_nodes << "\n";
  out << "mesh.n_triangles=" << report.n_triangles << "\n";
  out << "mesh.n_boundary_edges=" << report.n_boundary_edges << "\n";
  out << "mesh.boundary_length=" << detail::format_double(report.boundary_length)
      << "\n";
  for (std::size_t i = 0; i < report.eigenvalues.size(); ++i)
    out << "spectrum.mu." << (i + 1) << "="
        << detail::format_double(report.eigenvalues[i]) << "\n";

  if (report.audit.has_value()) {
    for (const auto& [name, condition] : report.audit->items())
      emit_condition(out, name, *condition);
    if (report.audit->bh2_a_plus.has_value())
      out << "audit.bh2.a_plus="
          << detail::format_double(*report.audit->bh2_a_plus) << "\n";
    if (report.audit->bh2_a_minus.has_value())
      out << "audit.bh2.a_minus="
          << detail::format_double(*report.audit->bh2_a_minus) << "\n";
    out << "audit.sample_set=" << report.audit->sample_set << "\n";
  }

  out << "solutions.count=" << report.solutions.size() << "\n";
  for (std::size_t i = 0; i < report.solutions.size(); ++i) {
    const SolutionSummary& s = report.solutions[i];
    const std::string p = "solution." + std::to_string(i + 1) + ".";
    out << p << "finder=" << to_string(s.finder) << "\n";
    out << p << "J=" << detail::format_double(s.J_value) << "\n";
    out << p << "grad_norm=" << detail::format_double(s.grad_norm) << "\n";
    out << p << "cerami_metric=" << detail::format_double(s.cerami_metric)
        << "\n";
    out << p << "converged=" << fmt_bool(s.converged) << "\n";
    out << p << "iterations=" << s.iterations << "\n";
    out << p << "morse_negatives=" << s.morse_negatives << "\n";
    out << p << "morse_near_zeros=" << s.morse_near_zeros << "\n";
    out << p << "constraint_active=" << fmt_bool(s.constraint_active) << "\n";
    out << p << "t_coefficient=" << detail::format_double(s.t_coefficient)
        << "\n";
    out << p << "residual_recheck=" << detail::format_double(s.residual_recheck)
        << "\n";
  }
  for (const auto& [key, value] : report.distances)
    out << "distance." << key << "=" << detail::format_double(value) << "\n";

  if (report.mp_probe.has_value()) {
    const auto& probe = *report.mp_probe;
    for (std::size_t i = 0; i < probe.spheres.size(); ++i)
      out << "probe.mp.sphere." << (i + 1) << "="
          << detail::format_double(probe.spheres[i].alpha) << ","
          << detail::format_double(probe.spheres[i].inf_J) << "\n";
    for (std::size_t i = 0; i < probe.ray.size(); ++i)
      out << "probe.mp.ray." << (i + 1) << "="
          << detail::format_double(probe.ray[i].t) << ","
          << detail::format_double(probe.ray[i].J) << "\n";
    out << "probe.mp.certificate=" << fmt_bool(probe.certificate_found) << "\n";
    if (probe.certificate_found) {
      out << "probe.mp.alpha_star=" << detail::format_double(probe.alpha_star)
          << "\n";
      out << "probe.mp.rho_star=" << detail::format_double(probe.rho_star)
          << "\n";
      out << "probe.mp.e_t=" << detail::format_double(probe.e_t) << "\n";
    }
  }
  if (report.saddle_probe.has_value()) {
    const auto& probe = *report.saddle_probe;
    for (std::size_t i = 0; i < probe.ray.size(); ++i)
      out << "probe.saddle.ray." << (i + 1) << "="
          << detail::format_double(probe.ray[i].t) << ","
          << detail::format_double(probe.ray[i].J) << "\n";
    out << "probe.saddle.max_ray_J=" << detail::format_double(probe.max_ray_J)
        << "\n";
    if (probe.ssr_bound.has_value())
      out << "probe.saddle.ssr_bound=" << detail::format_double(*probe.ssr_bound)
          << "\n";
    for (std::size_t i = 0; i < probe.complement.size(); ++i)
      out << "probe.saddle.complement." << (i + 1) << "="
          << detail::format_double(probe.complement[i].w_norm) << ","
          << detail::format_double(probe.complement[i].min_J) << ","
          << detail::format_double(probe.complement[i].max_J) << "\n";
    out << "probe.saddle.coercive_trend=" << fmt_bool(probe.coercive_trend)
        << "\n";
  }
  if (report.linking_probe.has_value()) {
    const auto& probe = *report.linking_probe;
    for (std::size_t i = 0; i < probe.rows.size(); ++i) {
      const auto& row = probe.rows[i];
      out << "probe.linking.row." << (i + 1) << "="
          << detail::format_double(row.delta) << "," << row.span_violations
          << "," << row.complement_violations << ","
          << detail::format_double(row.worst_span_J) << ","
          << detail::format_double(row.worst_complement_J) << "\n";
    }
    out << "probe.linking.largest_clean_delta="
        << detail::format_double(probe.largest_clean_delta) << "\n";
  }

  for (std::size_t i = 0; i < report.notes.size(); ++i)
    out << "note." << (i + 1) << "=" << report.notes[i] << "\n";
  for (const auto& [name, path] : artifacts)
    out << "artifact." << name << "=" << path << "\n";
  out << "status=" << report.status << "\n";
  for (const auto& [name, ms] : report.timings_ms)
    out << "timing." << name << "_ms=" << detail::format_double(ms) << "\n";

  const std::string report_path = in_dir("report.txt");
  write_text_file(report_path, out.str());
  return report_path;
}

RunReport run(const RunConfig& config) {
  validate_config(config);
  using clock = std::chrono::steady_clock;
  const auto ms_since = [](clock::time_point start) {
    return std::chrono::duration<double, std::milli>(clock::now() - start)
        .count();
  };
  const auto total_start = clock::now();

  RunReport report;
  report.config = config;

  auto t = clock::now();
  std::optional<Mesh> mesh_opt;
  if (config.domain_shape == "disk")
    mesh_opt = generate_disk(config.domain_size, config.h);
  else if (config.domain_shape == "square")
    mesh_opt = generate_square(config.domain_size, config.h);
  else
    mesh_opt = load_mesh(config.domain_file);
  for (int r = 0; r < config.refinements; ++r) mesh_opt = refine(*mesh_opt);
  const Mesh& mesh = *mesh_opt;
  report.timings_ms["mesh"] = ms_since(t);
  report.n_nodes = mesh.n_nodes();
  report.n_triangles = mesh.n_triangles();
  report.n_boundary_edges = mesh.n_boundary_edges();
  report.boundary_length = mesh.boundary_length();

  CoefficientField c;
  if (config.coefficient_name == "one") {
    if (!config.coefficient_params.empty())
      throw ParameterError("coefficient \"one\" takes no parameters");
    c = constant_coefficient(1.0);
  } else {
    double value = 1.0;
    for (const auto& [k, v] : config.coefficient_params) {
      if (k != "value")
        throw ParameterError("unknown coefficient parameter \"" + k + "\"");
      value = v;
    }
    c = constant_coefficient(value);
  }

  t = clock::now();
  const SymmetricSparseOperator A = assemble_stiffness(mesh);
  const SymmetricSparseOperator C = assemble_domain_mass_weighted(mesh, c);
  const SymmetricSparseOperator B = assemble_boundary_mass(mesh);
  report.timings_ms["assembly"] = ms_since(t);

  t = clock::now();
  const int n_boundary = static_cast<int>(mesh.boundary_nodes().size());
  const int k_eff = std::min(config.k_eigenpairs, n_boundary);
  const SteklovSpectrum spectrum = solve_steklov(A, C, B, k_eff);
  report.timings_ms["spectrum"] = ms_since(t);
  report.eigenvalues.assign(spectrum.eigenvalues.begin(),
                            spectrum.eigenvalues.end());

  report.mesh_data = mesh;
  report.spectrum_data = spectrum;

  const Nonlinearity nl =
      builtin(config.nonlinearity_name, config.nonlinearity_params);

  if (config.scenario != Scenario::spectrum_only) {
    t = clock::now();
    report.audit = audit(nl, &spectrum, &mesh, config.audit_u_max,
                         config.audit_samples);
    report.timings_ms["audit"] = ms_since(t);
  }

  if (config.scenario != Scenario::spectrum_only &&
      config.scenario != Scenario::audit_only) {
    t = clock::now();
    EnergyContext ctx(mesh, A, C, B, spectrum, nl);

    const auto combo = [&](double t1, double t2) {
      Eigen::VectorXd x = t1 * spectrum.phi(0).coefficients;
      if (spectrum.k() >= 2) x += t2 * spectrum.phi(1).coefficients;
      DiscreteFunction u;
      u.coefficients = std::move(x);
      u.mesh_id = mesh.id();
      return u;
    };

    const auto add_solution = [&](const CriticalPoint& cp) {
      SolutionSummary s;
      s.finder = cp.finder;
      s.J_value = cp.J_value;
      s.grad_norm = cp.grad_norm;
      s.cerami_metric = cp.cerami_metric;
      s.converged = cp.converged;
      s.iterations = cp.iterations;
      s.constraint_active = cp.constraint_active;
      const MorseIndex morse = morse_index(ctx, cp.u);
      s.morse_negatives = morse.negatives;
      s.morse_near_zeros = morse.near_zeros;
      s.t_coefficient = spectrum.b_phi1.dot(cp.u.coefficients);
      s.residual_recheck = grad_J(ctx, cp.u).coefficients.norm();
      if (cp.converged && s.residual_recheck > config.tol)
        throw InvariantError("re-verified residual exceeds the tolerance for "
                             "a converged solution");
      s.u = cp.u;
      s.log = cp.iterate_log;
      if (!cp.converged) report.status = 2;
      report.solutions.push_back(std::move(s));
    };

    switch (config.scenario) {
      case Scenario::thm1: {
        const CriticalPoint cp = minimize_global(ctx, combo(0.5, 0.1),
                                                 config.tol, config.max_iters);
        add_solution(cp);
        break;
      }
      case Scenario::thm2: {
        // Start beyond the small-amplitude barrier so descent runs outward
        // into each half-space's well instead of back to zero.
        add_solution(minimize_halfspace(ctx, HalfSpaceConstraint{+1},
                                        combo(1.5, 0.1), config.tol,
                                        config.max_iters));
        add_solution(minimize_halfspace(ctx, HalfSpaceConstraint{-1},
                                        combo(-1.5, 0.1), config.tol,
                                        config.max_iters));
        if (report.audit.has_value() &&
            report.audit->bh2_a_plus.has_value()) {
          const DiscreteFunction e = combo(*report.audit->bh2_a_plus, 0.0);
          PathProfile profile;
          const CriticalPoint cp =
              mountain_pass(ctx, e, config.n_path, config.tol,
                            config.max_iters, &profile);
          report.path_profile = std::move(profile);
          add_solution(cp);
        } else {
          report.notes.push_back(
              "mountain pass skipped: the audit produced no amplitude with a "
              "positive boundary integral of F");
          report.status = 2;
        }
        break;
      }
      case Scenario::thm3_probe: {
        std::vector<double> t_grid;
        for (int i = -40; i <= 40; ++i) t_grid.push_back(0.5 * i);
        report.saddle_probe =
            probe_saddle_geometry(ctx, t_grid, 16, config.seed);
        add_solution(minimize_halfspace(ctx, HalfSpaceConstraint{+1},
                                        combo(1.5, 0.1), config.tol,
                                        config.max_iters));
        add_solution(minimize_halfspace(ctx, HalfSpaceConstraint{-1},
                                        combo(-1.5, 0.1), config.tol,
                                        config.max_iters));
        break;
      }
      case Scenario::thm4: {
        std::vector<double> delta_grid;
        for (double d : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6})
          delta_grid.push_back(d);
        report.linking_probe =
            probe_local_linking(ctx, delta_grid, 16, config.seed);
        add_solution(minimize_global(ctx, combo(0.5, 0.1), config.tol,
                                     config.max_iters));
        add_solution(minimize_global(ctx, combo(-0.5, 0.1), config.tol,
                                     config.max_iters));
        break;
      }
      default:
        break;
    }

    // Mountain-pass geometry probe alongside the multiplicity scenario.
    if (config.scenario == Scenario::thm2) {
      std::vector<double> alpha_grid = {0.1, 0.2, 0.3, 0.5, 0.8, 1.3, 2.0};
      std::vector<double> t_grid;
      for (int i = -24; i <= 24; ++i) t_grid.push_back(0.5 * i);
      report.mp_probe = probe_mountain_pass_geometry(ctx, alpha_grid, t_grid,
                                                     16, config.seed);
    }

    for (std::size_t i = 0; i < report.solutions.size(); ++i) {
      for (std::size_t j = i + 1; j < report.solutions.size(); ++j) {
        const Eigen::VectorXd diff = report.solutions[i].u.coefficients -
                                     report.solutions[j].u.coefficients;
        const double dist =
            std::sqrt(std::max(0.0, diff.dot(B.matrix() * diff)));
        report.distances[std::to_string(i + 1) + "_" + std::to_string(j + 1)] =
            dist;
      }
    }
    report.timings_ms["finders"] = ms_since(t);
  }

  report.timings_ms["total"] = ms_since(total_start);
  write_report(report, config.out_dir);
  return report;
}

RunReport load_report(const std::string& report_path) {
  namespace fs = std::filesystem;
  const std::string text = read_text_file(report_path);
  const fs::path dir = fs::path(report_path).parent_path();

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "steklov-report v1")
    throw ParseError("bad report header in " + report_path);

  std::map<std::string, std::string> kv;
  std::ostringstream config_text;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key=value in report", line_no);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key.rfind("config.", 0) == 0)
      config_text << key.substr(7) << "=" << value << "\n";
    else
      kv[key] = value;
  }

  RunReport report;
  report.config = parse_config(config_text.str());

  for (std::size_t i = 1;; ++i) {
    const auto it = kv.find("spectrum.mu." + std::to_string(i));
    if (it == kv.end()) break;
    report.eigenvalues.push_back(to_double(it->second, it->first));
  }
  if (kv.count("status")) report.status = static_cast<int>(to_int(kv["status"], "status"));
  if (kv.count("mesh.n_nodes"))
    report.n_nodes = static_cast<std::size_t>(to_int(kv["mesh.n_nodes"], "n_nodes"));
  if (kv.count("mesh.boundary_length"))
    report.boundary_length =
        to_double(kv["mesh.boundary_length"], "boundary_length");

  const auto sidecar = [&](const std::string& name) {
    return (dir / name).string();
  };
  if (kv.count("artifact.mesh")) {
    report.mesh_data = load_mesh(sidecar(kv["artifact.mesh"]));
    report.artifacts["mesh"] = kv["artifact.mesh"];
  }

  const std::size_t count =
      kv.count("solutions.count")
          ? static_cast<std::size_t>(to_int(kv["solutions.count"], "count"))
          : 0;
  for (std::size_t i = 1; i <= count; ++i) {
    SolutionSummary s;
    const std::string p = "solution." + std::to_string(i) + ".";
    const auto get = [&](const std::string& field) -> std::string {
      const auto it = kv.find(p + field);
      if (it == kv.end())
        throw ParseError("missing " + p + field + " in report");
      return it->second;
    };
    for (Finder f : {Finder::global_min, Finder::min_Aplus, Finder::min_Aminus,
                     Finder::mountain_pass})
      if (get("finder") == to_string(f)) s.finder = f;
    s.J_value = to_double(get("J"), "J");
    s.grad_norm = to_double(get("grad_norm"), "grad_norm");
    s.cerami_metric = to_double(get("cerami_metric"), "cerami_metric");
    s.converged = get("converged") == "1";
    s.iterations = static_cast<int>(to_int(get("iterations"), "iterations"));
    s.morse_negatives =
        static_cast<int>(to_int(get("morse_negatives"), "morse_negatives"));
    s.morse_near_zeros =
        static_cast<int>(to_int(get("morse_near_zeros"), "morse_near_zeros"));
    s.constraint_active = get("constraint_active") == "1";
    s.t_coefficient = to_double(get("t_coefficient"), "t_coefficient");
    s.residual_recheck =
        to_double(get("residual_recheck"), "residual_recheck");
    const auto file_it = kv.find("artifact.solution_" + std::to_string(i));
    if (file_it != kv.end()) s.u = load_function(sidecar(file_it->second));
    const auto log_it =
        kv.find("artifact.solution_" + std::to_string(i) + "_log");
    if (log_it != kv.end())
      s.log = parse_log_csv(read_text_file(sidecar(log_it->second)),
                            log_it->second);
    report.solutions.push_back(std::move(s));
  }

  const auto profile_it = kv.find("artifact.path_profile");
  if (profile_it != kv.end()) {
    std::istringstream csv(read_text_file(sidecar(profile_it->second)));
    std::string row;
    bool first = true;
    while (std::getline(csv, row)) {
      row = trim(row);
      if (row.empty()) continue;
      if (first) {
        first = false;
        continue;
      }
      const std::size_t comma = row.find(',');
      if (comma == std::string::npos)
        throw ParseError("malformed path profile row");
      report.path_profile.push_back(
          PathSample{to_double(row.substr(0, comma), "s"),
                     to_double(row.substr(comma + 1), "J")});
    }
  }

  for (const auto& [key, value] : kv)
    if (key.rfind("artifact.", 0) == 0)
      report.artifacts[key.substr(std::string("artifact.").size())] = value;

  return report;
}

std::string emit_plot_data(const RunReport& report, PlotKind kind, int index) {
  std::ostringstream out;
  switch (kind) {
    case PlotKind::spectrum: {
      if (report.eigenvalues.empty())
        throw ParameterError("report contains no spectrum data");
      out << "index,mu\n";
      for (std::size_t i = 0; i < report.eigenvalues.size(); ++i)
        out << (i + 1) << "," << detail::format_double(report.eigenvalues[i])
            << "\n";
      return out.str();
    }
    case PlotKind::convergence: {
      if (index < 0 ||
          static_cast<std::size_t>(index) >= report.solutions.size())
        throw ParameterError("no solution with index " +
                             std::to_string(index));
      const auto& log = report.solutions[static_cast<std::size_t>(index)].log;
      if (log.empty())
        throw ParameterError("solution has no iterate log to plot");
      return iterate_log_csv(log);
    }
    case PlotKind::path_profile: {
      if (report.path_profile.empty())
        throw ParameterError("report contains no mountain-pass path profile");
      out << "s,J\n";
      for (const PathSample& p : report.path_profile)
        out << detail::format_double(p.s) << "," << detail::format_double(p.J)
            << "\n";
      return out.str();
    }
    case PlotKind::solution_trace: {
      if (index < 0 ||
          static_cast<std::size_t>(index) >= report.solutions.size())
        throw ParameterError("no solution with index " +
                             std::to_string(index));
      if (!report.mesh_data.has_value())
        throw ParameterError("report carries no mesh; cannot trace the "
                             "boundary");
      const Mesh& mesh = *report.mesh_data;
      const DiscreteFunction& u =
          report.solutions[static_cast<std::size_t>(index)].u;
      if (u.dim() != static_cast<Eigen::Index>(mesh.n_nodes()))
        throw ParameterError("solution vector does not fit the report's mesh");
      out << "arc_length,value\n";
      double s = 0.0;
      for (const auto& loop : mesh.boundary_loops()) {
        for (std::size_t i = 0; i < loop.size(); ++i) {
          out << detail::format_double(s) << ","
              << detail::format_double(u.coefficients[loop[i]]) << "\n";
          const Point2 a = mesh.nodes()[loop[i]];
          const Point2 b = mesh.nodes()[loop[(i + 1) % loop.size()]];
          s += std::hypot(b.x - a.x, b.y - a.y);
        }
        // Close the loop so plots join up.
        out << detail::format_double(s) << ","
            << detail::format_double(u.coefficients[loop[0]]) << "\n";
      }
      return out.str();
    }
  }
  throw ParameterError("unknown plot kind");
}

}  // namespace steklov
