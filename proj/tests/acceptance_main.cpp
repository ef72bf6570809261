// Acceptance gate for the laboratory: each criterion prints exactly one
// PASS/FAIL line and the process exit code is the number of failures, so
// the suite stays meaningful both under ctest and when run by hand.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "steklov/critical.hpp"
#include "steklov/functional.hpp"
#include "steklov/nonlinearity.hpp"
#include "steklov/run.hpp"

using namespace steklov;

namespace {

int failures = 0;

void criterion(int number, const std::string& title,
               const std::function<void()>& body) {
  try {
    body();
    std::printf("PASS criterion %d: %s\n", number, title.c_str());
  } catch (const std::exception& e) {
    ++failures;
    std::printf("FAIL criterion %d: %s (%s)\n", number, title.c_str(),
                e.what());
  }
}

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw CheckFailure(what);
}

double seconds_since(
    const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double mu1_on_disk(double h) {
  const Mesh mesh = generate_disk(1.0, h);
  const auto c = constant_coefficient(1.0);
  const auto A = assemble_stiffness(mesh);
  const auto C = assemble_domain_mass_weighted(mesh, c, 3);
  const auto B = assemble_boundary_mass(mesh);
  return solve_steklov(A, C, B, 1).mu(0);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckFailure("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string strip_timings(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("timing.", 0) != 0) out << line << "\n";
  return out.str();
}

}  // namespace

int main() {
  const double mu1_ref = testhelp::disk_reference_mus()[0];

  criterion(1, "disk eigenvalue converges at second order", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh coarse = generate_disk(1.0, 0.05);
    const auto c = constant_coefficient(1.0);
    const auto A0 = assemble_stiffness(coarse);
    const auto C0 = assemble_domain_mass_weighted(coarse, c, 3);
    const auto B0 = assemble_boundary_mass(coarse);
    const double mu_coarse = solve_steklov(A0, C0, B0, 1).mu(0);
    require(std::abs(mu_coarse - mu1_ref) <= 0.02 * mu1_ref,
            "coarse mu_1 off by more than 2%");

    const Mesh fine = refine(coarse);
    const auto A1 = assemble_stiffness(fine);
    const auto C1 = assemble_domain_mass_weighted(fine, c, 3);
    const auto B1 = assemble_boundary_mass(fine);
    const double mu_fine = solve_steklov(A1, C1, B1, 1).mu(0);

    const double err0 = std::abs(mu_coarse - mu1_ref);
    const double err1 = std::abs(mu_fine - mu1_ref);
    require(err1 > 0.0, "refined error vanished; ratio undefined");
    const double ratio = err0 / err1;
    require(ratio >= 3.0 && ratio <= 5.0,
            "error ratio " + std::to_string(ratio) +
                " outside [3, 5] for an O(h^2) method");
    require(seconds_since(t0) < 60.0, "took 60 s or longer");
  });

  criterion(2, "first eigenvalue bounds the trace norm with sharpness "
               "only along phi_1", [&] {
    const auto setup = testhelp::make_disk_setup(0.1, 2);
    const double mu1 = setup.spectrum.mu(0);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> amp(-5.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
      DiscreteFunction u = zero_function(setup.mesh);
      if (trial % 2 == 0) {
        // Pure multiples of phi_1, where the bound is an equality.
        u.coefficients = amp(rng) * setup.spectrum.phi(0).coefficients;
      } else {
        u = testhelp::random_function(setup.mesh, rng, 2.0);
      }
      const double cn = c_norm(u, setup.A, setup.C);
      const double bn = boundary_norm(u, setup.B);
      if (cn == 0.0) continue;
      require(mu1 * bn * bn <= cn * cn * (1.0 + 1e-10),
              "trace inequality violated");
      const EigenDecomposition d = decompose(u, setup.spectrum);
      const double w_fraction =
          c_norm(d.w, setup.A, setup.C) / cn;
      const bool tight = cn * cn - mu1 * bn * bn <= 1e-8 * cn * cn;
      const bool aligned = w_fraction < 1e-3;
      require(tight == aligned,
              "equality cases do not coincide with the phi_1 line");
    }
  });

  criterion(3, "library nonlinearities match finite differences", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto setup = testhelp::make_disk_setup(0.25, 2);
    std::mt19937_64 rng(2024);
    const double eps = 1e-5;
    for (const char* name : {"M1", "M2", "M3"}) {
      const EnergyContext ctx(setup.mesh, setup.A, setup.C, setup.B,
                              setup.spectrum, builtin(name));
      for (int trial = 0; trial < 100; ++trial) {
        const DiscreteFunction u = testhelp::random_function(setup.mesh, rng);
        const DiscreteFunction v = testhelp::random_function(setup.mesh, rng);
        DiscreteFunction up = u, dn = u;
        up.coefficients += eps * v.coefficients;
        dn.coefficients -= eps * v.coefficients;

        const double fd_J = (eval_J(ctx, up) - eval_J(ctx, dn)) / (2.0 * eps);
        const double dJ = grad_J(ctx, u).coefficients.dot(v.coefficients);
        require(std::abs(fd_J - dJ) <=
                    1e-6 * std::max(std::abs(dJ), 1e-3),
                std::string(name) + ": gradient mismatch");

        const Eigen::VectorXd fd_g = (grad_J(ctx, up).coefficients -
                                      grad_J(ctx, dn).coefficients) /
                                     (2.0 * eps);
        const Eigen::VectorXd Hv = hess_apply(ctx, u, v).coefficients;
        require((fd_g - Hv).norm() <= 1e-5 * std::max(Hv.norm(), 1e-3),
                std::string(name) + ": hessian mismatch");
      }
    }
    require(seconds_since(t0) < 30.0, "took 30 s or longer");
  });

  criterion(4, "condensed eigensolver agrees with a dense reference", [&] {
    const auto check_mesh = [&](const Mesh& mesh, const char* label) {
      require(mesh.n_nodes() <= 500, std::string(label) + " mesh too large");
      const auto c = constant_coefficient(1.0);
      const auto A = assemble_stiffness(mesh);
      const auto C = assemble_domain_mass_weighted(mesh, c, 3);
      const auto B = assemble_boundary_mass(mesh);
      const SteklovSpectrum spectrum = solve_steklov(A, C, B, 5);
      const std::vector<double> dense =
          testhelp::dense_pencil_mus(A, C, B, 5);
      for (int i = 0; i < 5; ++i)
        require(std::abs(spectrum.mu(i) - dense[i]) <=
                    1e-9 * std::abs(dense[i]),
                std::string(label) + ": eigenvalue " + std::to_string(i + 1) +
                    " deviates from the dense reference");
    };
    check_mesh(generate_disk(1.0, 0.2), "disk");
    check_mesh(generate_square(1.0, 0.2), "square");
  });

  criterion(5, "the bounded-potential minimizer run converges", [&] {
    testhelp::TempDir tmp("accept-thm1");
    RunConfig config;
    config.h = 0.1;
    config.nonlinearity_name = "M2";
    config.nonlinearity_params = {{"beta", 1.0}};
    config.scenario = Scenario::thm1;
    config.out_dir = tmp.str();
    const RunReport report = run(config);
    require(report.status == 0, "status nonzero");
    require(report.solutions.size() == 1, "expected exactly one solution");
    const SolutionSummary& s = report.solutions[0];
    require(s.converged, "finder did not converge");
    require(s.cerami_metric < 1e-6, "final Cerami metric too large");
    require(s.J_value < 0.0, "minimizer energy not negative");
    require(s.residual_recheck <= config.tol,
            "re-verified residual exceeds the tolerance");
  });

  criterion(6, "the multiplicity run yields three separated critical points",
            [&] {
    const auto t0 = std::chrono::steady_clock::now();
    testhelp::TempDir tmp("accept-thm2");
    RunConfig config;
    config.h = 0.1;
    config.nonlinearity_name = "M1";
    config.nonlinearity_params = {{"delta", 0.1}};
    config.scenario = Scenario::thm2;
    config.out_dir = tmp.str();
    const RunReport report = run(config);
    require(report.status == 0, "status nonzero");
    require(report.solutions.size() == 3, "expected three solutions");
    for (const SolutionSummary& s : report.solutions)
      require(s.converged, "a finder did not converge");
    require(report.solutions[0].J_value < 0.0, "first minimizer J not < 0");
    require(report.solutions[1].J_value < 0.0, "second minimizer J not < 0");
    require(report.solutions[2].J_value > 0.0, "mountain pass J not > 0");
    for (const char* key : {"1_2", "1_3", "2_3"})
      require(report.distances.at(key) > 0.1,
              std::string("solutions ") + key + " not separated");
    require(report.solutions[0].morse_negatives == 0,
            "first minimizer has negative directions");
    require(report.solutions[1].morse_negatives == 0,
            "second minimizer has negative directions");
    require(report.solutions[2].morse_negatives >= 1,
            "mountain pass point has no negative direction");
    require(seconds_since(t0) < 600.0, "took 10 min or longer");
  });

  criterion(7, "geometry probes separate the three landscapes", [&] {
    const auto setup = testhelp::make_disk_setup(0.1, 3);
    std::vector<double> t_grid;
    for (int i = -24; i <= 24; ++i) t_grid.push_back(0.5 * i);
    const std::vector<double> alpha_grid = {0.1, 0.2, 0.3, 0.5, 0.8,
                                            1.3, 2.0};

    const EnergyContext quartic(setup.mesh, setup.A, setup.C, setup.B,
                                setup.spectrum,
                                builtin("M1", {{"delta", 0.1}}));
    const MountainPassGeometryReport mp =
        probe_mountain_pass_geometry(quartic, alpha_grid, t_grid);
    require(mp.certificate_found, "no mountain-pass certificate for the "
                                  "quartic well");
    require(mp.rho_star > 0.0, "certificate barrier not positive");

    const EnergyContext flat(setup.mesh, setup.A, setup.C, setup.B,
                             setup.spectrum, builtin("M3"));
    require(!probe_mountain_pass_geometry(flat, alpha_grid, t_grid)
                 .certificate_found,
            "spurious certificate for the zero potential");

    std::vector<double> wide_grid;
    for (int i = -40; i <= 40; ++i) wide_grid.push_back(0.5 * i);
    const EnergyContext gauss(setup.mesh, setup.A, setup.C, setup.B,
                              setup.spectrum,
                              builtin("M2", {{"beta", 1.0}}));
    const SaddleGeometryReport saddle =
        probe_saddle_geometry(gauss, wide_grid, 16);
    require(saddle.ssr_bound.has_value(), "no declared potential bound");
    require(saddle.max_ray_J <= *saddle.ssr_bound + 1e-8,
            "ray energy exceeds the declared bound");
  });

  criterion(8, "the bounded potential keeps the energy above its floor", [&] {
    const auto setup = testhelp::make_disk_setup(0.1, 2);
    const EnergyContext ctx(setup.mesh, setup.A, setup.C, setup.B,
                            setup.spectrum, builtin("M2", {{"beta", 1.0}}));
    const double floor_bound =
        -0.5 * setup.mesh.boundary_length() - 1e-8;
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
      const double scale = trial % 4 == 0 ? 25.0 : 2.0;
      const DiscreteFunction u =
          testhelp::random_function(setup.mesh, rng, scale);
      require(eval_J(ctx, u) >= floor_bound, "energy dipped below the floor");
    }
    for (int i = -60; i <= 60; ++i) {
      DiscreteFunction u = setup.spectrum.phi(0);
      u.coefficients *= 0.5 * i;
      require(eval_J(ctx, u) >= floor_bound,
              "ray energy dipped below the floor");
    }
  });

  criterion(9, "a repeated run reproduces its outputs bit for bit", [&] {
    testhelp::TempDir tmp("accept-repro");
    RunConfig config;
    config.h = 0.1;
    config.nonlinearity_name = "M1";
    config.nonlinearity_params = {{"delta", 0.1}};
    config.scenario = Scenario::thm2;
    config.out_dir = tmp.str();

    const RunReport first = run(config);
    const std::string report_1 =
        strip_timings(read_file(tmp.file("report.txt")));
    std::map<std::string, std::string> sidecars;
    for (const auto& [key, name] : first.artifacts)
      sidecars[name] = read_file(tmp.file(name));

    const RunReport second = run(config);
    require(strip_timings(read_file(tmp.file("report.txt"))) == report_1,
            "report.txt differs between identical runs");
    for (const auto& [key, name] : second.artifacts)
      require(read_file(tmp.file(name)) == sidecars.at(name),
              name + " differs between identical runs");
  });

  if (failures == 0)
    std::printf("acceptance: all 9 criteria passed\n");
  else
    std::printf("acceptance: %d criterion(s) failed\n", failures);
  return failures;
}
