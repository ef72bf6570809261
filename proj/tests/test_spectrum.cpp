#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "steklov/errors.hpp"
#include "steklov/spectrum.hpp"

using namespace steklov;

TEST_CASE("frozen disk reference values match the series oracle") {
  const auto& frozen = testhelp::disk_reference_mus();
  const int modes[] = {0, 1, 1, 2, 2, 3, 3, 4};
  for (std::size_t i = 0; i < frozen.size(); ++i)
    CHECK(frozen[i] ==
          doctest::Approx(testhelp::disk_mu_mode(modes[i])).epsilon(1e-14));
}

TEST_CASE("disk spectrum approaches the series reference") {
  const auto setup = testhelp::make_disk_setup(0.1, 6);
  const auto& mus = setup.spectrum.eigenvalues;
  REQUIRE(mus.size() == 6);
  const auto& ref = testhelp::disk_reference_mus();
  // Piecewise-linear elements at h = 0.1 resolve even the sixth mode to a
  // couple of percent; the convergence *rate* is pinned elsewhere.
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(std::abs(mus[i] - ref[i]) / ref[i] < 0.02);
  // The n = +-1 pair is a double eigenvalue by rotational symmetry.
  CHECK(std::abs(mus[1] - mus[2]) / mus[1] < 1e-6);
  CHECK(std::abs(mus[3] - mus[4]) / mus[3] < 1e-6);
}

TEST_CASE("schur solve equals the dense pencil oracle") {
  for (const Mesh& mesh :
       {generate_disk(1.0, 0.2), generate_square(1.0, 0.2)}) {
    REQUIRE(mesh.n_nodes() <= 500);
    const auto A = assemble_stiffness(mesh);
    const auto C = assemble_domain_mass_weighted(
        mesh, constant_coefficient(1.0), 3);
    const auto B = assemble_boundary_mass(mesh);
    const auto spectrum = solve_steklov(A, C, B, 5);
    const auto oracle = testhelp::dense_pencil_mus(A, C, B, 5);
    REQUIRE(oracle.size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
      CHECK(std::abs(spectrum.eigenvalues[i] - oracle[i]) / oracle[i] <=
            1e-9);
  }
}

TEST_CASE("eigenpairs satisfy the pencil residual and orthogonality") {
  const auto setup = testhelp::make_disk_setup(0.2, 5);
  const Eigen::SparseMatrix<double> K =
      setup.A.matrix() + setup.C.matrix();
  for (std::size_t i = 0; i < 5; ++i) {
    const Eigen::VectorXd& phi = setup.spectrum.phi(i).coefficients;
    const Eigen::VectorXd res =
        K * phi - setup.spectrum.mu(i) * setup.B.apply(phi);
    CHECK(res.norm() <= 1e-8 * (K * phi).norm());
    for (std::size_t j = 0; j < 5; ++j) {
      const double bij = setup.B.bilinear(phi, setup.spectrum.phi(j).coefficients);
      CHECK(std::abs(bij - (i == j ? 1.0 : 0.0)) <= 1e-8);
      const double kij = phi.dot(K * setup.spectrum.phi(j).coefficients);
      const double expected = i == j ? setup.spectrum.mu(i) : 0.0;
      CHECK(std::abs(kij - expected) <= 1e-6);
    }
  }
  // Eigenvalues ascend and are strictly positive.
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(setup.spectrum.mu(i) > 0.0);
    if (i) CHECK(setup.spectrum.mu(i) >= setup.spectrum.mu(i - 1));
  }
}

TEST_CASE("first eigenfunction has one sign on the boundary") {
  const auto setup = testhelp::make_disk_setup(0.2, 3);
  const Eigen::VectorXd& phi1 = setup.spectrum.phi(0).coefficients;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::int32_t i : setup.mesh.boundary_nodes()) {
    lo = std::min(lo, phi1[i]);
    hi = std::max(hi, phi1[i]);
  }
  CHECK(hi > 0.0);
  CHECK(lo > 0.0);  // strictly positive after sign normalization
}

TEST_CASE("decompose splits along the first eigenfunction") {
  const auto setup = testhelp::make_disk_setup(0.2, 4);
  const auto& spectrum = setup.spectrum;

  DiscreteFunction u = spectrum.phi(0);
  u.coefficients *= 3.0;
  const EigenDecomposition d1 = decompose(u, spectrum);
  CHECK(d1.t == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(d1.w.coefficients.norm() <= 1e-10 * u.coefficients.norm());

  const EigenDecomposition d2 = decompose(spectrum.phi(1), spectrum);
  CHECK(std::abs(d2.t) <= 1e-8);
  CHECK((d2.w.coefficients - spectrum.phi(1).coefficients).norm() <= 1e-8);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const DiscreteFunction r = testhelp::random_function(setup.mesh, rng);
    const EigenDecomposition d = decompose(r, spectrum);
    const Eigen::VectorXd rebuilt =
        d.t * spectrum.phi(0).coefficients + d.w.coefficients;
    CHECK((rebuilt - r.coefficients).norm() <=
          1e-12 * std::max(1.0, r.coefficients.norm()));
    CHECK(std::abs(spectrum.b_phi1.dot(d.w.coefficients)) <= 1e-10);
  }
}

TEST_CASE("rayleigh quotient is bounded below by mu1") {
  const auto setup = testhelp::make_disk_setup(0.2, 3);
  CHECK(rayleigh_quotient(setup.spectrum.phi(0), setup.A, setup.C, setup.B) ==
        doctest::Approx(setup.spectrum.mu(0)).epsilon(1e-8));
  CHECK(rayleigh_quotient(setup.spectrum.phi(1), setup.A, setup.C, setup.B) ==
        doctest::Approx(setup.spectrum.mu(1)).epsilon(1e-8));

  // Zero boundary trace hits the infinity sentinel.
  Eigen::VectorXd interior = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(setup.mesh.n_nodes()));
  std::set<std::int32_t> boundary(setup.mesh.boundary_nodes().begin(),
                                  setup.mesh.boundary_nodes().end());
  for (std::size_t i = 0; i < setup.mesh.n_nodes(); ++i)
    if (!boundary.count(static_cast<std::int32_t>(i))) interior[i] = 1.0;
  CHECK(std::isinf(rayleigh_quotient(
      make_function(setup.mesh, interior), setup.A, setup.C, setup.B)));

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const DiscreteFunction u = testhelp::random_function(setup.mesh, rng);
    const double q = rayleigh_quotient(u, setup.A, setup.C, setup.B);
    CHECK(q >= setup.spectrum.mu(0) - 1e-10);
  }
}

TEST_CASE("near-minimal rayleigh quotients come only from phi1 multiples") {
  const auto setup = testhelp::make_disk_setup(0.25, 2);
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    DiscreteFunction u = setup.spectrum.phi(0);
    // Perturbations around the minimizer: small ones must keep the quotient
    // near mu1, and any near-minimal quotient must be a near-multiple.
    DiscreteFunction noise = testhelp::random_function(setup.mesh, rng);
    const double eps = trial % 2 == 0 ? 1e-6 : 0.3;
    u.coefficients += eps * noise.coefficients;
    const double q = rayleigh_quotient(u, setup.A, setup.C, setup.B);
    if (q <= setup.spectrum.mu(0) + 1e-8) {
      const EigenDecomposition d = decompose(u, setup.spectrum);
      const double frac =
          d.w.coefficients.norm() / u.coefficients.norm();
      CHECK(frac <= 1e-3);
    }
  }
}

TEST_CASE("eigenspace inequalities verify on random mixtures") {
  const auto setup = testhelp::make_disk_setup(0.2, 4);
  const EigenspaceReport report = verify_eigenspace_inequalities(
      setup.spectrum, setup.A, setup.C, setup.B, 500);
  CHECK(report.trials == 500);
  CHECK(report.passed());
  CHECK(report.j == 1);

  // Equality cases sit inside the slack.
  const double v_gap = setup.spectrum.mu(0) * setup.B.quad(
                           setup.spectrum.phi(0).coefficients) -
                       (setup.A.quad(setup.spectrum.phi(0).coefficients) +
                        setup.C.quad(setup.spectrum.phi(0).coefficients));
  CHECK(std::abs(v_gap) <= 1e-8);
}

TEST_CASE("spectrum save/load round trip and reattachment") {
  testhelp::TempDir dir("steklov-spec");
  const auto setup = testhelp::make_disk_setup(0.25, 3);
  const std::string path = dir.file("spec.txt");
  save_spectrum(setup.spectrum, path);
  SteklovSpectrum back = load_spectrum(path);
  REQUIRE(back.k() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.mu(i) == setup.spectrum.mu(i));
    CHECK((back.phi(i).coefficients - setup.spectrum.phi(i).coefficients)
              .norm() == 0.0);
  }
  // The cached boundary product is not stored; reattach to decompose.
  CHECK(back.b_phi1.size() == 0);
  CHECK_THROWS_AS(decompose(setup.spectrum.phi(0), back), DimensionError);
  attach_boundary_mass(back, setup.B);
  const EigenDecomposition d = decompose(setup.spectrum.phi(0), back);
  CHECK(d.t == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("solver rejects impossible requests") {
  const auto mesh = generate_square(1.0, 0.5);
  const auto A = assemble_stiffness(mesh);
  const auto C = assemble_domain_mass_weighted(mesh, constant_coefficient(1.0), 3);
  const auto B = assemble_boundary_mass(mesh);
  CHECK_THROWS_AS(solve_steklov(A, C, B, 0), ParameterError);
  CHECK_THROWS_AS(solve_steklov(A, C, B, mesh.n_nodes() + 1), ParameterError);

  const auto other = generate_square(1.0, 0.25);
  const auto B2 = assemble_boundary_mass(other);
  CHECK_THROWS_AS(solve_steklov(A, C, B2, 2), DimensionError);
}
