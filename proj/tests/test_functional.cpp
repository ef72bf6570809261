#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "steklov/errors.hpp"
#include "steklov/functional.hpp"

using namespace steklov;

namespace {

EnergyContext make_context(const testhelp::DiskSetup& s, Nonlinearity nl) {
  return EnergyContext(s.mesh, s.A, s.C, s.B, s.spectrum, std::move(nl));
}

DiscreteFunction scaled_phi(const testhelp::DiskSetup& s, double t) {
  DiscreteFunction u = s.spectrum.phi(0);
  u.coefficients *= t;
  return u;
}

}  // namespace

TEST_CASE("energy vanishes at zero and along the free ray") {
  const auto setup = testhelp::make_disk_setup(0.2, 3);
  for (const char* name : {"M1", "M2", "M3"}) {
    const EnergyContext ctx = make_context(setup, builtin(name));
    CHECK(eval_J(ctx, zero_function(setup.mesh)) == 0.0);
  }

  // With f == 0 the quadratic part cancels exactly on the phi_1 ray.
  const EnergyContext ctx = make_context(setup, builtin("M3"));
  for (double t : {-3.0, 0.5, 7.0})
    CHECK(std::abs(eval_J(ctx, scaled_phi(setup, t))) <=
          1e-8 * (1.0 + t * t));
  const Eigen::VectorXd g =
      grad_J(ctx, setup.spectrum.phi(0)).coefficients;
  const Eigen::VectorXd k_phi =
      ctx.K() * setup.spectrum.phi(0).coefficients;
  CHECK(g.norm() <= 1e-8 * k_phi.norm());
}

TEST_CASE("the gaussian potential pushes ray energies negative") {
  const auto setup = testhelp::make_disk_setup(0.2, 3);
  const EnergyContext ctx = make_context(setup, builtin("M2", {{"beta", 1.0}}));
  for (double t : {-2.0, 0.3, 1.0, 5.0})
    CHECK(eval_J(ctx, scaled_phi(setup, t)) < 0.0);
}

TEST_CASE("gradient matches finite differences of the energy") {
  const auto setup = testhelp::make_disk_setup(0.2, 3);
  std::mt19937_64 rng(41);
  const double eps = 1e-5;
  for (const char* name : {"M1", "M2", "M3"}) {
    const EnergyContext ctx = make_context(setup, builtin(name));
    for (int trial = 0; trial < 20; ++trial) {
      const DiscreteFunction u = testhelp::random_function(setup.mesh, rng);
      const DiscreteFunction v = testhelp::random_function(setup.mesh, rng);
      DiscreteFunction up = u, dn = u;
      up.coefficients += eps * v.coefficients;
      dn.coefficients -= eps * v.coefficients;
      const double fd =
          (eval_J(ctx, up) - eval_J(ctx, dn)) / (2.0 * eps);
      const double exact =
          grad_J(ctx, u).coefficients.dot(v.coefficients);
      CAPTURE(name);
      CHECK(std::abs(fd - exact) <=
            1e-6 * std::max(std::abs(exact), 1e-3));
    }
  }
}

TEST_CASE("hessian action matches finite differences of the gradient") {
  const auto setup = testhelp::make_disk_setup(0.2, 3);
  std::mt19937_64 rng(43);
  const double eps = 1e-5;
  for (const char* name : {"M1", "M2"}) {
    const EnergyContext ctx = make_context(setup, builtin(name));
    for (int trial = 0; trial < 10; ++trial) {
      const DiscreteFunction u = testhelp::random_function(setup.mesh, rng);
      const DiscreteFunction v = testhelp::random_function(setup.mesh, rng);
      DiscreteFunction up = u, dn = u;
      up.coefficients += eps * v.coefficients;
      dn.coefficients -= eps * v.coefficients;
      const Eigen::VectorXd fd = (grad_J(ctx, up).coefficients -
                                  grad_J(ctx, dn).coefficients) /
                                 (2.0 * eps);
      const Eigen::VectorXd exact = hess_apply(ctx, u, v).coefficients;
      CAPTURE(name);
      CHECK((fd - exact).norm() <=
            1e-5 * std::max(exact.norm(), 1e-3));
    }
  }
}

TEST_CASE("hessian is symmetric and matches its dense form") {
  const auto setup = testhelp::make_disk_setup(0.25, 3);
  const EnergyContext ctx = make_context(setup, builtin("M1"));
  std::mt19937_64 rng(47);
  const DiscreteFunction u = testhelp::random_function(setup.mesh, rng);
  const Eigen::MatrixXd H = hess_matrix(ctx, u);
  CHECK((H - H.transpose()).lpNorm<Eigen::Infinity>() <=
        1e-12 * H.lpNorm<Eigen::Infinity>());
  for (int trial = 0; trial < 10; ++trial) {
    const DiscreteFunction v = testhelp::random_function(setup.mesh, rng);
    const DiscreteFunction w = testhelp::random_function(setup.mesh, rng);
    const double vw = v.coefficients.dot(
        hess_apply(ctx, u, w).coefficients);
    const double wv = w.coefficients.dot(
        hess_apply(ctx, u, v).coefficients);
    CHECK(std::abs(vw - wv) <=
          1e-12 * std::max(1.0, std::abs(vw)));
    CHECK((H * v.coefficients - hess_apply(ctx, u, v).coefficients)
              .norm() <= 1e-12 * std::max(1.0, v.coefficients.norm()));
  }

  // With f == 0 the hessian does not depend on the base point.
  const EnergyContext zero_ctx = make_context(setup, builtin("M3"));
  const DiscreteFunction u2 = testhelp::random_function(setup.mesh, rng);
  const DiscreteFunction v = testhelp::random_function(setup.mesh, rng);
  CHECK((hess_apply(zero_ctx, u, v).coefficients -
         hess_apply(zero_ctx, u2, v).coefficients)
            .norm() == 0.0);
}

TEST_CASE("shifted quadratic part is nonnegative") {
  const auto setup = testhelp::make_disk_setup(0.2, 3);
  const EnergyContext ctx = make_context(setup, builtin("M3"));
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 500; ++trial) {
    const DiscreteFunction u = testhelp::random_function(setup.mesh, rng, 3.0);
    const double quad =
        0.5 * u.coefficients.dot(ctx.K_shifted() * u.coefficients);
    const double cn = std::sqrt(u.coefficients.dot(ctx.K() * u.coefficients));
    CHECK(quad >= -1e-10 * cn * cn);
    // With f == 0 the whole energy is that quadratic part.
    CHECK(eval_J(ctx, u) == doctest::Approx(quad).epsilon(1e-12));
  }
}

TEST_CASE("bounded potentials bound the energy from below") {
  const auto setup = testhelp::make_disk_setup(0.2, 3);
  const EnergyContext ctx = make_context(setup, builtin("M2", {{"beta", 1.0}}));
  const double floor_bound =
      -0.5 * setup.mesh.boundary_length() - 1e-8;
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 300; ++trial) {
    const double scale = trial % 3 == 0 ? 20.0 : 1.5;
    const DiscreteFunction u =
        testhelp::random_function(setup.mesh, rng, scale);
    CHECK(eval_J(ctx, u) >= floor_bound);
  }
  for (double t : {-40.0, -3.0, 0.1, 2.0, 55.0})
    CHECK(eval_J(ctx, scaled_phi(setup, t)) >= floor_bound);
}

TEST_CASE("cerami record composes its fields") {
  const auto setup = testhelp::make_disk_setup(0.25, 3);
  const EnergyContext ctx = make_context(setup, builtin("M1"));

  const CeramiRecord at_zero = cerami_record(ctx, zero_function(setup.mesh));
  CHECK(at_zero.J_value == 0.0);
  CHECK(at_zero.grad_norm == 0.0);
  CHECK(at_zero.u_norm == 0.0);
  CHECK(at_zero.cerami_metric == 0.0);

  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const DiscreteFunction u = testhelp::random_function(setup.mesh, rng);
    const CeramiRecord r = cerami_record(ctx, u);
    CHECK(r.cerami_metric == r.grad_norm * (1.0 + r.u_norm));
    CHECK(r.cerami_metric >= r.grad_norm);
    CHECK(r.J_value == doctest::Approx(eval_J(ctx, u)).epsilon(1e-15));
    CHECK(r.u_norm ==
          doctest::Approx(c_norm(u, setup.A, setup.C)).epsilon(1e-12));
  }
}

TEST_CASE("energy context validates its ingredients") {
  const auto setup = testhelp::make_disk_setup(0.25, 3);

  // Operators must arrive in stiffness / domain-mass / boundary-mass order.
  CHECK_THROWS_AS(EnergyContext(setup.mesh, setup.B, setup.C, setup.A,
                                setup.spectrum, builtin("M3")),
                  ParameterError);

  // Foreign mesh pieces are rejected.
  const auto other = testhelp::make_disk_setup(0.5, 2);
  CHECK_THROWS_AS(EnergyContext(setup.mesh, other.A, other.C, other.B,
                                other.spectrum, builtin("M3")),
                  DimensionError);
  CHECK_THROWS_AS(EnergyContext(setup.mesh, setup.A, setup.C, setup.B,
                                other.spectrum, builtin("M3")),
                  DimensionError);

  Nonlinearity hollow;
  hollow.label = "hollow";
  CHECK_THROWS_AS(EnergyContext(setup.mesh, setup.A, setup.C, setup.B,
                                setup.spectrum, hollow),
                  ParameterError);

  const EnergyContext ctx = make_context(setup, builtin("M3"));
  CHECK(ctx.mu1() == setup.spectrum.mu(0));
  CHECK(ctx.spectrum_id() == setup.spectrum.id);
  CHECK_THROWS_AS(eval_J(ctx, zero_function(other.mesh)), DimensionError);
}
