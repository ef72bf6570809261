#include <cmath>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "steklov/errors.hpp"
#include "steklov/nonlinearity.hpp"

using namespace steklov;

namespace {

const Point2 kX{1.0, 0.0};

/// Resonant linear term f(u) = u, for violation tests.
Nonlinearity linear_nl() {
  Nonlinearity nl;
  nl.F = [](Point2, double u) { return 0.5 * u * u; };
  nl.f = [](Point2, double u) { return u; };
  nl.fu = [](Point2, double) { return 1.0; };
  nl.asymptotics.f_over_u_at_inf = 1.0;
  nl.asymptotics.f_over_u_at_zero = 1.0;
  nl.label = "linear";
  return nl;
}

}  // namespace

TEST_CASE("library closed forms at reference points") {
  const Nonlinearity m1 = builtin("M1", {{"delta", 0.1}});
  CHECK(m1.F(kX, 1.0) == doctest::Approx(0.45).epsilon(1e-14));
  CHECK(m1.f(kX, 1.0) == doctest::Approx(0.55).epsilon(1e-12));

  const Nonlinearity m2 = builtin("M2", {{"beta", 1.0}});
  CHECK(m2.F(kX, 1.0) ==
        doctest::Approx(0.5 * (1.0 - std::exp(-1.0))).epsilon(1e-14));
  CHECK(m2.f(kX, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(*m2.asymptotics.F_bound == doctest::Approx(0.5).epsilon(1e-14));
  // F approaches its bound at infinity.
  CHECK(m2.F(kX, 50.0) == doctest::Approx(0.5).epsilon(1e-12));

  const Nonlinearity m3 = builtin("M3");
  CHECK(m3.F(kX, 2.5) == 0.0);
  CHECK(m3.f(kX, -4.0) == 0.0);

  for (const auto* nl : {&m1, &m2, &m3}) {
    CHECK(nl->F(kX, 0.0) == 0.0);
    CHECK(nl->f(kX, 0.0) == 0.0);
  }
}

TEST_CASE("library names and parameters are validated") {
  CHECK_THROWS_AS(builtin("M7"), ParameterError);
  CHECK_THROWS_AS(builtin("M1", {{"gamma", 1.0}}), ParameterError);
  CHECK_THROWS_AS(builtin("M1", {{"delta", -0.5}}), ParameterError);
  CHECK_THROWS_AS(builtin("M1", {{"delta", 0.0}}), ParameterError);
  CHECK_THROWS_AS(builtin("M2", {{"beta", std::nan("")}}), ParameterError);
  // The long names are aliases.
  CHECK(builtin("quartic-well").label == builtin("M1").label);
  CHECK(builtin("bounded-gaussian").label == builtin("M2").label);
  CHECK(builtin("zero").label == builtin("M3").label);
}

TEST_CASE("derivative consistency across the library") {
  for (const char* name : {"M1", "M2", "M3"}) {
    const DerivativeConsistency report =
        check_derivative_consistency(builtin(name), 20.0, 1001);
    CAPTURE(name);
    CHECK(report.worst_F_error <= 1e-6);
    CHECK(report.worst_f_error <= 1e-6);
  }
}

TEST_CASE("quartic well decays too fast for the nonquadraticity limits") {
  const Nonlinearity m1 = builtin("M1", {{"delta", 0.1}});
  for (double u : {20.0, 25.0, 40.0, 80.0}) {
    for (double s : {1.0, -1.0}) {
      const double F = m1.F(kX, s * u);
      const double uf = s * u * m1.f(kX, s * u);
      CHECK(std::abs(2.0 * F - uf) <= 0.01);
    }
  }
}

TEST_CASE("audit of the zero nonlinearity") {
  const HypothesisAudit a = audit(builtin("M3"), nullptr, nullptr, 20.0, 2001);
  CHECK(a.ssr.verdict == Verdict::satisfied);
  CHECK(a.bh1.verdict == Verdict::violated);
  CHECK(a.nqc_plus.verdict == Verdict::violated);
  CHECK(a.nqc_minus.verdict == Verdict::violated);
  CHECK(a.resonance.verdict == Verdict::satisfied);
}

TEST_CASE("audit of the quartic well with spectrum data") {
  const auto setup = testhelp::make_disk_setup(0.2, 3);
  const Nonlinearity m1 = builtin("M1", {{"delta", 0.1}});
  const HypothesisAudit a = audit(m1, &setup.spectrum, &setup.mesh, 20.0, 2001);

  CHECK(a.growth.verdict == Verdict::satisfied);
  CHECK(a.resonance.verdict == Verdict::satisfied);
  CHECK(a.ssr.verdict == Verdict::satisfied);
  CHECK(a.uf_bounded.verdict == Verdict::satisfied);
  CHECK(a.nqc_plus.verdict == Verdict::violated);
  CHECK(a.nqc_minus.verdict == Verdict::violated);

  // The slope near zero is -2 delta; the audit's witness sits in the
  // innermost scan band.
  CHECK(a.bh1.verdict == Verdict::satisfied);
  REQUIRE(a.bh1.witness_value.has_value());
  CHECK(*a.bh1.witness_value == doctest::Approx(-0.2).epsilon(0.1));

  CHECK(a.bh2.verdict == Verdict::satisfied);
  REQUIRE(a.bh2_a_plus.has_value());
  REQUIRE(a.bh2_a_minus.has_value());
  CHECK(*a.bh2_a_plus > 0.0);
  CHECK(*a.bh2_a_minus < 0.0);

  // F is negative just off zero, so the two-sided small-u conditions fail.
  CHECK(a.bh2_prime.verdict == Verdict::violated);
  CHECK(a.bh3.verdict == Verdict::violated);
  CHECK(a.ssr_hoc_joint.verdict == Verdict::inconclusive);
}

TEST_CASE("audit flags resonance violation for a genuinely linear term") {
  const HypothesisAudit a = audit(linear_nl(), nullptr, nullptr, 20.0, 501);
  CHECK(a.resonance.verdict == Verdict::violated);
  REQUIRE(a.resonance.witness_value.has_value());
  CHECK(*a.resonance.witness_value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("audit of the bounded gaussian") {
  const auto setup = testhelp::make_disk_setup(0.2, 3);
  const double gap = setup.spectrum.mu(1) - setup.spectrum.mu(0);

  const HypothesisAudit big =
      audit(builtin("M2", {{"beta", 1.0}}), &setup.spectrum, &setup.mesh,
            20.0, 2001);
  CHECK(big.ssr.verdict == Verdict::satisfied);
  CHECK(big.bh1.verdict == Verdict::violated);  // slope at zero is +beta
  // beta = 1 exceeds the spectral gap, so the near-zero pinch fails...
  REQUIRE(1.0 > gap);
  CHECK(big.bh3.verdict == Verdict::violated);

  // ...while a beta below the gap satisfies it.
  const HypothesisAudit small =
      audit(builtin("M2", {{"beta", 0.35}}), &setup.spectrum, &setup.mesh,
            20.0, 2001);
  REQUIRE(0.35 < gap);
  CHECK(small.bh3.verdict == Verdict::satisfied);
  CHECK(small.bh2_prime.verdict == Verdict::satisfied);
}

TEST_CASE("audit is deterministic") {
  const auto setup = testhelp::make_disk_setup(0.25, 3);
  const Nonlinearity m1 = builtin("M1", {{"delta", 0.1}});
  const HypothesisAudit a = audit(m1, &setup.spectrum, &setup.mesh, 20.0, 501);
  const HypothesisAudit b = audit(m1, &setup.spectrum, &setup.mesh, 20.0, 501);
  const auto ia = a.items(), ib = b.items();
  REQUIRE(ia.size() == ib.size());
  for (std::size_t i = 0; i < ia.size(); ++i) {
    CHECK(ia[i].first == ib[i].first);
    CHECK(ia[i].second->verdict == ib[i].second->verdict);
    CHECK(ia[i].second->witness_u == ib[i].second->witness_u);
    CHECK(ia[i].second->witness_value == ib[i].second->witness_value);
    CHECK(ia[i].second->note == ib[i].second->note);
  }
  CHECK(a.bh2_a_plus == b.bh2_a_plus);
  CHECK(a.bh2_a_minus == b.bh2_a_minus);
}

TEST_CASE("audit validates its inputs") {
  const Nonlinearity m1 = builtin("M1");
  CHECK_THROWS_AS(audit(m1, nullptr, nullptr, 0.0, 501), ParameterError);
  CHECK_THROWS_AS(audit(m1, nullptr, nullptr, 20.0, 100), ParameterError);

  Nonlinearity broken = m1;
  broken.f = [](Point2, double u) {
    return u > 5.0 ? std::nan("") : 0.0;
  };
  CHECK_THROWS_AS(audit(broken, nullptr, nullptr, 20.0, 501),
                  ValidationError);
}

TEST_CASE("nemytskii evaluation at boundary quadrature points") {
  const Mesh mesh = generate_disk(1.0, 0.3);
  const DiscreteFunction zero = zero_function(mesh);
  DiscreteFunction one = zero;
  one.coefficients.setOnes();

  for (const auto& row :
       nemytskii_apply(builtin("M3"), mesh, one, NonlinearityPart::f))
    CHECK(row.value == 0.0);

  for (const auto& row :
       nemytskii_apply(builtin("M1"), mesh, zero, NonlinearityPart::f))
    CHECK(row.value == 0.0);

  const auto rows = nemytskii_apply(builtin("M2", {{"beta", 1.0}}), mesh, one,
                                    NonlinearityPart::f);
  CHECK(rows.size() == 2 * mesh.n_boundary_edges());
  for (const auto& row : rows) {
    CHECK(row.u == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  }
}
