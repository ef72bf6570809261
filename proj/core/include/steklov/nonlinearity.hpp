#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steklov/spectrum.hpp"

namespace steklov {

/// Declared limiting behavior of a boundary nonlinearity.  A missing field
/// means "unknown": audits never infer a limit from finite samples alone, so
/// conditions depending on the missing limit come back inconclusive.
struct Asymptotics {
  std::optional<double> f_over_u_at_inf;   // lim f(x,u)/u as |u| -> infinity
  std::optional<double> f_over_u_at_zero;  // limsup f(x,u)/u as u -> 0
  std::optional<double> F_bound;           // uniform bound on |F(x,u)|
  std::optional<double> uf_at_inf;         // lim u f(x,u) as |u| -> infinity
};

/// Boundary nonlinearity in potential-first form: F is the primitive with
/// F(x,0) = 0, f = dF/du, fu = df/du.  Evaluators must be pure.
struct Nonlinearity {
  std::function<double(Point2, double)> F;
  std::function<double(Point2, double)> f;
  std::function<double(Point2, double)> fu;
  Asymptotics asymptotics;
  std::string label;
};

enum class Verdict { satisfied, violated, inconclusive };
const char* to_string(Verdict v);

/// Outcome for a single hypothesis.  A violated verdict carries a numeric
/// witness; satisfied/inconclusive verdicts record the scan parameters or the
/// declared data they rest on in `note`.
struct ConditionReport {
  Verdict verdict = Verdict::inconclusive;
  std::optional<double> witness_u;
  std::optional<double> witness_value;
  std::string note;
};

struct HypothesisAudit {
  ConditionReport growth;      // |f(x,u)| <= C (1 + |u|^{p-1})
  ConditionReport resonance;   // f(x,u)/u -> 0 as |u| -> infinity
  ConditionReport ssr;         // f -> 0 at infinity and |F| <= F_tilde
  ConditionReport uf_bounded;  // limsup |u f(x,u)| finite
  ConditionReport nqc_plus;    // 2F - uf -> +infinity
  ConditionReport nqc_minus;   // 2F - uf -> -infinity
  ConditionReport hoc_minus;   // lim uf <= a(x) <= 0, a < 0 somewhere
  ConditionReport hoc_plus;    // lim uf >= b(x) >= 0, b > 0 somewhere
  ConditionReport bh1;         // limsup_{u->0} f/u < 0
  ConditionReport bh2;         // boundary integral of F(x, a phi_1) > 0
  ConditionReport bh2_prime;   // F <= (mu_2 - mu_1)/2 u^2
  ConditionReport bh3;         // 0 <= F <= (mu_2 - mu_1 - eps)/2 u^2 near 0
  /// The bounded-primitive + one-sided-limit pairs are mutually restrictive
  /// as stated; this flag records that their conjunction is never claimed.
  ConditionReport ssr_hoc_joint;

  double u_max = 0.0;
  int n_samples = 0;
  double growth_exponent = 2.0;
  std::string sample_set;  // description of the boundary points scanned

  std::optional<double> bh2_a_plus;   // best positive witness amplitude
  std::optional<double> bh2_a_minus;  // best negative witness amplitude

  /// Stable (name, report) view for serialization.
  std::vector<std::pair<std::string, const ConditionReport*>> items() const;
};

/// Scan-based hypothesis audit.  Conditions involving limits at infinity are
/// satisfied only when declared asymptotics and the finite scan agree; the
/// scan alone can only produce violations or inconclusive verdicts.  The
/// conditions referencing the spectrum (bh2, bh2_prime, bh3) stay
/// inconclusive unless `spectrum` (and for bh2 also `mesh`) is supplied.
HypothesisAudit audit(const Nonlinearity& nl, const SteklovSpectrum* spectrum,
                      const Mesh* mesh, double u_max, int n_samples);

/// Library of model nonlinearities; see implementation for the catalogue.
/// Unknown names or parameters throw ParameterError.
Nonlinearity builtin(const std::string& name,
                     const std::map<std::string, double>& params = {});

enum class NonlinearityPart { F, f, fu };

struct BoundarySampleRow {
  std::int32_t edge;
  Point2 x;
  double u;
  double value;
};

/// Evaluate F, f, or fu superposed with the trace of u at every boundary
/// quadrature point.
std::vector<BoundarySampleRow> nemytskii_apply(const Nonlinearity& nl,
                                               const Mesh& mesh,
                                               const DiscreteFunction& u,
                                               NonlinearityPart which);

/// Worst relative central-difference mismatch of F'=f and f'=fu over a
/// symmetric u-grid, reported with the sample where it occurs.
struct DerivativeConsistency {
  double worst_F_error = 0.0;
  double worst_F_at = 0.0;
  double worst_f_error = 0.0;
  double worst_f_at = 0.0;
};

DerivativeConsistency check_derivative_consistency(const Nonlinearity& nl,
                                                   double u_max,
                                                   int n_samples,
                                                   Point2 x = Point2{1.0, 0.0});

}  // namespace steklov
