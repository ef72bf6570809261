#pragma once

// Critical-point finders and geometry probes for the boundary energy:
// gradient descent (free and half-space constrained), a path-deformation
// mountain-pass search, Morse-index counting, and sampling probes for the
// mountain-pass, saddle, and local-linking premises.

#include <optional>
#include <vector>

#include "steklov/functional.hpp"

namespace steklov {

enum class Finder { global_min, min_Aplus, min_Aminus, mountain_pass };
const char* to_string(Finder f);

/// One line of the optimizer log; serialized as CSV with columns
/// step, J, grad_norm, u_norm, cerami_metric, t_coefficient, w_norm.
struct IterateRow {
  int step = 0;
  CeramiRecord record;
  double t_coefficient = 0.0;  ///< phi_1 component of the iterate.
  double w_norm = 0.0;         ///< c-norm of the phi_1 complement.
};

struct CriticalPoint {
  DiscreteFunction u;
  double J_value = 0.0;
  double grad_norm = 0.0;
  double cerami_metric = 0.0;
  /// Hessian eigenvalue counts; -1 until morse_index() fills them in.
  int morse_negatives = -1;
  int morse_near_zeros = -1;
  Finder finder = Finder::global_min;
  bool converged = false;
  int iterations = 0;
  /// Whether the half-space clamp was binding at the final iterate.
  bool constraint_active = false;
  std::vector<IterateRow> iterate_log;
};

/// Feasible set {t phi_1 + w : sign * t >= 0}.
struct HalfSpaceConstraint {
  int sign = +1;  ///< +1 or -1.
};

struct MorseIndex {
  int negatives = 0;
  int near_zeros = 0;
};

struct PathSample {
  double s = 0.0;  ///< Path parameter in [0, 1].
  double J = 0.0;
};
using PathProfile = std::vector<PathSample>;

/// Gradient descent with Armijo backtracking until the Cerami metric drops
/// below tol.  Hitting max_iters returns a result flagged non-converged
/// rather than throwing.  J is nonincreasing along the log.
CriticalPoint minimize_global(const EnergyContext& ctx,
                              const DiscreteFunction& u0, double tol,
                              int max_iters);

/// Projected gradient descent over a half-space constraint on the phi_1
/// coefficient.  An infeasible start is projected first; every iterate is
/// feasible.  Convergence is measured on the projected gradient, so a
/// boundary minimizer with inward-pointing gradient still counts.
CriticalPoint minimize_halfspace(const EnergyContext& ctx,
                                 const HalfSpaceConstraint& constraint,
                                 const DiscreteFunction& u0, double tol,
                                 int max_iters);

/// Path-deformation mountain pass between 0 and e: the segment is sampled
/// at n_path + 1 points with pinned endpoints, and the running maximizer is
/// relaxed downhill while the path is rebalanced to equal arc length.
/// Requires J(e) < 0.  If the path maximum sits at an endpoint or no
/// positive barrier remains, a GeometryError is thrown.  The final path's
/// (parameter, J) profile is written to *profile when given.
CriticalPoint mountain_pass(const EnergyContext& ctx, const DiscreteFunction& e,
                            int n_path, double tol, int max_iters,
                            PathProfile* profile = nullptr);

/// Counts Hessian eigenvalues below -theta and within [-theta, theta] among
/// the n_eigs smallest, with theta = 1e-8 times the diagonal scale.
/// n_eigs < 0 counts over the whole spectrum.
MorseIndex morse_index(const EnergyContext& ctx, const DiscreteFunction& u,
                       int n_eigs = -1);

struct SphereSample {
  double alpha = 0.0;  ///< Boundary norm of the sampled sphere.
  double inf_J = 0.0;  ///< Smallest J over the samples on that sphere.
};

struct RaySample {
  double t = 0.0;
  double J = 0.0;  ///< J(t phi_1).
};

struct MountainPassGeometryReport {
  std::vector<SphereSample> spheres;
  std::vector<RaySample> ray;
  /// True when some sphere has inf_J = rho > 0 and the phi_1 ray reaches
  /// J < 0 strictly beyond it.
  bool certificate_found = false;
  double alpha_star = 0.0;
  double rho_star = 0.0;
  double e_t = 0.0;  ///< Ray coordinate of the negative-energy point.
};

/// Samples J on spheres ||u||_boundary = alpha (mixtures of phi_1 and random
/// directions, so the degenerate ray is always represented) and along the
/// phi_1 ray.
MountainPassGeometryReport probe_mountain_pass_geometry(
    const EnergyContext& ctx, const std::vector<double>& alpha_grid,
    const std::vector<double>& t_grid, int n_directions = 16,
    std::uint64_t seed = 2024);

struct SaddleGeometryReport {
  std::vector<RaySample> ray;
  double max_ray_J = 0.0;
  /// F bound times boundary length, when the nonlinearity declares a bound.
  std::optional<double> ssr_bound;
  struct ComplementLevel {
    double w_norm = 0.0;  ///< c-norm of the sampled complement functions.
    double min_J = 0.0;
    double max_J = 0.0;
  };
  std::vector<ComplementLevel> complement;
  /// Whether min_J increases along the norm ladder.
  bool coercive_trend = false;
};

/// Checks boundedness of J on the phi_1 line against growth on random
/// samples of the complement at increasing c-norms.
SaddleGeometryReport probe_saddle_geometry(const EnergyContext& ctx,
                                           const std::vector<double>& t_grid,
                                           int w_samples,
                                           std::uint64_t seed = 2024);

struct LocalLinkingReport {
  struct DeltaRow {
    double delta = 0.0;
    int span_violations = 0;        ///< J > 0 on the phi_1 side.
    int complement_violations = 0;  ///< J < 0 on the complement side.
    double worst_span_J = 0.0;
    double worst_complement_J = 0.0;
  };
  std::vector<DeltaRow> rows;
  double largest_clean_delta = 0.0;  ///< 0 when every delta has violations.
};

/// For each delta, samples the phi_1 line and its complement at c-norms up
/// to delta and counts sign violations of the linking inequalities.
LocalLinkingReport probe_local_linking(const EnergyContext& ctx,
                                       const std::vector<double>& delta_grid,
                                       int n_samples = 16,
                                       std::uint64_t seed = 2024);

}  // namespace steklov
