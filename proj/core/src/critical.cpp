#include "steklov/critical.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dense_jacobi.hpp"
#include "text_format.hpp"

namespace steklov {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kAlphaFloor = 1e-18;

DiscreteFunction wrap(const EnergyContext& ctx, Eigen::VectorXd x) {
  DiscreteFunction u;
  u.coefficients = std::move(x);
  u.mesh_id = ctx.mesh().id();
  return u;
}

double quad_norm(const Eigen::SparseMatrix<double>& M,
                 const Eigen::VectorXd& x) {
  return std::sqrt(std::max(0.0, x.dot(M * x)));
}

IterateRow make_row(const EnergyContext& ctx, int step,
                    const Eigen::VectorXd& x, double J, double grad_norm,
                    double metric) {
  IterateRow row;
  row.step = step;
  row.record.J_value = J;
  row.record.grad_norm = grad_norm;
  row.record.u_norm = quad_norm(ctx.K(), x);
  row.record.cerami_metric = metric;
  const double t = ctx.spectrum().b_phi1.dot(x);
  row.t_coefficient = t;
  const Eigen::VectorXd w = x - t * ctx.spectrum().phi(0).coefficients;
  row.w_norm = quad_norm(ctx.K(), w);
  return row;
}

/// Shared descent loop.  `project` maps a trial point back into the feasible
/// set (identity for the unconstrained case); convergence is measured on the
/// projected-gradient Cerami metric, which coincides with the plain one when
/// no clamp is active.
CriticalPoint descend(const EnergyContext& ctx, const DiscreteFunction& u0,
                      double tol, int max_iters, Finder finder,
                      const std::function<Eigen::VectorXd(Eigen::VectorXd)>&
                          project) {
  if (!(tol > 0.0)) throw ParameterError("solver tolerance must be positive");
  if (max_iters < 1) throw ParameterError("max_iters must be at least 1");
  ctx.require_compatible(u0);

  Eigen::VectorXd x = project(u0.coefficients);
  double J = eval_J(ctx, wrap(ctx, x));
  Eigen::VectorXd g = grad_J(ctx, wrap(ctx, x)).coefficients;

  const auto metric_at = [&](const Eigen::VectorXd& xc,
                             const Eigen::VectorXd& gc) {
    const Eigen::VectorXd r = xc - project(xc - gc);
    return r.norm() * (1.0 + quad_norm(ctx.K(), xc));
  };

  CriticalPoint out;
  out.finder = finder;
  double metric = metric_at(x, g);
  out.iterate_log.push_back(make_row(ctx, 0, x, J, g.norm(), metric));
  out.converged = metric <= tol;

  double alpha_prev = 1.0;
  int iter = 0;
  while (!out.converged && iter < max_iters) {
    bool accepted = false;
    Eigen::VectorXd y;
    double Jy = J;

    // Newton attempt first, accepted only on strict energy decrease so the
    // iteration stays monotone.  Plain gradient steps are size-limited by the
    // stiff transverse curvature, which makes them hopeless on landscapes
    // whose slope decays exponentially along the first-eigenfunction ray; the
    // Newton step rescales by the (equally decaying) tangential curvature and
    // homes in a handful of iterations.
    {
      Eigen::MatrixXd H = hess_matrix(ctx, wrap(ctx, x));
      // Tiny Tikhonov shift: when the landscape flattens out along a ray the
      // tangential pivot underflows and an unregularized solve would inject a
      // wild component along that ray; the shift pins it near zero instead
      // while leaving genuine curvature untouched.
      const double reg =
          1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      H.diagonal().array() += reg;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd d = ldlt.solve(g);
        if (d.allFinite()) {
          for (int damp = 0; damp < 7 && !accepted; ++damp, d *= 0.5) {
            Eigen::VectorXd yn = project(x - d);
            if ((x - yn).squaredNorm() == 0.0) continue;
            const double Jn = eval_J(ctx, wrap(ctx, yn));
            if (std::isfinite(Jn) && Jn < J) {
              y = std::move(yn);
              Jy = Jn;
              accepted = true;
            }
          }
        }
      }
    }

    if (!accepted) {
      double alpha = std::min(2.0 * alpha_prev, 1e8);
      while (alpha >= kAlphaFloor) {
        y = project(x - alpha * g);
        const Eigen::VectorXd diff = x - y;
        const double d2 = diff.squaredNorm();
        if (d2 == 0.0) break;  // the clamp absorbed the whole step
        Jy = eval_J(ctx, wrap(ctx, y));
        if (Jy <= J - (kArmijo / alpha) * d2) {
          accepted = true;
          alpha_prev = alpha;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;  // at the numerical floor of the line search
    }

    x = std::move(y);
    J = Jy;
    g = grad_J(ctx, wrap(ctx, x)).coefficients;
    ++iter;
    metric = metric_at(x, g);
    out.iterate_log.push_back(make_row(ctx, iter, x, J, g.norm(), metric));
    out.converged = metric <= tol;
  }

  out.u = wrap(ctx, std::move(x));
  out.J_value = J;
  out.grad_norm = g.norm();
  out.cerami_metric = metric;
  out.iterations = iter;
  return out;
}

std::mt19937_64 seeded(std::uint64_t seed) { return std::mt19937_64(seed); }

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

/// Random direction with unit norm in the given quadratic form; redraws the
/// (measure-zero) degenerate cases.
Eigen::VectorXd random_unit(std::mt19937_64& rng, Eigen::Index n,
                            const Eigen::SparseMatrix<double>& form) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::VectorXd v = random_vector(rng, n);
    const double norm = quad_norm(form, v);
    if (norm > 1e-12) return v / norm;
  }
  throw InvariantError("failed to draw a direction with nonzero norm");
}

}  // namespace

const char* to_string(Finder f) {
  switch (f) {
    case Finder::global_min:
      return "global_min";
    case Finder::min_Aplus:
      return "min_Aplus";
    case Finder::min_Aminus:
      return "min_Aminus";
    case Finder::mountain_pass:
      return "mountain_pass";
  }
  return "unknown";
}

CriticalPoint minimize_global(const EnergyContext& ctx,
                              const DiscreteFunction& u0, double tol,
                              int max_iters) {
  return descend(ctx, u0, tol, max_iters, Finder::global_min,
                 [](Eigen::VectorXd x) { return x; });
}

CriticalPoint minimize_halfspace(const EnergyContext& ctx,
                                 const HalfSpaceConstraint& constraint,
                                 const DiscreteFunction& u0, double tol,
                                 int max_iters) {
  if (constraint.sign != 1 && constraint.sign != -1)
    throw ParameterError("half-space sign must be +1 or -1");
  const double sign = static_cast<double>(constraint.sign);
  const Eigen::VectorXd& b = ctx.spectrum().b_phi1;
  const Eigen::VectorXd& phi = ctx.spectrum().phi(0).coefficients;
  const auto project = [&b, &phi, sign](Eigen::VectorXd x) {
    const double t = b.dot(x);
    if (t * sign < 0.0) x -= t * phi;
    return x;
  };
  CriticalPoint out = descend(
      ctx, u0, tol, max_iters,
      constraint.sign > 0 ? Finder::min_Aplus : Finder::min_Aminus, project);
  const double t_final = b.dot(out.u.coefficients);
  out.constraint_active =
      std::abs(t_final) <= 1e-12 * (1.0 + out.u.coefficients.norm());
  return out;
}

CriticalPoint mountain_pass(const EnergyContext& ctx, const DiscreteFunction& e,
                            int n_path, double tol, int max_iters,
                            PathProfile* profile) {
  if (!(tol > 0.0)) throw ParameterError("solver tolerance must be positive");
  if (max_iters < 1) throw ParameterError("max_iters must be at least 1");
  if (n_path < 4)
    throw ParameterError("mountain pass needs at least 4 path segments");
  ctx.require_compatible(e);
  if (e.coefficients.norm() == 0.0)
    throw ParameterError("path endpoint e must be nonzero");

  const double J_e = eval_J(ctx, e);
  const double e_norm2 = std::pow(quad_norm(ctx.K(), e.coefficients), 2);
  // Roundoff slack so that an exactly-flat endpoint fails later as a
  // geometry problem, not as a precondition.
  if (J_e > 1e-12 * (1.0 + e_norm2))
    throw ParameterError("path endpoint must have negative energy, got J(e)=" +
                         detail::format_double(J_e));

  const Eigen::Index n = ctx.dim();
  std::vector<Eigen::VectorXd> path(static_cast<std::size_t>(n_path) + 1);
  for (int i = 0; i <= n_path; ++i)
    path[static_cast<std::size_t>(i)] =
        (static_cast<double>(i) / n_path) * e.coefficients;

  const auto path_energies = [&](std::vector<double>& J_path) {
    J_path.resize(path.size());
    for (std::size_t i = 0; i < path.size(); ++i)
      J_path[i] = eval_J(ctx, wrap(ctx, path[i]));
  };

  const auto rebalance = [&]() {
    std::vector<double> cum(path.size(), 0.0);
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      cum[i + 1] = cum[i] + (path[i + 1] - path[i]).norm();
    const double total = cum.back();
    if (total < 1e-300) return;
    std::vector<Eigen::VectorXd> fresh(path.size());
    fresh.front() = path.front();
    fresh.back() = path.back();
    std::size_t k = 0;
    for (std::size_t j = 1; j + 1 < path.size(); ++j) {
      const double s = total * static_cast<double>(j) / n_path;
      while (k + 2 < path.size() && cum[k + 1] < s) ++k;
      const double seg = cum[k + 1] - cum[k];
      const double theta = seg > 0.0 ? (s - cum[k]) / seg : 0.0;
      fresh[j] = (1.0 - theta) * path[k] + theta * path[k + 1];
    }
    path = std::move(fresh);
  };

  CriticalPoint out;
  out.finder = Finder::mountain_pass;

  // The maximizer is moved by the tangent-reflected gradient: descent in the
  // directions transverse to the path, ascent along it.  The reflected
  // gradient vanishes exactly at critical points of J, so driving it to zero
  // certifies the returned point regardless of how the tangent was
  // estimated.  Arc-length rebalancing runs only during an initial settling
  // phase; kept on forever it would keep swapping the maximizer for an
  // interpolated point a whole segment away from the saddle.
  const int settle_iters = std::min(100, max_iters / 4);

  std::vector<double> J_path;
  double alpha_prev = 1.0;
  int iter = 0;
  std::size_t m = 0;
  for (;; ++iter) {
    path_energies(J_path);
    m = static_cast<std::size_t>(
        std::max_element(J_path.begin(), J_path.end()) - J_path.begin());
    if (J_path[m] <= 1e-12 * (1.0 + std::abs(J_e)))
      throw GeometryError("no positive barrier remains along the path");
    if (m == 0)
      throw GeometryError("path maximum collapsed to the start endpoint u=0");
    if (m == path.size() - 1)
      throw GeometryError("path maximum collapsed to the end endpoint e");

    Eigen::VectorXd x = path[m];
    double J = J_path[m];
    Eigen::VectorXd g = grad_J(ctx, wrap(ctx, x)).coefficients;
    const double metric = g.norm() * (1.0 + quad_norm(ctx.K(), x));
    out.iterate_log.push_back(make_row(ctx, iter, x, J, g.norm(), metric));
    const bool done = metric <= tol || iter >= max_iters;
    if (done) {
      out.converged = metric <= tol;
      out.u = wrap(ctx, std::move(x));
      out.J_value = J;
      out.grad_norm = g.norm();
      out.cerami_metric = metric;
      break;
    }

    Eigen::VectorXd tangent = path[m + 1] - path[m - 1];
    const double tangent_norm = tangent.norm();
    Eigen::VectorXd d;
    if (tangent_norm > 1e-300) {
      tangent /= tangent_norm;
      d = -(g - 2.0 * g.dot(tangent) * tangent);
    } else {
      d = -g;
    }

    // Backtracking on the squared gradient norm, the merit that is zero
    // exactly at the saddle.
    const double merit = g.squaredNorm();
    double alpha = std::min(2.0 * alpha_prev, 1e8);
    bool accepted = false;
    Eigen::VectorXd y;
    while (alpha >= kAlphaFloor) {
      y = x + alpha * d;
      const double merit_y =
          grad_J(ctx, wrap(ctx, y)).coefficients.squaredNorm();
      if (merit_y < merit) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // The reflected-gradient step cannot make progress within floating
      // point: report the maximizer as-is.
      out.converged = metric <= tol;
      out.u = wrap(ctx, std::move(x));
      out.J_value = J;
      out.grad_norm = g.norm();
      out.cerami_metric = metric;
      break;
    }
    path[m] = std::move(y);
    alpha_prev = alpha;
    if (iter < settle_iters) rebalance();
  }
  out.iterations = iter;

  if (profile != nullptr) {
    profile->clear();
    path_energies(J_path);
    for (std::size_t i = 0; i < path.size(); ++i)
      profile->push_back(
          PathSample{static_cast<double>(i) / n_path, J_path[i]});
  }
  return out;
}

MorseIndex morse_index(const EnergyContext& ctx, const DiscreteFunction& u,
                       int n_eigs) {
  Eigen::MatrixXd H = hess_matrix(ctx, u);
  double diag_scale = 0.0;
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    diag_scale = std::max(diag_scale, std::abs(H(i, i)));
  const double theta = 1e-8 * std::max(diag_scale, 1e-300);

  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  detail::symmetric_eigen(H, eigenvalues, eigenvectors);

  const Eigen::Index count =
      n_eigs < 0 ? eigenvalues.size()
                 : std::min<Eigen::Index>(n_eigs, eigenvalues.size());
  MorseIndex out;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (eigenvalues[i] < -theta)
      ++out.negatives;
    else if (eigenvalues[i] <= theta)
      ++out.near_zeros;
  }
  return out;
}

MountainPassGeometryReport probe_mountain_pass_geometry(
    const EnergyContext& ctx, const std::vector<double>& alpha_grid,
    const std::vector<double>& t_grid, int n_directions, std::uint64_t seed) {
  if (alpha_grid.empty() || t_grid.empty())
    throw ParameterError("probe grids must be nonempty");
  for (double a : alpha_grid)
    if (!(a > 0.0))
      throw ParameterError("sphere radii must be positive");
  if (n_directions < 1)
    throw ParameterError("need at least one sample direction");

  const Eigen::VectorXd& phi = ctx.spectrum().phi(0).coefficients;
  const Eigen::SparseMatrix<double>& B = ctx.boundary_mass().matrix();
  auto rng = seeded(seed);
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(static_cast<std::size_t>(n_directions));
  for (int i = 0; i < n_directions; ++i)
    dirs.push_back(random_unit(rng, ctx.dim(), B));

  // Mixing angles between the phi_1 axis and each random direction; 0 is
  // handled separately so the degenerate ray is always sampled.
  const double angles[] = {M_PI / 6.0, M_PI / 3.0, 5.0 * M_PI / 12.0,
                           M_PI / 2.0};

  MountainPassGeometryReport report;
  for (double alpha : alpha_grid) {
    double inf_J = std::numeric_limits<double>::infinity();
    for (double s : {1.0, -1.0})
      inf_J = std::min(inf_J, eval_J(ctx, wrap(ctx, s * alpha * phi)));
    for (const Eigen::VectorXd& d : dirs) {
      for (double s : {1.0, -1.0}) {
        for (double theta : angles) {
          Eigen::VectorXd u =
              s * std::cos(theta) * phi + std::sin(theta) * d;
          const double bn = quad_norm(B, u);
          if (bn < 1e-12) continue;
          u *= alpha / bn;
          inf_J = std::min(inf_J, eval_J(ctx, wrap(ctx, u)));
        }
      }
    }
    report.spheres.push_back(SphereSample{alpha, inf_J});
  }

  for (double t : t_grid)
    report.ray.push_back(RaySample{t, eval_J(ctx, wrap(ctx, t * phi))});

  // Certificate: a sphere with positive infimum and a ray point strictly
  // beyond it with negative energy (its boundary norm is |t|).
  for (const SphereSample& sphere : report.spheres) {
    if (!(sphere.inf_J > 0.0)) continue;
    for (const RaySample& r : report.ray) {
      if (std::abs(r.t) > sphere.alpha && r.J < 0.0) {
        if (!report.certificate_found || sphere.inf_J > report.rho_star) {
          report.certificate_found = true;
          report.alpha_star = sphere.alpha;
          report.rho_star = sphere.inf_J;
          report.e_t = r.t;
        }
      }
    }
  }
  return report;
}

SaddleGeometryReport probe_saddle_geometry(const EnergyContext& ctx,
                                           const std::vector<double>& t_grid,
                                           int w_samples, std::uint64_t seed) {
  if (t_grid.empty()) throw ParameterError("probe grids must be nonempty");
  if (w_samples < 1) throw ParameterError("need at least one complement sample");

  const Eigen::VectorXd& phi = ctx.spectrum().phi(0).coefficients;
  const Eigen::VectorXd& b = ctx.spectrum().b_phi1;

  SaddleGeometryReport report;
  report.max_ray_J = -std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    const double J = eval_J(ctx, wrap(ctx, t * phi));
    report.ray.push_back(RaySample{t, J});
    report.max_ray_J = std::max(report.max_ray_J, J);
  }
  if (ctx.nonlinearity().asymptotics.F_bound.has_value())
    report.ssr_bound =
        *ctx.nonlinearity().asymptotics.F_bound * ctx.mesh().boundary_length();

  auto rng = seeded(seed);
  const double ladder[] = {1.0, 2.5, 5.0, 10.0};
  for (double level : ladder) {
    SaddleGeometryReport::ComplementLevel row;
    row.w_norm = level;
    row.min_J = std::numeric_limits<double>::infinity();
    row.max_J = -row.min_J;
    for (int i = 0; i < w_samples; ++i) {
      Eigen::VectorXd w;
      double cn = 0.0;
      for (int attempt = 0; attempt < 100; ++attempt) {
        w = random_vector(rng, ctx.dim());
        w -= b.dot(w) * phi;  // remove the phi_1 component
        cn = quad_norm(ctx.K(), w);
        if (cn > 1e-12) break;
      }
      if (cn <= 1e-12)
        throw InvariantError("failed to draw a complement direction");
      w *= level / cn;
      const double J = eval_J(ctx, wrap(ctx, w));
      row.min_J = std::min(row.min_J, J);
      row.max_J = std::max(row.max_J, J);
    }
    report.complement.push_back(row);
  }
  report.coercive_trend = true;
  for (std::size_t i = 0; i + 1 < report.complement.size(); ++i)
    if (!(report.complement[i + 1].min_J > report.complement[i].min_J))
      report.coercive_trend = false;
  return report;
}

LocalLinkingReport probe_local_linking(const EnergyContext& ctx,
                                       const std::vector<double>& delta_grid,
                                       int n_samples, std::uint64_t seed) {
  if (delta_grid.empty()) throw ParameterError("probe grids must be nonempty");
  for (double d : delta_grid)
    if (!(d > 0.0)) throw ParameterError("linking radii must be positive");
  if (n_samples < 1) throw ParameterError("need at least one sample");

  const Eigen::VectorXd& phi = ctx.spectrum().phi(0).coefficients;
  const Eigen::VectorXd& b = ctx.spectrum().b_phi1;
  const double phi_c_norm = quad_norm(ctx.K(), phi);  // = sqrt(mu1)

  auto rng = seeded(seed);
  LocalLinkingReport report;
  for (double delta : delta_grid) {
    LocalLinkingReport::DeltaRow row;
    row.delta = delta;
    const double eps = 1e-10 * (1.0 + delta * delta);

    // phi_1 side: J should be <= 0 at c-norms up to delta.
    row.worst_span_J = -std::numeric_limits<double>::infinity();
    const double t_max = delta / phi_c_norm;
    for (double frac : {0.25, 0.5, 0.75, 1.0}) {
      for (double s : {1.0, -1.0}) {
        const double J = eval_J(ctx, wrap(ctx, s * frac * t_max * phi));
        row.worst_span_J = std::max(row.worst_span_J, J);
        if (J > eps) ++row.span_violations;
      }
    }

    // Complement side: J should be >= 0 at c-norms up to delta.
    row.worst_complement_J = std::numeric_limits<double>::infinity();
    for (double frac : {0.5, 1.0}) {
      for (int i = 0; i < n_samples; ++i) {
        Eigen::VectorXd w;
        double cn = 0.0;
        for (int attempt = 0; attempt < 100; ++attempt) {
          w = random_vector(rng, ctx.dim());
          w -= b.dot(w) * phi;
          cn = quad_norm(ctx.K(), w);
          if (cn > 1e-12) break;
        }
        if (cn <= 1e-12)
          throw InvariantError("failed to draw a complement direction");
        w *= frac * delta / cn;
        const double J = eval_J(ctx, wrap(ctx, w));
        row.worst_complement_J = std::min(row.worst_complement_J, J);
        if (J < -eps) ++row.complement_violations;
      }
    }
    report.rows.push_back(row);
  }

  for (const auto& row : report.rows)
    if (row.span_violations == 0 && row.complement_violations == 0)
      report.largest_clean_delta =
          std::max(report.largest_clean_delta, row.delta);
  return report;
}

}  // namespace steklov
