#include "steklov/functional.hpp"

#include <cmath>
#include <string>

#include "text_format.hpp"

namespace steklov {

namespace {

std::string point_str(Point2 x) {
  return "(" + detail::format_double(x.x) + "," + detail::format_double(x.y) +
         ")";
}

double checked(const std::function<double(Point2, double)>& fn, Point2 x,
               double u, const char* name) {
  const double v = fn(x, u);
  if (!std::isfinite(v))
    throw ValidationError(std::string(name) + " is non-finite at x=" +
                          point_str(x) + ", u=" + detail::format_double(u));
  return v;
}

}  // namespace

EnergyContext::EnergyContext(const Mesh& mesh, const SymmetricSparseOperator& A,
                             const SymmetricSparseOperator& C,
                             const SymmetricSparseOperator& B,
                             const SteklovSpectrum& spectrum, Nonlinearity nl)
    : mesh_(mesh),
      A_(A),
      C_(C),
      B_(B),
      spectrum_(spectrum),
      nl_(std::move(nl)),
      quadrature_(boundary_quadrature(mesh)),
      mu1_(0.0) {
  const auto n = static_cast<Eigen::Index>(mesh_.n_nodes());
  for (const SymmetricSparseOperator* op : {&A_, &C_, &B_}) {
    if (op->dim() != n)
      throw DimensionError("operator of dimension " +
                           std::to_string(op->dim()) +
                           " does not fit a mesh with " +
                           std::to_string(mesh_.n_nodes()) + " nodes");
    if (op->mesh_id() != 0 && op->mesh_id() != mesh_.id())
      throw DimensionError("operator was assembled on a different mesh");
  }
  if (A_.kind() != OperatorKind::stiffness ||
      C_.kind() != OperatorKind::domain_mass_weighted ||
      B_.kind() != OperatorKind::boundary_mass)
    throw ParameterError("energy context expects operators in the order "
                         "stiffness, weighted domain mass, boundary mass");
  if (spectrum_.k() == 0)
    throw ParameterError("energy context needs a spectrum with at least one "
                         "eigenpair");
  if (spectrum_.mesh_id != 0 && spectrum_.mesh_id != mesh_.id())
    throw DimensionError("spectrum was computed on a different mesh");
  if (spectrum_.phi(0).dim() != n)
    throw DimensionError("spectrum eigenvectors do not fit the mesh");
  if (!nl_.F || !nl_.f || !nl_.fu)
    throw ParameterError("nonlinearity is missing an evaluator");
  // A spectrum read from disk lacks the cached boundary-mass image of phi_1;
  // rebuild it here so decomposition-based logging always works.
  if (spectrum_.b_phi1.size() == 0) attach_boundary_mass(spectrum_, B_);

  double weight_sum = 0.0;
  for (const auto& node : quadrature_.nodes) {
    if (!(node.weight > 0.0))
      throw InvariantError("nonpositive boundary quadrature weight");
    weight_sum += node.weight;
  }
  if (std::abs(weight_sum - mesh_.boundary_length()) > 1e-10)
    throw InvariantError(
        "boundary quadrature weights sum to " +
        detail::format_double(weight_sum) + " but the boundary has length " +
        detail::format_double(mesh_.boundary_length()));

  mu1_ = spectrum_.mu(0);
  K_ = A_.matrix() + C_.matrix();
  K_shifted_ = K_ - mu1_ * B_.matrix();
}

void EnergyContext::require_compatible(const DiscreteFunction& u) const {
  if (u.dim() != dim())
    throw DimensionError("function of size " + std::to_string(u.dim()) +
                         " does not fit a context of dimension " +
                         std::to_string(dim()));
  if (u.mesh_id != 0 && u.mesh_id != mesh_.id())
    throw DimensionError("function lives on a different mesh than the "
                         "energy context");
}

double eval_J(const EnergyContext& ctx, const DiscreteFunction& u) {
  ctx.require_compatible(u);
  const Eigen::VectorXd& x = u.coefficients;
  const double quad = 0.5 * x.dot(ctx.K_shifted() * x);
  double potential = 0.0;
  for (const auto& node : ctx.quadrature().nodes) {
    const double trace = (1.0 - node.xi) * x[node.a] + node.xi * x[node.b];
    potential +=
        node.weight * checked(ctx.nonlinearity().F, node.x, trace, "F");
  }
  return quad - potential;
}

DiscreteFunction grad_J(const EnergyContext& ctx, const DiscreteFunction& u) {
  ctx.require_compatible(u);
  Eigen::VectorXd g = ctx.K_shifted() * u.coefficients;
  // Boundary load of f(x, u_h) tested against the two hat functions that are
  // nonzero on each edge.
  for (const auto& node : ctx.quadrature().nodes) {
    const double trace = (1.0 - node.xi) * u.coefficients[node.a] +
                         node.xi * u.coefficients[node.b];
    const double fv =
        node.weight * checked(ctx.nonlinearity().f, node.x, trace, "f");
    g[node.a] -= (1.0 - node.xi) * fv;
    g[node.b] -= node.xi * fv;
  }
  DiscreteFunction out;
  out.coefficients = std::move(g);
  out.mesh_id = ctx.mesh().id();
  return out;
}

DiscreteFunction hess_apply(const EnergyContext& ctx, const DiscreteFunction& u,
                            const DiscreteFunction& v) {
  ctx.require_compatible(u);
  ctx.require_compatible(v);
  Eigen::VectorXd h = ctx.K_shifted() * v.coefficients;
  for (const auto& node : ctx.quadrature().nodes) {
    const double trace_u = (1.0 - node.xi) * u.coefficients[node.a] +
                           node.xi * u.coefficients[node.b];
    const double trace_v = (1.0 - node.xi) * v.coefficients[node.a] +
                           node.xi * v.coefficients[node.b];
    const double w =
        node.weight * checked(ctx.nonlinearity().fu, node.x, trace_u, "fu") *
        trace_v;
    h[node.a] -= (1.0 - node.xi) * w;
    h[node.b] -= node.xi * w;
  }
  DiscreteFunction out;
  out.coefficients = std::move(h);
  out.mesh_id = ctx.mesh().id();
  return out;
}

Eigen::MatrixXd hess_matrix(const EnergyContext& ctx,
                            const DiscreteFunction& u) {
  ctx.require_compatible(u);
  Eigen::MatrixXd H = Eigen::MatrixXd(ctx.K_shifted());
  for (const auto& node : ctx.quadrature().nodes) {
    const double trace_u = (1.0 - node.xi) * u.coefficients[node.a] +
                           node.xi * u.coefficients[node.b];
    const double w =
        node.weight * checked(ctx.nonlinearity().fu, node.x, trace_u, "fu");
    const double waa = w * (1.0 - node.xi) * (1.0 - node.xi);
    const double wab = w * (1.0 - node.xi) * node.xi;
    const double wbb = w * node.xi * node.xi;
    H(node.a, node.a) -= waa;
    H(node.a, node.b) -= wab;
    H(node.b, node.a) -= wab;
    H(node.b, node.b) -= wbb;
  }
  return H;
}

CeramiRecord cerami_record(const EnergyContext& ctx,
                           const DiscreteFunction& u) {
  CeramiRecord rec;
  rec.J_value = eval_J(ctx, u);
  rec.grad_norm = grad_J(ctx, u).coefficients.norm();
  rec.u_norm = c_norm(u, ctx.stiffness(), ctx.domain_mass());
  rec.cerami_metric = rec.grad_norm * (1.0 + rec.u_norm);
  return rec;
}

}  // namespace steklov
