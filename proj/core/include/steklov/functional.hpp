#pragma once

// Discrete energy functional for the resonance-at-mu_1 boundary problem:
// a quadratic part built from the assembled operators, shifted by the first
// Steklov eigenvalue, minus a boundary potential integrated by quadrature.

#include <Eigen/Dense>

#include "steklov/assembly.hpp"
#include "steklov/mesh.hpp"
#include "steklov/nonlinearity.hpp"
#include "steklov/spectrum.hpp"

namespace steklov {

/// Compactness diagnostic logged along optimizer iterates.
struct CeramiRecord {
  double J_value = 0.0;
  double grad_norm = 0.0;      ///< Euclidean norm of the discrete gradient.
  double u_norm = 0.0;         ///< c-weighted energy norm of the iterate.
  double cerami_metric = 0.0;  ///< grad_norm * (1 + u_norm).
};

/// Immutable bundle of everything needed to evaluate the energy: operators,
/// the leading eigenvalue with its spectrum of origin, the nonlinearity, and
/// precomputed boundary quadrature.  All evaluation entry points are pure,
/// so one context can be shared read-only across threads.
class EnergyContext {
 public:
  EnergyContext(const Mesh& mesh, const SymmetricSparseOperator& A,
                const SymmetricSparseOperator& C,
                const SymmetricSparseOperator& B,
                const SteklovSpectrum& spectrum, Nonlinearity nl);

  const Mesh& mesh() const { return mesh_; }
  const SymmetricSparseOperator& stiffness() const { return A_; }
  const SymmetricSparseOperator& domain_mass() const { return C_; }
  const SymmetricSparseOperator& boundary_mass() const { return B_; }
  const SteklovSpectrum& spectrum() const { return spectrum_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const BoundaryQuadrature& quadrature() const { return quadrature_; }

  double mu1() const { return mu1_; }
  /// Identity of the spectrum the shift mu1 was taken from.
  std::uint64_t spectrum_id() const { return spectrum_.id; }

  /// A + C, assembled once.
  const Eigen::SparseMatrix<double>& K() const { return K_; }
  /// A + C - mu1 B, the shifted quadratic form.
  const Eigen::SparseMatrix<double>& K_shifted() const { return K_shifted_; }

  Eigen::Index dim() const { return K_.rows(); }
  void require_compatible(const DiscreteFunction& u) const;

 private:
  Mesh mesh_;
  SymmetricSparseOperator A_, C_, B_;
  SteklovSpectrum spectrum_;
  Nonlinearity nl_;
  BoundaryQuadrature quadrature_;
  double mu1_;
  Eigen::SparseMatrix<double> K_, K_shifted_;
};

/// J(u) = 1/2 (u'Au + u'Cu - mu1 u'Bu) - sum_q w_q F(x_q, u_h(x_q)).
double eval_J(const EnergyContext& ctx, const DiscreteFunction& u);

/// Coefficient vector of J'(u): (A + C - mu1 B) u - b_f(u), where b_f tests
/// f(x, u_h) against the hat functions on the boundary.  A zero vector
/// certifies a discrete weak solution.
DiscreteFunction grad_J(const EnergyContext& ctx, const DiscreteFunction& u);

/// Action of the second derivative at u on v:
/// (A + C - mu1 B) v - B_{fu(u)} v with the boundary mass reweighted by
/// fu(x, u_h) at the quadrature points.
DiscreteFunction hess_apply(const EnergyContext& ctx, const DiscreteFunction& u,
                            const DiscreteFunction& v);

/// Dense Hessian at u, for eigenvalue counting at desk scale.
Eigen::MatrixXd hess_matrix(const EnergyContext& ctx,
                            const DiscreteFunction& u);

CeramiRecord cerami_record(const EnergyContext& ctx, const DiscreteFunction& u);

}  // namespace steklov
