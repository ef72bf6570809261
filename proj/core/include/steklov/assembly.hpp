#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "steklov/mesh.hpp"

namespace steklov {

enum class OperatorKind { stiffness, domain_mass_weighted, boundary_mass };

const char* to_string(OperatorKind kind);

/// Sparse symmetric matrix with provenance.  Exactly symmetric by
/// construction: assembled from an upper triangle and mirrored.
class SymmetricSparseOperator {
public:
  SymmetricSparseOperator(Eigen::SparseMatrix<double> matrix, OperatorKind kind,
                          std::uint64_t mesh_id);

  Eigen::Index dim() const { return matrix_.rows(); }
  OperatorKind kind() const { return kind_; }
  std::uint64_t mesh_id() const { return mesh_id_; }
  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  /// Quadratic form u' M u.
  double quad(const Eigen::VectorXd& u) const;
  /// Bilinear form u' M v.
  double bilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

private:
  Eigen::SparseMatrix<double> matrix_;
  OperatorKind kind_;
  std::uint64_t mesh_id_;
};

/// Pointwise coefficient c(x) with a printable description.
struct CoefficientField {
  std::function<double(Point2)> evaluate;
  std::string description;
};

CoefficientField constant_coefficient(double value);

/// Piecewise-linear stiffness matrix: entries integrate grad(phi_i).grad(phi_j).
SymmetricSparseOperator assemble_stiffness(const Mesh& mesh);

/// Domain mass matrix weighted by c(x): entries integrate c phi_i phi_j.
/// quad_order is the number of quadrature points per triangle: 1 (centroid)
/// or 3 (edge midpoints, exact through quadratics, hence exact for constant c).
/// Throws ValidationError if c is negative or non-finite at a quadrature point.
SymmetricSparseOperator assemble_domain_mass_weighted(const Mesh& mesh,
                                                      const CoefficientField& c,
                                                      int quad_order = 3);

/// Boundary mass matrix: entries integrate phi_i phi_j over the boundary.
/// Rows and columns of interior nodes are identically zero (no stored entries).
SymmetricSparseOperator assemble_boundary_mass(const Mesh& mesh);

/// Load vector with entries integrating g phi_i over the boundary, using
/// two-point Gauss quadrature per boundary edge (exact through cubics).
Eigen::VectorXd assemble_boundary_load(const Mesh& mesh,
                                       const std::function<double(Point2)>& g);

/// Norm induced by the bilinear form u'(A+C)u.
double c_norm(const DiscreteFunction& u, const SymmetricSparseOperator& A,
              const SymmetricSparseOperator& C);
/// Norm induced by the boundary mass matrix, u'Bu.
double boundary_norm(const DiscreteFunction& u,
                     const SymmetricSparseOperator& B);

/// Two-point Gauss quadrature table over the boundary polyline.  A function
/// u on the mesh is evaluated at a table node as (1-xi) u[a] + xi u[b].
struct BoundaryQuadrature {
  struct Node {
    std::int32_t edge;  // index into mesh.boundary_edges()
    std::int32_t a, b;  // edge endpoints
    Point2 x;           // physical location
    double xi;          // barycentric coordinate toward b
    double weight;
  };
  std::vector<Node> nodes;
  std::uint64_t mesh_id = 0;

  double total_weight() const;
};

BoundaryQuadrature boundary_quadrature(const Mesh& mesh);

void save_operator(const SymmetricSparseOperator& op, const std::string& path);
SymmetricSparseOperator load_operator(const std::string& path);

}  // namespace steklov
