#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "steklov/errors.hpp"

namespace steklov {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// What the mesh discretizes.  Generators tag their output; meshes read from
/// disk are tagged `file`.  The tag controls boundary handling under
/// refinement (new boundary nodes of a disk are pushed back onto the circle).
enum class DomainTag { disk, square, file };

/// Conforming triangle mesh of a planar domain.
///
/// Invariants, enforced at construction:
///  - every node referenced by a triangle or boundary edge exists,
///  - every triangle has strictly positive signed area (counterclockwise),
///  - each interior edge is shared by exactly two triangles, each boundary
///    edge by exactly one,
///  - the boundary edges listed are exactly the edges owned by one triangle,
///  - boundary edges are directed with the domain on the left and close into
///    disjoint simple loops.
class Mesh {
public:
  Mesh(std::vector<Point2> nodes,
       std::vector<std::array<std::int32_t, 3>> triangles,
       std::vector<std::array<std::int32_t, 2>> boundary_edges,
       DomainTag tag, double disk_radius = 0.0);

  std::size_t n_nodes() const { return nodes_.size(); }
  std::size_t n_triangles() const { return triangles_.size(); }
  std::size_t n_boundary_edges() const { return boundary_edges_.size(); }
  /// Count of distinct undirected edges, interior and boundary together.
  std::size_t n_edges() const { return n_edges_; }

  const std::vector<Point2>& nodes() const { return nodes_; }
  const std::vector<std::array<std::int32_t, 3>>& triangles() const {
    return triangles_;
  }
  const std::vector<std::array<std::int32_t, 2>>& boundary_edges() const {
    return boundary_edges_;
  }

  DomainTag domain_tag() const { return tag_; }
  double disk_radius() const { return disk_radius_; }

  /// Identity token for run-time compatibility checks between meshes and the
  /// vectors/operators built on them.  Unique per constructed Mesh object.
  std::uint64_t id() const { return id_; }

  /// Boundary node ids, ascending, each listed once.
  std::vector<std::int32_t> boundary_nodes() const;

  /// Boundary loops as node sequences in stored edge order; each loop lists
  /// every node once (the closing edge back to the first node is implied).
  std::vector<std::vector<std::int32_t>> boundary_loops() const;

  double triangle_area(std::size_t t) const;
  double boundary_length() const;

private:
  void validate() const;

  std::vector<Point2> nodes_;
  std::vector<std::array<std::int32_t, 3>> triangles_;
  std::vector<std::array<std::int32_t, 2>> boundary_edges_;
  DomainTag tag_;
  double disk_radius_;
  std::size_t n_edges_ = 0;
  std::uint64_t id_;
};

/// Nodal coefficient vector bound to the mesh it lives on.  All entries are
/// finite; `mesh_id` must match the mesh of any operator it is combined with.
struct DiscreteFunction {
  Eigen::VectorXd coefficients;
  std::uint64_t mesh_id = 0;

  Eigen::Index dim() const { return coefficients.size(); }
};

/// Wrap a coefficient vector for `mesh`, validating size and finiteness.
DiscreteFunction make_function(const Mesh& mesh, Eigen::VectorXd coefficients);
DiscreteFunction zero_function(const Mesh& mesh);

/// Node budget for generators and refinement.  Defaults to 200000; the
/// environment variable STEKLOV_NODE_CAP overrides it.
std::size_t node_cap();

/// Triangulate the disk of the given radius centered at the origin.  Rings of
/// 6i nodes around a center node; every edge is shorter than 1.5*h.
/// Requires 0 < h < radius.
Mesh generate_disk(double radius, double h);

/// Triangulate the axis-aligned square [0,side]^2 on a uniform n-by-n grid,
/// n = ceil(side/h), each cell split along the same diagonal.
/// Requires 0 < h and 0 < side.
Mesh generate_square(double side, double h);

/// Uniform red refinement: each triangle splits into four via edge midpoints.
/// Node ids of `mesh` are a prefix of the result; for disk meshes the new
/// boundary nodes are projected back onto the circle.
Mesh refine(const Mesh& mesh);

Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);

}  // namespace steklov
