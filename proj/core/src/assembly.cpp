#include "steklov/assembly.hpp"

#include "text_format.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace steklov {

namespace {

using Triplet = Eigen::Triplet<double>;

// Accumulate a symmetric contribution: store only the upper triangle and
// mirror once at the end, so the matrix is exactly symmetric.
void push_sym(std::vector<Triplet>& upper, std::int32_t i, std::int32_t j,
              double v) {
  if (i <= j)
    upper.emplace_back(i, j, v);
  else
    upper.emplace_back(j, i, v);
}

Eigen::SparseMatrix<double> mirror_upper(std::vector<Triplet>& upper,
                                         Eigen::Index n) {
  Eigen::SparseMatrix<double> u(n, n);
  u.setFromTriplets(upper.begin(), upper.end());
  Eigen::SparseMatrix<double> strict =
      u.triangularView<Eigen::StrictlyUpper>();
  Eigen::SparseMatrix<double> full = u;
  full += Eigen::SparseMatrix<double>(strict.transpose());
  full.makeCompressed();
  return full;
}

}  // namespace

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::stiffness:
      return "stiffness";
    case OperatorKind::domain_mass_weighted:
      return "domain_mass_weighted";
    case OperatorKind::boundary_mass:
      return "boundary_mass";
  }
  return "unknown";
}

SymmetricSparseOperator::SymmetricSparseOperator(
    Eigen::SparseMatrix<double> matrix, OperatorKind kind,
    std::uint64_t mesh_id)
    : matrix_(std::move(matrix)), kind_(kind), mesh_id_(mesh_id) {
  if (matrix_.rows() != matrix_.cols())
    throw DimensionError("operator matrix is not square");
  Eigen::SparseMatrix<double> diff =
      Eigen::SparseMatrix<double>(matrix_.transpose()) - matrix_;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
      if (it.value() != 0.0)
        throw InvariantError("operator entries are not exactly symmetric at (" +
                             std::to_string(it.row()) + "," +
                             std::to_string(it.col()) + ")");
  matrix_.makeCompressed();
}

Eigen::VectorXd SymmetricSparseOperator::apply(const Eigen::VectorXd& u) const {
  if (u.size() != dim())
    throw DimensionError("vector of size " + std::to_string(u.size()) +
                         " applied to operator of dimension " +
                         std::to_string(dim()));
  return matrix_ * u;
}

double SymmetricSparseOperator::quad(const Eigen::VectorXd& u) const {
  return u.dot(apply(u));
}

double SymmetricSparseOperator::bilinear(const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& v) const {
  if (v.size() != dim())
    throw DimensionError("vector of size " + std::to_string(v.size()) +
                         " applied to operator of dimension " +
                         std::to_string(dim()));
  return v.dot(apply(u));
}

CoefficientField constant_coefficient(double value) {
  if (!std::isfinite(value) || value < 0.0)
    throw ParameterError("constant coefficient must be finite and nonnegative");
  return CoefficientField{[value](Point2) { return value; },
                          "constant(" + detail::format_double(value) + ")"};
}

SymmetricSparseOperator assemble_stiffness(const Mesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.n_nodes());
  std::vector<Triplet> upper;
  upper.reserve(6 * mesh.n_triangles());
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Point2 p0 = mesh.nodes()[tri[0]];
    const Point2 p1 = mesh.nodes()[tri[1]];
    const Point2 p2 = mesh.nodes()[tri[2]];
    // Gradient of the barycentric basis: for vertex a opposite edge (b,c),
    // grad phi_a = perp(c - b) / (2 area), with perp rotating +90 degrees.
    const double area = mesh.triangle_area(t);
    const double b[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const double c[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
    const double scale = 1.0 / (4.0 * area);
    for (int a = 0; a < 3; ++a)
      for (int d = a; d < 3; ++d)
        push_sym(upper, tri[a], tri[d], scale * (b[a] * b[d] + c[a] * c[d]));
  }
  return SymmetricSparseOperator(mirror_upper(upper, n),
                                 OperatorKind::stiffness, mesh.id());
}

SymmetricSparseOperator assemble_domain_mass_weighted(const Mesh& mesh,
                                                      const CoefficientField& c,
                                                      int quad_order) {
  if (quad_order != 1 && quad_order != 3)
    throw ParameterError("quad_order must be 1 or 3 points per triangle, got " +
                         std::to_string(quad_order));
  if (!c.evaluate)
    throw ParameterError("coefficient field has no evaluator");

  const auto n = static_cast<Eigen::Index>(mesh.n_nodes());
  std::vector<Triplet> upper;
  upper.reserve(6 * mesh.n_triangles());

  const auto sample = [&](Point2 x) {
    const double v = c.evaluate(x);
    if (!std::isfinite(v))
      throw ValidationError("coefficient is non-finite at (" +
                            detail::format_double(x.x) + "," + detail::format_double(x.y) +
                            ")");
    if (v < 0.0)
      throw ValidationError("coefficient is negative at (" + detail::format_double(x.x) +
                            "," + detail::format_double(x.y) +
                            "): " + detail::format_double(v));
    return v;
  };

  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Point2 p[3] = {mesh.nodes()[tri[0]], mesh.nodes()[tri[1]],
                         mesh.nodes()[tri[2]]};
    const double area = mesh.triangle_area(t);
    // Quadrature in barycentric coordinates: centroid (degree 1) or the three
    // edge midpoints with equal weights (degree 2).
    struct QP {
      double l0, l1, l2, w;
    };
    QP pts[3];
    int n_pts = 0;
    if (quad_order == 1) {
      pts[0] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0};
      n_pts = 1;
    } else {
      pts[0] = {0.5, 0.5, 0.0, 1.0 / 3.0};
      pts[1] = {0.0, 0.5, 0.5, 1.0 / 3.0};
      pts[2] = {0.5, 0.0, 0.5, 1.0 / 3.0};
      n_pts = 3;
    }
    for (int q = 0; q < n_pts; ++q) {
      const double l[3] = {pts[q].l0, pts[q].l1, pts[q].l2};
      const Point2 x{l[0] * p[0].x + l[1] * p[1].x + l[2] * p[2].x,
                     l[0] * p[0].y + l[1] * p[1].y + l[2] * p[2].y};
      const double cv = sample(x) * pts[q].w * area;
      for (int a = 0; a < 3; ++a)
        for (int d = a; d < 3; ++d)
          push_sym(upper, tri[a], tri[d], cv * l[a] * l[d]);
    }
  }
  return SymmetricSparseOperator(mirror_upper(upper, n),
                                 OperatorKind::domain_mass_weighted, mesh.id());
}

SymmetricSparseOperator assemble_boundary_mass(const Mesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.n_nodes());
  std::vector<Triplet> upper;
  upper.reserve(3 * mesh.n_boundary_edges());
  for (const auto& [a, b] : mesh.boundary_edges()) {
    const Point2 pa = mesh.nodes()[a];
    const Point2 pb = mesh.nodes()[b];
    const double len = std::hypot(pb.x - pa.x, pb.y - pa.y);
    // Exact edge mass for linear traces: (len/6) * [[2,1],[1,2]].
    push_sym(upper, a, a, len / 3.0);
    push_sym(upper, b, b, len / 3.0);
    push_sym(upper, a, b, len / 6.0);
  }
  return SymmetricSparseOperator(mirror_upper(upper, n),
                                 OperatorKind::boundary_mass, mesh.id());
}

BoundaryQuadrature boundary_quadrature(const Mesh& mesh) {
  BoundaryQuadrature table;
  table.mesh_id = mesh.id();
  table.nodes.reserve(2 * mesh.n_boundary_edges());
  const double offset = 0.5 / std::sqrt(3.0);
  for (std::size_t e = 0; e < mesh.n_boundary_edges(); ++e) {
    const auto [a, b] = mesh.boundary_edges()[e];
    const Point2 pa = mesh.nodes()[a];
    const Point2 pb = mesh.nodes()[b];
    const double len = std::hypot(pb.x - pa.x, pb.y - pa.y);
    for (const double xi : {0.5 - offset, 0.5 + offset}) {
      BoundaryQuadrature::Node node;
      node.edge = static_cast<std::int32_t>(e);
      node.a = a;
      node.b = b;
      node.xi = xi;
      node.x = Point2{pa.x + xi * (pb.x - pa.x), pa.y + xi * (pb.y - pa.y)};
      node.weight = 0.5 * len;
      table.nodes.push_back(node);
    }
  }
  return table;
}

double BoundaryQuadrature::total_weight() const {
  double sum = 0.0;
  for (const auto& node : nodes) sum += node.weight;
  return sum;
}

Eigen::VectorXd assemble_boundary_load(
    const Mesh& mesh, const std::function<double(Point2)>& g) {
  if (!g) throw ParameterError("boundary load function is empty");
  Eigen::VectorXd out =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.n_nodes()));
  const BoundaryQuadrature table = boundary_quadrature(mesh);
  for (const auto& node : table.nodes) {
    const double gv = g(node.x);
    if (!std::isfinite(gv))
      throw ValidationError("boundary load integrand is non-finite at (" +
                            detail::format_double(node.x.x) + "," +
                            detail::format_double(node.x.y) + ")");
    out[node.a] += node.weight * (1.0 - node.xi) * gv;
    out[node.b] += node.weight * node.xi * gv;
  }
  return out;
}

double c_norm(const DiscreteFunction& u, const SymmetricSparseOperator& A,
              const SymmetricSparseOperator& C) {
  if (A.mesh_id() != 0 && u.mesh_id != 0 && A.mesh_id() != u.mesh_id)
    throw DimensionError("function and stiffness operator come from different "
                         "meshes");
  if (C.mesh_id() != 0 && u.mesh_id != 0 && C.mesh_id() != u.mesh_id)
    throw DimensionError("function and mass operator come from different "
                         "meshes");
  const double q = A.quad(u.coefficients) + C.quad(u.coefficients);
  return std::sqrt(std::max(q, 0.0));
}

double boundary_norm(const DiscreteFunction& u,
                     const SymmetricSparseOperator& B) {
  if (B.mesh_id() != 0 && u.mesh_id != 0 && B.mesh_id() != u.mesh_id)
    throw DimensionError("function and boundary operator come from different "
                         "meshes");
  return std::sqrt(std::max(B.quad(u.coefficients), 0.0));
}

void save_operator(const SymmetricSparseOperator& op, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  const auto& m = op.matrix();
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> entries;
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      if (it.row() <= it.col() && it.value() != 0.0)
        entries.emplace_back(it.row(), it.col(), it.value());
  out << "steklov-op v1\n";
  out << op.dim() << " " << to_string(op.kind()) << " " << entries.size()
      << "\n";
  for (const auto& [i, j, v] : entries)
    out << i << " " << j << " " << detail::format_double(v) << "\n";
  if (!out) throw Error("failed writing operator to " + path);
}

SymmetricSparseOperator load_operator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open operator file " + path, 0);
  long line_no = 0;
  std::string line;
  const auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return;
    }
    ++line_no;
    throw ParseError(std::string("unexpected end of file, expected ") + what,
                     line_no);
  };

  next_line("header 'steklov-op v1'");
  if (line != "steklov-op v1")
    throw ParseError("bad header, expected 'steklov-op v1'", line_no);

  next_line("'dim kind nnz'");
  std::istringstream header(line);
  long long dim = -1, nnz = -1;
  std::string kind_str;
  if (!(header >> dim >> kind_str >> nnz) || dim < 0 || nnz < 0 ||
      !(header >> std::ws).eof())
    throw ParseError("expected 'dim kind nnz', got \"" + line + "\"", line_no);
  OperatorKind kind;
  if (kind_str == "stiffness")
    kind = OperatorKind::stiffness;
  else if (kind_str == "domain_mass_weighted")
    kind = OperatorKind::domain_mass_weighted;
  else if (kind_str == "boundary_mass")
    kind = OperatorKind::boundary_mass;
  else
    throw ParseError("unknown operator kind \"" + kind_str + "\"", line_no);

  std::vector<Triplet> upper;
  upper.reserve(static_cast<std::size_t>(nnz));
  for (long long k = 0; k < nnz; ++k) {
    next_line("'i j value'");
    std::istringstream ss(line);
    long long i = -1, j = -1;
    double v = 0.0;
    if (!(ss >> i >> j >> v) || !(ss >> std::ws).eof())
      throw ParseError("expected 'i j value', got \"" + line + "\"", line_no);
    if (i < 0 || j < 0 || i >= dim || j >= dim || i > j)
      throw ParseError("entry indices outside the upper triangle", line_no);
    upper.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  return SymmetricSparseOperator(
      mirror_upper(upper, static_cast<Eigen::Index>(dim)), kind, 0);
}

}  // namespace steklov
