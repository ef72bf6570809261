#include "steklov/mesh.hpp"

#include "text_format.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace steklov {

namespace {

std::atomic<std::uint64_t> next_mesh_id{1};

std::uint64_t edge_key(std::int32_t a, std::int32_t b) {
  const std::uint64_t lo = static_cast<std::uint32_t>(std::min(a, b));
  const std::uint64_t hi = static_cast<std::uint32_t>(std::max(a, b));
  return (hi << 32) | lo;
}

double signed_area2(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
}

}  // namespace

Mesh::Mesh(std::vector<Point2> nodes,
           std::vector<std::array<std::int32_t, 3>> triangles,
           std::vector<std::array<std::int32_t, 2>> boundary_edges,
           DomainTag tag, double disk_radius)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)),
      tag_(tag),
      disk_radius_(disk_radius),
      id_(next_mesh_id.fetch_add(1)) {
  validate();
  std::unordered_map<std::uint64_t, int> edges;
  for (const auto& t : triangles_)
    for (int e = 0; e < 3; ++e) edges[edge_key(t[e], t[(e + 1) % 3])]++;
  n_edges_ = edges.size();
}

void Mesh::validate() const {
  const auto n = static_cast<std::int32_t>(nodes_.size());
  if (n == 0) throw InvariantError("mesh has no nodes");
  if (triangles_.empty()) throw InvariantError("mesh has no triangles");

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i].x) || !std::isfinite(nodes_[i].y))
      throw InvariantError("non-finite node coordinates: node " +
                           std::to_string(i));
  }

  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri)
      if (v < 0 || v >= n)
        throw InvariantError("triangle references missing node: triangle " +
                             std::to_string(t) + ", node " + std::to_string(v));
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw InvariantError("triangle with repeated vertex: triangle " +
                           std::to_string(t));
    if (signed_area2(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]) <= 0.0)
      throw InvariantError(
          "triangle not counterclockwise with positive area: triangle " +
          std::to_string(t));
  }

  // Edge incidence counts and directed ownership.  A boundary edge must be a
  // directed edge of exactly one triangle (domain on the left).
  std::unordered_map<std::uint64_t, int> incidence;
  std::unordered_map<std::uint64_t, std::uint64_t> directed;  // key -> a<<32|b
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int e = 0; e < 3; ++e) {
      const std::int32_t a = tri[e], b = tri[(e + 1) % 3];
      const auto key = edge_key(a, b);
      if (++incidence[key] > 2)
        throw InvariantError("edge shared by more than two triangles: edge (" +
                             std::to_string(a) + "," + std::to_string(b) + ")");
      directed[key] = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a))
                       << 32) |
                      static_cast<std::uint32_t>(b);
    }
  }

  std::unordered_map<std::uint64_t, int> listed;
  for (std::size_t e = 0; e < boundary_edges_.size(); ++e) {
    const auto [a, b] = boundary_edges_[e];
    if (a < 0 || a >= n || b < 0 || b >= n || a == b)
      throw InvariantError("invalid boundary edge: entry " + std::to_string(e));
    const auto key = edge_key(a, b);
    if (++listed[key] > 1)
      throw InvariantError("boundary edge listed twice: entry " +
                           std::to_string(e));
    auto it = incidence.find(key);
    if (it == incidence.end() || it->second != 1)
      throw InvariantError(
          "boundary edge not owned by exactly one triangle: edge (" +
          std::to_string(a) + "," + std::to_string(b) + ")");
    const std::uint64_t want =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
        static_cast<std::uint32_t>(b);
    if (directed.at(key) != want)
      throw InvariantError(
          "boundary edge directed with domain on the right: edge (" +
          std::to_string(a) + "," + std::to_string(b) + ")");
  }
  for (const auto& [key, count] : incidence) {
    if (count == 1 && listed.find(key) == listed.end()) {
      const auto a = static_cast<std::int32_t>(key & 0xffffffffu);
      const auto b = static_cast<std::int32_t>(key >> 32);
      throw InvariantError("triangle edge on the boundary is not listed: edge (" +
                           std::to_string(a) + "," + std::to_string(b) + ")");
    }
  }

  // Each boundary node has exactly one outgoing and one incoming edge, so the
  // edges decompose into disjoint simple closed loops.
  std::unordered_map<std::int32_t, std::int32_t> succ;
  std::unordered_map<std::int32_t, int> indeg;
  for (const auto& [a, b] : boundary_edges_) {
    if (!succ.emplace(a, b).second)
      throw InvariantError("boundary node with two outgoing edges: node " +
                           std::to_string(a));
    indeg[b]++;
  }
  for (const auto& [node, deg] : indeg)
    if (deg != 1 || succ.find(node) == succ.end())
      throw InvariantError("boundary loop does not close: node " +
                           std::to_string(node));
  for (const auto& [node, next] : succ)
    if (indeg[node] != 1)
      throw InvariantError("boundary loop does not close: node " +
                           std::to_string(node));
}

std::vector<std::int32_t> Mesh::boundary_nodes() const {
  std::vector<std::int32_t> out;
  out.reserve(boundary_edges_.size());
  for (const auto& [a, b] : boundary_edges_) out.push_back(a);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::vector<std::int32_t>> Mesh::boundary_loops() const {
  std::unordered_map<std::int32_t, std::int32_t> succ;
  for (const auto& [a, b] : boundary_edges_) succ[a] = b;
  std::vector<std::vector<std::int32_t>> loops;
  std::unordered_map<std::int32_t, bool> seen;
  for (const auto& [a, b] : boundary_edges_) {
    if (seen[a]) continue;
    std::vector<std::int32_t> loop;
    std::int32_t cur = a;
    do {
      loop.push_back(cur);
      seen[cur] = true;
      cur = succ.at(cur);
    } while (cur != a);
    loops.push_back(std::move(loop));
  }
  // Deterministic order: by smallest node id in the loop.
  for (auto& loop : loops) {
    const auto min_it = std::min_element(loop.begin(), loop.end());
    std::rotate(loop.begin(), min_it, loop.end());
  }
  std::sort(loops.begin(), loops.end(),
            [](const auto& l, const auto& r) { return l.front() < r.front(); });
  return loops;
}

double Mesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles_.at(t);
  return 0.5 * signed_area2(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]);
}

double Mesh::boundary_length() const {
  double len = 0.0;
  for (const auto& [a, b] : boundary_edges_)
    len += std::hypot(nodes_[b].x - nodes_[a].x, nodes_[b].y - nodes_[a].y);
  return len;
}

DiscreteFunction make_function(const Mesh& mesh, Eigen::VectorXd coefficients) {
  if (coefficients.size() != static_cast<Eigen::Index>(mesh.n_nodes()))
    throw DimensionError("coefficient vector of size " +
                         std::to_string(coefficients.size()) +
                         " does not match mesh with " +
                         std::to_string(mesh.n_nodes()) + " nodes");
  if (!coefficients.allFinite())
    throw ValidationError("coefficient vector has non-finite entries");
  return DiscreteFunction{std::move(coefficients), mesh.id()};
}

DiscreteFunction zero_function(const Mesh& mesh) {
  return DiscreteFunction{
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.n_nodes())),
      mesh.id()};
}

std::size_t node_cap() {
  if (const char* env = std::getenv("STEKLOV_NODE_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0)
      throw ParameterError(std::string("STEKLOV_NODE_CAP is not a positive "
                                       "integer: \"") +
                           env + "\"");
    return static_cast<std::size_t>(v);
  }
  return 200000;
}

Mesh generate_disk(double radius, double h) {
  if (!(radius > 0.0)) throw ParameterError("disk radius must be positive");
  if (!(h > 0.0)) throw ParameterError("mesh spacing h must be positive");
  if (!(h < radius))
    throw ParameterError("mesh spacing h must be smaller than the radius");

  const auto m = static_cast<std::size_t>(std::ceil(radius / h));
  const std::size_t total = 1 + 3 * m * (m + 1);
  if (total > node_cap())
    throw ResourceLimitError("disk mesh would need " + std::to_string(total) +
                             " nodes, above the cap of " +
                             std::to_string(node_cap()));

  std::vector<Point2> nodes;
  nodes.reserve(total);
  nodes.push_back({0.0, 0.0});
  std::vector<std::size_t> ring_start(m + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    ring_start[i] = nodes.size();
    const double r = radius * static_cast<double>(i) / static_cast<double>(m);
    const std::size_t count = 6 * i;
    for (std::size_t k = 0; k < count; ++k) {
      const double theta =
          2.0 * M_PI * static_cast<double>(k) / static_cast<double>(count);
      nodes.push_back({r * std::cos(theta), r * std::sin(theta)});
    }
  }

  std::vector<std::array<std::int32_t, 3>> tris;
  // Innermost fan around the center node.
  for (std::int32_t k = 0; k < 6; ++k) {
    const std::int32_t a = static_cast<std::int32_t>(ring_start[1]) + k;
    const std::int32_t b =
        static_cast<std::int32_t>(ring_start[1]) + (k + 1) % 6;
    tris.push_back({a, b, 0});
  }
  // Annulus between ring i and ring i+1, built sector by sector so the strip
  // pattern repeats six times per ring.
  for (std::size_t i = 1; i < m; ++i) {
    const auto ni = static_cast<std::int32_t>(6 * i);
    const auto no = static_cast<std::int32_t>(6 * (i + 1));
    const auto si = static_cast<std::int32_t>(ring_start[i]);
    const auto so = static_cast<std::int32_t>(ring_start[i + 1]);
    for (std::int32_t s = 0; s < 6; ++s) {
      const auto inner = [&](std::int32_t t) {
        return si + (s * static_cast<std::int32_t>(i) + t) % ni;
      };
      const auto outer = [&](std::int32_t t) {
        return so + (s * static_cast<std::int32_t>(i + 1) + t) % no;
      };
      for (std::int32_t t = 0; t <= static_cast<std::int32_t>(i); ++t)
        tris.push_back({outer(t), outer(t + 1), inner(t)});
      for (std::int32_t t = 0; t + 1 <= static_cast<std::int32_t>(i); ++t)
        tris.push_back({outer(t + 1), inner(t + 1), inner(t)});
    }
  }

  std::vector<std::array<std::int32_t, 2>> bedges;
  const auto sm = static_cast<std::int32_t>(ring_start[m]);
  const auto nm = static_cast<std::int32_t>(6 * m);
  for (std::int32_t k = 0; k < nm; ++k)
    bedges.push_back({sm + k, sm + (k + 1) % nm});

  return Mesh(std::move(nodes), std::move(tris), std::move(bedges),
              DomainTag::disk, radius);
}

Mesh generate_square(double side, double h) {
  if (!(side > 0.0)) throw ParameterError("square side must be positive");
  if (!(h > 0.0)) throw ParameterError("mesh spacing h must be positive");

  const auto n = static_cast<std::size_t>(std::ceil(side / h));
  const std::size_t total = (n + 1) * (n + 1);
  if (total > node_cap())
    throw ResourceLimitError("square mesh would need " + std::to_string(total) +
                             " nodes, above the cap of " +
                             std::to_string(node_cap()));

  std::vector<Point2> nodes;
  nodes.reserve(total);
  for (std::size_t iy = 0; iy <= n; ++iy)
    for (std::size_t ix = 0; ix <= n; ++ix)
      nodes.push_back({side * static_cast<double>(ix) / static_cast<double>(n),
                       side * static_cast<double>(iy) / static_cast<double>(n)});

  const auto id = [&](std::size_t ix, std::size_t iy) {
    return static_cast<std::int32_t>(iy * (n + 1) + ix);
  };

  std::vector<std::array<std::int32_t, 3>> tris;
  tris.reserve(2 * n * n);
  for (std::size_t iy = 0; iy < n; ++iy)
    for (std::size_t ix = 0; ix < n; ++ix) {
      const auto v00 = id(ix, iy), v10 = id(ix + 1, iy), v01 = id(ix, iy + 1),
                 v11 = id(ix + 1, iy + 1);
      tris.push_back({v00, v10, v11});
      tris.push_back({v00, v11, v01});
    }

  std::vector<std::array<std::int32_t, 2>> bedges;
  bedges.reserve(4 * n);
  for (std::size_t ix = 0; ix < n; ++ix)
    bedges.push_back({id(ix, 0), id(ix + 1, 0)});
  for (std::size_t iy = 0; iy < n; ++iy)
    bedges.push_back({id(n, iy), id(n, iy + 1)});
  for (std::size_t ix = n; ix > 0; --ix)
    bedges.push_back({id(ix, n), id(ix - 1, n)});
  for (std::size_t iy = n; iy > 0; --iy)
    bedges.push_back({id(0, iy), id(0, iy - 1)});

  return Mesh(std::move(nodes), std::move(tris), std::move(bedges),
              DomainTag::square);
}

Mesh refine(const Mesh& mesh) {
  const std::size_t total = mesh.n_nodes() + mesh.n_edges();
  if (total > node_cap())
    throw ResourceLimitError("refined mesh would need " + std::to_string(total) +
                             " nodes, above the cap of " +
                             std::to_string(node_cap()));

  std::vector<Point2> nodes = mesh.nodes();
  nodes.reserve(total);
  std::unordered_map<std::uint64_t, std::int32_t> midpoint;
  midpoint.reserve(mesh.n_edges());
  const auto mid_of = [&](std::int32_t a, std::int32_t b) {
    const auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const auto& pa = mesh.nodes()[a];
    const auto& pb = mesh.nodes()[b];
    const auto idx = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
    midpoint.emplace(key, idx);
    return idx;
  };

  std::vector<std::array<std::int32_t, 3>> tris;
  tris.reserve(4 * mesh.n_triangles());
  for (const auto& t : mesh.triangles()) {
    const auto mab = mid_of(t[0], t[1]);
    const auto mbc = mid_of(t[1], t[2]);
    const auto mca = mid_of(t[2], t[0]);
    tris.push_back({t[0], mab, mca});
    tris.push_back({mab, t[1], mbc});
    tris.push_back({mca, mbc, t[2]});
    tris.push_back({mab, mbc, mca});
  }

  std::vector<std::array<std::int32_t, 2>> bedges;
  bedges.reserve(2 * mesh.n_boundary_edges());
  for (const auto& [a, b] : mesh.boundary_edges()) {
    const auto mid = mid_of(a, b);
    if (mesh.domain_tag() == DomainTag::disk) {
      Point2& p = nodes[mid];
      const double r = std::hypot(p.x, p.y);
      if (r > 0.0) {
        const double scale = mesh.disk_radius() / r;
        p.x *= scale;
        p.y *= scale;
      }
    }
    bedges.push_back({a, mid});
    bedges.push_back({mid, b});
  }

  return Mesh(std::move(nodes), std::move(tris), std::move(bedges),
              mesh.domain_tag(), mesh.disk_radius());
}

namespace {

class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-empty line; throws ParseError if the stream ends.
  std::string require_line(const std::string& what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    ++line_no_;
    throw ParseError("unexpected end of file, expected " + what, line_no_);
  }

  long line_no() const { return line_no_; }

private:
  std::istream& in_;
  long line_no_ = 0;
};

}  // namespace

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open mesh file " + path, 0);
  LineReader reader(in);

  if (reader.require_line("header 'steklov-mesh v1'") != "steklov-mesh v1")
    throw ParseError("bad header, expected 'steklov-mesh v1'",
                     reader.line_no());

  const auto parse_count = [&](const std::string& keyword) {
    const std::string line = reader.require_line("'" + keyword + " <count>'");
    std::istringstream ss(line);
    std::string word;
    long long count = -1;
    if (!(ss >> word >> count) || word != keyword || count < 0 ||
        !(ss >> std::ws).eof())
      throw ParseError("expected '" + keyword + " <count>', got \"" + line +
                           "\"",
                       reader.line_no());
    return static_cast<std::size_t>(count);
  };

  const std::size_t n_nodes = parse_count("nodes");
  std::vector<Point2> nodes;
  nodes.reserve(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const std::string line = reader.require_line("node coordinates");
    std::istringstream ss(line);
    Point2 p;
    if (!(ss >> p.x >> p.y) || !(ss >> std::ws).eof())
      throw ParseError("expected two coordinates, got \"" + line + "\"",
                       reader.line_no());
    nodes.push_back(p);
  }

  const std::size_t n_tris = parse_count("triangles");
  std::vector<std::array<std::int32_t, 3>> tris;
  tris.reserve(n_tris);
  for (std::size_t i = 0; i < n_tris; ++i) {
    const std::string line = reader.require_line("triangle node ids");
    std::istringstream ss(line);
    std::array<std::int32_t, 3> t{};
    if (!(ss >> t[0] >> t[1] >> t[2]) || !(ss >> std::ws).eof())
      throw ParseError("expected three node ids, got \"" + line + "\"",
                       reader.line_no());
    tris.push_back(t);
  }

  const std::size_t n_bedges = parse_count("boundary");
  std::vector<std::array<std::int32_t, 2>> bedges;
  bedges.reserve(n_bedges);
  for (std::size_t i = 0; i < n_bedges; ++i) {
    const std::string line = reader.require_line("boundary edge node ids");
    std::istringstream ss(line);
    std::array<std::int32_t, 2> e{};
    if (!(ss >> e[0] >> e[1]) || !(ss >> std::ws).eof())
      throw ParseError("expected two node ids, got \"" + line + "\"",
                       reader.line_no());
    bedges.push_back(e);
  }

  return Mesh(std::move(nodes), std::move(tris), std::move(bedges),
              DomainTag::file);
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "steklov-mesh v1\n";
  out << "nodes " << mesh.n_nodes() << "\n";
  for (const auto& p : mesh.nodes())
    out << detail::format_double(p.x) << " " << detail::format_double(p.y) << "\n";
  out << "triangles " << mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles())
    out << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "boundary " << mesh.n_boundary_edges() << "\n";
  for (const auto& [a, b] : mesh.boundary_edges())
    out << a << " " << b << "\n";
  if (!out) throw Error("failed writing mesh to " + path);
}

}  // namespace steklov
