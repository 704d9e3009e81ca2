#include "ccbm/geometry/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "ccbm/errors.hpp"

namespace ccbm::geometry {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << std::setprecision(17);
  return os;
}

}  // namespace

void write_mesh(std::ostream& os, const TriangleMesh& mesh) {
  const auto precision = os.precision(17);
  os << mesh.vertices.size() << ' ' << mesh.triangles.size() << ' ' << mesh.boundary_edges.size() << '\n';
  for (const Point& p : mesh.vertices) os << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges) {
    os << e.a << ' ' << e.b << ' ' << (e.tag == BoundaryTag::sigma ? "SIGMA" : "GAMMA") << ' ' << e.loop << '\n';
  }
  os.precision(precision);
}

TriangleMesh read_mesh(std::istream& is) {
  std::size_t nv = 0, nt = 0, ne = 0;
  if (!(is >> nv >> nt >> ne)) throw MeshError("mesh file: bad header");
  TriangleMesh mesh;
  mesh.vertices.resize(nv);
  mesh.triangles.resize(nt);
  for (auto& p : mesh.vertices) {
    if (!(is >> p.x() >> p.y())) throw MeshError("mesh file: truncated vertex list");
  }
  for (auto& t : mesh.triangles) {
    if (!(is >> t[0] >> t[1] >> t[2])) throw MeshError("mesh file: truncated triangle list");
  }
  for (std::size_t i = 0; i < ne; ++i) {
    BoundaryEdge e;
    std::string tag;
    if (!(is >> e.a >> e.b >> tag >> e.loop)) throw MeshError("mesh file: truncated edge list");
    if (tag == "SIGMA") {
      e.tag = BoundaryTag::sigma;
    } else if (tag == "GAMMA") {
      e.tag = BoundaryTag::gamma;
    } else {
      throw MeshError("mesh file: unknown boundary tag " + tag);
    }
    mesh.boundary_edges.push_back(e);
  }
  const auto check = [&](int v) {
    if (v < 0 || static_cast<std::size_t>(v) >= nv) throw MeshError("mesh file: vertex index out of range");
  };
  for (const auto& t : mesh.triangles) {
    for (int v : t) check(v);
  }
  for (const auto& e : mesh.boundary_edges) {
    check(e.a);
    check(e.b);
  }
  return mesh;
}

void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh) {
  auto os = open_out(path);
  write_mesh(os, mesh);
}

TriangleMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw MeshError("cannot read " + path.string());
  return read_mesh(is);
}

void write_polyline(const std::filesystem::path& path, std::span<const Point> loop) {
  auto os = open_out(path);
  for (const Point& p : loop) os << p.x() << ' ' << p.y() << '\n';
}

void write_polylines(const std::filesystem::path& path, std::span<const Polyline> loops) {
  auto os = open_out(path);
  for (std::size_t l = 0; l < loops.size(); ++l) {
    if (l > 0) os << '\n';
    for (const Point& p : loops[l]) os << p.x() << ' ' << p.y() << '\n';
  }
}

std::vector<Polyline> read_polylines(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path.string());
  std::vector<Polyline> out(1);
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    double x = 0.0, y = 0.0;
    if (ls >> x >> y) {
      out.back().emplace_back(x, y);
    } else if (!out.back().empty()) {
      out.emplace_back();
    }
  }
  if (out.back().empty()) out.pop_back();
  return out;
}

}  // namespace ccbm::geometry
