#include "ccbm/fem/dofmap.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "ccbm/errors.hpp"
#include "ccbm/fem/element.hpp"

namespace ccbm::fem {

namespace {

std::uint64_t key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

}  // namespace

void DofMap::check_mesh(const TriangleMesh& mesh) const {
  if (mesh.num_vertices() != num_vertices || mesh.num_triangles() != num_triangles) {
    throw ArgumentError("dof map was built for a different mesh");
  }
}

DofMap build_dofmap(const TriangleMesh& mesh) {
  DofMap d;
  d.num_vertices = mesh.num_vertices();
  d.num_triangles = mesh.num_triangles();
  d.node_coords = mesh.vertices;
  std::unordered_map<std::uint64_t, int> edge_node;
  edge_node.reserve(mesh.triangles.size() * 2);
  // Owning triangle and local edge of each directed edge, for boundary lookup.
  std::unordered_map<std::uint64_t, std::pair<int, int>> owner;
  owner.reserve(mesh.triangles.size() * 3);
  d.cell_nodes.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    auto& nodes = d.cell_nodes[t];
    for (int i = 0; i < 3; ++i) nodes[static_cast<std::size_t>(i)] = tri[static_cast<std::size_t>(i)];
    for (int e = 0; e < 3; ++e) {
      const int a = tri[static_cast<std::size_t>(kLocalEdges[static_cast<std::size_t>(e)][0])];
      const int b = tri[static_cast<std::size_t>(kLocalEdges[static_cast<std::size_t>(e)][1])];
      const auto [it, fresh] = edge_node.emplace(key(a, b), static_cast<int>(d.node_coords.size()));
      if (fresh) {
        d.node_coords.push_back(0.5 * (mesh.vertices[static_cast<std::size_t>(a)] + mesh.vertices[static_cast<std::size_t>(b)]));
      }
      nodes[static_cast<std::size_t>(3 + e)] = it->second;
      owner[(static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b)] = {static_cast<int>(t), e};
    }
  }
  d.num_nodes = static_cast<int>(d.node_coords.size());
  std::vector<char> on_sigma(static_cast<std::size_t>(d.num_nodes), 0), on_gamma(on_sigma);
  for (const auto& e : mesh.boundary_edges) {
    const auto it = owner.find((static_cast<std::uint64_t>(e.a) << 32) | static_cast<std::uint64_t>(e.b));
    if (it == owner.end()) throw MeshError("boundary edge without a triangle on its left");
    const auto [t, le] = it->second;
    BoundaryEdgeDofs be;
    be.a = e.a;
    be.b = e.b;
    be.mid = d.cell_nodes[static_cast<std::size_t>(t)][static_cast<std::size_t>(3 + le)];
    be.tag = e.tag;
    be.loop = e.loop;
    be.triangle = t;
    be.local_a = kLocalEdges[static_cast<std::size_t>(le)][0];
    be.local_b = kLocalEdges[static_cast<std::size_t>(le)][1];
    d.boundary.push_back(be);
    auto& flag = e.tag == BoundaryTag::sigma ? on_sigma : on_gamma;
    for (int n : {be.a, be.mid, be.b}) flag[static_cast<std::size_t>(n)] = 1;
  }
  d.constrained.assign(static_cast<std::size_t>(d.num_dofs()), 0);
  for (int n = 0; n < d.num_nodes; ++n) {
    if (on_sigma[static_cast<std::size_t>(n)]) d.sigma_nodes.push_back(n);
    if (on_gamma[static_cast<std::size_t>(n)]) {
      d.gamma_nodes.push_back(n);
      d.constrained[static_cast<std::size_t>(DofMap::velocity_dof(n, 0))] = 1;
      d.constrained[static_cast<std::size_t>(DofMap::velocity_dof(n, 1))] = 1;
    }
  }
  return d;
}

}  // namespace ccbm::fem
