#pragma once

#include <filesystem>
#include <iosfwd>

#include "ccbm/geometry/mesh.hpp"

namespace ccbm::geometry {

/// Text format: "V T E", then V lines "x y", T lines "i j k" and E lines
/// "i j TAG loop_id" with TAG one of SIGMA, GAMMA.
void write_mesh(std::ostream& os, const TriangleMesh& mesh);
TriangleMesh read_mesh(std::istream& is);
void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh);
TriangleMesh read_mesh(const std::filesystem::path& path);

/// One "x y" line per vertex.
void write_polyline(const std::filesystem::path& path, std::span<const Point> loop);
/// Several loops separated by blank lines.
void write_polylines(const std::filesystem::path& path, std::span<const Polyline> loops);
std::vector<Polyline> read_polylines(const std::filesystem::path& path);

}  // namespace ccbm::geometry
