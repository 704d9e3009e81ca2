#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "ccbm/data/trace_rule.hpp"
#include "ccbm/geometry/curve.hpp"

namespace ccbm::data {

/// Dirichlet samples f(theta) on the unit circle plus the prescribed Neumann rule.
/// Samples produced by generate_measurement alternate between mesh vertices and
/// edge midpoints of the data mesh, so N is even.
struct CauchyData {
  TraceRule g_rule;
  std::vector<double> theta;
  std::vector<Eigen::Vector2d> f;
  double noise_level = 0.0;
  std::uint64_t rng_seed = 0;

  [[nodiscard]] std::size_t size() const { return theta.size(); }
  /// Throws ArgumentError unless theta is strictly increasing in [0, 2pi) and sizes agree.
  void validate() const;
};

/// Discrete L2 norm on the circle with weights (theta_{k+1} - theta_{k-1}) / 2.
double trace_l2_norm(const CauchyData& data);

/// Closed integral of f . n from the samples by Simpson's rule on consecutive
/// triples. On vertex/midpoint samples this is the exact flux of the piecewise
/// quadratic trace through the polygonal boundary.
double trace_flux(const CauchyData& data);

/// f + delta (|f| / |xi|) xi with xi standard normal per sample component, so
/// that the relative perturbation in trace_l2_norm is exactly delta.
/// delta = 0 returns the input unchanged.
CauchyData add_noise(const CauchyData& data, double delta, std::uint64_t seed);

/// Periodic cubic spline through the samples.
class TraceInterpolant {
 public:
  explicit TraceInterpolant(const CauchyData& data);
  /// theta is wrapped into [0, 2pi).
  [[nodiscard]] Eigen::Vector2d operator()(double theta) const;

 private:
  std::vector<double> theta_;
  std::vector<Eigen::Vector2d> f_;
  std::vector<Eigen::Vector2d> m_;  // second derivatives
};

Eigen::Vector2d interpolate_trace(const CauchyData& data, double theta);

/// Header "N delta seed", then N lines "theta fx fy".
void write_cauchy_data(std::ostream& os, const CauchyData& data);
void write_cauchy_data(const std::filesystem::path& path, const CauchyData& data);
/// The g rule is not part of the file; pass it separately.
CauchyData read_cauchy_data(std::istream& is, const TraceRule& g_rule = {});
CauchyData read_cauchy_data(const std::filesystem::path& path, const TraceRule& g_rule = {});

struct MeasurementOptions {
  int sigma_nodes = 400;
  int gamma_nodes = 280;
  /// Angle of the first outer node. A quarter of the node spacing keeps every
  /// data node away from the nodes of inversion meshes and keeps a vertex first
  /// in the sorted samples.
  double sigma_phase = 0.0;
};

/// Options for data meshes refined `factor` times relative to an inversion
/// mesh with the given node counts.
MeasurementOptions measurement_options(int inversion_sigma_nodes, int inversion_gamma_nodes, int factor);

struct Measurement {
  CauchyData data;
  /// Flux of the discrete velocity through the outer boundary.
  double flux = 0.0;
  int mesh_vertices = 0;
  int mesh_triangles = 0;
  double mesh_h = 0.0;
};

/// Solves the mixed Dirichlet-Neumann problem around the true obstacles on a
/// dedicated mesh and samples the velocity trace at every P2 node of the
/// outer boundary.
Measurement generate_measurement(std::span<const geometry::BoundaryCurve> truth, const TraceRule& g, double alpha,
                                 const MeasurementOptions& options = {});

/// Number of outer boundary vertices of the mesh the samples came from.
int source_sigma_nodes(const CauchyData& data);

/// Throws ConfigurationError unless the data came from a mesh with at least
/// twice the outer boundary resolution of the inversion mesh.
void check_no_inverse_crime(const CauchyData& data, int inversion_sigma_nodes);

}  // namespace ccbm::data
