#include "ccbm/data/cauchy_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "ccbm/errors.hpp"
#include "ccbm/fem/assembly.hpp"
#include "ccbm/fem/postprocess.hpp"
#include "ccbm/geometry/mesher.hpp"
#include "ccbm/random.hpp"

namespace ccbm::data {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

// theta_{k+1} - theta_k with wrap-around at the end.
double gap(const std::vector<double>& theta, std::size_t k) {
  const std::size_t n = theta.size();
  return k + 1 < n ? theta[k + 1] - theta[k] : theta[0] + kTwoPi - theta[k];
}

}  // namespace

void CauchyData::validate() const {
  if (theta.size() != f.size()) throw ArgumentError("Cauchy data: theta and f sizes differ");
  if (theta.empty()) throw ArgumentError("Cauchy data: no samples");
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!(theta[k] >= 0.0 && theta[k] < kTwoPi)) throw ArgumentError("Cauchy data: theta outside [0, 2pi)");
    if (k > 0 && !(theta[k] > theta[k - 1])) throw ArgumentError("Cauchy data: theta not strictly increasing");
    if (!f[k].allFinite()) throw ArgumentError("Cauchy data: non-finite sample");
  }
  if (noise_level < 0.0) throw ArgumentError("Cauchy data: negative noise level");
}

double trace_l2_norm(const CauchyData& data) {
  const std::size_t n = data.size();
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 0.5 * (gap(data.theta, k) + gap(data.theta, (k + n - 1) % n));
    sum += w * data.f[k].squaredNorm();
  }
  return std::sqrt(sum);
}

double trace_flux(const CauchyData& data) {
  const std::size_t n = data.size();
  if (n < 2 || n % 2 != 0) throw ArgumentError("trace_flux needs an even number of samples");
  double flux = 0.0;
  for (std::size_t a = 0; a < n; a += 2) {
    const std::size_t m = a + 1, b = (a + 2) % n;
    const double span = gap(data.theta, a) + gap(data.theta, m);
    const double mid = data.theta[a] + 0.5 * span;
    const Eigen::Vector2d normal(std::cos(mid), std::sin(mid));
    const double len = 2.0 * std::sin(0.5 * span);
    flux += len / 6.0 * (data.f[a] + 4.0 * data.f[m] + data.f[b]).dot(normal);
  }
  return flux;
}

CauchyData add_noise(const CauchyData& data, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw ArgumentError("noise level must be >= 0");
  CauchyData out = data;
  out.rng_seed = seed;
  if (delta == 0.0) return out;
  std::mt19937_64 rng = make_rng(seed, RandomStream::noise);
  std::normal_distribution<double> normal(0.0, 1.0);
  CauchyData xi = data;
  for (auto& v : xi.f) {
    const double a = normal(rng);
    const double b = normal(rng);
    v = Eigen::Vector2d(a, b);
  }
  const double scale = delta * trace_l2_norm(data) / trace_l2_norm(xi);
  for (std::size_t k = 0; k < out.f.size(); ++k) out.f[k] += scale * xi.f[k];
  out.noise_level = delta;
  return out;
}

TraceInterpolant::TraceInterpolant(const CauchyData& data) : theta_(data.theta), f_(data.f) {
  data.validate();
  const int n = static_cast<int>(theta_.size());
  m_.assign(static_cast<std::size_t>(n), Eigen::Vector2d::Zero());
  if (n < 3) return;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::MatrixX2d rhs(n, 2);
  for (int i = 0; i < n; ++i) {
    const std::size_t ip = static_cast<std::size_t>((i + 1) % n), im = static_cast<std::size_t>((i + n - 1) % n);
    const double h0 = gap(theta_, im), h1 = gap(theta_, static_cast<std::size_t>(i));
    trips.emplace_back(i, static_cast<int>(im), h0);
    trips.emplace_back(i, i, 2.0 * (h0 + h1));
    trips.emplace_back(i, static_cast<int>(ip), h1);
    rhs.row(i) = 6.0 * ((f_[ip] - f_[static_cast<std::size_t>(i)]) / h1 - (f_[static_cast<std::size_t>(i)] - f_[im]) / h0).transpose();
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SolverError("spline system factorization failed");
  const Eigen::MatrixX2d m = ldlt.solve(rhs);
  for (int i = 0; i < n; ++i) m_[static_cast<std::size_t>(i)] = m.row(i).transpose();
}

Eigen::Vector2d TraceInterpolant::operator()(double theta) const {
  const std::size_t n = theta_.size();
  if (n == 1) return f_[0];
  double t = wrap(theta);
  std::size_t i = 0;
  if (t < theta_.front()) {
    i = n - 1;
    t += kTwoPi;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(theta_.begin(), theta_.end(), t) - theta_.begin()) - 1;
  }
  const std::size_t j = (i + 1) % n;
  const double h = gap(theta_, i);
  const double a = theta_[i] + h - t;  // distance to the right knot
  const double b = t - theta_[i];
  if (b == 0.0) return f_[i];
  return (m_[i] * a * a * a + m_[j] * b * b * b) / (6.0 * h) + (f_[i] / h - m_[i] * h / 6.0) * a +
         (f_[j] / h - m_[j] * h / 6.0) * b;
}

Eigen::Vector2d interpolate_trace(const CauchyData& data, double theta) { return TraceInterpolant(data)(theta); }

void write_cauchy_data(std::ostream& os, const CauchyData& data) {
  const auto old = os.precision(17);
  os << data.size() << ' ' << data.noise_level << ' ' << data.rng_seed << '\n';
  for (std::size_t k = 0; k < data.size(); ++k) os << data.theta[k] << ' ' << data.f[k].x() << ' ' << data.f[k].y() << '\n';
  os.precision(old);
}

void write_cauchy_data(const std::filesystem::path& path, const CauchyData& data) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  write_cauchy_data(os, data);
}

CauchyData read_cauchy_data(std::istream& is, const TraceRule& g_rule) {
  CauchyData data;
  data.g_rule = g_rule;
  std::size_t n = 0;
  if (!(is >> n >> data.noise_level >> data.rng_seed)) throw ArgumentError("Cauchy data file: bad header");
  data.theta.resize(n);
  data.f.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(is >> data.theta[k] >> data.f[k].x() >> data.f[k].y())) throw ArgumentError("Cauchy data file: truncated");
  }
  data.validate();
  return data;
}

CauchyData read_cauchy_data(const std::filesystem::path& path, const TraceRule& g_rule) {
  std::ifstream is(path);
  if (!is) throw ArgumentError("cannot read " + path.string());
  return read_cauchy_data(is, g_rule);
}

MeasurementOptions measurement_options(int inversion_sigma_nodes, int inversion_gamma_nodes, int factor) {
  if (factor < 2) throw ConfigurationError("data refinement factor must be >= 2");
  MeasurementOptions o;
  o.sigma_nodes = inversion_sigma_nodes * factor;
  o.gamma_nodes = inversion_gamma_nodes * factor;
  o.sigma_phase = 0.5 * std::numbers::pi / o.sigma_nodes;
  return o;
}

Measurement generate_measurement(std::span<const geometry::BoundaryCurve> truth, const TraceRule& g, double alpha,
                                 const MeasurementOptions& options) {
  geometry::MeshOptions mo;
  mo.sigma_nodes = options.sigma_nodes;
  mo.gamma_nodes = options.gamma_nodes;
  mo.sigma_phase = options.sigma_phase;
  const geometry::TriangleMesh mesh = geometry::generate_annulus_mesh(truth, mo);
  const fem::DofMap dofs = fem::build_dofmap(mesh);
  const fem::RealStokesField field = fem::solve_sparse(fem::assemble_mixed_neumann(mesh, dofs, alpha, g.function()), dofs);
  const Eigen::VectorXcd vel = field.velocity.cast<fem::Complex>();

  Measurement m;
  m.flux = fem::boundary_integral_flux(mesh, dofs, vel, geometry::BoundaryTag::sigma).real();
  m.mesh_vertices = mesh.num_vertices();
  m.mesh_triangles = mesh.num_triangles();
  m.mesh_h = mesh.h_target;
  std::vector<std::pair<double, Eigen::Vector2d>> samples;
  for (int node : dofs.sigma_nodes) {
    const geometry::Point& x = dofs.node_coords[static_cast<std::size_t>(node)];
    samples.emplace_back(wrap(std::atan2(x.y(), x.x())),
                         Eigen::Vector2d(field.velocity[fem::DofMap::velocity_dof(node, 0)],
                                         field.velocity[fem::DofMap::velocity_dof(node, 1)]));
  }
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  m.data.g_rule = g;
  for (const auto& [th, v] : samples) {
    m.data.theta.push_back(th);
    m.data.f.push_back(v);
  }
  m.data.validate();
  return m;
}

int source_sigma_nodes(const CauchyData& data) { return static_cast<int>(data.size() / 2); }

void check_no_inverse_crime(const CauchyData& data, int inversion_sigma_nodes) {
  if (source_sigma_nodes(data) < 2 * inversion_sigma_nodes) {
    throw ConfigurationError("inverse crime guard: data come from a mesh with " + std::to_string(source_sigma_nodes(data)) +
                             " outer boundary nodes, which is not at least twice the inversion mesh's " +
                             std::to_string(inversion_sigma_nodes) + "; generate the data on a finer mesh");
  }
}

}  // namespace ccbm::data
