#pragma once

#include <complex>
#include <iosfwd>

#include <Eigen/Core>

namespace ccbm::fem {

using Complex = std::complex<double>;

/// Real P2 velocity (2 per node, interleaved) and P1 pressure coefficients.
struct RealStokesField {
  Eigen::VectorXd velocity;
  Eigen::VectorXd pressure;
};

struct ComplexStokesField {
  Eigen::VectorXcd velocity;
  Eigen::VectorXcd pressure;

  [[nodiscard]] RealStokesField real() const { return {velocity.real(), pressure.real()}; }
  [[nodiscard]] RealStokesField imag() const { return {velocity.imag(), pressure.imag()}; }
};

/// "dof re im" lines, velocity dofs first then pressure.
void write_field(std::ostream& os, const ComplexStokesField& field);

}  // namespace ccbm::fem
