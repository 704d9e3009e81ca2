#include "ccbm/fem/field.hpp"

#include <iomanip>
#include <ostream>

namespace ccbm::fem {

void write_field(std::ostream& os, const ComplexStokesField& field) {
  const auto old = os.precision(17);
  Eigen::Index dof = 0;
  for (const Eigen::VectorXcd* part : {&field.velocity, &field.pressure}) {
    for (Eigen::Index i = 0; i < part->size(); ++i, ++dof) {
      os << dof << ' ' << (*part)[i].real() << ' ' << (*part)[i].imag() << '\n';
    }
  }
  os.precision(old);
}

}  // namespace ccbm::fem
