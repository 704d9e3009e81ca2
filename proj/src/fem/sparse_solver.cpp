#include "ccbm/fem/sparse_solver.hpp"

#include <array>
#include <string>
#include <type_traits>

#include <umfpack.h>

#include "ccbm/errors.hpp"

namespace ccbm::fem {

namespace {

template <class Scalar>
constexpr bool kIsComplex = !std::is_same_v<Scalar, double>;

template <class Scalar>
const double* values(const Eigen::SparseMatrix<Scalar>& m) {
  return reinterpret_cast<const double*>(m.valuePtr());
}

template <class Scalar>
void free_numeric(void** numeric) {
  if (*numeric == nullptr) return;
  if constexpr (kIsComplex<Scalar>) {
    umfpack_zi_free_numeric(numeric);
  } else {
    umfpack_di_free_numeric(numeric);
  }
  *numeric = nullptr;
}

std::string status_text(int status) {
  switch (status) {
    case UMFPACK_WARNING_singular_matrix:
      return "matrix is singular";
    case UMFPACK_ERROR_out_of_memory:
      return "out of memory";
    case UMFPACK_ERROR_invalid_matrix:
      return "invalid matrix";
    default:
      return "UMFPACK status " + std::to_string(status);
  }
}

}  // namespace

template <class Scalar>
SparseLU<Scalar>::SparseLU(Eigen::SparseMatrix<Scalar> matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw ArgumentError("sparse solve: matrix is not square");
  matrix_.makeCompressed();
  const int n = static_cast<int>(matrix_.rows());
  if (n == 0) return;
  std::array<double, UMFPACK_CONTROL> control{};
  std::array<double, UMFPACK_INFO> info{};
  void* symbolic = nullptr;
  const int* ap = matrix_.outerIndexPtr();
  const int* ai = matrix_.innerIndexPtr();
  int status = 0;
  if constexpr (kIsComplex<Scalar>) {
    umfpack_zi_defaults(control.data());
    status = umfpack_zi_symbolic(n, n, ap, ai, values(matrix_), nullptr, &symbolic, control.data(), info.data());
    if (status == UMFPACK_OK) {
      status = umfpack_zi_numeric(ap, ai, values(matrix_), nullptr, symbolic, &numeric_, control.data(), info.data());
    }
    umfpack_zi_free_symbolic(&symbolic);
  } else {
    umfpack_di_defaults(control.data());
    status = umfpack_di_symbolic(n, n, ap, ai, values(matrix_), &symbolic, control.data(), info.data());
    if (status == UMFPACK_OK) {
      status = umfpack_di_numeric(ap, ai, values(matrix_), symbolic, &numeric_, control.data(), info.data());
    }
    umfpack_di_free_symbolic(&symbolic);
  }
  rcond_ = info[UMFPACK_RCOND];
  if (status != UMFPACK_OK) {
    free_numeric<Scalar>(&numeric_);
    throw SolverError("factorization failed: " + status_text(status));
  }
  if (!(rcond_ >= kSingularRcond)) {
    free_numeric<Scalar>(&numeric_);
    throw SolverError("factorization failed: matrix is numerically singular (rcond " + std::to_string(rcond_) + ")");
  }
}

template <class Scalar>
SparseLU<Scalar>::~SparseLU() {
  free_numeric<Scalar>(&numeric_);
}

template <class Scalar>
SparseLU<Scalar>::SparseLU(SparseLU&& other) noexcept
    : matrix_(std::move(other.matrix_)), numeric_(other.numeric_), rcond_(other.rcond_) {
  other.numeric_ = nullptr;
}

template <class Scalar>
SparseLU<Scalar>& SparseLU<Scalar>::operator=(SparseLU&& other) noexcept {
  if (this != &other) {
    free_numeric<Scalar>(&numeric_);
    matrix_ = std::move(other.matrix_);
    numeric_ = other.numeric_;
    rcond_ = other.rcond_;
    other.numeric_ = nullptr;
  }
  return *this;
}

template <class Scalar>
typename SparseLU<Scalar>::Vector SparseLU<Scalar>::raw_solve(const Vector& rhs) const {
  Vector x(rhs.size());
  if (rhs.size() == 0) return x;
  std::array<double, UMFPACK_CONTROL> control{};
  std::array<double, UMFPACK_INFO> info{};
  const int* ap = matrix_.outerIndexPtr();
  const int* ai = matrix_.innerIndexPtr();
  int status = 0;
  if constexpr (kIsComplex<Scalar>) {
    umfpack_zi_defaults(control.data());
    status = umfpack_zi_solve(UMFPACK_A, ap, ai, values(matrix_), nullptr, reinterpret_cast<double*>(x.data()), nullptr,
                              reinterpret_cast<const double*>(rhs.data()), nullptr, numeric_, control.data(), info.data());
  } else {
    umfpack_di_defaults(control.data());
    status = umfpack_di_solve(UMFPACK_A, ap, ai, values(matrix_), x.data(), rhs.data(), numeric_, control.data(),
                              info.data());
  }
  if (status != UMFPACK_OK) throw SolverError("solve failed: " + status_text(status));
  return x;
}

template <class Scalar>
typename SparseLU<Scalar>::Vector SparseLU<Scalar>::solve(const Vector& rhs) const {
  if (rhs.size() != matrix_.rows()) throw ArgumentError("sparse solve: right-hand side has the wrong size");
  const double bnorm = rhs.norm();
  Vector x = raw_solve(rhs);
  if (bnorm == 0.0) return x;
  double rel = 0.0;
  for (int pass = 0; pass < 3; ++pass) {
    const Vector r = rhs - matrix_ * x;
    rel = r.norm() / bnorm;
    if (rel <= kResidualTolerance) return x;
    x += raw_solve(r);
  }
  rel = (rhs - matrix_ * x).norm() / bnorm;
  if (rel > kResidualTolerance) throw SolverError("solve failed: relative residual " + std::to_string(rel));
  return x;
}

template <class Scalar>
typename SparseLU<Scalar>::Vector SparseLU<Scalar>::solve_conjugate(const Vector& rhs) const {
  if constexpr (kIsComplex<Scalar>) {
    return solve(rhs.conjugate()).conjugate();
  } else {
    return solve(rhs);
  }
}

template class SparseLU<double>;
template class SparseLU<std::complex<double>>;

Eigen::VectorXd solve_linear(const RealSystem& system) { return RealLU(system.matrix).solve(system.rhs); }

Eigen::VectorXcd solve_linear(const ComplexSystem& system) { return ComplexLU(system.matrix).solve(system.rhs); }

}  // namespace ccbm::fem
