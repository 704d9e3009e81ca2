#pragma once

#include <complex>
#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace ccbm::fem {

template <class Scalar>
struct LinearSystem {
  Eigen::SparseMatrix<Scalar> matrix;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs;
};

using RealSystem = LinearSystem<double>;
using ComplexSystem = LinearSystem<std::complex<double>>;

/// Relative residual every solve must reach.
inline constexpr double kResidualTolerance = 1e-10;
/// Factorizations with a smaller reciprocal pivot ratio count as singular.
inline constexpr double kSingularRcond = 1e-13;

/// Sparse LU factorization (UMFPACK). Throws SolverError on singular or
/// near-singular matrices and when a solve misses kResidualTolerance after
/// iterative refinement.
template <class Scalar>
class SparseLU {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit SparseLU(Eigen::SparseMatrix<Scalar> matrix);
  ~SparseLU();
  SparseLU(SparseLU&&) noexcept;
  SparseLU& operator=(SparseLU&&) noexcept;
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;

  [[nodiscard]] Vector solve(const Vector& rhs) const;
  /// Solves conj(A) x = rhs with the same factors.
  [[nodiscard]] Vector solve_conjugate(const Vector& rhs) const;
  [[nodiscard]] double rcond() const { return rcond_; }
  [[nodiscard]] const Eigen::SparseMatrix<Scalar>& matrix() const { return matrix_; }

 private:
  Vector raw_solve(const Vector& rhs) const;

  Eigen::SparseMatrix<Scalar> matrix_;
  void* numeric_ = nullptr;
  double rcond_ = 0.0;
};

using RealLU = SparseLU<double>;
using ComplexLU = SparseLU<std::complex<double>>;

/// Factor and solve once.
Eigen::VectorXd solve_linear(const RealSystem& system);
Eigen::VectorXcd solve_linear(const ComplexSystem& system);

}  // namespace ccbm::fem
