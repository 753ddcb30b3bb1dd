#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace pointform {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Thrown when a requested space would exceed the configured memory budget.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by iterative procedures that fail to reach their tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// Sparse complex operator on a finite space.
///
/// Explicit zeros are pruned on construction and the hermitian flag is
/// computed from the entries (max |M - M^dagger| <= kHermitianTolerance), never
/// asserted by the caller.
class OperatorMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-14;

  OperatorMatrix() = default;
  explicit OperatorMatrix(SparseMatrix m);

  static OperatorMatrix zero(std::size_t dim);
  static OperatorMatrix identity(std::size_t dim);
  static OperatorMatrix diagonal(std::span<const double> diag);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const SparseMatrix& matrix() const { return m_; }
  bool hermitian() const { return hermitian_; }
  std::size_t nonzeros() const { return static_cast<std::size_t>(m_.nonZeros()); }

  DenseMatrix dense() const { return DenseMatrix(m_); }
  OperatorMatrix adjoint() const;

  Vector apply(const Vector& v) const { return m_ * v; }

  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator*(cplx s, const OperatorMatrix& a);

 private:
  SparseMatrix m_;
  bool hermitian_ = true;
};

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix anticommutator(const OperatorMatrix& a, const OperatorMatrix& b);

/// Tensor product a (x) b with a the slow (outer) index.
OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b);

/// Largest |entry|.
double max_abs(const OperatorMatrix& m);
double max_abs(const DenseMatrix& m);

/// Largest |entry| of P m P, where P is the diagonal 0/1 projector given by `mask`.
double max_abs_on(const OperatorMatrix& m, const std::vector<bool>& mask);

/// Largest |M - M^dagger| entry.
double hermiticity_defect(const SparseMatrix& m);

/// Restriction of `m` to the rows and columns listed in `indices` (in order).
DenseMatrix restrict_dense(const OperatorMatrix& m, std::span<const std::size_t> indices);

/// Diagonal 0/1 projector built from a mask.
OperatorMatrix mask_projector(const std::vector<bool>& mask);

}  // namespace pointform
