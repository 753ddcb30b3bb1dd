#include "pointform/operator_matrix.hpp"

#include <algorithm>
#include <cmath>

namespace pointform {

namespace {

SparseMatrix pruned(SparseMatrix m) {
  m.prune([](Eigen::Index, Eigen::Index, const cplx& v) { return v != cplx(0.0, 0.0); });
  m.makeCompressed();
  return m;
}

}  // namespace

OperatorMatrix::OperatorMatrix(SparseMatrix m) : m_(pruned(std::move(m))) {
  if (m_.rows() != m_.cols()) {
    throw std::invalid_argument("OperatorMatrix must be square");
  }
  hermitian_ = hermiticity_defect(m_) <= kHermitianTolerance;
}

OperatorMatrix OperatorMatrix::zero(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return OperatorMatrix(SparseMatrix(n, n));
}

OperatorMatrix OperatorMatrix::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  SparseMatrix m(n, n);
  m.setIdentity();
  return OperatorMatrix(std::move(m));
}

OperatorMatrix OperatorMatrix::diagonal(std::span<const double> diag) {
  const auto n = static_cast<Eigen::Index>(diag.size());
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(diag.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, cplx(diag[static_cast<std::size_t>(i)], 0.0));
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return OperatorMatrix(std::move(m));
}

OperatorMatrix OperatorMatrix::adjoint() const {
  return OperatorMatrix(SparseMatrix(m_.adjoint()));
}

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  return OperatorMatrix(SparseMatrix(a.m_ + b.m_));
}

OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  return OperatorMatrix(SparseMatrix(a.m_ - b.m_));
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  return OperatorMatrix(SparseMatrix(a.m_ * b.m_));
}

OperatorMatrix operator*(cplx s, const OperatorMatrix& a) {
  return OperatorMatrix(SparseMatrix(s * a.m_));
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  return a * b - b * a;
}

OperatorMatrix anticommutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  return a * b + b * a;
}

OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b) {
  const auto& A = a.matrix();
  const auto& B = b.matrix();
  const Eigen::Index nb = B.rows();
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() * B.nonZeros()));
  for (Eigen::Index i = 0; i < A.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator ia(A, i); ia; ++ia) {
      for (Eigen::Index k = 0; k < B.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator ib(B, k); ib; ++ib) {
          t.emplace_back(ia.row() * nb + ib.row(), ia.col() * nb + ib.col(),
                         ia.value() * ib.value());
        }
      }
    }
  }
  SparseMatrix m(A.rows() * nb, A.cols() * nb);
  m.setFromTriplets(t.begin(), t.end());
  return OperatorMatrix(std::move(m));
}

double max_abs(const OperatorMatrix& m) {
  double best = 0.0;
  const auto& M = m.matrix();
  for (Eigen::Index i = 0; i < M.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(M, i); it; ++it) {
      best = std::max(best, std::abs(it.value()));
    }
  }
  return best;
}

double max_abs(const DenseMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double max_abs_on(const OperatorMatrix& m, const std::vector<bool>& mask) {
  if (mask.size() != m.dim()) {
    throw std::invalid_argument("mask size does not match operator dimension");
  }
  double best = 0.0;
  const auto& M = m.matrix();
  for (Eigen::Index i = 0; i < M.outerSize(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    for (SparseMatrix::InnerIterator it(M, i); it; ++it) {
      if (mask[static_cast<std::size_t>(it.col())]) {
        best = std::max(best, std::abs(it.value()));
      }
    }
  }
  return best;
}

double hermiticity_defect(const SparseMatrix& m) {
  SparseMatrix diff = m - SparseMatrix(m.adjoint());
  double best = 0.0;
  for (Eigen::Index i = 0; i < diff.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(diff, i); it; ++it) {
      best = std::max(best, std::abs(it.value()));
    }
  }
  return best;
}

DenseMatrix restrict_dense(const OperatorMatrix& m, std::span<const std::size_t> indices) {
  std::vector<Eigen::Index> position(m.dim(), -1);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    position[indices[k]] = static_cast<Eigen::Index>(k);
  }
  const auto n = static_cast<Eigen::Index>(indices.size());
  DenseMatrix out = DenseMatrix::Zero(n, n);
  const auto& M = m.matrix();
  for (Eigen::Index r = 0; r < n; ++r) {
    for (SparseMatrix::InnerIterator it(M, static_cast<Eigen::Index>(indices[static_cast<std::size_t>(r)])); it; ++it) {
      const Eigen::Index c = position[static_cast<std::size_t>(it.col())];
      if (c >= 0) out(r, c) = it.value();
    }
  }
  return out;
}

OperatorMatrix mask_projector(const std::vector<bool>& mask) {
  std::vector<double> d(mask.size());
  std::transform(mask.begin(), mask.end(), d.begin(), [](bool b) { return b ? 1.0 : 0.0; });
  return OperatorMatrix::diagonal(d);
}

}  // namespace pointform
