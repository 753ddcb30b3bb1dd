#include "pointform/boson_space.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pointform {

BosonBasis build_boson_basis(int k, int n_max, std::size_t max_states) {
  if (k < 0) throw std::invalid_argument("boson mode count must be non-negative");
  if (n_max < 1) throw std::invalid_argument("boson cutoff n_max must be at least 1");
  BosonBasis basis;
  basis.k_ = k;
  basis.n_max_ = n_max;
  basis.stride_.assign(static_cast<std::size_t>(k), 1);
  std::size_t size = 1;
  const auto per_mode = static_cast<std::size_t>(n_max) + 1;
  for (int m = k - 1; m >= 0; --m) {
    basis.stride_[static_cast<std::size_t>(m)] = size;
    if (size > max_states / per_mode) {
      throw CapacityError("boson basis (n_max+1)^K with K=" + std::to_string(k) +
                          ", n_max=" + std::to_string(n_max) + " exceeds budget of " +
                          std::to_string(max_states) + " states");
    }
    size *= per_mode;
  }
  basis.size_ = size;
  return basis;
}

int BosonBasis::occupation(std::size_t index, int k) const {
  if (k < 1 || k > k_) throw std::out_of_range("boson mode index " + std::to_string(k));
  return static_cast<int>((index / stride_[static_cast<std::size_t>(k - 1)]) %
                          (static_cast<std::size_t>(n_max_) + 1));
}

std::vector<int> BosonBasis::occupations(std::size_t index) const {
  std::vector<int> n(static_cast<std::size_t>(k_));
  for (int k = 1; k <= k_; ++k) n[static_cast<std::size_t>(k - 1)] = occupation(index, k);
  return n;
}

std::size_t BosonBasis::index_of(const std::vector<int>& occupations) const {
  if (occupations.size() != static_cast<std::size_t>(k_)) {
    throw std::invalid_argument("occupation vector has wrong length");
  }
  std::size_t idx = 0;
  for (std::size_t m = 0; m < occupations.size(); ++m) {
    if (occupations[m] < 0 || occupations[m] > n_max_) {
      throw std::out_of_range("occupation outside [0, n_max]");
    }
    idx += static_cast<std::size_t>(occupations[m]) * stride_[m];
  }
  return idx;
}

std::vector<bool> BosonBasis::safe_mask(int margin) const {
  if (margin < 0) throw std::invalid_argument("safe-subspace margin must be non-negative");
  std::vector<bool> mask(size_, true);
  for (std::size_t i = 0; i < size_; ++i) {
    for (int k = 1; k <= k_; ++k) {
      if (occupation(i, k) > n_max_ - margin) {
        mask[i] = false;
        break;
      }
    }
  }
  return mask;
}

std::vector<bool> BosonBasis::boundary_mask() const {
  std::vector<bool> mask = safe_mask(1);
  mask.flip();
  return mask;
}

OperatorMatrix safe_projector(const BosonBasis& basis, int margin) {
  return mask_projector(basis.safe_mask(margin));
}

OperatorMatrix boson_ladder(const BosonBasis& basis, LadderKind kind, int k) {
  if (k < 1 || k > basis.modes()) {
    throw std::out_of_range("boson mode index " + std::to_string(k) + " outside [1, " +
                            std::to_string(basis.modes()) + "]");
  }
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(basis.size());
  std::vector<int> occ;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    occ = basis.occupations(i);
    int& n = occ[static_cast<std::size_t>(k - 1)];
    double amp = 0.0;
    if (kind == LadderKind::Create) {
      if (n == basis.cutoff()) continue;
      amp = std::sqrt(static_cast<double>(n + 1));
      ++n;
    } else {
      if (n == 0) continue;
      amp = std::sqrt(static_cast<double>(n));
      --n;
    }
    t.emplace_back(static_cast<Eigen::Index>(basis.index_of(occ)), static_cast<Eigen::Index>(i),
                   cplx(amp, 0.0));
  }
  SparseMatrix m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  return OperatorMatrix(std::move(m));
}

OperatorMatrix number_operator(const BosonBasis& basis, int k) {
  if (k < 1 || k > basis.modes()) throw std::out_of_range("boson mode index " + std::to_string(k));
  std::vector<double> d(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) d[i] = basis.occupation(i, k);
  return OperatorMatrix::diagonal(d);
}

DenseMatrix expm(const DenseMatrix& a, double tol) {
  const double norm = a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const DenseMatrix scaled = a / std::ldexp(1.0, squarings);

  DenseMatrix result = DenseMatrix::Identity(a.rows(), a.cols());
  DenseMatrix term = result;
  for (int j = 1; j < 64; ++j) {
    term = term * scaled / static_cast<double>(j);
    result += term;
    if (max_abs(term) <= tol * 1e-4) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

OperatorMatrix displacement_operator(const BosonBasis& basis, const std::vector<cplx>& beta) {
  if (beta.size() != static_cast<std::size_t>(basis.modes())) {
    throw std::invalid_argument("displacement needs one amplitude per boson mode");
  }
  const auto dim = static_cast<Eigen::Index>(basis.size());
  DenseMatrix generator = DenseMatrix::Zero(dim, dim);
  for (int k = 1; k <= basis.modes(); ++k) {
    const cplx b = beta[static_cast<std::size_t>(k - 1)];
    if (b == cplx(0.0, 0.0)) continue;
    generator += b * boson_ladder(basis, LadderKind::Create, k).dense() -
                 std::conj(b) * boson_ladder(basis, LadderKind::Annihilate, k).dense();
  }
  DenseMatrix d = expm(generator);
  return OperatorMatrix(SparseMatrix(d.sparseView(0.0, 0.0)));
}

}  // namespace pointform
