#include "pointform/fermion_algebra.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace pointform {

namespace {

Word bit(int alpha) { return Word{1} << (alpha - 1); }

int parity_below(Word w, int alpha) {
  return std::popcount(w & (bit(alpha) - 1)) & 1;
}

}  // namespace

int FermionBasis::fermion_count(Word w) const {
  const Word mask = n_ == 0 ? 0 : (Word{1} << n_) - 1;
  return std::popcount(w & mask);
}

int FermionBasis::antifermion_count(Word w) const {
  const Word upper = n_ == 0 ? 0 : ((Word{1} << n_) - 1) << n_;
  return n_ - std::popcount(w & upper);
}

const std::vector<std::size_t>& FermionBasis::sector(int b) const {
  auto it = sectors_.find(b);
  if (it == sectors_.end()) {
    throw std::out_of_range("baryon number " + std::to_string(b) + " outside [-N, N]");
  }
  return it->second;
}

Word FermionBasis::vacuum() const {
  return n_ == 0 ? 0 : ((Word{1} << n_) - 1) << n_;
}

Word FermionBasis::cyclic_vector(int b) const {
  if (b < -n_ || b > n_) {
    throw std::out_of_range("baryon number " + std::to_string(b) + " outside [-N, N]");
  }
  Word w = vacuum();
  if (b >= 0) {
    for (int i = 1; i <= b; ++i) w |= bit(i);
  } else {
    for (int i = 1; i <= -b; ++i) w &= ~bit(n_ + i);
  }
  return w;
}

FermionBasis build_basis(int n, std::size_t max_states) {
  if (n < 0) throw std::invalid_argument("mode count must be non-negative");
  if (2 * n >= 63 || (std::size_t{1} << (2 * n)) > max_states) {
    throw CapacityError("fermion basis with N=" + std::to_string(n) + " exceeds budget of " +
                        std::to_string(max_states) + " states");
  }
  FermionBasis basis;
  basis.n_ = n;
  const std::size_t count = std::size_t{1} << (2 * n);
  basis.states_.resize(count);
  for (int b = -n; b <= n; ++b) basis.sectors_[b];
  for (std::size_t idx = 0; idx < count; ++idx) {
    const Word w = static_cast<Word>(idx);
    basis.states_[idx] = w;
    basis.sectors_[basis.baryon_number(w)].push_back(idx);
  }
  return basis;
}

CouplingMatrix::CouplingMatrix(DenseMatrix x) : x_(std::move(x)) {
  if (x_.rows() != x_.cols()) throw std::invalid_argument("coupling matrix must be square");
  if (x_.rows() % 2 != 0) throw std::invalid_argument("coupling matrix dimension must be 2N");
}

CouplingMatrix CouplingMatrix::zero(int n) { return CouplingMatrix(DenseMatrix::Zero(2 * n, 2 * n)); }

CouplingMatrix CouplingMatrix::identity(int n) {
  return CouplingMatrix(DenseMatrix::Identity(2 * n, 2 * n));
}

bool CouplingMatrix::is_hermitian(double tol) const {
  return max_abs(DenseMatrix(x_ - x_.adjoint())) <= tol;
}

bool CouplingMatrix::is_normal(double tol) const {
  return max_abs(DenseMatrix(x_ * x_.adjoint() - x_.adjoint() * x_)) <= tol;
}

OperatorMatrix a_mode_operator(const FermionBasis& basis, bool create, int alpha) {
  const int two_n = 2 * basis.modes();
  if (alpha < 1 || alpha > two_n) {
    throw std::out_of_range("A-mode index " + std::to_string(alpha) + " outside [1, " +
                            std::to_string(two_n) + "]");
  }
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(basis.size() / 2);
  for (Word w : basis.states()) {
    const bool occupied = (w & bit(alpha)) != 0;
    if (create == occupied) continue;
    const Word target = w ^ bit(alpha);
    const double sign = parity_below(w, alpha) ? -1.0 : 1.0;
    t.emplace_back(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(w), cplx(sign, 0.0));
  }
  SparseMatrix m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  return OperatorMatrix(std::move(m));
}

OperatorMatrix mode_operator(const FermionBasis& basis, ModeKind kind, int i) {
  const int n = basis.modes();
  if (i < 1 || i > n) {
    throw std::out_of_range("mode index " + std::to_string(i) + " outside [1, " +
                            std::to_string(n) + "]");
  }
  switch (kind) {
    case ModeKind::FermionCreate: return a_mode_operator(basis, true, i);
    case ModeKind::FermionAnnihilate: return a_mode_operator(basis, false, i);
    case ModeKind::AntifermionCreate: return a_mode_operator(basis, false, n + i);
    case ModeKind::AntifermionAnnihilate: return a_mode_operator(basis, true, n + i);
  }
  throw std::logic_error("unknown mode kind");
}

OperatorMatrix bilinear(const FermionBasis& basis, const CouplingMatrix& x) {
  const int two_n = 2 * basis.modes();
  if (x.dim() != two_n) {
    throw std::invalid_argument("coupling matrix has dimension " + std::to_string(x.dim()) +
                                ", expected " + std::to_string(two_n));
  }
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<cplx>> t;
  for (Word w : basis.states()) {
    for (int beta = 1; beta <= two_n; ++beta) {
      if ((w & bit(beta)) == 0) continue;
      const Word removed = w ^ bit(beta);
      const int s1 = parity_below(w, beta);
      for (int alpha = 1; alpha <= two_n; ++alpha) {
        const cplx coeff = x(alpha - 1, beta - 1);
        if (coeff == cplx(0.0, 0.0)) continue;
        if ((removed & bit(alpha)) != 0) continue;
        const Word target = removed | bit(alpha);
        const int s2 = parity_below(removed, alpha);
        const double sign = ((s1 + s2) & 1) ? -1.0 : 1.0;
        t.emplace_back(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(w), sign * coeff);
      }
    }
  }
  SparseMatrix m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  return OperatorMatrix(std::move(m));
}

OperatorMatrix baryon_operator(const FermionBasis& basis) {
  std::vector<double> d(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) d[k] = basis.baryon_number(basis.states()[k]);
  return OperatorMatrix::diagonal(d);
}

OperatorMatrix sector_projector(const FermionBasis& basis, int b) {
  std::vector<double> d(basis.size(), 0.0);
  for (std::size_t idx : basis.sector(b)) d[idx] = 1.0;
  return OperatorMatrix::diagonal(d);
}

Vector basis_vector(const FermionBasis& basis, Word w) {
  if (w >= basis.size()) throw std::out_of_range("occupation word outside basis");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
  v(static_cast<Eigen::Index>(w)) = 1.0;
  return v;
}

}  // namespace pointform
