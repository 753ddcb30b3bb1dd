#pragma once

// Antisymmetric Fock space over 2N fermionic A-modes.
//
// Mode layout (1-based, as used throughout the library):
//   A_1 .. A_N        fermion modes, a_i = A_i
//   A_{N+1} .. A_{2N} antifermion modes, b_i = A^dagger_{N+i}, b^dagger_i = A_{N+i}
//
// A basis state is an occupation word over the A-modes; bit (alpha - 1) is set
// when A-mode alpha is occupied. Since b_i annihilates the Fock vacuum, the
// vacuum |0_F> is the word with all antifermion bits set. Words are ordered
// ascending, so the basis index of a state equals its word.
//
// Sign convention: A^dagger_alpha and A_alpha carry (-1)^(number of occupied
// A-modes with index < alpha).

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "pointform/operator_matrix.hpp"

namespace pointform {

using Word = std::uint64_t;

class FermionBasis {
 public:
  static constexpr std::size_t kDefaultMaxStates = std::size_t{1} << 20;

  int modes() const { return n_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<Word>& states() const { return states_; }

  int fermion_count(Word w) const;
  int antifermion_count(Word w) const;
  int baryon_number(Word w) const { return fermion_count(w) - antifermion_count(w); }

  /// Basis indices of the baryon-b sector, ascending.
  const std::vector<std::size_t>& sector(int b) const;
  const std::map<int, std::vector<std::size_t>>& sectors() const { return sectors_; }

  /// Fock vacuum: no fermions, no antifermions.
  Word vacuum() const;
  /// a^dagger_1 ... a^dagger_b |0_F> for b >= 0, b^dagger_1 ... b^dagger_{|b|} |0_F> for b < 0.
  Word cyclic_vector(int b) const;

  friend FermionBasis build_basis(int n, std::size_t max_states);

 private:
  int n_ = 0;
  std::vector<Word> states_;
  std::map<int, std::vector<std::size_t>> sectors_;
};

FermionBasis build_basis(int n, std::size_t max_states = FermionBasis::kDefaultMaxStates);

/// Square 2N x 2N complex coefficient matrix X of the bilinear A(X).
class CouplingMatrix {
 public:
  CouplingMatrix() = default;
  explicit CouplingMatrix(DenseMatrix x);
  static CouplingMatrix zero(int n);
  static CouplingMatrix identity(int n);

  int dim() const { return static_cast<int>(x_.rows()); }
  const DenseMatrix& entries() const { return x_; }
  cplx operator()(int row, int col) const { return x_(row, col); }

  bool is_hermitian(double tol = 1e-12) const;
  bool is_normal(double tol = 1e-12) const;

  CouplingMatrix adjoint() const { return CouplingMatrix(x_.adjoint()); }

 private:
  DenseMatrix x_;
};

enum class ModeKind { FermionCreate, FermionAnnihilate, AntifermionCreate, AntifermionAnnihilate };

/// a^dagger_i, a_i, b^dagger_i or b_i as a matrix; 1 <= i <= N.
OperatorMatrix mode_operator(const FermionBasis& basis, ModeKind kind, int i);

/// A^dagger_alpha (create = true) or A_alpha; 1 <= alpha <= 2N.
OperatorMatrix a_mode_operator(const FermionBasis& basis, bool create, int alpha);

/// A(X) = sum_{alpha beta} X_{alpha beta} A^dagger_alpha A_beta, antifermion
/// pieces left in their natural (not normal-ordered) form.
OperatorMatrix bilinear(const FermionBasis& basis, const CouplingMatrix& x);

/// B = A(I) - N: eigenvalue n_fermion - n_antifermion.
OperatorMatrix baryon_operator(const FermionBasis& basis);

OperatorMatrix sector_projector(const FermionBasis& basis, int b);

/// Basis vector for a single occupation word.
Vector basis_vector(const FermionBasis& basis, Word w);

}  // namespace pointform
