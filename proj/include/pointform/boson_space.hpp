#pragma once

// Truncated boson Fock space: K modes, each with occupation 0..n_max.
// States are ordered lexicographically in (n_1, ..., n_K) with n_K varying
// fastest.

#include <cstddef>
#include <vector>

#include "pointform/operator_matrix.hpp"

namespace pointform {

class BosonBasis {
 public:
  static constexpr std::size_t kDefaultMaxStates = std::size_t{1} << 22;

  int modes() const { return k_; }
  int cutoff() const { return n_max_; }
  std::size_t size() const { return size_; }

  /// Occupation of mode k (1-based) in basis state `index`.
  int occupation(std::size_t index, int k) const;
  std::vector<int> occupations(std::size_t index) const;
  std::size_t index_of(const std::vector<int>& occupations) const;

  /// States with every n_k <= n_max - margin. Margin 0 keeps everything.
  std::vector<bool> safe_mask(int margin) const;
  /// States with some n_k == n_max.
  std::vector<bool> boundary_mask() const;

  friend BosonBasis build_boson_basis(int k, int n_max, std::size_t max_states);

 private:
  int k_ = 0;
  int n_max_ = 1;
  std::size_t size_ = 1;
  std::vector<std::size_t> stride_;
};

BosonBasis build_boson_basis(int k, int n_max,
                             std::size_t max_states = BosonBasis::kDefaultMaxStates);

/// Projector onto the safe subspace of the given margin.
OperatorMatrix safe_projector(const BosonBasis& basis, int margin);

enum class LadderKind { Create, Annihilate };

/// c^dagger_k |n> = sqrt(n+1) |n+1> (zero at n_max); c_k |n> = sqrt(n) |n-1>.
OperatorMatrix boson_ladder(const BosonBasis& basis, LadderKind kind, int k);

/// Diagonal n_k.
OperatorMatrix number_operator(const BosonBasis& basis, int k);

/// exp(sum_k (beta_k c^dagger_k - conj(beta_k) c_k)) on the truncated space.
/// Accurate while |beta_k|^2 is well below n_max.
OperatorMatrix displacement_operator(const BosonBasis& basis, const std::vector<cplx>& beta);

/// Matrix exponential by scaling and squaring with a Taylor series.
DenseMatrix expm(const DenseMatrix& a, double tol = 1e-12);

}  // namespace pointform
