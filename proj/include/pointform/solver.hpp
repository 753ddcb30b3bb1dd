#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pointform/momentum_operator.hpp"

namespace pointform {

struct Spectrum {
  std::vector<double> eigenvalues;  ///< ascending
  std::optional<DenseMatrix> eigenvectors;  ///< columns, same order as eigenvalues
  std::vector<double> residuals;    ///< ||H psi - lambda psi||
  std::vector<double> leakage;      ///< norm fraction on cutoff-boundary states
};

enum class DiagonalizeMethod { Dense, Iterative };

struct DiagonalizeOptions {
  std::size_t count = 0;  ///< 0 means all (dense) or 1 (iterative)
  DiagonalizeMethod method = DiagonalizeMethod::Dense;
  double tolerance = 1e-10;  ///< residual target for the iterative method
  bool keep_vectors = true;
  std::vector<bool> boundary;  ///< optional; empty means no leakage reported
  std::size_t max_krylov = 0;  ///< 0 means the full dimension
  unsigned seed = 12345;
};

/// Lowest eigenpairs of a hermitian operator. Throws std::invalid_argument on a
/// non-hermitian input and ConvergenceError when the iterative method stalls.
Spectrum diagonalize(const OperatorMatrix& op, const DiagonalizeOptions& opts = {});
Spectrum diagonalize(const DenseMatrix& op, const DiagonalizeOptions& opts = {});

/// Levels within `tol` of each other, merged.
struct Level {
  double value = 0.0;
  int multiplicity = 1;
};
std::vector<Level> group_levels(std::vector<double> values, double tol = 1e-9);

/// Baryon-N model: every fermion mode filled, K boson modes with energies
/// boson_energies (kappa v^0_k) coupled through scalar vertices Y_k.
struct ExactModelSpec {
  std::vector<double> fermion_energies;
  std::vector<double> boson_energies;
  std::vector<cplx> y;
  double alpha = 0.0;

  /// Fermion mode i and boson mode i share energy e_i.
  static ExactModelSpec shared(std::vector<double> energies, std::vector<cplx> y, double alpha);
  void validate() const;
};

struct ExactLevel {
  std::vector<int> occupations;
  double eigenvalue = 0.0;
  /// Coherent-state amplitude of the ground factor of each mode: -alpha conj(Y_k) / e_k.
  std::vector<cplx> displacement;
  /// Raising operator of each mode is c^dagger_k + raising_shift_k, with alpha Y_k / e_k.
  std::vector<cplx> raising_shift;
};

/// lambda_n = sum_i e_i + sum_k (n_k e_k - alpha^2 |Y_k|^2 / e_k).
ExactLevel exact_sector_spectrum(const ExactModelSpec& spec, const std::vector<int>& occupations);

/// The `count` lowest closed-form eigenvalues over all occupation multi-indices.
std::vector<double> exact_lowest_eigenvalues(const ExactModelSpec& spec, std::size_t count);

/// Closed-form eigenvector in the truncated boson space (the fermion sector is
/// one-dimensional): prod_k (c^dagger_k + raising_shift_k)^{n_k} applied to the
/// coherent state D(displacement)|0>, normalized.
Vector exact_eigenvector(const ExactModelSpec& spec, const std::vector<int>& occupations,
                         const BosonBasis& bb);

/// Model configuration and scalar vertex set realizing the spec (kappa = 1,
/// energy-only modes).
ModelConfig exact_model_config(const ExactModelSpec& spec, int n_max);
VertexSet exact_model_vertices(const ExactModelSpec& spec);

/// P^0 restricted to one baryon sector, dense.
DenseMatrix sector_hamiltonian(const MomentumOperator& p, const ProductSpace& space, int sector);

class NoRootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AlphaSolution {
  double alpha_closed_form = 0.0;
  double alpha_root_found = 0.0;
  double lambda_min_at_alpha = 0.0;  ///< numerical ground state at alpha_root_found
  int iterations = 0;
};

/// Coupling at which the lowest baryon-N eigenvalue vanishes: closed form
/// alpha^2 = sum_i e_i / sum_k |Y_k|^2 / e_k, and an independent bracketing root
/// search on the diagonalized ground state. spec.alpha is ignored.
AlphaSolution solve_alpha(const ExactModelSpec& spec, int n_max = 16);

struct SeriesOptions {
  double lambda_min = -1.0;
  double lambda_max = 6.0;
  int order = 60;
  double scan_step = 0.01;
};

/// Levels of e (a^dagger a + b^dagger b) + c^dagger c + alpha (a^dagger b^dagger + b a)(c + c^dagger)
/// in the baryon-0 sector from power-series solutions of the Bargmann-space
/// equations for f_+- = f_1 +- f_2, requiring holomorphy at z = +-alpha.
std::vector<Level> n1_series_spectrum(double e, double alpha, const SeriesOptions& opts = {});

/// Mismatch function whose zeros are the levels (coupled case e != 0, alpha != 0).
double n1_spectral_function(double e, double alpha, double lambda, int order);

/// The same model diagonalized on the two fermion states (x) a truncated boson mode.
ModelConfig n1_model_config(double e, double alpha, int n_max);
VertexSet n1_model_vertices();
std::vector<double> n1_diagonalization_spectrum(double e, double alpha, int n_max, std::size_t count);

}  // namespace pointform
