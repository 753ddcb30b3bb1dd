#pragma once

// Four-momentum operators on the fermion (x) boson product space.
//
// Tensor order is fermion (x) boson: the product-space index of
// (fermion word f, boson state b) is f * dim_boson + b. All operators are
// dimensionless; the mass scale only enters at the reporting layer.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pointform/boson_space.hpp"
#include "pointform/fermion_algebra.hpp"
#include "pointform/vertex.hpp"

namespace pointform {

/// A fermion or boson mode given either by a unit four-velocity or by its
/// energy v^0 alone (spatial components then vanish and v.v = 1 is not required).
struct ModeSpec {
  FourVector velocity{1.0, 0.0, 0.0, 0.0};
  bool energy_only = false;
  SpinProjection spin = SpinProjection::Up;

  static ModeSpec with_energy(double e) { return {{e, 0.0, 0.0, 0.0}, true, SpinProjection::Up}; }
  static ModeSpec with_velocity(const FourVector& v, SpinProjection s = SpinProjection::Up) {
    return {v, false, s};
  }
  double energy() const { return velocity[0]; }
};

struct ModelConfig {
  std::vector<ModeSpec> fermion_modes;
  std::vector<ModeSpec> boson_modes;
  double kappa = 1.0;
  double alpha = 0.0;
  double mass_scale = 1.0;
  int n_max = 8;

  int fermion_count() const { return static_cast<int>(fermion_modes.size()); }
  int boson_count() const { return static_cast<int>(boson_modes.size()); }
  std::vector<FourVector> boson_velocities() const;

  /// Throws std::invalid_argument on a non-unit four-velocity, kappa < 0 or n_max < 1.
  void validate() const;
};

/// The automorphism divides by kappa v^0_k; raised when that vanishes.
class MasslessModeError : public std::domain_error {
 public:
  MasslessModeError(int mode, const std::string& what) : std::domain_error(what), mode_(mode) {}
  int mode() const { return mode_; }

 private:
  int mode_;
};

/// P^mu for mu = 0..3, all on the same space.
struct FourOperator {
  std::array<OperatorMatrix, 4> components;

  const OperatorMatrix& operator[](std::size_t mu) const { return components[mu]; }
  std::size_t dim() const { return components[0].dim(); }
  bool hermitian() const;
};

FourOperator operator+(const FourOperator& a, const FourOperator& b);

struct ProductSpace {
  FermionBasis fermions;
  BosonBasis bosons;

  std::size_t dim() const { return fermions.size() * bosons.size(); }
  std::size_t index(std::size_t fermion_index, std::size_t boson_index) const {
    return fermion_index * bosons.size() + boson_index;
  }
  /// Lift a fermion operator F to F (x) I and a boson operator B to I (x) B.
  OperatorMatrix lift_fermion(const OperatorMatrix& f) const;
  OperatorMatrix lift_boson(const OperatorMatrix& b) const;

  /// Product-space masks built from the boson safe/boundary masks.
  std::vector<bool> safe_mask(int margin) const;
  std::vector<bool> boundary_mask() const;
  /// Product-space indices whose fermion part lies in baryon sector b.
  std::vector<std::size_t> sector_indices(int b) const;
};

ProductSpace build_product_space(const ModelConfig& model);

struct FreeMomentum {
  FourOperator op;
  /// Sum_i v^mu_i: A(E^mu) + constant equals the fermionic part of `op`.
  std::array<double, 4> fermion_constant{};
};

/// sum_i v^mu_i (a^dagger_i a_i + b^dagger_i b_i) + kappa sum_k v^mu_k c^dagger_k c_k.
FreeMomentum assemble_free(const ModelConfig& model, const ProductSpace& space);

/// A(E^mu) with E^mu = diag(v^mu_1..v^mu_N, -v^mu_1..-v^mu_N), on the fermion space only.
FourOperator free_fermion_bilinear(const ModelConfig& model, const FermionBasis& fb);

/// alpha sum_k (A(X^mu_k) (x) c_k + A(X^mu_k)^dagger (x) c^dagger_k).
FourOperator assemble_interaction(const ModelConfig& model, const VertexSet& vertices,
                                  const ProductSpace& space);

struct MomentumOperator {
  FourOperator free;
  FourOperator interaction;
  FourOperator total;
  std::array<double, 4> fermion_constant{};
};

MomentumOperator assemble_total(const ModelConfig& model, const VertexSet& vertices,
                                const ProductSpace& space);

struct CommutatorEntry {
  int mu = 0;
  int nu = 0;
  double free_free = 0.0;
  double interaction_interaction = 0.0;
  double mixed = 0.0;
  double total = 0.0;
};

/// Max-entry norms of [P^mu, P^nu] (mu < nu) restricted to the safe subspace
/// of the given margin, split by contribution. Mixed = [Pf^mu, PI^nu] + [PI^mu, Pf^nu].
std::vector<CommutatorEntry> verify_momentum_commutators(const MomentumOperator& p,
                                                         const ProductSpace& space, int margin);

struct ShiftedMode {
  OperatorMatrix annihilate;  ///< C_k = c_k + alpha A(X^0_k)^dagger / (kappa v^0_k)
  OperatorMatrix create;      ///< C^dagger_k = c^dagger_k + alpha A(X^0_k) / (kappa v^0_k)
};

std::vector<ShiftedMode> shifted_modes(const ModelConfig& model, const VertexSet& vertices,
                                       const ProductSpace& space);

struct TransformedHamiltonian {
  OperatorMatrix hamiltonian;
  /// -alpha^2 sum_k A(X^0_k) A(X^0_k)^dagger / (kappa v^0_k), lifted to the product space.
  OperatorMatrix shift_term;
};

/// P^0_F + shift_term + sum_k kappa v^0_k C^dagger_k C_k, using the same
/// (normal-ordered) fermionic free part as assemble_free.
TransformedHamiltonian transformed_hamiltonian(const ModelConfig& model, const VertexSet& vertices,
                                               const ProductSpace& space);

/// <psi| M |psi> / <psi|psi>, real part.
double expectation(const OperatorMatrix& m, const Vector& psi);

}  // namespace pointform
