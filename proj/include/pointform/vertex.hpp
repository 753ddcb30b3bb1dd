#pragma once

// Pseudoscalar vertex matrices on a discrete velocity grid, the regulated
// forward-hyperboloid form factor they are built from, and the
// normality/commutativity checks every vertex set must pass.

#include <array>
#include <string>
#include <vector>

#include "pointform/fermion_algebra.hpp"

namespace pointform {

/// Contravariant four-vector (x^0, x^1, x^2, x^3); metric (+, -, -, -).
using FourVector = std::array<double, 4>;
using ComplexFourVector = std::array<cplx, 4>;

double minkowski_dot(const FourVector& a, const FourVector& b);
bool is_unit_timelike(const FourVector& v, double tol = 1e-12);
/// Unit four-velocity with spatial components (vx, vy, vz).
FourVector velocity_from_spatial(double vx, double vy, double vz);

FourVector operator+(const FourVector& a, const FourVector& b);
FourVector operator-(const FourVector& a, const FourVector& b);
FourVector operator-(const FourVector& a);

/// Regularization and node layout for the hyperboloid integral.
///
/// The radial rapidity integral runs over [0, rapidity_cutoff] in panels sized
/// so the phase of the integrand advances by at most `phase_per_panel`, with
/// Gauss-Legendre nodes inside each panel. The angular integral is done in
/// closed form. Each regulator epsilon damps the integrand by exp(-epsilon y^0);
/// the regulated values are extrapolated to epsilon = 0.
struct QuadratureSpec {
  double rapidity_cutoff = 9.0;
  int nodes_per_panel = 16;
  double phase_per_panel = 1.0;
  std::vector<double> regulators{0.4, 0.2, 0.1, 0.05, 0.025};
  /// Relative change between the two highest extrapolation orders above which
  /// the result is flagged.
  double stability_tolerance = 1e-4;

  void validate() const;
};

struct FormFactorResult {
  ComplexFourVector value{};
  std::vector<ComplexFourVector> regulated;
  double stability = 0.0;
  bool flagged = false;
};

/// int d^4y delta(y.y - 1) theta(y^0) y^mu exp(i u.y - epsilon y^0), rapidity <= cutoff.
ComplexFourVector hyperboloid_integral(const FourVector& u, double cutoff, double epsilon,
                                       int nodes_per_panel = 16, double phase_per_panel = 1.0);

/// Regulated form factor F^mu(u), extrapolated in the regulator.
FormFactorResult form_factor(const FourVector& u, const QuadratureSpec& q);

enum class SpinProjection { Up, Down };
enum class SpinorKind { Particle, Antiparticle };
using Spinor = Eigen::Vector4cd;

/// Dirac-representation spinor boosted from rest by the rotationless boost to v.
/// Particle: rest spinor (chi, 0), ubar u = 1. Antiparticle: (0, chi), vbar v = -1.
Spinor dirac_spinor(const FourVector& v, SpinProjection spin, SpinorKind kind);

/// psibar gamma5 chi = psi^dagger gamma0 gamma5 chi.
cplx pseudoscalar_bilinear(const Spinor& bar_of, const Spinor& ket);

struct FermionGridMode {
  FourVector velocity{1.0, 0.0, 0.0, 0.0};
  SpinProjection spin = SpinProjection::Up;
};

enum class VertexProvenance { Explicit, Pseudoscalar, ScalarY };
std::string to_string(VertexProvenance p);

struct VertexReport {
  double normality_defect = 0.0;
  double commutativity_defect = 0.0;
  bool passes(double tol) const { return normality_defect <= tol && commutativity_defect <= tol; }
};

/// One CouplingMatrix per boson mode k and component mu, all of dimension 2N.
class VertexSet {
 public:
  using Components = std::array<CouplingMatrix, 4>;

  VertexSet() = default;
  VertexSet(int n, std::vector<Components> matrices, VertexProvenance provenance);

  int fermion_modes() const { return n_; }
  int boson_modes() const { return static_cast<int>(matrices_.size()); }
  const CouplingMatrix& matrix(int k, int mu) const;
  const std::vector<Components>& matrices() const { return matrices_; }
  VertexProvenance provenance() const { return provenance_; }
  const VertexReport& report() const { return report_; }

  /// Form-factor entries whose extrapolation was flagged (pseudoscalar sets only).
  std::vector<std::string> warnings;

 private:
  int n_ = 0;
  std::vector<Components> matrices_;
  VertexProvenance provenance_ = VertexProvenance::Explicit;
  VertexReport report_;
};

/// Frobenius-norm defects: max over pairs of ||[X^mu_k, (X^mu_l)^dagger]|| and ||[X^mu_k, X^nu_l]||.
VertexReport verify_vertex_matrices(const VertexSet& vs);

/// X^mu_k = Y_k (v^mu_k / v^0_k) I / (2N), so that tr X^0_k = Y_k.
VertexSet scalar_vertex_set(int n, const std::vector<FourVector>& boson_velocities,
                            const std::vector<cplx>& y);

/// Pseudoscalar coupling of fermion/antifermion pairs to each boson mode:
///   (i, j)     F(v_i - v_j - v_k) ubar_i g5 u_j
///   (i+N, j)   F(-v_i - v_j - v_k) vbar_i g5 u_j
///   (i, j+N)   F(v_i + v_j - v_k) ubar_i g5 v_j
///   (i+N, j+N) F(-v_i + v_j - v_k) vbar_i g5 v_j
VertexSet pseudoscalar_vertex_set(const std::vector<FermionGridMode>& grid,
                                  const std::vector<FourVector>& boson_velocities,
                                  const QuadratureSpec& q);

}  // namespace pointform
