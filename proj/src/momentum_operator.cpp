#include "pointform/momentum_operator.hpp"

#include <algorithm>
#include <cmath>

namespace pointform {

std::vector<FourVector> ModelConfig::boson_velocities() const {
  std::vector<FourVector> out;
  out.reserve(boson_modes.size());
  for (const auto& m : boson_modes) out.push_back(m.velocity);
  return out;
}

void ModelConfig::validate() const {
  auto check = [](const std::vector<ModeSpec>& modes, const char* what) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      if (!modes[i].energy_only && !is_unit_timelike(modes[i].velocity)) {
        throw std::invalid_argument(std::string(what) + " mode " + std::to_string(i + 1) +
                                    " has a four-velocity with |v.v - 1| > 1e-12");
      }
    }
  };
  check(fermion_modes, "fermion");
  check(boson_modes, "boson");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be non-negative");
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
}

bool FourOperator::hermitian() const {
  return std::all_of(components.begin(), components.end(),
                     [](const OperatorMatrix& m) { return m.hermitian(); });
}

FourOperator operator+(const FourOperator& a, const FourOperator& b) {
  FourOperator out;
  for (std::size_t mu = 0; mu < 4; ++mu) out.components[mu] = a[mu] + b[mu];
  return out;
}

OperatorMatrix ProductSpace::lift_fermion(const OperatorMatrix& f) const {
  return kron(f, OperatorMatrix::identity(bosons.size()));
}

OperatorMatrix ProductSpace::lift_boson(const OperatorMatrix& b) const {
  return kron(OperatorMatrix::identity(fermions.size()), b);
}

std::vector<bool> ProductSpace::safe_mask(int margin) const {
  const auto boson = bosons.safe_mask(margin);
  std::vector<bool> out;
  out.reserve(dim());
  for (std::size_t f = 0; f < fermions.size(); ++f) out.insert(out.end(), boson.begin(), boson.end());
  return out;
}

std::vector<bool> ProductSpace::boundary_mask() const {
  const auto boson = bosons.boundary_mask();
  std::vector<bool> out;
  out.reserve(dim());
  for (std::size_t f = 0; f < fermions.size(); ++f) out.insert(out.end(), boson.begin(), boson.end());
  return out;
}

std::vector<std::size_t> ProductSpace::sector_indices(int b) const {
  std::vector<std::size_t> out;
  for (std::size_t f : fermions.sector(b)) {
    for (std::size_t k = 0; k < bosons.size(); ++k) out.push_back(index(f, k));
  }
  return out;
}

ProductSpace build_product_space(const ModelConfig& model) {
  model.validate();
  return {build_basis(model.fermion_count()), build_boson_basis(model.boson_count(), model.n_max)};
}

FreeMomentum assemble_free(const ModelConfig& model, const ProductSpace& space) {
  const FermionBasis& fb = space.fermions;
  const BosonBasis& bb = space.bosons;
  if (fb.modes() != model.fermion_count() || bb.modes() != model.boson_count()) {
    throw std::invalid_argument("product space does not match the model's mode counts");
  }
  FreeMomentum out;
  const int n = fb.modes();
  for (std::size_t mu = 0; mu < 4; ++mu) {
    std::vector<double> fermion_diag(fb.size(), 0.0);
    for (std::size_t s = 0; s < fb.size(); ++s) {
      const Word w = fb.states()[s];
      for (int i = 1; i <= n; ++i) {
        const double v = model.fermion_modes[static_cast<std::size_t>(i - 1)].velocity[mu];
        const bool fermion = (w >> (i - 1)) & 1U;
        const bool antifermion = !((w >> (n + i - 1)) & 1U);
        fermion_diag[s] += v * (static_cast<int>(fermion) + static_cast<int>(antifermion));
      }
    }
    std::vector<double> boson_diag(bb.size(), 0.0);
    for (std::size_t s = 0; s < bb.size(); ++s) {
      for (int k = 1; k <= bb.modes(); ++k) {
        boson_diag[s] += model.kappa * model.boson_modes[static_cast<std::size_t>(k - 1)].velocity[mu] *
                         bb.occupation(s, k);
      }
    }
    std::vector<double> diag(space.dim());
    for (std::size_t f = 0; f < fb.size(); ++f) {
      for (std::size_t b = 0; b < bb.size(); ++b) diag[space.index(f, b)] = fermion_diag[f] + boson_diag[b];
    }
    out.op.components[mu] = OperatorMatrix::diagonal(diag);
    double constant = 0.0;
    for (const auto& m : model.fermion_modes) constant += m.velocity[mu];
    out.fermion_constant[mu] = constant;
  }
  return out;
}

FourOperator free_fermion_bilinear(const ModelConfig& model, const FermionBasis& fb) {
  const int n = fb.modes();
  if (n != model.fermion_count()) throw std::invalid_argument("fermion basis does not match the model");
  FourOperator out;
  for (std::size_t mu = 0; mu < 4; ++mu) {
    DenseMatrix e = DenseMatrix::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
      const double v = model.fermion_modes[static_cast<std::size_t>(i)].velocity[mu];
      e(i, i) = v;
      e(i + n, i + n) = -v;
    }
    out.components[mu] = bilinear(fb, CouplingMatrix(e));
  }
  return out;
}

namespace {

void check_vertices(const VertexSet& vertices, const ProductSpace& space) {
  if (vertices.boson_modes() != space.bosons.modes()) {
    throw std::invalid_argument("vertex set has " + std::to_string(vertices.boson_modes()) +
                                " boson modes, model has " + std::to_string(space.bosons.modes()));
  }
  if (vertices.fermion_modes() != space.fermions.modes()) {
    throw std::invalid_argument("vertex set dimension does not match the fermion basis");
  }
}

}  // namespace

FourOperator assemble_interaction(const ModelConfig& model, const VertexSet& vertices,
                                  const ProductSpace& space) {
  check_vertices(vertices, space);
  FourOperator out;
  for (std::size_t mu = 0; mu < 4; ++mu) {
    OperatorMatrix t = OperatorMatrix::zero(space.dim());
    for (int k = 1; k <= space.bosons.modes(); ++k) {
      const OperatorMatrix a = bilinear(space.fermions, vertices.matrix(k, static_cast<int>(mu)));
      const OperatorMatrix c = boson_ladder(space.bosons, LadderKind::Annihilate, k);
      t = t + kron(a, c);
    }
    // T + T^dagger keeps the result exactly hermitian entry by entry.
    out.components[mu] = cplx(model.alpha, 0.0) * (t + t.adjoint());
  }
  return out;
}

MomentumOperator assemble_total(const ModelConfig& model, const VertexSet& vertices,
                                const ProductSpace& space) {
  MomentumOperator p;
  FreeMomentum free = assemble_free(model, space);
  p.free = std::move(free.op);
  p.fermion_constant = free.fermion_constant;
  p.interaction = assemble_interaction(model, vertices, space);
  p.total = p.free + p.interaction;
  return p;
}

std::vector<CommutatorEntry> verify_momentum_commutators(const MomentumOperator& p,
                                                         const ProductSpace& space, int margin) {
  const auto mask = space.safe_mask(margin);
  std::vector<CommutatorEntry> out;
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = mu + 1; nu < 4; ++nu) {
      const auto m = static_cast<std::size_t>(mu);
      const auto n = static_cast<std::size_t>(nu);
      CommutatorEntry e;
      e.mu = mu;
      e.nu = nu;
      e.free_free = max_abs_on(commutator(p.free[m], p.free[n]), mask);
      e.interaction_interaction = max_abs_on(commutator(p.interaction[m], p.interaction[n]), mask);
      e.mixed = max_abs_on(commutator(p.free[m], p.interaction[n]) +
                               commutator(p.interaction[m], p.free[n]),
                           mask);
      e.total = max_abs_on(commutator(p.total[m], p.total[n]), mask);
      out.push_back(e);
    }
  }
  return out;
}

namespace {

double shift_denominator(const ModelConfig& model, int k) {
  const double d = model.kappa * model.boson_modes[static_cast<std::size_t>(k - 1)].energy();
  if (!(d > 0.0)) {
    throw MasslessModeError(k, "automorphism undefined: kappa * v^0 = " + std::to_string(d) +
                                   " for boson mode " + std::to_string(k));
  }
  return d;
}

}  // namespace

std::vector<ShiftedMode> shifted_modes(const ModelConfig& model, const VertexSet& vertices,
                                       const ProductSpace& space) {
  check_vertices(vertices, space);
  std::vector<ShiftedMode> out;
  for (int k = 1; k <= space.bosons.modes(); ++k) {
    const double d = shift_denominator(model, k);
    const OperatorMatrix a = space.lift_fermion(bilinear(space.fermions, vertices.matrix(k, 0)));
    const OperatorMatrix c = space.lift_boson(boson_ladder(space.bosons, LadderKind::Annihilate, k));
    const OperatorMatrix cd = space.lift_boson(boson_ladder(space.bosons, LadderKind::Create, k));
    const cplx s(model.alpha / d, 0.0);
    out.push_back({c + s * a.adjoint(), cd + s * a});
  }
  return out;
}

TransformedHamiltonian transformed_hamiltonian(const ModelConfig& model, const VertexSet& vertices,
                                               const ProductSpace& space) {
  const auto modes = shifted_modes(model, vertices, space);
  TransformedHamiltonian out;
  OperatorMatrix shift = OperatorMatrix::zero(space.fermions.size());
  OperatorMatrix oscillators = OperatorMatrix::zero(space.dim());
  for (int k = 1; k <= space.bosons.modes(); ++k) {
    const double d = shift_denominator(model, k);
    const OperatorMatrix a = bilinear(space.fermions, vertices.matrix(k, 0));
    shift = shift + cplx(-model.alpha * model.alpha / d, 0.0) * (a * a.adjoint());
    const auto& m = modes[static_cast<std::size_t>(k - 1)];
    oscillators = oscillators + cplx(d, 0.0) * (m.create * m.annihilate);
  }
  out.shift_term = space.lift_fermion(shift);

  // Fermionic free part only: the boson free part is carried by the C's.
  ModelConfig fermions_only = model;
  fermions_only.kappa = 0.0;
  const OperatorMatrix free_fermion = assemble_free(fermions_only, space).op[0];
  out.hamiltonian = free_fermion + out.shift_term + oscillators;
  return out;
}

double expectation(const OperatorMatrix& m, const Vector& psi) {
  const cplx num = psi.dot(m.apply(psi));
  return num.real() / psi.squaredNorm();
}

}  // namespace pointform
