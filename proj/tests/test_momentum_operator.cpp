#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "pointform/momentum_operator.hpp"

using namespace pointform;

namespace {

ModelConfig energy_model(std::vector<double> fermions, std::vector<double> bosons, double alpha, int n_max) {
  ModelConfig m;
  for (double e : fermions) m.fermion_modes.push_back(ModeSpec::with_energy(e));
  for (double e : bosons) m.boson_modes.push_back(ModeSpec::with_energy(e));
  m.alpha = alpha;
  m.n_max = n_max;
  return m;
}

ModelConfig moving_model(double alpha, int n_max) {
  ModelConfig m;
  const FourVector plus = velocity_from_spatial(0.2, -0.1, 0.6);
  const FourVector minus = velocity_from_spatial(-0.2, 0.1, -0.6);
  m.fermion_modes = {ModeSpec::with_velocity(plus), ModeSpec::with_velocity(minus)};
  m.boson_modes = {ModeSpec::with_velocity(velocity_from_spatial(0.0, 0.5, 0.0)),
                   ModeSpec::with_velocity(velocity_from_spatial(0.3, 0.0, 0.0))};
  m.alpha = alpha;
  m.kappa = 1.3;
  m.n_max = n_max;
  return m;
}

}  // namespace

TEST_CASE("model validation") {
  ModelConfig m = energy_model({1.0}, {1.0}, 0.1, 4);
  CHECK_NOTHROW(m.validate());
  m.fermion_modes.push_back(ModeSpec::with_velocity({1.0, 0.5, 0.0, 0.0}));
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = energy_model({1.0}, {1.0}, 0.1, 0);
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = energy_model({1.0}, {1.0}, 0.1, 4);
  m.kappa = -1.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("free operator is diagonal with the documented mode-energy sums") {
  const ModelConfig m = energy_model({1.0, 2.5}, {0.7}, 0.0, 3);
  const ProductSpace space = build_product_space(m);
  const FreeMomentum free = assemble_free(m, space);
  const DenseMatrix p0 = free.op[0].dense();
  for (std::size_t f = 0; f < space.fermions.size(); ++f) {
    const Word w = space.fermions.states()[f];
    double fermion_energy = 0.0;
    for (int i = 1; i <= 2; ++i) {
      const double e = m.fermion_modes[static_cast<std::size_t>(i - 1)].energy();
      if ((w >> (i - 1)) & 1U) fermion_energy += e;
      if (!((w >> (2 + i - 1)) & 1U)) fermion_energy += e;
    }
    for (std::size_t b = 0; b < space.bosons.size(); ++b) {
      const auto idx = static_cast<Eigen::Index>(space.index(f, b));
      CHECK(std::abs(p0(idx, idx) - (fermion_energy + 0.7 * space.bosons.occupation(b, 1))) <= 1e-15);
    }
  }
  CHECK(free.fermion_constant[0] == 3.5);
}

TEST_CASE("fermion bilinear form of the free operator differs by the reported constant") {
  const ModelConfig m = moving_model(0.0, 2);
  const ProductSpace space = build_product_space(m);
  ModelConfig no_bosons = m;
  no_bosons.kappa = 0.0;
  const FreeMomentum free = assemble_free(no_bosons, space);
  const FourOperator bil = free_fermion_bilinear(m, space.fermions);
  for (std::size_t mu = 0; mu < 4; ++mu) {
    const OperatorMatrix lifted = space.lift_fermion(bil[mu]) + free.fermion_constant[mu] * OperatorMatrix::identity(space.dim());
    CHECK(max_abs(lifted - free.op[mu]) <= 1e-14);
  }
}

TEST_CASE("momentum components are hermitian and free parts commute exactly") {
  const ModelConfig m = moving_model(0.4, 3);
  const ProductSpace space = build_product_space(m);
  const VertexSet vs = scalar_vertex_set(2, m.boson_velocities(), {1.0, cplx(0.5, -0.2)});
  const MomentumOperator p = assemble_total(m, vs, space);
  CHECK(p.total.hermitian());
  for (const auto& e : verify_momentum_commutators(p, space, 2)) {
    CHECK(e.free_free == 0.0);
    CHECK(e.interaction_interaction <= 1e-12);
  }
}

TEST_CASE("interaction operator is alpha (T + T^dagger) with T = A(X) c") {
  const ModelConfig m = energy_model({1.0}, {1.0}, 0.3, 4);
  const ProductSpace space = build_product_space(m);
  const VertexSet vs = scalar_vertex_set(1, m.boson_velocities(), {cplx(0.0, 1.0)});
  const FourOperator pi = assemble_interaction(m, vs, space);
  const OperatorMatrix a = space.lift_fermion(bilinear(space.fermions, vs.matrix(1, 0)));
  const OperatorMatrix c = space.lift_boson(boson_ladder(space.bosons, LadderKind::Annihilate, 1));
  const OperatorMatrix expected = cplx(0.3, 0.0) * (a * c + a.adjoint() * c.adjoint());
  CHECK(max_abs(pi[0] - expected) <= 1e-15);
}

TEST_CASE("mismatched vertex set is rejected") {
  const ModelConfig m = energy_model({1.0}, {1.0, 2.0}, 0.3, 3);
  const ProductSpace space = build_product_space(m);
  const VertexSet vs = scalar_vertex_set(1, {{1.0, 0.0, 0.0, 0.0}}, {1.0});
  CHECK_THROWS_AS(assemble_interaction(m, vs, space), std::invalid_argument);
}

TEST_CASE("automorphism identity and shifted ladder commutators") {
  for (const ModelConfig& m : {energy_model({1.0, 2.0}, {1.0, 2.0}, 0.3, 6), moving_model(0.25, 4)}) {
    const ProductSpace space = build_product_space(m);
    const VertexSet vs = scalar_vertex_set(m.fermion_count(), m.boson_velocities(), {1.0, cplx(0.3, 0.4)});
    const MomentumOperator p = assemble_total(m, vs, space);
    const TransformedHamiltonian t = transformed_hamiltonian(m, vs, space);
    CHECK(max_abs_on(p.total[0] - t.hamiltonian, space.safe_mask(2)) <= 1e-12);
    const auto modes = shifted_modes(m, vs, space);
    for (std::size_t a = 0; a < modes.size(); ++a) {
      for (std::size_t b = 0; b < modes.size(); ++b) {
        OperatorMatrix comm = commutator(modes[a].annihilate, modes[b].create);
        if (a == b) comm = comm - OperatorMatrix::identity(space.dim());
        CHECK(max_abs_on(comm, space.safe_mask(1)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("automorphism refuses a massless boson mode") {
  ModelConfig m = energy_model({1.0}, {1.0}, 0.3, 3);
  m.kappa = 0.0;
  const ProductSpace space = build_product_space(m);
  const VertexSet vs = scalar_vertex_set(1, m.boson_velocities(), {1.0});
  CHECK_THROWS_AS(shifted_modes(m, vs, space), MasslessModeError);
  try {
    transformed_hamiltonian(m, vs, space);
  } catch (const MasslessModeError& e) {
    CHECK(e.mode() == 1);
  }
}

TEST_CASE("sector indices select the fermion sector blocks") {
  const ModelConfig m = energy_model({1.0, 2.0}, {1.0}, 0.0, 2);
  const ProductSpace space = build_product_space(m);
  std::size_t total = 0;
  for (int b = -2; b <= 2; ++b) {
    const auto idx = space.sector_indices(b);
    CHECK(idx.size() == space.fermions.sector(b).size() * space.bosons.size());
    total += idx.size();
  }
  CHECK(total == space.dim());
}

TEST_CASE("expectation value") {
  const OperatorMatrix d = OperatorMatrix::diagonal(std::vector<double>{1.0, 3.0});
  Vector psi(2);
  psi << 1.0, 1.0;
  CHECK(expectation(d, psi) == doctest::Approx(2.0));
}

TEST_CASE("free operator on vacuum, one fermion and one boson") {
  const ModelConfig m = moving_model(0.0, 3);
  const ProductSpace space = build_product_space(m);
  const FourOperator free = assemble_free(m, space).op;
  const std::size_t vac_f = space.fermions.vacuum();
  Vector vac = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
  vac(static_cast<Eigen::Index>(space.index(vac_f, 0))) = 1.0;
  for (std::size_t mu = 0; mu < 4; ++mu) CHECK(free[mu].apply(vac).norm() == 0.0);
  for (int i = 1; i <= 2; ++i) {
    const Vector one = space.lift_fermion(mode_operator(space.fermions, ModeKind::FermionCreate, i)).apply(vac);
    const double v0 = m.fermion_modes[static_cast<std::size_t>(i - 1)].energy();
    CHECK((free[0].apply(one) - v0 * one).norm() <= 1e-14);
  }
  for (int k = 1; k <= 2; ++k) {
    const Vector one = space.lift_boson(boson_ladder(space.bosons, LadderKind::Create, k)).apply(vac);
    const double e = m.kappa * m.boson_modes[static_cast<std::size_t>(k - 1)].energy();
    CHECK((free[0].apply(one) - e * one).norm() <= 1e-14);
  }
}

TEST_CASE("free fermion bilinear coefficients") {
  const ModelConfig m = moving_model(0.0, 2);
  const FermionBasis fb = build_basis(2);
  const FourOperator e = free_fermion_bilinear(m, fb);
  // A(E) = sum_a E_aa A^dagger_a A_a, so its action on basis words reads back the diagonal.
  const DenseMatrix d = e[0].dense();
  const double v1 = m.fermion_modes[0].energy();
  const double v2 = m.fermion_modes[1].energy();
  const Word w = 0b0101;  // A-modes 1 and 3 occupied
  CHECK(std::abs(d(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(w)) - (v1 - v1)) <= 1e-15);
  const Word w2 = 0b1010;  // A-modes 2 and 4 occupied
  CHECK(std::abs(d(static_cast<Eigen::Index>(w2), static_cast<Eigen::Index>(w2)) - (v2 - v2)) <= 1e-15);
  const Word w3 = 0b0011;
  CHECK(std::abs(d(static_cast<Eigen::Index>(w3), static_cast<Eigen::Index>(w3)) - (v1 + v2)) <= 1e-15);
  const ModelConfig empty;
  CHECK(max_abs(free_fermion_bilinear(empty, build_basis(0))[0]) == 0.0);
}

TEST_CASE("interaction matrix element for pair creation with boson absorption") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  ModelConfig m = energy_model({1.0, 1.5}, {1.0}, 0.7, 3);
  const ProductSpace space = build_product_space(m);
  DenseMatrix x(4, 4);
  for (Eigen::Index i = 0; i < 16; ++i) x(i / 4, i % 4) = cplx(normal(rng), normal(rng));
  const VertexSet vs(2, {{CouplingMatrix(x), CouplingMatrix::zero(2), CouplingMatrix::zero(2), CouplingMatrix::zero(2)}},
                     VertexProvenance::Explicit);
  const OperatorMatrix p0 = assemble_interaction(m, vs, space)[0];
  Vector start = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
  start(static_cast<Eigen::Index>(space.index(space.fermions.vacuum(), 1))) = 1.0;  // one quantum in the only mode
  const Vector image = p0.apply(start);
  for (int i = 1; i <= 2; ++i) {
    for (int j = 1; j <= 2; ++j) {
      const OperatorMatrix pair = mode_operator(space.fermions, ModeKind::FermionCreate, i) *
                                  mode_operator(space.fermions, ModeKind::AntifermionCreate, j);
      Vector target = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
      target(static_cast<Eigen::Index>(space.index(space.fermions.vacuum(), 0))) = 1.0;
      target = space.lift_fermion(pair).apply(target);
      CHECK(std::abs(target.dot(image) - 0.7 * x(i - 1, 2 + j - 1)) <= 1e-14);
    }
  }
}

TEST_CASE("alpha = 0 limits") {
  const ModelConfig m = moving_model(0.0, 3);
  const ProductSpace space = build_product_space(m);
  const VertexSet vs = scalar_vertex_set(2, m.boson_velocities(), {1.0, 2.0});
  const MomentumOperator p = assemble_total(m, vs, space);
  for (std::size_t mu = 0; mu < 4; ++mu) {
    CHECK(p.interaction[mu].nonzeros() == 0);
    CHECK(max_abs(p.total[mu] - p.free[mu]) == 0.0);
  }
  const auto modes = shifted_modes(m, vs, space);
  CHECK(max_abs(modes[0].annihilate - space.lift_boson(boson_ladder(space.bosons, LadderKind::Annihilate, 1))) == 0.0);
  CHECK(max_abs(transformed_hamiltonian(m, vs, space).hamiltonian - p.free[0]) <= 1e-14);
}

TEST_CASE("structure of the interacting operator") {
  const ModelConfig m = moving_model(0.35, 3);
  const ProductSpace space = build_product_space(m);
  const VertexSet vs = scalar_vertex_set(2, m.boson_velocities(), {1.0, cplx(0.2, 0.7)});
  const MomentumOperator p = assemble_total(m, vs, space);
  const OperatorMatrix b = space.lift_fermion(baryon_operator(space.fermions));
  for (std::size_t mu = 0; mu < 4; ++mu) CHECK(max_abs(commutator(p.total[mu], b)) <= 1e-14);

  Vector vac = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
  vac(static_cast<Eigen::Index>(space.index(space.fermions.vacuum(), 0))) = 1.0;
  const Vector image = p.total[0].apply(vac);
  CHECK((image - expectation(p.total[0], vac) * vac).norm() > 0.0);

  const TransformedHamiltonian t = transformed_hamiltonian(m, vs, space);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(t.shift_term.dense(), Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().maxCoeff() <= 1e-12);

  const auto modes = shifted_modes(m, vs, space);
  for (const auto& a : modes) {
    for (const auto& c : modes) CHECK(max_abs_on(commutator(a.create, c.create), space.safe_mask(1)) <= 1e-12);
  }
}
