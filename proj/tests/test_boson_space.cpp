#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pointform/boson_space.hpp"

using namespace pointform;

TEST_CASE("basis ordering has the last mode varying fastest") {
  const BosonBasis bb = build_boson_basis(2, 3);
  REQUIRE(bb.size() == 16);
  CHECK(bb.occupations(0) == std::vector<int>{0, 0});
  CHECK(bb.occupations(1) == std::vector<int>{0, 1});
  CHECK(bb.occupations(4) == std::vector<int>{1, 0});
  CHECK(bb.occupations(15) == std::vector<int>{3, 3});
  for (std::size_t i = 0; i < bb.size(); ++i) CHECK(bb.index_of(bb.occupations(i)) == i);
}

TEST_CASE("zero modes give the one-state space") {
  const BosonBasis bb = build_boson_basis(0, 5);
  CHECK(bb.size() == 1);
}

TEST_CASE("capacity limit is enforced") {
  CHECK_THROWS_AS(build_boson_basis(4, 20, 1000), CapacityError);
  CHECK_THROWS(build_boson_basis(1, 0));
}

TEST_CASE("ladder matrix elements") {
  const BosonBasis bb = build_boson_basis(1, 5);
  const DenseMatrix c = boson_ladder(bb, LadderKind::Annihilate, 1).dense();
  const DenseMatrix cd = boson_ladder(bb, LadderKind::Create, 1).dense();
  for (int n = 1; n <= 5; ++n) {
    CHECK(std::abs(c(n - 1, n) - std::sqrt(static_cast<double>(n))) == 0.0);
    CHECK(std::abs(cd(n, n - 1) - std::sqrt(static_cast<double>(n))) == 0.0);
  }
  CHECK(max_abs(DenseMatrix(cd - c.adjoint())) == 0.0);
  CHECK_THROWS(boson_ladder(bb, LadderKind::Create, 2));
}

TEST_CASE("canonical commutator holds below the cutoff and fails on the top state") {
  const int n_max = 6;
  const BosonBasis bb = build_boson_basis(2, n_max);
  for (int a = 1; a <= 2; ++a) {
    for (int b = 1; b <= 2; ++b) {
      OperatorMatrix comm = commutator(boson_ladder(bb, LadderKind::Annihilate, a), boson_ladder(bb, LadderKind::Create, b));
      if (a == b) comm = comm - OperatorMatrix::identity(bb.size());
      CHECK(max_abs_on(comm, bb.safe_mask(1)) <= 1e-14);
    }
  }
  const BosonBasis one = build_boson_basis(1, n_max);
  const DenseMatrix comm =
      commutator(boson_ladder(one, LadderKind::Annihilate, 1), boson_ladder(one, LadderKind::Create, 1)).dense();
  CHECK(std::abs(comm(n_max, n_max) - cplx(-n_max, 0.0)) <= 1e-14);
}

TEST_CASE("number operator equals c^dagger c exactly") {
  const BosonBasis bb = build_boson_basis(3, 4);
  for (int k = 1; k <= 3; ++k) {
    const OperatorMatrix n = number_operator(bb, k);
    const OperatorMatrix cdc = boson_ladder(bb, LadderKind::Create, k) * boson_ladder(bb, LadderKind::Annihilate, k);
    CHECK(max_abs(n - cdc) <= 1e-14);
    const DenseMatrix d = n.dense();
    for (std::size_t i = 0; i < bb.size(); ++i) {
      CHECK(d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real() == bb.occupation(i, k));
    }
  }
}

TEST_CASE("safe and boundary masks") {
  const BosonBasis bb = build_boson_basis(2, 4);
  auto count = [](const std::vector<bool>& m) { return std::count(m.begin(), m.end(), true); };
  CHECK(count(bb.safe_mask(0)) == 25);
  CHECK(count(bb.safe_mask(1)) == 16);
  CHECK(count(bb.safe_mask(2)) == 9);
  CHECK(count(bb.boundary_mask()) == 25 - 16);
  const OperatorMatrix p = safe_projector(bb, 2);
  CHECK(max_abs(p * p - p) == 0.0);
}

TEST_CASE("matrix exponential") {
  DenseMatrix gen = DenseMatrix::Zero(2, 2);
  gen(0, 1) = 0.7;
  gen(1, 0) = -0.7;
  const DenseMatrix r = expm(gen);
  CHECK(std::abs(r(0, 0) - std::cos(0.7)) <= 1e-14);
  CHECK(std::abs(r(0, 1) - std::sin(0.7)) <= 1e-14);
  const DenseMatrix big = expm(DenseMatrix(DenseMatrix::Identity(3, 3) * cplx(3.0, 1.0)));
  CHECK(std::abs(big(1, 1) - std::exp(cplx(3.0, 1.0))) <= 1e-12 * std::abs(std::exp(cplx(3.0, 1.0))));
}

TEST_CASE("displacement of the vacuum is a coherent state") {
  const BosonBasis bb = build_boson_basis(1, 30);
  const cplx beta(0.6, -0.3);
  const OperatorMatrix d = displacement_operator(bb, {beta});
  Vector vac = Vector::Zero(static_cast<Eigen::Index>(bb.size()));
  vac(0) = 1.0;
  const Vector psi = d.apply(vac);
  // <n|beta> = exp(-|beta|^2/2) beta^n / sqrt(n!).
  double fact = 1.0;
  for (int n = 0; n <= 12; ++n) {
    if (n > 0) fact *= n;
    const cplx expected = std::exp(-std::norm(beta) / 2.0) * std::pow(beta, n) / std::sqrt(fact);
    CHECK(std::abs(psi(n) - expected) <= 1e-12);
  }
  const Vector lowered = boson_ladder(bb, LadderKind::Annihilate, 1).apply(psi);
  CHECK((lowered - beta * psi).head(20).norm() <= 1e-10);
}

TEST_CASE("basis sizes") {
  CHECK(build_boson_basis(1, 3).size() == 4);
  CHECK(build_boson_basis(2, 2).size() == 9);
}

TEST_CASE("annihilation kills the vacuum") {
  const BosonBasis bb = build_boson_basis(2, 4);
  Vector vac = Vector::Zero(static_cast<Eigen::Index>(bb.size()));
  vac(0) = 1.0;
  for (int k = 1; k <= 2; ++k) CHECK(boson_ladder(bb, LadderKind::Annihilate, k).apply(vac).norm() == 0.0);
}

TEST_CASE("displacement properties") {
  const BosonBasis bb = build_boson_basis(1, 24);
  CHECK(max_abs(displacement_operator(bb, {0.0}) - OperatorMatrix::identity(bb.size())) == 0.0);
  Vector vac = Vector::Zero(static_cast<Eigen::Index>(bb.size()));
  vac(0) = 1.0;
  for (const cplx beta : {cplx(0.3, 0.0), cplx(0.5, 0.5), cplx(0.0, -1.0)}) {
    const OperatorMatrix d = displacement_operator(bb, {beta});
    const Vector psi = d.apply(vac);
    const double n = std::real(psi.dot(number_operator(bb, 1).apply(psi)));
    CHECK(std::abs(n - std::norm(beta)) <= 1e-8);
    const int margin = static_cast<int>(std::ceil(4.0 * std::abs(beta)));
    const OperatorMatrix round_trip = d * displacement_operator(bb, {-beta}) - OperatorMatrix::identity(bb.size());
    CHECK(max_abs_on(round_trip, bb.safe_mask(margin)) <= 1e-8);
  }
}
