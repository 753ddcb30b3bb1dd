#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pointform/vertex.hpp"

using namespace pointform;

namespace {

constexpr double kPi = std::numbers::pi;

// Unregulated F^0 at u = (u0, 0, 0, 0) for u0 > 0, in Hankel functions.
cplx rest_frame_f0(double u0) {
  const cplx h0(std::cyl_bessel_j(0.0, u0), std::cyl_neumann(0.0, u0));
  const cplx h1(std::cyl_bessel_j(1.0, u0), std::cyl_neumann(1.0, u0));
  return kPi * kPi * (-h0 / u0 + 2.0 * h1 / (u0 * u0));
}

double rel_diff(const ComplexFourVector& a, const ComplexFourVector& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

DenseMatrix random_unitary(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  DenseMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = cplx(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<DenseMatrix> qr(m);
  return qr.householderQ();
}

}  // namespace

TEST_CASE("four-vector helpers") {
  const FourVector v = velocity_from_spatial(0.3, -0.4, 1.2);
  CHECK(is_unit_timelike(v));
  CHECK(std::abs(minkowski_dot(v, v) - 1.0) <= 1e-14);
  CHECK_FALSE(is_unit_timelike({1.0, 0.5, 0.0, 0.0}));
  CHECK_FALSE(is_unit_timelike({-1.0, 0.0, 0.0, 0.0}));
  const FourVector s = v + (-v);
  for (double x : s) CHECK(x == 0.0);
}

TEST_CASE("regulated integral at u = 0 matches the Bessel-K closed form") {
  for (double eps : {0.4, 1.0}) {
    const ComplexFourVector f = hyperboloid_integral({0.0, 0.0, 0.0, 0.0}, 9.0, eps);
    const double expected = 2.0 * kPi * (std::cyl_bessel_k(0.0, eps) / eps + 2.0 * std::cyl_bessel_k(1.0, eps) / (eps * eps));
    CHECK(std::abs(f[0] - expected) <= 1e-10 * expected);
    CHECK(std::abs(f[1]) == 0.0);
  }
}

TEST_CASE("rest-frame form factor matches the Hankel closed form") {
  const QuadratureSpec q;
  for (double u0 : {3.0, 5.0, 8.0}) {
    const FormFactorResult r = form_factor({u0, 0.0, 0.0, 0.0}, q);
    const cplx expected = rest_frame_f0(u0);
    CHECK(std::abs(r.value[0] - expected) <= 1e-3 * std::abs(expected));
    CHECK_FALSE(r.flagged);
    for (int i = 1; i <= 3; ++i) CHECK(std::abs(r.value[static_cast<std::size_t>(i)]) <= 1e-10);
  }
  CHECK(std::abs(rest_frame_f0(5.0) - cplx(0.0919159, 0.725737)) <= 1e-6);
}

TEST_CASE("dual regulator schedules agree") {
  QuadratureSpec a;
  QuadratureSpec b;
  b.regulators = {0.3, 0.15, 0.075, 0.0375, 0.02};
  const FourVector u{5.0, 0.0, 0.0, 0.0};
  CHECK(rel_diff(form_factor(u, a).value, form_factor(u, b).value) <= 1e-3);
}

TEST_CASE("form factor is Lorentz covariant for timelike u") {
  // F^mu(u) = (u^mu / m) F^0((m, 0, 0, 0)) with m^2 = u.u.
  const QuadratureSpec q;
  const FourVector u{3.0, 1.0, 0.0, 0.0};
  const double m = std::sqrt(minkowski_dot(u, u));
  const cplx rest = form_factor({m, 0.0, 0.0, 0.0}, q).value[0];
  const FormFactorResult r = form_factor(u, q);
  for (std::size_t mu = 0; mu < 4; ++mu) {
    CHECK(std::abs(r.value[mu] - u[mu] / m * rest) <= 1e-3 * std::abs(rest));
  }
}

TEST_CASE("form factor at u = 0 is flagged as divergent") {
  const FormFactorResult r = form_factor({0.0, 0.0, 0.0, 0.0}, QuadratureSpec{});
  CHECK(r.flagged);
}

TEST_CASE("quadrature spec validation") {
  QuadratureSpec q;
  q.regulators = {0.1};
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q.regulators = {0.1, 0.1};
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q.regulators = {0.1, -0.05};
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q = QuadratureSpec{};
  q.nodes_per_panel = 4;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("Dirac spinor normalization") {
  const FourVector v = velocity_from_spatial(0.5, 0.2, -0.7);
  for (auto spin : {SpinProjection::Up, SpinProjection::Down}) {
    const Spinor u = dirac_spinor(v, spin, SpinorKind::Particle);
    const Spinor w = dirac_spinor(v, spin, SpinorKind::Antiparticle);
    // psibar chi = psi^dagger gamma0 chi.
    auto bar = [](const Spinor& a, const Spinor& b) {
      return a.head<2>().dot(b.head<2>()) - a.tail<2>().dot(b.tail<2>());
    };
    CHECK(std::abs(bar(u, u) - 1.0) <= 1e-14);
    CHECK(std::abs(bar(w, w) + 1.0) <= 1e-14);
    CHECK(std::abs(bar(u, w)) <= 1e-14);
  }
  const Spinor rest = dirac_spinor({1.0, 0.0, 0.0, 0.0}, SpinProjection::Up, SpinorKind::Particle);
  CHECK(std::abs(pseudoscalar_bilinear(rest, rest)) == 0.0);
  CHECK_THROWS(dirac_spinor({1.0, 1.0, 0.0, 0.0}, SpinProjection::Up, SpinorKind::Particle));
}

TEST_CASE("scalar vertex set") {
  const std::vector<FourVector> bosons{velocity_from_spatial(0.0, 0.0, 0.6), {2.0, 0.0, 0.0, 0.0}};
  const VertexSet vs = scalar_vertex_set(3, bosons, {cplx(1.0, 0.5), 2.0});
  CHECK(vs.provenance() == VertexProvenance::ScalarY);
  CHECK(to_string(vs.provenance()) == "scalar");
  CHECK(std::abs(vs.matrix(1, 0).entries().trace() - cplx(1.0, 0.5)) <= 1e-14);
  CHECK(std::abs(vs.matrix(2, 0).entries().trace() - 2.0) <= 1e-14);
  const double ratio = bosons[0][3] / bosons[0][0];
  CHECK(max_abs(DenseMatrix(vs.matrix(1, 3).entries() - ratio * vs.matrix(1, 0).entries())) <= 1e-15);
  CHECK(vs.report().passes(1e-14));
  CHECK_THROWS_AS(scalar_vertex_set(1, bosons, {1.0}), std::invalid_argument);
}

TEST_CASE("non-normal vertex is reported") {
  DenseMatrix x = DenseMatrix::Zero(2, 2);
  x(0, 1) = 1.0;
  const VertexSet vs(1, {{CouplingMatrix(x), CouplingMatrix::zero(1), CouplingMatrix::zero(1), CouplingMatrix::zero(1)}},
                     VertexProvenance::Explicit);
  CHECK(std::abs(vs.report().normality_defect - std::sqrt(2.0)) <= 1e-14);
  CHECK_FALSE(vs.report().passes(1e-12));
  CHECK_THROWS_AS(VertexSet(2, vs.matrices(), VertexProvenance::Explicit), std::invalid_argument);
}

TEST_CASE("vertex defects are invariant under a common unitary change of basis") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::vector<VertexSet::Components> mats(2);
  for (auto& comps : mats) {
    for (auto& c : comps) {
      DenseMatrix m(4, 4);
      for (Eigen::Index i = 0; i < 16; ++i) m(i / 4, i % 4) = cplx(normal(rng), normal(rng));
      c = CouplingMatrix(m);
    }
  }
  const VertexSet original(2, mats, VertexProvenance::Explicit);
  const DenseMatrix u = random_unitary(rng, 4);
  for (auto& comps : mats) {
    for (auto& c : comps) c = CouplingMatrix(DenseMatrix(u * c.entries() * u.adjoint()));
  }
  const VertexSet rotated(2, mats, VertexProvenance::Explicit);
  CHECK(rotated.report().normality_defect == doctest::Approx(original.report().normality_defect).epsilon(1e-12));
  CHECK(rotated.report().commutativity_defect ==
        doctest::Approx(original.report().commutativity_defect).epsilon(1e-12));
}

TEST_CASE("pseudoscalar vertex set on a small grid") {
  const std::vector<FermionGridMode> grid{{velocity_from_spatial(0.0, 0.0, 0.5), SpinProjection::Up},
                                          {velocity_from_spatial(0.0, 0.0, -0.5), SpinProjection::Up}};
  const std::vector<FourVector> bosons{velocity_from_spatial(0.3, 0.0, 0.0)};
  QuadratureSpec q;
  const VertexSet vs = pseudoscalar_vertex_set(grid, bosons, q);
  CHECK(vs.provenance() == VertexProvenance::Pseudoscalar);
  CHECK(vs.fermion_modes() == 2);
  CHECK(vs.boson_modes() == 1);
  for (int mu = 0; mu < 4; ++mu) {
    const DenseMatrix& x = vs.matrix(1, mu).entries();
    CHECK(x.rows() == 4);
    CHECK(x.allFinite());
  }
  CHECK(vs.report().normality_defect >= 0.0);
}

TEST_CASE("form factor at -u is the complex conjugate") {
  const QuadratureSpec q;
  for (const FourVector& u : {FourVector{5.0, 0.0, 0.0, 0.0}, FourVector{3.0, 1.0, -0.5, 0.2}}) {
    const auto plus = form_factor(u, q).value;
    const auto minus = form_factor(-u, q).value;
    for (std::size_t mu = 0; mu < 4; ++mu) CHECK(std::abs(minus[mu] - std::conj(plus[mu])) <= 1e-10);
  }
}

TEST_CASE("unregulated integral at u = 0 grows with the rapidity cutoff") {
  double previous = 0.0;
  for (double cutoff : {5.0, 10.0, 20.0}) {
    const double value = hyperboloid_integral({0.0, 0.0, 0.0, 0.0}, cutoff, 0.0)[0].real();
    CHECK(value > 100.0 * previous);
    previous = value;
  }
}

TEST_CASE("spin states stay orthogonal under a boost") {
  const FourVector v = velocity_from_spatial(-0.4, 0.9, 0.3);
  const Spinor up = dirac_spinor(v, SpinProjection::Up, SpinorKind::Particle);
  const Spinor down = dirac_spinor(v, SpinProjection::Down, SpinorKind::Particle);
  const cplx overlap = up.head<2>().dot(down.head<2>()) - up.tail<2>().dot(down.tail<2>());
  CHECK(std::abs(overlap) <= 1e-15);
  const Spinor rest_up = dirac_spinor({1.0, 0.0, 0.0, 0.0}, SpinProjection::Up, SpinorKind::Particle);
  const Spinor rest_down = dirac_spinor({1.0, 0.0, 0.0, 0.0}, SpinProjection::Down, SpinorKind::Particle);
  CHECK(std::abs(pseudoscalar_bilinear(rest_up, rest_down)) == 0.0);
}

TEST_CASE("pseudoscalar entries match an entrywise recomputation") {
  const std::vector<FermionGridMode> grid{{velocity_from_spatial(0.0, 0.0, 0.5), SpinProjection::Up},
                                          {velocity_from_spatial(0.2, 0.0, -0.5), SpinProjection::Down}};
  const FourVector vk = velocity_from_spatial(0.3, 0.0, 0.0);
  const QuadratureSpec q;
  const VertexSet vs = pseudoscalar_vertex_set(grid, {vk}, q);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const Spinor ui = dirac_spinor(grid[i].velocity, grid[i].spin, SpinorKind::Particle);
      const Spinor uj = dirac_spinor(grid[j].velocity, grid[j].spin, SpinorKind::Particle);
      // ubar g5 u = u^dagger gamma0 gamma5 u, gamma0 gamma5 = [[0, I], [-I, 0]].
      const cplx bilinear = ui.head<2>().dot(uj.tail<2>()) - ui.tail<2>().dot(uj.head<2>());
      const FormFactorResult f = form_factor(grid[i].velocity - grid[j].velocity - vk, q);
      for (int mu = 0; mu < 4; ++mu) {
        const cplx entry = vs.matrix(1, mu).entries()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        CHECK(std::abs(entry - f.value[static_cast<std::size_t>(mu)] * bilinear) <= 1e-12 * (1.0 + std::abs(entry)));
      }
    }
  }
}

TEST_CASE("one fermion at rest gives vanishing diagonal blocks") {
  const std::vector<FermionGridMode> grid{{{1.0, 0.0, 0.0, 0.0}, SpinProjection::Up}};
  const VertexSet vs = pseudoscalar_vertex_set(grid, {velocity_from_spatial(0.0, 0.2, 0.0)}, QuadratureSpec{});
  for (int mu = 0; mu < 4; ++mu) {
    CHECK(std::abs(vs.matrix(1, mu).entries()(0, 0)) == 0.0);
    CHECK(std::abs(vs.matrix(1, mu).entries()(1, 1)) == 0.0);
  }
}

TEST_CASE("pseudoscalar vertex sets are deterministic and handle an empty grid") {
  const std::vector<FermionGridMode> grid{{velocity_from_spatial(0.1, 0.0, 0.4), SpinProjection::Up}};
  const std::vector<FourVector> bosons{velocity_from_spatial(0.0, 0.3, 0.0)};
  const VertexSet a = pseudoscalar_vertex_set(grid, bosons, QuadratureSpec{});
  const VertexSet b = pseudoscalar_vertex_set(grid, bosons, QuadratureSpec{});
  for (int mu = 0; mu < 4; ++mu) CHECK((a.matrix(1, mu).entries().array() == b.matrix(1, mu).entries().array()).all());
  const VertexSet empty = pseudoscalar_vertex_set({}, {}, QuadratureSpec{});
  CHECK(empty.fermion_modes() == 0);
  CHECK(empty.boson_modes() == 0);
}
