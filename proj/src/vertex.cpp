#include "pointform/vertex.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pointform {

double minkowski_dot(const FourVector& a, const FourVector& b) {
  return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

bool is_unit_timelike(const FourVector& v, double tol) {
  return v[0] > 0.0 && std::abs(minkowski_dot(v, v) - 1.0) <= tol;
}

FourVector velocity_from_spatial(double vx, double vy, double vz) {
  return {std::sqrt(1.0 + vx * vx + vy * vy + vz * vz), vx, vy, vz};
}

FourVector operator+(const FourVector& a, const FourVector& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

FourVector operator-(const FourVector& a, const FourVector& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

FourVector operator-(const FourVector& a) { return {-a[0], -a[1], -a[2], -a[3]}; }

void QuadratureSpec::validate() const {
  if (!(rapidity_cutoff > 0.0)) throw std::invalid_argument("rapidity cutoff must be positive");
  if (nodes_per_panel < 8) throw std::invalid_argument("quadrature needs at least 8 nodes per panel");
  if (!(phase_per_panel > 0.0)) throw std::invalid_argument("phase per panel must be positive");
  if (regulators.size() < 2) throw std::invalid_argument("regulator schedule needs at least two entries");
  for (double e : regulators) {
    if (!(e > 0.0)) throw std::invalid_argument("extrapolation regulators must be positive");
  }
  for (std::size_t i = 0; i < regulators.size(); ++i) {
    for (std::size_t j = i + 1; j < regulators.size(); ++j) {
      if (regulators[i] == regulators[j]) throw std::invalid_argument("regulators must be distinct");
    }
  }
}

namespace {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre on [-1, 1] by Newton iteration on P_n.
GaussRule gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  cache.emplace(n, rule);
  return rule;
}

// Spherical Bessel j0 and j1 in elementary form, with short series near zero.
double sph_j0(double x) {
  if (std::abs(x) < 1e-3) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double sph_j1(double x) {
  if (std::abs(x) < 1e-3) return x / 3.0 - x * x * x / 30.0;
  return (std::sin(x) / x - std::cos(x)) / x;
}

// Panel boundaries on [0, cutoff] such that phi(rho) = rho + omega cosh(rho)
// advances by at most `budget` across each panel.
std::vector<double> panel_edges(double cutoff, double omega, double budget) {
  auto phi = [omega](double r) { return r + omega * std::cosh(r); };
  const double total = phi(cutoff) - phi(0.0);
  const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(total / budget)));
  std::vector<double> edges(panels + 1, 0.0);
  edges.back() = cutoff;
  for (std::size_t j = 1; j < panels; ++j) {
    const double target = phi(0.0) + total * static_cast<double>(j) / static_cast<double>(panels);
    double lo = edges[j - 1];
    double hi = cutoff;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (phi(mid) < target ? lo : hi) = mid;
    }
    edges[j] = 0.5 * (lo + hi);
  }
  return edges;
}

// Regulated integrals for several regulators sharing one node layout.
std::vector<ComplexFourVector> regulated_integrals(const FourVector& u, double cutoff,
                                                   const std::vector<double>& epsilons,
                                                   int nodes_per_panel, double phase_per_panel) {
  const double k = std::sqrt(u[1] * u[1] + u[2] * u[2] + u[3] * u[3]);
  const std::array<double, 3> unit =
      k > 0.0 ? std::array<double, 3>{u[1] / k, u[2] / k, u[3] / k} : std::array<double, 3>{0, 0, 0};
  const double omega = std::abs(u[0]) + k;
  const auto edges = panel_edges(cutoff, omega, phase_per_panel);
  const GaussRule rule = gauss_legendre(nodes_per_panel);
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<ComplexFourVector> out(epsilons.size(), ComplexFourVector{});
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    const double centre = 0.5 * (edges[p + 1] + edges[p]);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double rho = centre + half * rule.nodes[q];
      const double w = half * rule.weights[q];
      const double y0 = std::cosh(rho);
      const double r = std::sinh(rho);
      // Measure d^3y / (2 y^0) = sinh^2(rho) d rho dOmega / 2; the angular
      // integrals give 4 pi j0(k r) and -4 pi i j1(k r) u_hat.
      const double radial = 0.5 * r * r * w;
      const double j0 = k > 0.0 ? sph_j0(k * r) : 1.0;
      const double j1 = k > 0.0 ? sph_j1(k * r) : 0.0;
      const cplx phase(std::cos(u[0] * y0), std::sin(u[0] * y0));
      const cplx time_part = phase * (2.0 * two_pi * radial * y0 * j0);
      const cplx space_part = phase * cplx(0.0, -2.0 * two_pi * radial * r * j1);
      for (std::size_t e = 0; e < epsilons.size(); ++e) {
        const double damp = std::exp(-epsilons[e] * y0);
        out[e][0] += damp * time_part;
        for (int c = 0; c < 3; ++c) out[e][static_cast<std::size_t>(c + 1)] += damp * unit[static_cast<std::size_t>(c)] * space_part;
      }
    }
  }
  return out;
}

double inf_norm(const ComplexFourVector& v) {
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace

ComplexFourVector hyperboloid_integral(const FourVector& u, double cutoff, double epsilon,
                                       int nodes_per_panel, double phase_per_panel) {
  if (!(cutoff > 0.0) || epsilon < 0.0) throw std::invalid_argument("invalid cutoff or regulator");
  return regulated_integrals(u, cutoff, {epsilon}, nodes_per_panel, phase_per_panel).front();
}

FormFactorResult form_factor(const FourVector& u, const QuadratureSpec& q) {
  q.validate();
  FormFactorResult res;
  res.regulated = regulated_integrals(u, q.rapidity_cutoff, q.regulators, q.nodes_per_panel,
                                      q.phase_per_panel);

  // Neville tableau, componentwise, evaluated at epsilon = 0.
  const std::size_t n = q.regulators.size();
  std::vector<ComplexFourVector> row = res.regulated;
  ComplexFourVector previous_order = row.back();
  for (std::size_t level = 1; level < n; ++level) {
    std::vector<ComplexFourVector> next(n - level);
    for (std::size_t i = 0; i + level < n; ++i) {
      const double xi = q.regulators[i];
      const double xj = q.regulators[i + level];
      for (std::size_t c = 0; c < 4; ++c) {
        next[i][c] = (xi * row[i + 1][c] - xj * row[i][c]) / (xi - xj);
      }
    }
    if (level == n - 1) previous_order = row.back();
    row = std::move(next);
  }
  res.value = row.front();

  ComplexFourVector diff{};
  for (std::size_t c = 0; c < 4; ++c) diff[c] = res.value[c] - previous_order[c];
  const double scale = inf_norm(res.value);
  res.stability = scale > 0.0 ? inf_norm(diff) / scale : inf_norm(diff);
  res.flagged = !(res.stability <= q.stability_tolerance) || !std::isfinite(scale);
  return res;
}

Spinor dirac_spinor(const FourVector& v, SpinProjection spin, SpinorKind kind) {
  if (!is_unit_timelike(v)) throw std::invalid_argument("dirac_spinor needs a unit timelike four-velocity");
  const Eigen::Vector2cd chi = spin == SpinProjection::Up ? Eigen::Vector2cd(1.0, 0.0)
                                                          : Eigen::Vector2cd(0.0, 1.0);
  Eigen::Matrix2cd sigma_dot_v;
  sigma_dot_v << cplx(v[3], 0.0), cplx(v[1], -v[2]), cplx(v[1], v[2]), cplx(-v[3], 0.0);
  const double norm = 1.0 / std::sqrt(2.0 * (v[0] + 1.0));
  Spinor s;
  if (kind == SpinorKind::Particle) {
    s.head<2>() = (v[0] + 1.0) * chi;
    s.tail<2>() = sigma_dot_v * chi;
  } else {
    s.head<2>() = sigma_dot_v * chi;
    s.tail<2>() = (v[0] + 1.0) * chi;
  }
  return norm * s;
}

cplx pseudoscalar_bilinear(const Spinor& bar_of, const Spinor& ket) {
  // gamma0 gamma5 = [[0, I], [-I, 0]] in the Dirac representation.
  Spinor g;
  g.head<2>() = ket.tail<2>();
  g.tail<2>() = -ket.head<2>();
  return bar_of.dot(g);
}

std::string to_string(VertexProvenance p) {
  switch (p) {
    case VertexProvenance::Explicit: return "explicit";
    case VertexProvenance::Pseudoscalar: return "pseudoscalar";
    case VertexProvenance::ScalarY: return "scalar";
  }
  return "unknown";
}

VertexSet::VertexSet(int n, std::vector<Components> matrices, VertexProvenance provenance)
    : n_(n), matrices_(std::move(matrices)), provenance_(provenance) {
  for (const auto& comps : matrices_) {
    for (const auto& x : comps) {
      if (x.dim() != 2 * n_) {
        throw std::invalid_argument("vertex matrix has dimension " + std::to_string(x.dim()) +
                                    ", expected 2N = " + std::to_string(2 * n_));
      }
    }
  }
  report_ = verify_vertex_matrices(*this);
}

const CouplingMatrix& VertexSet::matrix(int k, int mu) const {
  if (k < 1 || k > boson_modes() || mu < 0 || mu > 3) throw std::out_of_range("vertex index");
  return matrices_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(mu)];
}

VertexReport verify_vertex_matrices(const VertexSet& vs) {
  VertexReport r;
  const auto& m = vs.matrices();
  for (std::size_t k = 0; k < m.size(); ++k) {
    for (std::size_t l = 0; l < m.size(); ++l) {
      for (std::size_t mu = 0; mu < 4; ++mu) {
        const DenseMatrix& xk = m[k][mu].entries();
        const DenseMatrix& xl = m[l][mu].entries();
        r.normality_defect =
            std::max(r.normality_defect, (xk * xl.adjoint() - xl.adjoint() * xk).norm());
        for (std::size_t nu = 0; nu < 4; ++nu) {
          const DenseMatrix& yl = m[l][nu].entries();
          r.commutativity_defect = std::max(r.commutativity_defect, (xk * yl - yl * xk).norm());
        }
      }
    }
  }
  return r;
}

VertexSet scalar_vertex_set(int n, const std::vector<FourVector>& boson_velocities,
                            const std::vector<cplx>& y) {
  if (n < 0) throw std::invalid_argument("mode count must be non-negative");
  if (y.size() != boson_velocities.size()) {
    throw std::invalid_argument("scalar vertex needs one Y per boson mode (" +
                                std::to_string(boson_velocities.size()) + " modes, " +
                                std::to_string(y.size()) + " values)");
  }
  std::vector<VertexSet::Components> mats;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const FourVector& v = boson_velocities[k];
    VertexSet::Components comps;
    const DenseMatrix base =
        n == 0 ? DenseMatrix(0, 0) : DenseMatrix(y[k] / (2.0 * n) * DenseMatrix::Identity(2 * n, 2 * n));
    comps[0] = CouplingMatrix(base);
    for (std::size_t mu = 1; mu < 4; ++mu) {
      const double ratio = v[mu] == 0.0 ? 0.0 : v[mu] / v[0];
      comps[mu] = CouplingMatrix(DenseMatrix(ratio * base));
    }
    mats.push_back(std::move(comps));
  }
  return VertexSet(n, std::move(mats), VertexProvenance::ScalarY);
}

VertexSet pseudoscalar_vertex_set(const std::vector<FermionGridMode>& grid,
                                  const std::vector<FourVector>& boson_velocities,
                                  const QuadratureSpec& q) {
  q.validate();
  const int n = static_cast<int>(grid.size());
  std::vector<Spinor> u(grid.size());
  std::vector<Spinor> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    u[i] = dirac_spinor(grid[i].velocity, grid[i].spin, SpinorKind::Particle);
    v[i] = dirac_spinor(grid[i].velocity, grid[i].spin, SpinorKind::Antiparticle);
  }
  for (const auto& bv : boson_velocities) {
    if (!is_unit_timelike(bv)) throw std::invalid_argument("boson velocity is not unit timelike");
  }

  std::map<FourVector, FormFactorResult> cache;
  std::vector<std::string> warnings;
  auto ff = [&](const FourVector& arg) -> const FormFactorResult& {
    auto it = cache.find(arg);
    if (it == cache.end()) {
      it = cache.emplace(arg, form_factor(arg, q)).first;
      if (it->second.flagged) {
        std::ostringstream os;
        os.precision(17);
        os << "form factor at u=(" << arg[0] << "," << arg[1] << "," << arg[2] << "," << arg[3]
           << ") flagged, stability " << it->second.stability;
        warnings.push_back(os.str());
      }
    }
    return it->second;
  };

  std::vector<VertexSet::Components> mats;
  for (const auto& vk : boson_velocities) {
    std::array<DenseMatrix, 4> x;
    for (auto& m : x) m = DenseMatrix::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const FourVector& vi = grid[si].velocity;
      for (int j = 0; j < n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        const FourVector& vj = grid[sj].velocity;
        const cplx uu = pseudoscalar_bilinear(u[si], u[sj]);
        const cplx vu = pseudoscalar_bilinear(v[si], u[sj]);
        const cplx uv = pseudoscalar_bilinear(u[si], v[sj]);
        const cplx vv = pseudoscalar_bilinear(v[si], v[sj]);
        const auto& f_uu = ff(vi - vj - vk).value;
        const auto& f_vu = ff(-vi - vj - vk).value;
        const auto& f_uv = ff(vi + vj - vk).value;
        const auto& f_vv = ff(-vi + vj - vk).value;
        for (std::size_t mu = 0; mu < 4; ++mu) {
          x[mu](i, j) = f_uu[mu] * uu;
          x[mu](i + n, j) = f_vu[mu] * vu;
          x[mu](i, j + n) = f_uv[mu] * uv;
          x[mu](i + n, j + n) = f_vv[mu] * vv;
        }
      }
    }
    VertexSet::Components comps;
    for (std::size_t mu = 0; mu < 4; ++mu) comps[mu] = CouplingMatrix(x[mu]);
    mats.push_back(std::move(comps));
  }
  VertexSet vs(n, std::move(mats), VertexProvenance::Pseudoscalar);
  vs.warnings = std::move(warnings);
  return vs;
}

}  // namespace pointform
