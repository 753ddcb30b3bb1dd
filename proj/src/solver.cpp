#include "pointform/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/toms748_solve.hpp>

namespace pointform {

namespace {

double dense_hermiticity_defect(const DenseMatrix& h) {
  return h.size() == 0 ? 0.0 : (h - h.adjoint()).cwiseAbs().maxCoeff();
}

void fill_diagnostics(Spectrum& s, const DenseMatrix& vecs, const std::function<Vector(const Vector&)>& apply,
                      const std::vector<bool>& boundary) {
  const auto n = static_cast<std::size_t>(vecs.cols());
  s.residuals.resize(n);
  s.leakage.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const Vector psi = vecs.col(static_cast<Eigen::Index>(j));
    s.residuals[j] = (apply(psi) - s.eigenvalues[j] * psi).norm();
    if (!boundary.empty()) {
      double on_boundary = 0.0;
      for (Eigen::Index i = 0; i < psi.size(); ++i) {
        if (boundary[static_cast<std::size_t>(i)]) on_boundary += std::norm(psi(i));
      }
      s.leakage[j] = std::clamp(on_boundary / psi.squaredNorm(), 0.0, 1.0);
    }
  }
}

Spectrum dense_spectrum(const DenseMatrix& h, const DiagonalizeOptions& opts,
                        const std::function<Vector(const Vector&)>& apply) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0);
  const auto dim = static_cast<std::size_t>(h.rows());
  const std::size_t count = opts.count == 0 ? dim : std::min(opts.count, dim);
  Spectrum s;
  s.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + count);
  const DenseMatrix vecs = es.eigenvectors().leftCols(static_cast<Eigen::Index>(count));
  fill_diagnostics(s, vecs, apply, opts.boundary);
  if (opts.keep_vectors) s.eigenvectors = vecs;
  return s;
}

// Lanczos with full reorthogonalization. Restarts from a fresh random vector
// whenever the Krylov space becomes invariant.
Spectrum lanczos(const SparseMatrix& h, const DiagonalizeOptions& opts) {
  const auto dim = static_cast<Eigen::Index>(h.rows());
  const auto count = static_cast<Eigen::Index>(std::min<std::size_t>(opts.count == 0 ? 1 : opts.count,
                                                                      static_cast<std::size_t>(dim)));
  const Eigen::Index max_k =
      opts.max_krylov == 0 ? dim : std::min<Eigen::Index>(dim, static_cast<Eigen::Index>(opts.max_krylov));
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  auto random_vector = [&] {
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = cplx(normal(rng), normal(rng));
    return v;
  };

  DenseMatrix basis(dim, max_k);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(max_k, max_k);
  Eigen::Index m = 0;
  Vector v = random_vector().normalized();
  double achieved = std::numeric_limits<double>::infinity();

  auto orthogonalize = [&](Vector& w, Eigen::Index upto) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < upto; ++j) w -= basis.col(j).dot(w) * basis.col(j);
    }
  };

  while (m < max_k) {
    basis.col(m) = v;
    Vector w = h * v;
    t(m, m) = basis.col(m).dot(w).real();
    orthogonalize(w, m + 1);
    const double beta = w.norm();
    ++m;
    if (m >= count) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.topLeftCorner(m, m));
      achieved = 0.0;
      for (Eigen::Index j = 0; j < count; ++j) {
        achieved = std::max(achieved, std::abs(beta * es.eigenvectors()(m - 1, j)));
      }
      if (achieved <= opts.tolerance * 0.1 && m >= std::min<Eigen::Index>(dim, 2 * count)) break;
    }
    if (m == max_k) break;
    if (beta <= 1e-12) {
      // Invariant subspace: continue with a new direction, uncoupled in T.
      Vector fresh = random_vector();
      orthogonalize(fresh, m);
      v = fresh.normalized();
    } else {
      t(m, m - 1) = beta;
      t(m - 1, m) = beta;
      v = w / beta;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.topLeftCorner(m, m));
  Spectrum s;
  const Eigen::Index got = std::min(count, m);
  s.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + got);
  const DenseMatrix vecs =
      basis.leftCols(m) * es.eigenvectors().leftCols(got).cast<cplx>();
  fill_diagnostics(s, vecs, [&](const Vector& x) { return Vector(h * x); }, opts.boundary);
  const double worst = s.residuals.empty() ? 0.0 : *std::max_element(s.residuals.begin(), s.residuals.end());
  if (worst > opts.tolerance) {
    throw ConvergenceError("Lanczos did not reach residual " + std::to_string(opts.tolerance) +
                               " (achieved " + std::to_string(worst) + ")",
                           worst);
  }
  if (opts.keep_vectors) s.eigenvectors = vecs;
  return s;
}

}  // namespace

Spectrum diagonalize(const OperatorMatrix& op, const DiagonalizeOptions& opts) {
  if (!op.hermitian()) throw std::invalid_argument("diagonalize needs a hermitian operator");
  if (!opts.boundary.empty() && opts.boundary.size() != op.dim()) {
    throw std::invalid_argument("boundary mask size does not match operator dimension");
  }
  if (opts.method == DiagonalizeMethod::Iterative) return lanczos(op.matrix(), opts);
  return dense_spectrum(op.dense(), opts, [&](const Vector& x) { return op.apply(x); });
}

Spectrum diagonalize(const DenseMatrix& op, const DiagonalizeOptions& opts) {
  if (op.rows() != op.cols()) throw std::invalid_argument("diagonalize needs a square matrix");
  const double scale = std::max(1.0, max_abs(op));
  if (dense_hermiticity_defect(op) > 1e-12 * scale) {
    throw std::invalid_argument("diagonalize needs a hermitian operator");
  }
  if (!opts.boundary.empty() && opts.boundary.size() != static_cast<std::size_t>(op.rows())) {
    throw std::invalid_argument("boundary mask size does not match operator dimension");
  }
  if (opts.method == DiagonalizeMethod::Iterative) return lanczos(op.sparseView(), opts);
  return dense_spectrum(op, opts, [&](const Vector& x) { return Vector(op * x); });
}

std::vector<Level> group_levels(std::vector<double> values, double tol) {
  std::sort(values.begin(), values.end());
  std::vector<Level> out;
  for (double v : values) {
    if (!out.empty() && std::abs(v - out.back().value) <= tol) {
      ++out.back().multiplicity;
    } else {
      out.push_back({v, 1});
    }
  }
  return out;
}

ExactModelSpec ExactModelSpec::shared(std::vector<double> energies, std::vector<cplx> y, double alpha) {
  ExactModelSpec s;
  s.fermion_energies = energies;
  s.boson_energies = std::move(energies);
  s.y = std::move(y);
  s.alpha = alpha;
  return s;
}

void ExactModelSpec::validate() const {
  if (y.size() != boson_energies.size()) {
    throw std::invalid_argument("exact model needs one Y per boson mode");
  }
  for (double e : fermion_energies) {
    if (!(e > 0.0)) throw std::invalid_argument("exact model energies must be positive");
  }
  for (double e : boson_energies) {
    if (!(e > 0.0)) throw std::invalid_argument("exact model energies must be positive");
  }
}

ExactLevel exact_sector_spectrum(const ExactModelSpec& spec, const std::vector<int>& occupations) {
  spec.validate();
  if (occupations.size() != spec.boson_energies.size()) {
    throw std::invalid_argument("occupation multi-index has wrong length");
  }
  ExactLevel out;
  out.occupations = occupations;
  out.eigenvalue = std::accumulate(spec.fermion_energies.begin(), spec.fermion_energies.end(), 0.0);
  for (std::size_t k = 0; k < occupations.size(); ++k) {
    if (occupations[k] < 0) throw std::invalid_argument("occupations must be non-negative");
    const double e = spec.boson_energies[k];
    out.eigenvalue += occupations[k] * e - spec.alpha * spec.alpha * std::norm(spec.y[k]) / e;
    out.displacement.push_back(-spec.alpha * std::conj(spec.y[k]) / e);
    out.raising_shift.push_back(spec.alpha * spec.y[k] / e);
  }
  return out;
}

std::vector<double> exact_lowest_eigenvalues(const ExactModelSpec& spec, std::size_t count) {
  spec.validate();
  const std::size_t k = spec.boson_energies.size();
  using Entry = std::pair<double, std::vector<int>>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  std::set<std::vector<int>> seen;
  std::vector<int> zero(k, 0);
  frontier.emplace(exact_sector_spectrum(spec, zero).eigenvalue, zero);
  seen.insert(zero);
  std::vector<double> out;
  while (out.size() < count && !frontier.empty()) {
    auto [value, occ] = frontier.top();
    frontier.pop();
    out.push_back(value);
    for (std::size_t m = 0; m < k; ++m) {
      auto next = occ;
      ++next[m];
      if (seen.insert(next).second) frontier.emplace(exact_sector_spectrum(spec, next).eigenvalue, next);
    }
  }
  return out;
}

Vector exact_eigenvector(const ExactModelSpec& spec, const std::vector<int>& occupations,
                         const BosonBasis& bb) {
  const ExactLevel level = exact_sector_spectrum(spec, occupations);
  if (bb.modes() != static_cast<int>(occupations.size())) {
    throw std::invalid_argument("boson basis does not match the exact model");
  }
  Vector psi = Vector::Zero(static_cast<Eigen::Index>(bb.size()));
  psi(0) = 1.0;
  psi = displacement_operator(bb, level.displacement).apply(psi);
  for (int k = 1; k <= bb.modes(); ++k) {
    const OperatorMatrix raise =
        boson_ladder(bb, LadderKind::Create, k) +
        level.raising_shift[static_cast<std::size_t>(k - 1)] * OperatorMatrix::identity(bb.size());
    for (int r = 0; r < occupations[static_cast<std::size_t>(k - 1)]; ++r) psi = raise.apply(psi);
  }
  return psi.normalized();
}

ModelConfig exact_model_config(const ExactModelSpec& spec, int n_max) {
  spec.validate();
  ModelConfig m;
  for (double e : spec.fermion_energies) m.fermion_modes.push_back(ModeSpec::with_energy(e));
  for (double e : spec.boson_energies) m.boson_modes.push_back(ModeSpec::with_energy(e));
  m.kappa = 1.0;
  m.alpha = spec.alpha;
  m.n_max = n_max;
  return m;
}

VertexSet exact_model_vertices(const ExactModelSpec& spec) {
  std::vector<FourVector> velocities;
  for (double e : spec.boson_energies) velocities.push_back({e, 0.0, 0.0, 0.0});
  return scalar_vertex_set(static_cast<int>(spec.fermion_energies.size()), velocities, spec.y);
}

DenseMatrix sector_hamiltonian(const MomentumOperator& p, const ProductSpace& space, int sector) {
  const auto idx = space.sector_indices(sector);
  return restrict_dense(p.total[0], idx);
}

AlphaSolution solve_alpha(const ExactModelSpec& spec, int n_max) {
  spec.validate();
  const double energy_sum = std::accumulate(spec.fermion_energies.begin(), spec.fermion_energies.end(), 0.0);
  double coupling_sum = 0.0;
  for (std::size_t k = 0; k < spec.y.size(); ++k) coupling_sum += std::norm(spec.y[k]) / spec.boson_energies[k];
  if (!(coupling_sum > 0.0)) {
    throw NoRootError("no coupling makes the ground state vanish: all vertices Y_k are zero");
  }
  AlphaSolution out;
  out.alpha_closed_form = std::sqrt(energy_sum / coupling_sum);

  // Numerical route: H(alpha) = H0 + alpha H1 on the baryon-N sector.
  ExactModelSpec unit = spec;
  unit.alpha = 1.0;
  const ModelConfig model = exact_model_config(unit, n_max);
  const ProductSpace space = build_product_space(model);
  const VertexSet vertices = exact_model_vertices(unit);
  const MomentumOperator p = assemble_total(model, vertices, space);
  const auto idx = space.sector_indices(space.fermions.modes());
  const DenseMatrix h0 = restrict_dense(p.free[0], idx);
  const DenseMatrix h1 = restrict_dense(p.interaction[0], idx);
  auto lambda_min = [&](double alpha) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h0 + alpha * h1, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  };

  double lo = 0.0;
  double hi = 0.5;
  double f_lo = lambda_min(lo);
  double f_hi = lambda_min(hi);
  while (f_hi > 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi *= 1.5;
    if (hi > 1e4) throw NoRootError("ground-state eigenvalue stays positive for alpha up to 1e4");
    f_hi = lambda_min(hi);
  }
  if (f_hi == 0.0) {
    out.alpha_root_found = hi;
  } else {
    boost::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::toms748_solve(lambda_min, lo, hi, f_lo, f_hi,
                                                    boost::math::tools::eps_tolerance<double>(52), iters);
    out.alpha_root_found = 0.5 * (a + b);
    out.iterations = static_cast<int>(iters);
  }
  out.lambda_min_at_alpha = lambda_min(out.alpha_root_found);
  return out;
}

namespace {

// Power series of the solution holomorphic at the singular point z = -a of
//   (z + a) g' = (lambda - e - a z) g + e h
//   (z - a) h' = (lambda - e + a z) h + e g
// evaluated at z = 0 (t = z + a = a). Returns (g(0), h(0)) scaled by
// prod_{k=1}^{order} (1 - x/k), x = lambda - e + a^2, which removes the poles
// of the coefficients at x = 1, 2, ...
std::pair<cplx, cplx> series_at_midpoint(double e, double a, double lambda, int order) {
  double x = lambda - e + a * a;
  for (int n = 1; n <= order; ++n) {
    if (std::abs(n - x) < 1e-13) x += 1e-11;
  }
  double p = e;
  double m = -x;
  double m_prev = 0.0;
  double g = p;
  double h = m;
  double tn = 1.0;
  double scale = 1.0;
  double tail = 0.0;
  double peak = std::max(std::abs(g), std::abs(h));
  for (int n = 0; n < order; ++n) {
    const double m_next = ((n - x + 2.0 * a * a) * m - a * m_prev - e * p) / (2.0 * a * (n + 1));
    const double p_next = (e * m_next - a * p) / (n + 1 - x);
    m_prev = m;
    m = m_next;
    p = p_next;
    tn *= a;
    scale *= 1.0 - x / (n + 1);
    g += p * tn;
    h += m * tn;
    peak = std::max({peak, std::abs(g), std::abs(h)});
    if (n >= order - 5) tail = std::max({tail, std::abs(p * tn), std::abs(m * tn)});
  }
  if (!(tail <= 1e-12 * peak)) {
    throw ConvergenceError("series did not converge at order " + std::to_string(order), tail / peak);
  }
  return {g * scale, h * scale};
}

// Scalar channel with holomorphic solutions iff x is a non-negative integer:
// determinant of the truncated coefficient recursion (n - x) c_n = ... .
double channel_function(double x, int order) {
  double d = 1.0;
  for (int n = 0; n <= order; ++n) d *= (n - x) / (n + 1.0);
  return d;
}

template <typename F>
std::vector<double> scan_roots(F&& f, const SeriesOptions& opts) {
  std::vector<double> roots;
  double a = opts.lambda_min;
  double fa = f(a);
  if (fa == 0.0) roots.push_back(a);
  const auto steps = static_cast<long>(std::ceil((opts.lambda_max - opts.lambda_min) / opts.scan_step));
  for (long s = 1; s <= steps; ++s) {
    const double b = std::min(opts.lambda_max, opts.lambda_min + static_cast<double>(s) * opts.scan_step);
    const double fb = f(b);
    if (fb == 0.0) {
      roots.push_back(b);
    } else if (fa != 0.0 && std::signbit(fa) != std::signbit(fb)) {
      double lo = a;
      double hi = b;
      double flo = fa;
      for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (std::signbit(fm) == std::signbit(flo)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

}  // namespace

double n1_spectral_function(double e, double alpha, double lambda, int order) {
  const auto [gl, hl] = series_at_midpoint(e, alpha, lambda, order);   // (f+, f-) regular at -alpha
  const auto [hr, gr] = series_at_midpoint(e, -alpha, lambda, order);  // (f-, f+) regular at +alpha
  return (gl * hr - hl * gr).real();
}

std::vector<Level> n1_series_spectrum(double e, double alpha, const SeriesOptions& opts) {
  if (opts.order < 50) throw std::invalid_argument("series order must be at least 50");
  if (!(opts.lambda_max > opts.lambda_min) || !(opts.scan_step > 0.0)) {
    throw std::invalid_argument("invalid eigenvalue search window");
  }
  std::vector<double> roots;
  if (e == 0.0 || alpha == 0.0) {
    // Decoupled channels: f+- at e = 0 (both with exponent lambda + alpha^2),
    // f1 and f2 at alpha = 0 (exponents lambda and lambda - 2e).
    const std::array<double, 2> offsets =
        e == 0.0 ? std::array<double, 2>{alpha * alpha, alpha * alpha} : std::array<double, 2>{0.0, -2.0 * e};
    for (double off : offsets) {
      auto r = scan_roots([&](double lam) { return channel_function(lam + off, opts.order); }, opts);
      roots.insert(roots.end(), r.begin(), r.end());
    }
  } else {
    roots = scan_roots([&](double lam) { return n1_spectral_function(e, alpha, lam, opts.order); }, opts);
  }
  if (roots.empty()) throw NoRootError("no eigenvalue in the search window");
  return group_levels(std::move(roots));
}

ModelConfig n1_model_config(double e, double alpha, int n_max) {
  ModelConfig m;
  m.fermion_modes = {ModeSpec::with_energy(e)};
  m.boson_modes = {ModeSpec::with_energy(1.0)};
  m.kappa = 1.0;
  m.alpha = alpha;
  m.n_max = n_max;
  return m;
}

VertexSet n1_model_vertices() {
  // A(X) = a^dagger b^dagger + b a = A^dagger_1 A_2 + A^dagger_2 A_1.
  DenseMatrix x = DenseMatrix::Zero(2, 2);
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  VertexSet::Components comps{CouplingMatrix(x), CouplingMatrix::zero(1), CouplingMatrix::zero(1),
                              CouplingMatrix::zero(1)};
  return VertexSet(1, {comps}, VertexProvenance::Explicit);
}

std::vector<double> n1_diagonalization_spectrum(double e, double alpha, int n_max, std::size_t count) {
  const ModelConfig model = n1_model_config(e, alpha, n_max);
  const ProductSpace space = build_product_space(model);
  const MomentumOperator p = assemble_total(model, n1_model_vertices(), space);
  DiagonalizeOptions opts;
  opts.count = count;
  opts.keep_vectors = false;
  return diagonalize(sector_hamiltonian(p, space, 0), opts).eigenvalues;
}

}  // namespace pointform
