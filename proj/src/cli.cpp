#include "pointform/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string_view>

namespace pointform::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

void write_atomic(const fs::path& dir, const std::string& name, const std::string& contents) {
  fs::create_directories(dir);
  const fs::path target = dir / name;
  const fs::path tmp = dir / ("." + name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw SchemaError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw SchemaError(where + ": expected a number");
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw SchemaError(where + ": expected an integer");
  return v.get<long long>();
}

long long as_count(const json& v, const std::string& where, long long min) {
  const long long x = as_integer(v, where);
  if (x < min) throw SchemaError(where + ": must be at least " + std::to_string(min));
  return x;
}

double as_positive(const json& v, const std::string& where) {
  const double x = as_number(v, where);
  if (!(x > 0.0)) throw SchemaError(where + ": must be positive");
  return x;
}

cplx as_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw SchemaError(where + ": expected a number or [re, im]");
}

FourVector as_four_vector(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) throw SchemaError(where + ": expected [x0, x1, x2, x3]");
  FourVector out{};
  for (std::size_t i = 0; i < 4; ++i) out[i] = as_number(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

DenseMatrix as_matrix(const json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where + ": expected an array of rows");
  const auto n = static_cast<Eigen::Index>(v.size());
  DenseMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw SchemaError(rw + ": expected a row of length " + std::to_string(n));
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      m(r, c) = as_complex(row[static_cast<std::size_t>(c)], rw + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

ModeSpec parse_mode(const json& v, const std::string& where, bool with_spin) {
  if (with_spin) {
    check_keys(v, {"energy", "velocity", "spin"}, where);
  } else {
    check_keys(v, {"energy", "velocity"}, where);
  }
  const bool has_energy = v.contains("energy");
  const bool has_velocity = v.contains("velocity");
  if (has_energy == has_velocity) throw SchemaError(where + ": give exactly one of 'energy' or 'velocity'");
  SpinProjection spin = SpinProjection::Up;
  if (v.contains("spin")) {
    const json& s = v["spin"];
    if (s == "up") {
      spin = SpinProjection::Up;
    } else if (s == "down") {
      spin = SpinProjection::Down;
    } else {
      throw SchemaError(where + ".spin: expected \"up\" or \"down\"");
    }
  }
  if (has_energy) {
    ModeSpec m = ModeSpec::with_energy(as_number(v["energy"], where + ".energy"));
    m.spin = spin;
    return m;
  }
  return ModeSpec::with_velocity(as_four_vector(v["velocity"], where + ".velocity"), spin);
}

std::vector<ModeSpec> parse_modes(const json& v, const std::string& where, bool with_spin) {
  if (!v.is_array()) throw SchemaError(where + ": expected an array");
  std::vector<ModeSpec> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(parse_mode(v[i], where + "[" + std::to_string(i) + "]", with_spin));
  }
  return out;
}

ModelConfig parse_model(const json& v) {
  check_keys(v, {"fermion_modes", "boson_modes", "kappa", "alpha", "mass_scale", "n_max"}, "model");
  ModelConfig m;
  if (v.contains("fermion_modes")) m.fermion_modes = parse_modes(v["fermion_modes"], "model.fermion_modes", true);
  if (v.contains("boson_modes")) m.boson_modes = parse_modes(v["boson_modes"], "model.boson_modes", false);
  if (v.contains("kappa")) m.kappa = as_number(v["kappa"], "model.kappa");
  if (v.contains("alpha")) m.alpha = as_number(v["alpha"], "model.alpha");
  if (v.contains("mass_scale")) m.mass_scale = as_positive(v["mass_scale"], "model.mass_scale");
  if (v.contains("n_max")) m.n_max = static_cast<int>(as_count(v["n_max"], "model.n_max", 1));
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("model: ") + e.what());
  }
  return m;
}

QuadratureSpec parse_quadrature(const json& v, const std::string& where) {
  check_keys(v, {"rapidity_cutoff", "nodes_per_panel", "phase_per_panel", "regulators", "stability_tolerance"},
             where);
  QuadratureSpec q;
  if (v.contains("rapidity_cutoff")) q.rapidity_cutoff = as_positive(v["rapidity_cutoff"], where + ".rapidity_cutoff");
  if (v.contains("nodes_per_panel")) {
    q.nodes_per_panel = static_cast<int>(as_integer(v["nodes_per_panel"], where + ".nodes_per_panel"));
  }
  if (v.contains("phase_per_panel")) q.phase_per_panel = as_positive(v["phase_per_panel"], where + ".phase_per_panel");
  if (v.contains("regulators")) {
    const json& r = v["regulators"];
    if (!r.is_array()) throw SchemaError(where + ".regulators: expected an array");
    q.regulators.clear();
    for (std::size_t i = 0; i < r.size(); ++i) {
      q.regulators.push_back(as_number(r[i], where + ".regulators[" + std::to_string(i) + "]"));
    }
  }
  if (v.contains("stability_tolerance")) {
    q.stability_tolerance = as_positive(v["stability_tolerance"], where + ".stability_tolerance");
  }
  try {
    q.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where + ": " + e.what());
  }
  return q;
}

VertexConfig parse_vertex(const json& v, const ModelConfig& model) {
  if (!v.is_object() || !v.contains("type") || !v["type"].is_string()) {
    throw SchemaError("vertex: expected an object with a string 'type'");
  }
  const std::string type = v["type"].get<std::string>();
  const auto k = static_cast<std::size_t>(model.boson_count());
  const auto dim = static_cast<Eigen::Index>(2 * model.fermion_count());
  VertexConfig out;
  if (type == "scalar") {
    check_keys(v, {"type", "y"}, "vertex");
    out.type = VertexConfig::Type::Scalar;
    if (!v.contains("y") || !v["y"].is_array()) throw SchemaError("vertex.y: expected an array");
    for (std::size_t i = 0; i < v["y"].size(); ++i) {
      out.y.push_back(as_complex(v["y"][i], "vertex.y[" + std::to_string(i) + "]"));
    }
    if (out.y.size() != k) {
      throw SchemaError("vertex.y: " + std::to_string(out.y.size()) + " values for " + std::to_string(k) +
                        " boson modes");
    }
    for (const auto& m : model.boson_modes) {
      if (!(m.energy() > 0.0)) throw SchemaError("vertex: scalar vertices need boson modes with v^0 > 0");
    }
  } else if (type == "explicit") {
    check_keys(v, {"type", "matrices"}, "vertex");
    out.type = VertexConfig::Type::Explicit;
    if (!v.contains("matrices") || !v["matrices"].is_array() || v["matrices"].size() != k) {
      throw SchemaError("vertex.matrices: expected one entry per boson mode");
    }
    for (std::size_t m = 0; m < k; ++m) {
      const json& comps = v["matrices"][m];
      const std::string where = "vertex.matrices[" + std::to_string(m) + "]";
      if (!comps.is_array() || (comps.size() != 1 && comps.size() != 4)) {
        throw SchemaError(where + ": expected [X0] or [X0, X1, X2, X3]");
      }
      VertexSet::Components c;
      for (std::size_t mu = 0; mu < 4; ++mu) {
        DenseMatrix x = mu < comps.size() ? as_matrix(comps[mu], where + "[" + std::to_string(mu) + "]")
                                          : DenseMatrix(DenseMatrix::Zero(dim, dim));
        if (x.rows() != dim) {
          throw SchemaError(where + "[" + std::to_string(mu) + "]: expected a " + std::to_string(dim) + "x" +
                            std::to_string(dim) + " matrix");
        }
        c[mu] = CouplingMatrix(x);
      }
      out.matrices.push_back(std::move(c));
    }
  } else if (type == "pseudoscalar") {
    check_keys(v, {"type", "quadrature"}, "vertex");
    out.type = VertexConfig::Type::Pseudoscalar;
    if (v.contains("quadrature")) out.quadrature = parse_quadrature(v["quadrature"], "vertex.quadrature");
    for (const auto& m : model.fermion_modes) {
      if (m.energy_only) throw SchemaError("vertex: pseudoscalar vertices need fermion modes given by velocity");
    }
    for (const auto& m : model.boson_modes) {
      if (m.energy_only) throw SchemaError("vertex: pseudoscalar vertices need boson modes given by velocity");
    }
  } else {
    throw SchemaError("vertex.type: expected \"scalar\", \"explicit\" or \"pseudoscalar\"");
  }
  return out;
}

SpectrumConfig parse_spectrum(const json& v) {
  check_keys(v, {"sector", "count", "method", "residual_tolerance"}, "spectrum");
  SpectrumConfig s;
  if (v.contains("sector")) s.sector = static_cast<int>(as_integer(v["sector"], "spectrum.sector"));
  if (v.contains("count")) s.count = static_cast<std::size_t>(as_count(v["count"], "spectrum.count", 1));
  if (v.contains("method")) {
    if (v["method"] == "dense") {
      s.method = DiagonalizeMethod::Dense;
    } else if (v["method"] == "iterative") {
      s.method = DiagonalizeMethod::Iterative;
    } else {
      throw SchemaError("spectrum.method: expected \"dense\" or \"iterative\"");
    }
  }
  if (v.contains("residual_tolerance")) {
    s.residual_tolerance = as_positive(v["residual_tolerance"], "spectrum.residual_tolerance");
  }
  return s;
}

ModelN1Config parse_model_n1(const json& v) {
  check_keys(v,
             {"energy", "alpha", "lambda_min", "lambda_max", "order", "scan_step", "n_max", "levels",
              "mismatch_tolerance"},
             "model_n1");
  ModelN1Config m;
  if (v.contains("energy")) m.energy = as_number(v["energy"], "model_n1.energy");
  if (v.contains("alpha")) m.alpha = as_number(v["alpha"], "model_n1.alpha");
  if (v.contains("lambda_min")) m.series.lambda_min = as_number(v["lambda_min"], "model_n1.lambda_min");
  if (v.contains("lambda_max")) m.series.lambda_max = as_number(v["lambda_max"], "model_n1.lambda_max");
  if (v.contains("order")) m.series.order = static_cast<int>(as_count(v["order"], "model_n1.order", 50));
  if (v.contains("scan_step")) m.series.scan_step = as_positive(v["scan_step"], "model_n1.scan_step");
  if (v.contains("n_max")) m.n_max = static_cast<int>(as_count(v["n_max"], "model_n1.n_max", 1));
  if (v.contains("levels")) m.levels = static_cast<std::size_t>(as_count(v["levels"], "model_n1.levels", 1));
  if (v.contains("mismatch_tolerance")) {
    m.mismatch_tolerance = as_positive(v["mismatch_tolerance"], "model_n1.mismatch_tolerance");
  }
  if (!(m.series.lambda_max > m.series.lambda_min)) {
    throw SchemaError("model_n1: lambda_max must exceed lambda_min");
  }
  return m;
}

FormFactorConfig parse_form_factor(const json& v) {
  check_keys(v, {"points", "quadrature"}, "form_factor");
  FormFactorConfig f;
  if (v.contains("points")) {
    if (!v["points"].is_array()) throw SchemaError("form_factor.points: expected an array");
    for (std::size_t i = 0; i < v["points"].size(); ++i) {
      f.points.push_back(as_four_vector(v["points"][i], "form_factor.points[" + std::to_string(i) + "]"));
    }
  }
  if (v.contains("quadrature")) f.quadrature = parse_quadrature(v["quadrature"], "form_factor.quadrature");
  return f;
}

}  // namespace

RunConfig parse_config(json doc, const Overrides& overrides) {
  if (!doc.is_object()) throw SchemaError("config: expected a JSON object");
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.tolerance) doc["tolerance"] = *overrides.tolerance;
  if (overrides.n_max) {
    doc["model"]["n_max"] = *overrides.n_max;
    if (doc.contains("model_n1")) doc["model_n1"]["n_max"] = *overrides.n_max;
  }
  check_keys(doc,
             {"schema_version", "seed", "tolerance", "margin", "model", "vertex", "spectrum", "model_n1",
              "form_factor"},
             "config");
  if (!doc.contains("schema_version")) throw SchemaError("config: missing schema_version");
  if (as_integer(doc["schema_version"], "schema_version") != kSchemaVersion) {
    throw SchemaError("schema_version: expected " + std::to_string(kSchemaVersion));
  }

  RunConfig cfg;
  if (doc.contains("seed")) cfg.seed = static_cast<std::uint64_t>(as_count(doc["seed"], "seed", 0));
  if (doc.contains("tolerance")) cfg.tolerance = as_positive(doc["tolerance"], "tolerance");
  if (doc.contains("margin")) cfg.margin = static_cast<int>(as_count(doc["margin"], "margin", 0));
  if (doc.contains("model")) cfg.model = parse_model(doc["model"]);
  if (doc.contains("vertex")) {
    cfg.vertex = parse_vertex(doc["vertex"], cfg.model);
  } else if (cfg.model.boson_count() > 0) {
    throw SchemaError("vertex: required when the model has boson modes");
  }
  if (doc.contains("spectrum")) cfg.spectrum = parse_spectrum(doc["spectrum"]);
  if (doc.contains("model_n1")) cfg.model_n1 = parse_model_n1(doc["model_n1"]);
  if (doc.contains("form_factor")) cfg.form_factor = parse_form_factor(doc["form_factor"]);

  cfg.effective = std::move(doc);
  cfg.hash = fnv1a_hex(cfg.effective.dump());
  return cfg;
}

RunConfig load_config(const fs::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(std::move(doc), overrides);
}

VertexSet build_vertices(const RunConfig& cfg) {
  const ModelConfig& m = cfg.model;
  switch (cfg.vertex.type) {
    case VertexConfig::Type::Scalar:
      return scalar_vertex_set(m.fermion_count(), m.boson_velocities(), cfg.vertex.y);
    case VertexConfig::Type::Explicit:
      return VertexSet(m.fermion_count(), cfg.vertex.matrices, VertexProvenance::Explicit);
    case VertexConfig::Type::Pseudoscalar: {
      std::vector<FermionGridMode> grid;
      for (const auto& f : m.fermion_modes) grid.push_back({f.velocity, f.spin});
      return pseudoscalar_vertex_set(grid, m.boson_velocities(), cfg.vertex.quadrature);
    }
    case VertexConfig::Type::None:
      break;
  }
  return VertexSet(m.fermion_count(), {}, VertexProvenance::Explicit);
}

// ---------------------------------------------------------------------------
// Commands

namespace {

json header(const RunConfig& cfg, const std::string& command) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"command", command}, {"config_hash", cfg.hash}};
}

std::string csv_preamble(const RunConfig& cfg, const std::string& command) {
  return std::string("# tool=") + kToolName + " version=" + kToolVersion + " command=" + command +
         " config_hash=" + cfg.hash + "\n";
}

void log_line(const CommandContext& ctx, const std::string& line) {
  if (ctx.log != nullptr) *ctx.log << line << '\n';
}

int write_error(const CommandContext& ctx, const std::string& command, const std::string& type,
                const std::string& message) {
  json report = header(ctx.config, command);
  report["error"] = {{"type", type}, {"message", message}};
  write_atomic(ctx.out_dir, command + ".json", report.dump(2) + "\n");
  log_line(ctx, command + ": " + type + ": " + message);
  return kCheckFailed;
}

// Runs body, turning library failures into a structured error report.
template <typename F>
int guarded(const CommandContext& ctx, const std::string& command, F&& body) {
  try {
    return body();
  } catch (const SchemaError&) {
    throw;
  } catch (const CapacityError& e) {
    return write_error(ctx, command, "capacity", e.what());
  } catch (const ConvergenceError& e) {
    return write_error(ctx, command, "convergence", e.what());
  } catch (const NoRootError& e) {
    return write_error(ctx, command, "no_root", e.what());
  } catch (const MasslessModeError& e) {
    return write_error(ctx, command, "massless_mode", e.what());
  } catch (const std::exception& e) {
    return write_error(ctx, command, "error", e.what());
  }
}

struct Check {
  std::string name;
  double defect = 0.0;
  std::optional<double> tolerance;  // empty: reported only

  bool passed() const { return !tolerance || defect <= *tolerance; }
};

DenseMatrix random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  DenseMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = cplx(normal(rng), normal(rng));
  }
  return m;
}

void algebra_suite(const RunConfig& cfg, std::vector<Check>& checks, std::vector<std::string>& notes) {
  const int n = cfg.model.fermion_count();
  if (n == 0) {
    notes.push_back("algebra suite skipped: no fermion modes");
    return;
  }
  const double tol = cfg.tolerance;
  const FermionBasis fb = build_basis(n);
  const OperatorMatrix id = OperatorMatrix::identity(fb.size());
  std::mt19937_64 rng(cfg.seed);

  double homomorphism = 0.0;
  double baryon = 0.0;
  const OperatorMatrix b_op = baryon_operator(fb);
  for (int trial = 0; trial < 5; ++trial) {
    const DenseMatrix x = random_matrix(rng, 2 * n);
    const DenseMatrix y = random_matrix(rng, 2 * n);
    const OperatorMatrix ax = bilinear(fb, CouplingMatrix(x));
    const OperatorMatrix ay = bilinear(fb, CouplingMatrix(y));
    homomorphism = std::max(
        homomorphism, max_abs(commutator(ax, ay) - bilinear(fb, CouplingMatrix(DenseMatrix(x * y - y * x)))));
    baryon = std::max(baryon, max_abs(commutator(ax, b_op)));
  }
  checks.push_back({"algebra.homomorphism", homomorphism, tol});
  checks.push_back({"algebra.baryon_commutes", baryon, tol});

  std::vector<OperatorMatrix> ann;
  std::vector<OperatorMatrix> cre;
  for (int a = 1; a <= 2 * n; ++a) {
    ann.push_back(a_mode_operator(fb, false, a));
    cre.push_back(a_mode_operator(fb, true, a));
  }
  double anti = 0.0;
  for (std::size_t a = 0; a < ann.size(); ++a) {
    for (std::size_t b = 0; b < ann.size(); ++b) {
      const OperatorMatrix delta = a == b ? id : OperatorMatrix::zero(fb.size());
      anti = std::max(anti, max_abs(anticommutator(ann[a], cre[b]) - delta));
      anti = std::max(anti, max_abs(anticommutator(ann[a], ann[b])));
    }
  }
  checks.push_back({"algebra.anticommutation", anti, tol});

  auto op = [&](ModeKind kind, int i) { return mode_operator(fb, kind, i); };
  double worked = 0.0;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const OperatorMatrix lower = op(ModeKind::AntifermionAnnihilate, i) * op(ModeKind::FermionAnnihilate, j);
      for (int k = 1; k <= n; ++k) {
        for (int l = 1; l <= n; ++l) {
          const OperatorMatrix raise = op(ModeKind::FermionCreate, k) * op(ModeKind::AntifermionCreate, l);
          OperatorMatrix expected = OperatorMatrix::zero(fb.size());
          if (j == k) {
            expected = expected + op(ModeKind::AntifermionAnnihilate, i) * op(ModeKind::AntifermionCreate, l);
          }
          if (i == l) {
            expected = expected - op(ModeKind::FermionCreate, k) * op(ModeKind::FermionAnnihilate, j);
          }
          worked = std::max(worked, max_abs(commutator(lower, raise) - expected));
        }
      }
    }
  }
  checks.push_back({"algebra.worked_commutator", worked, tol});

  double lowering = 0.0;
  for (int b = 0; b <= n; ++b) {
    const Vector cyclic = basis_vector(fb, fb.cyclic_vector(b));
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        const Vector out =
            (op(ModeKind::AntifermionAnnihilate, i) * op(ModeKind::FermionAnnihilate, j)).apply(cyclic);
        lowering = std::max(lowering, out.cwiseAbs().maxCoeff());
      }
    }
  }
  checks.push_back({"algebra.lowering_annihilates_cyclic", lowering, tol});

  const Vector vac = basis_vector(fb, fb.vacuum());
  const Vector one = op(ModeKind::FermionCreate, 1).apply(vac);
  const Vector filled = basis_vector(fb, fb.cyclic_vector(n));
  const double eig = std::max({b_op.apply(vac).cwiseAbs().maxCoeff(), (b_op.apply(one) - one).cwiseAbs().maxCoeff(),
                               (b_op.apply(filled) - static_cast<double>(n) * filled).cwiseAbs().maxCoeff()});
  checks.push_back({"algebra.baryon_eigenvalues", eig, tol});
}

void boson_suite(const RunConfig& cfg, std::vector<Check>& checks, std::vector<std::string>& notes) {
  const int k = cfg.model.boson_count();
  if (k == 0) {
    notes.push_back("boson suite skipped: no boson modes");
    return;
  }
  const BosonBasis bb = build_boson_basis(k, cfg.model.n_max);
  const auto mask = bb.safe_mask(1);
  double ladder = 0.0;
  double number = 0.0;
  for (int a = 1; a <= k; ++a) {
    const OperatorMatrix c = boson_ladder(bb, LadderKind::Annihilate, a);
    const OperatorMatrix cd = boson_ladder(bb, LadderKind::Create, a);
    number = std::max(number, max_abs(cd * c - number_operator(bb, a)));
    for (int b = 1; b <= k; ++b) {
      OperatorMatrix comm = commutator(c, boson_ladder(bb, LadderKind::Create, b));
      if (a == b) comm = comm - OperatorMatrix::identity(bb.size());
      ladder = std::max(ladder, max_abs_on(comm, mask));
    }
  }
  checks.push_back({"boson.ladder_commutator", ladder, cfg.tolerance});
  checks.push_back({"boson.number_operator", number, cfg.tolerance});
}

json momentum_suites(const RunConfig& cfg, const VertexSet& vertices, std::vector<Check>& checks,
                     std::vector<std::string>& notes) {
  json details = json::array();
  const ModelConfig& m = cfg.model;
  if (m.fermion_count() == 0 && m.boson_count() == 0) {
    notes.push_back("momentum suite skipped: empty model");
    return details;
  }
  const ProductSpace space = build_product_space(m);
  const MomentumOperator p = assemble_total(m, vertices, space);
  double herm = 0.0;
  for (std::size_t mu = 0; mu < 4; ++mu) herm = std::max(herm, hermiticity_defect(p.total[mu].matrix()));
  checks.push_back({"momentum.hermiticity", herm, cfg.tolerance});

  double ff = 0.0;
  double ii = 0.0;
  double mixed = 0.0;
  for (const auto& e : verify_momentum_commutators(p, space, cfg.margin)) {
    ff = std::max(ff, e.free_free);
    ii = std::max(ii, e.interaction_interaction);
    mixed = std::max(mixed, e.mixed);
    details.push_back({{"mu", e.mu},
                       {"nu", e.nu},
                       {"free_free", e.free_free},
                       {"interaction_interaction", e.interaction_interaction},
                       {"mixed", e.mixed},
                       {"total", e.total}});
  }
  checks.push_back({"momentum.free_free", ff, 0.0});
  checks.push_back({"momentum.interaction_interaction", ii, cfg.tolerance});
  checks.push_back({"momentum.mixed", mixed, std::nullopt});

  if (m.boson_count() == 0) {
    notes.push_back("automorphism suite skipped: no boson modes");
    return details;
  }
  for (int k = 1; k <= m.boson_count(); ++k) {
    if (!(m.kappa * m.boson_modes[static_cast<std::size_t>(k - 1)].energy() > 0.0)) {
      notes.push_back("automorphism suite skipped: kappa v^0 vanishes for boson mode " + std::to_string(k));
      return details;
    }
  }
  const TransformedHamiltonian t = transformed_hamiltonian(m, vertices, space);
  checks.push_back(
      {"automorphism.identity", max_abs_on(p.total[0] - t.hamiltonian, space.safe_mask(cfg.margin)), cfg.tolerance});
  const auto modes = shifted_modes(m, vertices, space);
  const auto safe1 = space.safe_mask(1);
  double shifted = 0.0;
  for (std::size_t a = 0; a < modes.size(); ++a) {
    for (std::size_t b = 0; b < modes.size(); ++b) {
      OperatorMatrix comm = commutator(modes[a].annihilate, modes[b].create);
      if (a == b) comm = comm - OperatorMatrix::identity(space.dim());
      shifted = std::max(shifted, max_abs_on(comm, safe1));
    }
  }
  checks.push_back({"automorphism.shifted_ladder", shifted, cfg.tolerance});
  return details;
}

}  // namespace

int cmd_verify(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  return guarded(ctx, "verify", [&] {
    std::vector<Check> checks;
    std::vector<std::string> notes;
    algebra_suite(cfg, checks, notes);
    boson_suite(cfg, checks, notes);
    const VertexSet vertices = build_vertices(cfg);
    if (vertices.boson_modes() > 0) {
      checks.push_back({"vertex.normality", vertices.report().normality_defect, cfg.tolerance});
      checks.push_back({"vertex.commutativity", vertices.report().commutativity_defect, cfg.tolerance});
    } else {
      notes.push_back("vertex suite skipped: no boson modes");
    }
    for (const auto& w : vertices.warnings) notes.push_back("vertex: " + w);
    const json commutators = momentum_suites(cfg, vertices, checks, notes);

    json report = header(cfg, "verify");
    report["checks"] = json::array();
    bool all = true;
    for (const auto& c : checks) {
      json entry = {{"name", c.name}, {"defect", c.defect}};
      entry["tolerance"] = c.tolerance ? json(*c.tolerance) : json(nullptr);
      entry["passed"] = c.tolerance ? json(c.passed()) : json(nullptr);
      report["checks"].push_back(entry);
      all = all && c.passed();
      log_line(ctx, (c.tolerance ? (c.passed() ? "PASS " : "FAIL ") : "INFO ") + c.name + " " +
                        format_number(c.defect));
    }
    report["commutators"] = commutators;
    report["notes"] = notes;
    report["all_passed"] = all;
    write_atomic(ctx.out_dir, "verify.json", report.dump(2) + "\n");
    return all ? kOk : kCheckFailed;
  });
}

int cmd_spectrum(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  return guarded(ctx, "spectrum", [&] {
    const ModelConfig& m = cfg.model;
    const VertexSet vertices = build_vertices(cfg);
    const ProductSpace space = build_product_space(m);
    const MomentumOperator p = assemble_total(m, vertices, space);
    const auto idx = space.sector_indices(cfg.spectrum.sector);
    const DenseMatrix h = restrict_dense(p.total[0], idx);
    const auto boundary_full = space.boundary_mask();
    DiagonalizeOptions opts;
    opts.count = std::min(cfg.spectrum.count, idx.size());
    opts.method = cfg.spectrum.method;
    opts.tolerance = cfg.spectrum.residual_tolerance;
    opts.keep_vectors = false;
    opts.seed = static_cast<unsigned>(cfg.seed);
    for (std::size_t i : idx) opts.boundary.push_back(boundary_full[i]);
    const Spectrum s = diagonalize(h, opts);

    std::ostringstream csv;
    csv << csv_preamble(cfg, "spectrum") << "index,eigenvalue,residual,leakage\n";
    json scaled = json::array();
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
      csv << i << ',' << format_number(s.eigenvalues[i]) << ',' << format_number(s.residuals[i]) << ','
          << format_number(s.leakage[i]) << '\n';
      scaled.push_back(m.mass_scale * s.eigenvalues[i]);
    }
    json meta = header(cfg, "spectrum");
    meta["sector"] = cfg.spectrum.sector;
    meta["sector_dimension"] = idx.size();
    meta["n_max"] = m.n_max;
    meta["alpha"] = m.alpha;
    meta["kappa"] = m.kappa;
    meta["mass_scale"] = m.mass_scale;
    meta["method"] = cfg.spectrum.method == DiagonalizeMethod::Dense ? "dense" : "iterative";
    meta["vertex"] = to_string(vertices.provenance());
    meta["eigenvalues_scaled"] = scaled;
    meta["warnings"] = vertices.warnings;
    write_atomic(ctx.out_dir, "spectrum.csv", csv.str());
    write_atomic(ctx.out_dir, "spectrum.json", meta.dump(2) + "\n");
    log_line(ctx, "spectrum: " + std::to_string(s.eigenvalues.size()) + " eigenvalues in sector " +
                      std::to_string(cfg.spectrum.sector));
    return kOk;
  });
}

int cmd_solve_alpha(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  if (cfg.vertex.type != VertexConfig::Type::Scalar) {
    throw SchemaError("solve-alpha: needs a scalar vertex");
  }
  return guarded(ctx, "solve_alpha", [&] {
    ExactModelSpec spec;
    for (const auto& f : cfg.model.fermion_modes) spec.fermion_energies.push_back(f.energy());
    for (const auto& b : cfg.model.boson_modes) spec.boson_energies.push_back(cfg.model.kappa * b.energy());
    spec.y = cfg.vertex.y;
    const AlphaSolution a = solve_alpha(spec, cfg.model.n_max);
    json report = header(cfg, "solve_alpha");
    report["alpha_closed_form"] = a.alpha_closed_form;
    report["alpha_root_found"] = a.alpha_root_found;
    report["lambda_min_at_alpha"] = a.lambda_min_at_alpha;
    report["iterations"] = a.iterations;
    report["n_max"] = cfg.model.n_max;
    write_atomic(ctx.out_dir, "solve_alpha.json", report.dump(2) + "\n");
    log_line(ctx, "solve-alpha: closed form " + format_number(a.alpha_closed_form) + ", root " +
                      format_number(a.alpha_root_found));
    return kOk;
  });
}

int cmd_model_n1(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const ModelN1Config& n1 = cfg.model_n1;
  return guarded(ctx, "model_n1", [&] {
    const std::vector<Level> levels = n1_series_spectrum(n1.energy, n1.alpha, n1.series);
    const std::size_t rows = std::min(n1.levels, levels.size());
    std::size_t needed = 0;
    for (std::size_t i = 0; i < rows; ++i) needed += static_cast<std::size_t>(levels[i].multiplicity);
    const std::vector<double> diag = n1_diagonalization_spectrum(n1.energy, n1.alpha, n1.n_max, needed);

    std::ostringstream csv;
    csv << csv_preamble(cfg, "model_n1") << "index,lambda,multiplicity,lambda_diag,mismatch\n";
    double worst = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      double mismatch = 0.0;
      for (int r = 0; r < levels[i].multiplicity; ++r) {
        mismatch = std::max(mismatch, std::abs(diag[pos + static_cast<std::size_t>(r)] - levels[i].value));
      }
      csv << i << ',' << format_number(levels[i].value) << ',' << levels[i].multiplicity << ','
          << format_number(diag[pos]) << ',' << format_number(mismatch) << '\n';
      pos += static_cast<std::size_t>(levels[i].multiplicity);
      worst = std::max(worst, mismatch);
    }
    json meta = header(cfg, "model_n1");
    meta["energy"] = n1.energy;
    meta["alpha"] = n1.alpha;
    meta["series_order"] = n1.series.order;
    meta["n_max"] = n1.n_max;
    meta["max_mismatch"] = worst;
    meta["mismatch_tolerance"] = n1.mismatch_tolerance;
    meta["passed"] = worst <= n1.mismatch_tolerance;
    write_atomic(ctx.out_dir, "model_n1.csv", csv.str());
    write_atomic(ctx.out_dir, "model_n1.json", meta.dump(2) + "\n");
    log_line(ctx, "model-n1: " + std::to_string(rows) + " levels, max mismatch " + format_number(worst));
    return worst <= n1.mismatch_tolerance ? kOk : kCheckFailed;
  });
}

int cmd_form_factor(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  return guarded(ctx, "form_factor", [&] {
    std::ostringstream csv;
    csv << csv_preamble(cfg, "form_factor")
        << "u0,u1,u2,u3,F0_re,F0_im,F1_re,F1_im,F2_re,F2_im,F3_re,F3_im,stability,flagged\n";
    std::size_t flagged = 0;
    for (const FourVector& u : cfg.form_factor.points) {
      const FormFactorResult r = form_factor(u, cfg.form_factor.quadrature);
      for (double x : u) csv << format_number(x) << ',';
      for (const cplx& f : r.value) csv << format_number(f.real()) << ',' << format_number(f.imag()) << ',';
      csv << format_number(r.stability) << ',' << (r.flagged ? 1 : 0) << '\n';
      flagged += r.flagged ? 1 : 0;
    }
    write_atomic(ctx.out_dir, "form_factor.csv", csv.str());
    log_line(ctx, "form-factor: " + std::to_string(cfg.form_factor.points.size()) + " points, " +
                      std::to_string(flagged) + " flagged");
    return kOk;
  });
}

int cmd_vertex(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  return guarded(ctx, "vertex", [&] {
    const VertexSet vs = build_vertices(cfg);
    json report = header(cfg, "vertex");
    report["provenance"] = to_string(vs.provenance());
    report["fermion_modes"] = vs.fermion_modes();
    report["normality_defect"] = vs.report().normality_defect;
    report["commutativity_defect"] = vs.report().commutativity_defect;
    report["warnings"] = vs.warnings;
    json grid = json::array();
    for (const auto& f : cfg.model.fermion_modes) grid.push_back(f.velocity);
    report["fermion_velocities"] = grid;
    json modes = json::array();
    for (int k = 1; k <= vs.boson_modes(); ++k) {
      json comps = json::array();
      for (int mu = 0; mu < 4; ++mu) {
        const DenseMatrix& x = vs.matrix(k, mu).entries();
        json rows = json::array();
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          json row = json::array();
          for (Eigen::Index c = 0; c < x.cols(); ++c) row.push_back({x(r, c).real(), x(r, c).imag()});
          rows.push_back(row);
        }
        comps.push_back(rows);
      }
      modes.push_back({{"velocity", cfg.model.boson_modes[static_cast<std::size_t>(k - 1)].velocity},
                       {"matrices", comps}});
    }
    report["boson_modes"] = modes;
    write_atomic(ctx.out_dir, "vertex.json", report.dump(2) + "\n");
    log_line(ctx, "vertex: " + std::to_string(vs.boson_modes()) + " boson modes");
    return kOk;
  });
}

}  // namespace pointform::cli
