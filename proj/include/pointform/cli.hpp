#pragma once

// Config-driven commands behind the pointform executable. Every command reads
// a validated RunConfig, writes its outputs atomically under an output
// directory, and returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pointform/solver.hpp"

namespace pointform::cli {

inline constexpr const char* kToolName = "pointform";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kSchemaError = 2 };

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VertexConfig {
  enum class Type { None, Scalar, Explicit, Pseudoscalar };
  Type type = Type::None;
  std::vector<cplx> y;
  std::vector<VertexSet::Components> matrices;
  QuadratureSpec quadrature;
};

struct SpectrumConfig {
  int sector = 0;
  std::size_t count = 8;
  DiagonalizeMethod method = DiagonalizeMethod::Dense;
  double residual_tolerance = 1e-10;
};

struct ModelN1Config {
  double energy = 0.7;
  double alpha = 0.4;
  SeriesOptions series;
  int n_max = 40;
  std::size_t levels = 6;
  double mismatch_tolerance = 1e-6;
};

struct FormFactorConfig {
  std::vector<FourVector> points;
  QuadratureSpec quadrature;
};

struct RunConfig {
  ModelConfig model;
  VertexConfig vertex;
  SpectrumConfig spectrum;
  ModelN1Config model_n1;
  FormFactorConfig form_factor;
  std::uint64_t seed = 12345;
  double tolerance = 1e-12;
  int margin = 2;
  /// Effective config after command-line overrides, as hashed.
  nlohmann::json effective;
  std::string hash;
};

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::optional<int> n_max;
};

/// FNV-1a 64-bit over the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Throws SchemaError on a wrong schema_version, an unknown key, or a wrongly
/// typed or out-of-range value.
RunConfig parse_config(nlohmann::json doc, const Overrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// The vertex set described by the config, sized to the model.
VertexSet build_vertices(const RunConfig& cfg);

/// Writes `contents` to dir/name through a temporary file and a rename.
void write_atomic(const std::filesystem::path& dir, const std::string& name, const std::string& contents);

/// Shortest round-trip decimal form of x.
std::string format_number(double x);

struct CommandContext {
  RunConfig config;
  std::filesystem::path out_dir = ".";
  std::ostream* log = nullptr;
};

int cmd_verify(const CommandContext& ctx);
int cmd_spectrum(const CommandContext& ctx);
int cmd_solve_alpha(const CommandContext& ctx);
int cmd_model_n1(const CommandContext& ctx);
int cmd_form_factor(const CommandContext& ctx);
int cmd_vertex(const CommandContext& ctx);

}  // namespace pointform::cli
