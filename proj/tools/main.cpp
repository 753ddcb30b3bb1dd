#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

#include "pointform/cli.hpp"

namespace cli = pointform::cli;

int main(int argc, char** argv) {
  CLI::App app{"Point-form fermion-boson model toolkit"};
  app.set_version_flag("--version", cli::kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::optional<int> n_max;

  const std::map<std::string, std::function<int(const cli::CommandContext&)>> commands{
      {"verify", cli::cmd_verify},           {"spectrum", cli::cmd_spectrum},
      {"solve-alpha", cli::cmd_solve_alpha}, {"model-n1", cli::cmd_model_n1},
      {"form-factor", cli::cmd_form_factor}, {"vertex", cli::cmd_vertex}};
  const std::map<std::string, std::string> help{
      {"verify", "Run the algebra, boson, vertex and commutator checks"},
      {"spectrum", "Lowest P^0 eigenvalues in one baryon sector"},
      {"solve-alpha", "Coupling at which the baryon-N ground state vanishes"},
      {"model-n1", "N=1 baryon-0 levels: series method against diagonalization"},
      {"form-factor", "Regulated form factor over a grid of u"},
      {"vertex", "Dump the vertex matrices"}};

  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Seed for randomized checks");
    sub->add_option("--tolerance", tolerance, "Defect tolerance for checks");
    sub->add_option("--nmax", n_max, "Boson cutoff per mode")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kSchemaError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    cli::CommandContext ctx;
    ctx.config = cli::load_config(config_path, {seed, tolerance, n_max});
    ctx.out_dir = out_dir;
    ctx.log = &std::cout;
    return commands.at(name)(ctx);
  } catch (const cli::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return cli::kSchemaError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kCheckFailed;
  }
}
