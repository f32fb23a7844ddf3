// ebm2: simulate, scan, solve for equilibria and self-verify the two-layer
// energy balance model.

#include <iostream>

#include "CLI11.hpp"
#include "ebm2/commands.hpp"
#include "ebm2/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-layer degenerate energy balance model"};
  app.require_subcommand(1);
  ebm2::CommandOptions opt;
  std::string out;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run configuration (schema 1)");
    sub->add_option("--out", out, "output directory (overrides EBM2_OUT and outputs.dir)");
    sub->add_option("--jobs", opt.jobs, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  };

  auto* sim = app.add_subcommand("simulate", "integrate one trajectory and write CSVs");
  common(sim);
  std::uint64_t seed = 0;
  auto* seed_opt = sim->add_option("--seed", seed, "override ic.seed of random initial data");

  auto* eq = app.add_subcommand("equilibria", "solve for a stationary solution");
  common(eq);
  std::string eq_seed = "warmest", seed_file;
  eq->add_option("--seed", eq_seed, "warmest, coldest or file")
      ->check(CLI::IsMember({"warmest", "coldest", "file"}));
  eq->add_option("--seed-file", seed_file, "coefficient CSV (mode,T_a,T_s) for --seed file");

  auto* scan = app.add_subcommand("scan", "sweep one numeric parameter");
  common(scan);
  std::string param;
  std::vector<double> values;
  scan->add_option("--param", param, "dotted config path, e.g. model.eps_a")->required();
  scan->add_option("--values", values, "values to try")->required()->delimiter(',');

  auto* ver = app.add_subcommand("verify", "run the built-in verification suites");
  common(ver);
  std::string suite = "all";
  double tol_scale = 1.0;
  ver->add_option("--suite", suite, "core, qualitative or all")
      ->check(CLI::IsMember({"core", "qualitative", "all"}));
  ver->add_option("--tol-scale", tol_scale, "multiply every tolerance (testing aid)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (!out.empty()) opt.out = out;

  try {
    if (*sim) return ebm2::cmd_simulate(opt, *seed_opt ? std::optional(seed) : std::nullopt, std::cout);
    if (*eq) return ebm2::cmd_equilibria(opt, eq_seed, seed_file, std::cout);
    if (*scan) return ebm2::cmd_scan(opt, param, values, std::cout);
    if (*ver) return ebm2::cmd_verify(opt, ebm2::parse_suite(suite), tol_scale, std::cout);
  } catch (const ebm2::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
