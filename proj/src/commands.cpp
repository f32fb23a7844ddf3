#include "ebm2/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ebm2/config.hpp"
#include "ebm2/errors.hpp"
#include "ebm2/io.hpp"
#include "ebm2/parallel.hpp"
#include "json.hpp"

namespace ebm2 {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

RunConfig load(const CommandOptions& opt) {
  return opt.config_path.empty() ? parse_config(R"({"schema": 1})") : load_config(opt.config_path);
}

json bracket_json(const std::optional<std::pair<double, double>>& b) {
  if (!b) return nullptr;
  return json::array({b->first, b->second});
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

// Coefficients written by a previous `equilibria` run.
StateVec read_coeffs_file(const std::string& path, const GridPtr& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("seed-file", "cannot read " + path);
  std::string line;
  std::getline(in, line);
  if (line != "mode,T_a,T_s") throw ConfigError("seed-file", "expected header mode,T_a,T_s");
  StateVec s(grid);
  for (int row = 2; std::getline(in, line); ++row) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    try {
      if (cells.size() != 3) throw std::invalid_argument("column count");
      const int n = std::stoi(cells[0]);
      if (n < 0 || n >= grid->n_modes()) throw std::out_of_range("mode");
      s.t_a.coeffs[n] = std::stod(cells[1]);
      s.t_s.coeffs[n] = std::stod(cells[2]);
    } catch (const std::exception&) {
      throw ConfigError("seed-file", "bad row " + std::to_string(row) + " in " + path);
    }
  }
  return s;
}

}  // namespace

std::string resolve_out_dir(const CommandOptions& opt, const std::string& configured) {
  if (opt.out) return *opt.out;
  if (const char* env = std::getenv("EBM2_OUT"); env && *env) return env;
  return configured;
}

int cmd_simulate(const CommandOptions& opt, std::optional<std::uint64_t> seed, std::ostream& log) {
  RunConfig cfg = load(opt);
  if (seed) {
    if (cfg.ic.kind != IcConfig::Kind::random)
      throw ConfigError("ic.seed", "--seed applies only to random initial data");
    cfg.ic.seed = *seed;
  }
  const fs::path dir = resolve_out_dir(opt, cfg.outputs.dir);
  const auto grid = cfg.make_grid();
  const Model model = cfg.make_model(grid);
  const auto rec = integrate(cfg.make_ic(grid), model, cfg.t_max, cfg.controls);

  for (const auto& f : cfg.outputs.formats) {
    if (f == "coeffs") write_atomic(dir / "trajectory_coeffs.csv", coeffs_csv(rec));
    if (f == "nodal")
      write_atomic(dir / "trajectory_nodal.csv", nodal_csv(rec, cfg.outputs.nodal_points));
    if (f == "energy") write_atomic(dir / "energy.csv", energy_csv(rec));
  }
  json summary = {{"status", to_string(rec.status)},
                  {"t_final", rec.times.empty() ? 0.0 : rec.times.back()},
                  {"t_star_bracket", bracket_json(rec.t_star_bracket)},
                  {"records", rec.times.size()},
                  {"accepted_steps", rec.accepted_steps},
                  {"rejected_steps", rec.rejected_steps},
                  {"final_sup_norm", rec.sup_norms.empty() ? 0.0 : rec.sup_norms.back()},
                  {"expect_blowup", cfg.expect_blowup}};
  write_atomic(dir / "summary.json", summary.dump(2) + "\n");
  write_atomic(dir / "effective_config.json", dump_config(cfg));

  log << "status: " << to_string(rec.status) << " at t = " << format_double(summary["t_final"])
      << " (" << rec.times.size() << " records)\n";
  if (rec.t_star_bracket)
    log << "t* in [" << format_double(rec.t_star_bracket->first) << ", "
        << format_double(rec.t_star_bracket->second) << "]\n";
  log << "outputs in " << dir.string() << "\n";

  switch (rec.status) {
    case RunStatus::completed: return cfg.expect_blowup ? 2 : 0;
    case RunStatus::blew_up: return cfg.expect_blowup ? 0 : 2;
    case RunStatus::stiffness_failure: return 1;
  }
  return 1;
}

int cmd_equilibria(const CommandOptions& opt, const std::string& seed,
                   const std::string& seed_file, std::ostream& log) {
  const RunConfig cfg = load(opt);
  const auto grid = cfg.make_grid();
  const Model model = cfg.make_model(grid);
  EquilibriumSeed s;
  if (seed == "warmest") {
    s.kind = EquilibriumSeed::Kind::warmest;
  } else if (seed == "coldest") {
    s.kind = EquilibriumSeed::Kind::coldest;
  } else if (seed == "file") {
    if (seed_file.empty()) throw ConfigError("seed-file", "required with --seed file");
    s.kind = EquilibriumSeed::Kind::custom;
    s.state = read_coeffs_file(seed_file, grid);
  } else {
    throw ConfigError("seed", "expected warmest, coldest or file");
  }
  const auto sol = solve_equilibrium(model, s);

  const fs::path dir = resolve_out_dir(opt, cfg.outputs.dir);
  write_atomic(dir / "equilibrium_profile.csv", profile_csv(sol.state, cfg.outputs.nodal_points));
  std::string coeffs = "mode,T_a,T_s\n";
  for (int n = 0; n < grid->n_modes(); ++n)
    coeffs += std::to_string(n) + "," + format_double(sol.state.t_a.coeffs[n]) + "," +
              format_double(sol.state.t_s.coeffs[n]) + "\n";
  write_atomic(dir / "equilibrium_coeffs.csv", coeffs);
  const json summary = {{"seed", seed},
                        {"method", to_string(sol.method)},
                        {"residual_h", sol.residual_h},
                        {"iterations", sol.iterations},
                        {"nonnegative", sol.nonnegative},
                        {"monotone_violation", sol.monotone_violation},
                        {"monotone_warning", sol.monotone_warning}};
  write_atomic(dir / "equilibrium_summary.json", summary.dump(2) + "\n");
  log << "equilibrium (" << to_string(sol.method) << "): residual_h = "
      << format_double(sol.residual_h) << ", T_a in [" << format_double(dense_range(sol.state.t_a).min)
      << ", " << format_double(dense_range(sol.state.t_a).max) << "], T_s in ["
      << format_double(dense_range(sol.state.t_s).min) << ", "
      << format_double(dense_range(sol.state.t_s).max) << "]\n";
  if (sol.monotone_warning) log << "warning: phase-1 iterates were not monotone within tolerance\n";
  return 0;
}

int cmd_scan(const CommandOptions& opt, const std::string& parameter,
             const std::vector<double>& values, std::ostream& log) {
  if (values.empty()) throw ConfigError("values", "at least one value is required");
  const RunConfig base = load(opt);
  struct Row {
    RunStatus status;
    double sup_a, sup_s;
    std::optional<std::pair<double, double>> bracket;
  };
  std::vector<RunConfig> cfgs(values.size(), base);
  for (std::size_t i = 0; i < values.size(); ++i) set_parameter(cfgs[i], parameter, values[i]);

  std::vector<Row> rows(values.size());
  parallel_for(values.size(), opt.jobs, [&](std::size_t i) {
    const auto grid = cfgs[i].make_grid();
    const Model model = cfgs[i].make_model(grid);
    const auto rec = integrate(cfgs[i].make_ic(grid), model, cfgs[i].t_max, cfgs[i].controls);
    const auto& last = rec.states.back();
    rows[i] = {rec.status, sup_norm(last.t_a), sup_norm(last.t_s), rec.t_star_bracket};
  });

  std::string csv = "value,status,sup_T_a,sup_T_s,t_star_lo,t_star_hi\n";
  std::optional<double> largest_ok, smallest_blown;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Row& r = rows[i];
    csv += format_double(values[i]) + "," + to_string(r.status) + "," + format_double(r.sup_a) +
           "," + format_double(r.sup_s) + "," +
           (r.bracket ? format_double(r.bracket->first) + "," + format_double(r.bracket->second)
                      : std::string(","));
    csv += "\n";
    if (r.status == RunStatus::completed && (!largest_ok || values[i] > *largest_ok))
      largest_ok = values[i];
    if (r.status == RunStatus::blew_up && (!smallest_blown || values[i] < *smallest_blown))
      smallest_blown = values[i];
  }
  const fs::path dir = resolve_out_dir(opt, base.outputs.dir);
  write_atomic(dir / "scan.csv", csv);
  log << csv;
  json boundary = {{"parameter", parameter},
                   {"largest_completed", largest_ok ? json(*largest_ok) : json(nullptr)},
                   {"smallest_blew_up", smallest_blown ? json(*smallest_blown) : json(nullptr)}};
  bool monotone = true;
  if (largest_ok && smallest_blown) {
    monotone = *largest_ok < *smallest_blown;
    log << "boundary: " << parameter << " between " << format_double(*largest_ok) << " and "
        << format_double(*smallest_blown) << (monotone ? "" : " (outcomes not monotone)") << "\n";
  }
  boundary["monotone"] = monotone;
  write_atomic(dir / "scan_boundary.json", boundary.dump(2) + "\n");
  return 0;
}

int cmd_verify(const CommandOptions& opt, Suite suite, double tol_scale, std::ostream& log) {
  const auto rows = run_suite(suite, tol_scale, opt.jobs);
  const std::string text = checks_text(rows);
  log << text;
  const std::string dir = resolve_out_dir(opt, "");
  if (!dir.empty()) {
    write_atomic(fs::path(dir) / "verify_report.csv", checks_csv(rows));
    write_atomic(fs::path(dir) / "verify_report.txt", text);
  }
  for (const auto& r : rows)
    if (!r.passed) return 1;
  return 0;
}

}  // namespace ebm2
