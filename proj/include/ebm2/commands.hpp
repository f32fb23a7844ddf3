#pragma once

// Subcommands of the ebm2 executable. Each returns the process exit code:
// 0 success, 1 error, 2 blow-up (or, with expect_blowup, a run that did not
// blow up).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ebm2/verify.hpp"

namespace ebm2 {

struct CommandOptions {
  std::string config_path;          // empty: built-in defaults
  std::optional<std::string> out;   // --out; beats EBM2_OUT and outputs.dir
  unsigned jobs = 0;                // 0: hardware concurrency
};

/// --out, then $EBM2_OUT, then the configured directory.
std::string resolve_out_dir(const CommandOptions& opt, const std::string& configured);

int cmd_simulate(const CommandOptions& opt, std::optional<std::uint64_t> seed, std::ostream& log);
/// seed: "warmest", "coldest" or "file" (coefficients CSV `mode,T_a,T_s`).
int cmd_equilibria(const CommandOptions& opt, const std::string& seed,
                   const std::string& seed_file, std::ostream& log);
int cmd_scan(const CommandOptions& opt, const std::string& parameter,
             const std::vector<double>& values, std::ostream& log);
int cmd_verify(const CommandOptions& opt, Suite suite, double tol_scale, std::ostream& log);

}  // namespace ebm2
