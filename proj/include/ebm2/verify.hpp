#pragma once

// Built-in verification suites run by `ebm2 verify`. Each check compares a
// worst-case value against its tolerance multiplied by tol_scale.

#include <string>
#include <vector>

#include "ebm2/io.hpp"

namespace ebm2 {

enum class Suite { core, qualitative, all };
Suite parse_suite(const std::string& name);

/// Checks run concurrently on up to `jobs` threads; rows keep a fixed order.
std::vector<CheckRow> run_suite(Suite suite, double tol_scale = 1.0, unsigned jobs = 0);

}  // namespace ebm2
