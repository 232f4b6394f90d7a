#pragma once

#include <ostream>

#include "gd/experiment.hpp"

namespace gd::tools {

/// Runs the invariant suite at desk scale and prints one PASS/FAIL line
/// per check. Returns the number of failed checks.
int runValidation(const RunConfig& config, std::ostream& out);

}  // namespace gd::tools
