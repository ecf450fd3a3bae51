#pragma once

#include "run_config.hpp"

namespace rbfloi::cli {

int cmd_nodes(const RunConfig& c);
int cmd_assemble(const RunConfig& c);
int cmd_spectrum(const RunConfig& c);
int cmd_solve(const RunConfig& c);
int cmd_convergence(const RunConfig& c);

}  // namespace rbfloi::cli
