#pragma once

#include <map>
#include <string>
#include <vector>

#include "pmace/consensus.hpp"
#include "pmace/grid.hpp"

namespace pmace {

/// Common result contract for every reconstruction method.
struct ReconstructionResult {
  ComplexImage image;
  ConvergenceTrace trace;
  int iterations_run = 0;
  std::string method;
  std::map<std::string, double> params;  // config snapshot
};

}  // namespace pmace
