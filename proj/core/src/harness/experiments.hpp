#pragma once

#include <string>
#include <vector>

#include "margin_paths/harness.hpp"

namespace mpaths::harness {

/// One experiment's results before they are written out.
struct Outcome {
  std::vector<Check> checks;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;
  // provenance header fields
  std::string kind;
  std::string samples;
  std::string norm;
  std::string grid;
  std::string assumptions = "n/a";
};

Outcome run_experiment(const ExperimentConfig& cfg);

}  // namespace mpaths::harness
