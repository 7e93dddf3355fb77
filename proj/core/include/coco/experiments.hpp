#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "coco/config.hpp"
#include "coco/table.hpp"

namespace coco {

struct ExperimentOutput {
  std::string name;  ///< file stem
  ResultTable table;
  std::filesystem::path csv_path;
};

/// Runs the experiment described by `cfg` and writes one CSV per panel (plus
/// an SVG when cfg enables it) under cfg.out_dir(). Output bytes are a pure
/// function of the config.
std::vector<ExperimentOutput> run_experiment(const ExperimentConfig& cfg);

}  // namespace coco
