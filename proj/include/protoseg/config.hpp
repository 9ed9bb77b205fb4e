#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "protoseg/pipeline.hpp"
#include "protoseg/synthetic.hpp"

namespace protoseg {

/// Everything a benchmark run needs; every field has a default, so an empty
/// JSON object is a valid config.
struct BenchmarkConfig {
  SyntheticSpec synthetic;
  PipelineConfig pipeline;
  int episodes = 200;
  int folds = 4;
  std::vector<std::string> variants{"baseline", "rpgm", "rpgm-msie", "rpgm-qsce", "rpgm-rpem"};
  std::vector<int> iteration_sweep{0, 2, 4, 6};
  int render_overlays = 0;  // episodes to render per variant, 0 disables
};

nlohmann::json to_json(const PipelineConfig& cfg);
nlohmann::json to_json(const SyntheticSpec& spec);
nlohmann::json to_json(const BenchmarkConfig& cfg);

/// Parsers apply defaults for absent keys and reject unknown keys.
PipelineConfig pipeline_from_json(const nlohmann::json& j);
SyntheticSpec synthetic_from_json(const nlohmann::json& j);
BenchmarkConfig benchmark_from_json(const nlohmann::json& j);

/// Reads a JSON config file; an absent "pipeline"/"synthetic"/"benchmark"
/// section falls back to defaults.
BenchmarkConfig load_config(const std::filesystem::path& path);

}  // namespace protoseg
