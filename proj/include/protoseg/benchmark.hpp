#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "protoseg/config.hpp"
#include "protoseg/metrics.hpp"
#include "protoseg/pipeline.hpp"

namespace protoseg {

/// Ablation rows: prototype pool and refinement switches layered on a base
/// pipeline config. "baseline" is the superpixel-only pool without
/// refinement; "baseline-kmc" is its k-means-only counterpart.
struct Variant {
  std::string id;     // e.g. "rpgm-msie"
  std::string label;  // e.g. "+RPGM+MSIE"
};

const std::vector<Variant>& known_variants();
Variant variant_by_id(const std::string& id);
PipelineConfig apply_variant(PipelineConfig base, const std::string& variant_id);

/// Aggregated scores for one config over one episode set.
struct EvalReport {
  std::string variant_id;
  std::string variant_label;
  int episodes = 0;
  int folds = 0;
  MiouResult overall;
  std::vector<double> fold_miou;
  double mean_miou = 0.0;  // arithmetic mean of the fold scores
  /// Accumulated mIoU of the decision after each decode round (length
  /// iterations + 1).
  std::vector<double> iteration_curve;
  int qsce_fallbacks = 0;
  double wall_ms = 0.0;
};

/// Runs every episode through the pipeline and scores the predictions.
/// Episodes must carry ground truth; folds partition the episode list into
/// contiguous index ranges.
EvalReport evaluate(const std::vector<Episode>& episodes, const PipelineConfig& cfg,
                    int folds = 4, const std::string& variant_id = "");

nlohmann::json to_json(const EvalReport& report);

/// Generates the configured suite, evaluates every variant plus the iteration
/// sweep, and returns the report document. When `render_dir` is non-empty and
/// the config asks for overlays, writes prediction renderings there.
nlohmann::json run_benchmark(const BenchmarkConfig& cfg,
                             const std::filesystem::path& render_dir = {});

/// Spec'd entry point: config file in, report file out.
void run_benchmark(const std::filesystem::path& config_path,
                   const std::filesystem::path& out_path);

}  // namespace protoseg
