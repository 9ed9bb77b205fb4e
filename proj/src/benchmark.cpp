#include "protoseg/benchmark.hpp"

#include <chrono>
#include <fstream>

#include "protoseg/synthetic.hpp"
#include "protoseg/tensor_io.hpp"

namespace protoseg {

using nlohmann::json;

const std::vector<Variant>& known_variants() {
  static const std::vector<Variant> variants{
      {"baseline", "Baseline"},        {"baseline-kmc", "Baseline (KMC-only)"},
      {"rpgm", "+RPGM"},               {"rpgm-msie", "+RPGM+MSIE"},
      {"rpgm-qsce", "+RPGM+QSCE"},     {"rpgm-rpem", "+RPGM+RPEM"},
  };
  return variants;
}

Variant variant_by_id(const std::string& id) {
  for (const Variant& v : known_variants())
    if (v.id == id) return v;
  throw std::runtime_error("unknown variant '" + id + "'");
}

PipelineConfig apply_variant(PipelineConfig base, const std::string& variant_id) {
  variant_by_id(variant_id);
  if (variant_id == "baseline") {
    base.prototype_mode = PrototypeMode::SuperpixelOnly;
    base.iterations = 0;
  } else if (variant_id == "baseline-kmc") {
    base.prototype_mode = PrototypeMode::KMeansOnly;
    base.iterations = 0;
  } else if (variant_id == "rpgm") {
    base.prototype_mode = PrototypeMode::Merged;
    base.iterations = 0;
  } else if (variant_id == "rpgm-msie") {
    base.prototype_mode = PrototypeMode::Merged;
    base.use_msie = true;
    base.use_qsce = false;
  } else if (variant_id == "rpgm-qsce") {
    base.prototype_mode = PrototypeMode::Merged;
    base.use_msie = false;
    base.use_qsce = true;
  } else {  // rpgm-rpem
    base.prototype_mode = PrototypeMode::Merged;
    base.use_msie = true;
    base.use_qsce = true;
  }
  return base;
}

EvalReport evaluate(const std::vector<Episode>& episodes, const PipelineConfig& cfg, int folds,
                    const std::string& variant_id) {
  detail::require(!episodes.empty(), "evaluate: empty episode set");
  detail::require(folds >= 1, "evaluate: folds must be >= 1");
  detail::require(static_cast<int>(episodes.size()) >= folds,
                  "evaluate: need at least one episode per fold");
  const auto start = std::chrono::steady_clock::now();

  EvalReport report;
  report.variant_id = variant_id;
  if (!variant_id.empty()) report.variant_label = variant_by_id(variant_id).label;
  report.episodes = static_cast<int>(episodes.size());
  report.folds = folds;

  std::vector<BinaryMask> preds, truths;
  std::vector<std::vector<BinaryMask>> per_round;  // [round][episode]
  for (const Episode& ep : episodes) {
    detail::require(ep.truth.has_value(), "evaluate: episode without ground truth");
    const PipelineResult res = run_episode(ep, cfg);
    preds.push_back(res.mask);
    truths.push_back(*ep.truth);
    report.qsce_fallbacks += res.metrics.qsce_fallbacks;
    per_round.resize(std::max(per_round.size(), res.per_iteration_masks.size()));
    for (std::size_t r = 0; r < res.per_iteration_masks.size(); ++r)
      per_round[r].push_back(res.per_iteration_masks[r]);
  }

  report.overall = miou(preds, truths);

  const int n = report.episodes;
  for (int f = 0; f < folds; ++f) {
    const int lo = f * n / folds;
    const int hi = (f + 1) * n / folds;
    const std::vector<BinaryMask> fold_preds(preds.begin() + lo, preds.begin() + hi);
    const std::vector<BinaryMask> fold_truths(truths.begin() + lo, truths.begin() + hi);
    report.fold_miou.push_back(miou(fold_preds, fold_truths).miou);
    report.mean_miou += report.fold_miou.back();
  }
  report.mean_miou /= static_cast<double>(folds);

  for (const auto& round : per_round)
    report.iteration_curve.push_back(miou(round, truths).miou);

  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

json to_json(const EvalReport& report) {
  return json{{"variant", report.variant_id},
              {"label", report.variant_label},
              {"episodes", report.episodes},
              {"folds", report.folds},
              {"mean_miou", report.mean_miou},
              {"fold_miou", report.fold_miou},
              {"miou", report.overall.miou},
              {"fg_iou", report.overall.fg.iou},
              {"bg_iou", report.overall.bg.iou},
              {"fg_absent", report.overall.fg.absent},
              {"bg_absent", report.overall.bg.absent},
              {"mean_episode_miou", report.overall.mean_episode_miou},
              {"mean_episode_fg_iou", report.overall.mean_episode_fg_iou},
              {"per_episode_miou", report.overall.per_episode_miou},
              {"per_episode_fg_iou", report.overall.per_episode_fg_iou},
              {"iteration_curve", report.iteration_curve},
              {"qsce_fallbacks", report.qsce_fallbacks},
              {"wall_ms", report.wall_ms}};
}

namespace {

void render_variant(const std::filesystem::path& dir, const std::string& variant_id,
                    const std::vector<Episode>& episodes, const PipelineConfig& cfg, int count) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < count && i < static_cast<int>(episodes.size()); ++i) {
    const PipelineResult res = run_episode(episodes[static_cast<std::size_t>(i)], cfg);
    const Episode& ep = episodes[static_cast<std::size_t>(i)];
    const std::string stem = variant_id + "_ep" + std::to_string(i);
    write_pgm(dir / (stem + "_prob.pgm"), res.per_iteration_maps.back());
    write_ppm_overlay(dir / (stem + "_overlay.ppm"), res.per_iteration_maps.front(), res.mask,
                      ep.truth ? &*ep.truth : nullptr);
  }
}

}  // namespace

json run_benchmark(const BenchmarkConfig& cfg, const std::filesystem::path& render_dir) {
  detail::require(cfg.episodes >= 1, "run_benchmark: episode count must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  const std::vector<Episode> episodes = gen_episodes(cfg.synthetic, cfg.episodes);

  json report;
  report["config"] = to_json(cfg);

  json variants = json::array();
  for (const std::string& id : cfg.variants) {
    const PipelineConfig variant_cfg = apply_variant(cfg.pipeline, id);
    variants.push_back(to_json(evaluate(episodes, variant_cfg, cfg.folds, id)));
    if (cfg.render_overlays > 0 && !render_dir.empty())
      render_variant(render_dir, id, episodes, variant_cfg, cfg.render_overlays);
  }
  report["variants"] = variants;

  json sweep = json::array();
  for (int n : cfg.iteration_sweep) {
    PipelineConfig sweep_cfg = apply_variant(cfg.pipeline, "rpgm-rpem");
    sweep_cfg.iterations = n;
    json entry = to_json(evaluate(episodes, sweep_cfg, cfg.folds, "rpgm-rpem"));
    entry["iterations"] = n;
    sweep.push_back(std::move(entry));
  }
  report["iteration_sweep"] = sweep;

  report["wall_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void run_benchmark(const std::filesystem::path& config_path,
                   const std::filesystem::path& out_path) {
  const BenchmarkConfig cfg = load_config(config_path);
  const json report = run_benchmark(
      cfg, cfg.render_overlays > 0 ? out_path.parent_path() / "overlays" : std::filesystem::path{});
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error(out_path.string() + ": cannot write report");
  out << report.dump(2) << "\n";
}

}  // namespace protoseg
