// Command-line front end: synthetic suite generation, single-episode runs,
// suite evaluation, ablation sweeps, and map rendering.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "protoseg/benchmark.hpp"
#include "protoseg/config.hpp"
#include "protoseg/synthetic.hpp"
#include "protoseg/tensor_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace protoseg;

namespace {

BenchmarkConfig config_or_default(const std::string& path) {
  if (path.empty()) return BenchmarkConfig{};
  return load_config(path);
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  out << doc.dump(2) << "\n";
}

int run_gen(const std::string& config_path, const std::string& out_dir,
            std::optional<int> episodes, std::optional<std::uint64_t> seed) {
  BenchmarkConfig cfg = config_or_default(config_path);
  if (episodes) cfg.episodes = *episodes;
  if (seed) cfg.synthetic.seed = *seed;
  if (cfg.episodes < 1) throw std::runtime_error("gen: episode count must be >= 1");

  const auto suite = gen_episodes(cfg.synthetic, cfg.episodes);
  json manifest{{"episodes", cfg.episodes}, {"synthetic", to_json(cfg.synthetic)}};
  write_suite(out_dir, suite, manifest.dump(2));
  std::cout << "wrote " << cfg.episodes << " episodes to " << out_dir << "\n";
  return 0;
}

int run_single(const std::string& episode_dir, const std::string& config_path,
               const std::string& out_dir, std::optional<int> iterations,
               const std::string& variant, std::optional<std::uint64_t> seed) {
  BenchmarkConfig cfg = config_or_default(config_path);
  PipelineConfig pipeline = variant.empty() ? cfg.pipeline : apply_variant(cfg.pipeline, variant);
  if (iterations) pipeline.iterations = *iterations;
  if (seed) pipeline.seed = *seed;

  const Episode episode = read_episode(episode_dir);
  const PipelineResult result = run_episode(episode, pipeline);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  for (std::size_t i = 0; i < result.per_iteration_maps.size(); ++i) {
    const std::string stem = "prob_iter" + std::to_string(i);
    write_tensor(out / (stem + ".fmap"), Tensor::from(result.per_iteration_maps[i]));
    write_pgm(out / (stem + ".pgm"), result.per_iteration_maps[i]);
    write_pgm(out / ("mask_iter" + std::to_string(i) + ".pgm"), result.per_iteration_masks[i]);
  }
  write_mask(out / "mask.bmsk", result.mask);
  write_pgm(out / "mask.pgm", result.mask);
  if (episode.truth)
    write_ppm_overlay(out / "overlay.ppm", result.per_iteration_maps.front(), result.mask,
                      &*episode.truth);

  json metrics{{"iterations", result.metrics.iterations},
               {"qsce_fallbacks", result.metrics.qsce_fallbacks},
               {"skipped_empty_shots", result.metrics.skipped_empty_shots},
               {"wall_ms", result.metrics.wall_ms},
               {"config", to_json(pipeline)}};
  if (episode.truth) {
    const MiouResult scores = miou({result.mask}, {*episode.truth});
    metrics["miou"] = scores.miou;
    metrics["fg_iou"] = scores.fg.iou;
  }
  write_json(out / "metrics.json", metrics);
  std::cout << "wrote per-iteration maps and mask to " << out_dir << "\n";
  return 0;
}

int run_eval(const std::string& suite_dir, const std::string& config_path,
             const std::string& out_path, std::optional<int> episodes,
             std::optional<int> iterations, const std::string& variant) {
  BenchmarkConfig cfg = config_or_default(config_path);
  PipelineConfig pipeline = variant.empty() ? cfg.pipeline : apply_variant(cfg.pipeline, variant);
  if (iterations) pipeline.iterations = *iterations;

  const auto suite = read_suite(suite_dir, episodes.value_or(-1));
  const EvalReport report = evaluate(suite, pipeline,
                                     std::min<int>(cfg.folds, static_cast<int>(suite.size())),
                                     variant);
  json doc = to_json(report);
  doc["config"] = to_json(pipeline);
  if (out_path.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_json(out_path, doc);
    std::cout << "mean mIoU " << report.mean_miou << " over " << report.episodes
              << " episodes; report written to " << out_path << "\n";
  }
  return 0;
}

int run_ablate(const std::string& config_path, const std::string& out_path,
               std::optional<int> episodes, std::optional<std::uint64_t> seed) {
  BenchmarkConfig cfg = config_or_default(config_path);
  if (episodes) cfg.episodes = *episodes;
  if (seed) cfg.synthetic.seed = *seed;

  const fs::path out = out_path.empty() ? fs::path("ablation.json") : fs::path(out_path);
  const fs::path render_dir =
      cfg.render_overlays > 0 ? out.parent_path() / "overlays" : fs::path{};
  const json report = run_benchmark(cfg, render_dir);
  write_json(out, report);

  for (const auto& variant : report["variants"])
    std::cout << variant["label"].get<std::string>() << ": mean mIoU "
              << variant["mean_miou"].get<double>() << "\n";
  for (const auto& entry : report["iteration_sweep"])
    std::cout << "n=" << entry["iterations"].get<int>() << ": mean mIoU "
              << entry["mean_miou"].get<double>() << "\n";
  std::cout << "report written to " << out.string() << "\n";
  return 0;
}

int run_render(const std::string& input, const std::string& out_path, const std::string& mask_path,
               const std::string& truth_path) {
  const fs::path in(input);
  const fs::path out(out_path);

  std::optional<BinaryMask> mask, truth;
  if (!mask_path.empty()) mask = read_mask(mask_path);
  if (!truth_path.empty()) truth = read_mask(truth_path);

  ScalarMap base;
  if (in.extension() == ".bmsk") {
    const BinaryMask m = read_mask(in);
    if (!mask) {
      write_pgm(out, m);
      std::cout << "wrote " << out.string() << "\n";
      return 0;
    }
    MatrixRX real(m.height(), m.width());
    for (Index y = 0; y < m.height(); ++y)
      for (Index x = 0; x < m.width(); ++x) real(y, x) = m(y, x);
    base = ScalarMap(real);
  } else {
    const Tensor t = read_tensor(in);
    if (t.rank() == 2) {
      base = t.to_scalar_map();
    } else if (t.rank() == 3) {
      // Render the channel mean.
      const FeatureMap f = t.to_feature_map();
      MatrixRX mean = MatrixRX::Zero(f.height(), f.width());
      for (Index c = 0; c < f.channels(); ++c) mean += f.channel(c);
      base = ScalarMap(MatrixRX(mean / static_cast<double>(f.channels())));
    } else {
      throw std::runtime_error(input + ": rank-1 tensors have no image rendering");
    }
  }

  if (mask) {
    write_ppm_overlay(out, base, *mask, truth ? &*truth : nullptr);
  } else {
    write_pgm(out, base);
  }
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prototype-based few-shot segmentation engine"};
  app.require_subcommand(1);

  std::string config_path, out_path, input_path, variant, mask_path, truth_path;
  std::optional<int> episodes, iterations;
  std::optional<std::uint64_t> seed;

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic episode suite");
  gen->add_option("--config", config_path, "JSON config file");
  gen->add_option("--out", out_path, "Output suite directory")->required();
  gen->add_option("--episodes", episodes, "Episode count override");
  gen->add_option("--seed", seed, "Synthetic seed override");

  CLI::App* run = app.add_subcommand("run", "Run one episode and dump per-iteration maps");
  run->add_option("episode", input_path, "Episode directory (from gen)")->required();
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--out", out_path, "Output directory")->required();
  run->add_option("--iterations", iterations, "Refinement rounds override");
  run->add_option("--variant", variant, "Variant id (baseline, rpgm, rpgm-rpem, ...)");
  run->add_option("--seed", seed, "Pipeline seed override");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a suite and write a report");
  eval->add_option("suite", input_path, "Suite directory (from gen)")->required();
  eval->add_option("--config", config_path, "JSON config file");
  eval->add_option("--out", out_path, "Report path (stdout when omitted)");
  eval->add_option("--episodes", episodes, "Evaluate at most this many episodes");
  eval->add_option("--iterations", iterations, "Refinement rounds override");
  eval->add_option("--variant", variant, "Variant id");

  CLI::App* ablate = app.add_subcommand("ablate", "Run the variant and iteration sweeps");
  ablate->add_option("--config", config_path, "JSON config file");
  ablate->add_option("--out", out_path, "Report path (default ablation.json)");
  ablate->add_option("--episodes", episodes, "Episode count override");
  ablate->add_option("--seed", seed, "Synthetic seed override");

  CLI::App* render = app.add_subcommand("render", "Render a map or mask to PGM/PPM");
  render->add_option("input", input_path, "A .fmap or .bmsk file")->required();
  render->add_option("--out", out_path, "Output image path")->required();
  render->add_option("--mask", mask_path, "Prediction mask to overlay (.bmsk)");
  render->add_option("--truth", truth_path, "Truth mask for the overlay (.bmsk)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return run_gen(config_path, out_path, episodes, seed);
    if (run->parsed())
      return run_single(input_path, config_path, out_path, iterations, variant, seed);
    if (eval->parsed())
      return run_eval(input_path, config_path, out_path, episodes, iterations, variant);
    if (ablate->parsed()) return run_ablate(config_path, out_path, episodes, seed);
    if (render->parsed()) return run_render(input_path, out_path, mask_path, truth_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
