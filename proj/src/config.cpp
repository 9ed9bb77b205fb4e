#include "protoseg/config.hpp"

#include <fstream>
#include <set>

namespace protoseg {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& known, const char* where) {
  if (!j.is_object()) throw std::runtime_error(std::string(where) + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.contains(key))
      throw std::runtime_error(std::string(where) + ": unknown key '" + key + "'");
}

template <class T>
void fetch(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

std::string mode_name(PrototypeMode mode) {
  switch (mode) {
    case PrototypeMode::KMeansOnly: return "kmeans";
    case PrototypeMode::SuperpixelOnly: return "superpixel";
    case PrototypeMode::Merged: return "merged";
  }
  return "merged";
}

PrototypeMode mode_from(const std::string& name) {
  if (name == "kmeans") return PrototypeMode::KMeansOnly;
  if (name == "superpixel") return PrototypeMode::SuperpixelOnly;
  if (name == "merged") return PrototypeMode::Merged;
  throw std::runtime_error("pipeline.prototype_mode: unknown mode '" + name + "'");
}

json scales_to_json(const std::vector<Scale>& scales) {
  json out = json::array();
  for (const Scale& s : scales) out.push_back({s.height, s.width});
  return out;
}

std::vector<Scale> scales_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw std::runtime_error("pipeline.scales: expected a non-empty array");
  std::vector<Scale> out;
  for (const auto& entry : j) {
    if (entry.is_number()) {
      const Index s = entry.get<Index>();
      out.push_back({s, s});  // square shorthand
    } else if (entry.is_array() && entry.size() == 2) {
      out.push_back({entry[0].get<Index>(), entry[1].get<Index>()});
    } else {
      throw std::runtime_error("pipeline.scales: entries must be n or [h, w]");
    }
  }
  return out;
}

}  // namespace

json to_json(const PipelineConfig& cfg) {
  return json{{"n_clusters", cfg.n_clusters},
              {"max_superpixels", cfg.max_superpixels},
              {"scales", scales_to_json(cfg.scales)},
              {"iterations", cfg.iterations},
              {"coord_weight", cfg.coord_weight},
              {"sgc_iterations", cfg.sgc_iterations},
              {"lambda_p", cfg.lambda_p},
              {"lambda_g", cfg.lambda_g},
              {"seed", cfg.seed},
              {"prototype_mode", mode_name(cfg.prototype_mode)},
              {"use_msie", cfg.use_msie},
              {"use_qsce", cfg.use_qsce},
              {"rederive_p", cfg.rederive_p}};
}

PipelineConfig pipeline_from_json(const json& j) {
  check_keys(j,
             {"n_clusters", "max_superpixels", "scales", "iterations", "coord_weight",
              "sgc_iterations", "lambda_p", "lambda_g", "seed", "prototype_mode", "use_msie",
              "use_qsce", "rederive_p"},
             "pipeline");
  PipelineConfig cfg;
  fetch(j, "n_clusters", cfg.n_clusters);
  fetch(j, "max_superpixels", cfg.max_superpixels);
  if (j.contains("scales")) cfg.scales = scales_from_json(j.at("scales"));
  fetch(j, "iterations", cfg.iterations);
  fetch(j, "coord_weight", cfg.coord_weight);
  fetch(j, "sgc_iterations", cfg.sgc_iterations);
  fetch(j, "lambda_p", cfg.lambda_p);
  fetch(j, "lambda_g", cfg.lambda_g);
  fetch(j, "seed", cfg.seed);
  if (j.contains("prototype_mode")) cfg.prototype_mode = mode_from(j.at("prototype_mode"));
  fetch(j, "use_msie", cfg.use_msie);
  fetch(j, "use_qsce", cfg.use_qsce);
  fetch(j, "rederive_p", cfg.rederive_p);
  cfg.validate();
  return cfg;
}

json to_json(const SyntheticSpec& spec) {
  return json{{"channels", spec.channels},
              {"height", spec.height},
              {"width", spec.width},
              {"shape", spec.shape == ShapeFamily::Ellipse ? "ellipse" : "rectangle"},
              {"support_scale", spec.support_scale},
              {"query_scale", spec.query_scale},
              {"separation", spec.separation},
              {"noise", spec.noise},
              {"parts", spec.parts},
              {"part_spread", spec.part_spread},
              {"part_band", spec.part_band},
              {"shots", spec.shots},
              {"seed", spec.seed}};
}

SyntheticSpec synthetic_from_json(const json& j) {
  check_keys(j,
             {"channels", "height", "width", "shape", "support_scale", "query_scale",
              "separation", "noise", "parts", "part_spread", "part_band", "shots", "seed"},
             "synthetic");
  SyntheticSpec spec;
  fetch(j, "channels", spec.channels);
  fetch(j, "height", spec.height);
  fetch(j, "width", spec.width);
  if (j.contains("shape")) {
    const std::string name = j.at("shape").get<std::string>();
    if (name == "ellipse") spec.shape = ShapeFamily::Ellipse;
    else if (name == "rectangle") spec.shape = ShapeFamily::Rectangle;
    else throw std::runtime_error("synthetic.shape: unknown shape '" + name + "'");
  }
  fetch(j, "support_scale", spec.support_scale);
  fetch(j, "query_scale", spec.query_scale);
  fetch(j, "separation", spec.separation);
  fetch(j, "noise", spec.noise);
  fetch(j, "parts", spec.parts);
  fetch(j, "part_spread", spec.part_spread);
  fetch(j, "part_band", spec.part_band);
  fetch(j, "shots", spec.shots);
  fetch(j, "seed", spec.seed);
  spec.validate();
  return spec;
}

json to_json(const BenchmarkConfig& cfg) {
  return json{{"synthetic", to_json(cfg.synthetic)},
              {"pipeline", to_json(cfg.pipeline)},
              {"benchmark",
               {{"episodes", cfg.episodes},
                {"folds", cfg.folds},
                {"variants", cfg.variants},
                {"iteration_sweep", cfg.iteration_sweep},
                {"render_overlays", cfg.render_overlays}}}};
}

BenchmarkConfig benchmark_from_json(const json& j) {
  check_keys(j, {"synthetic", "pipeline", "benchmark"}, "config");
  BenchmarkConfig cfg;
  if (j.contains("pipeline")) cfg.pipeline = pipeline_from_json(j.at("pipeline"));
  if (j.contains("synthetic")) cfg.synthetic = synthetic_from_json(j.at("synthetic"));
  if (j.contains("benchmark")) {
    const json& b = j.at("benchmark");
    check_keys(b, {"episodes", "folds", "variants", "iteration_sweep", "render_overlays"},
               "benchmark");
    fetch(b, "episodes", cfg.episodes);
    fetch(b, "folds", cfg.folds);
    fetch(b, "variants", cfg.variants);
    fetch(b, "iteration_sweep", cfg.iteration_sweep);
    fetch(b, "render_overlays", cfg.render_overlays);
  }
  return cfg;
}

BenchmarkConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open config");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return benchmark_from_json(j);
}

}  // namespace protoseg
