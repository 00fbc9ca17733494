// Batch front end for the articulated-pose pipeline: generate synthetic
// datasets, simulate predictions, fit poses, and evaluate reports. All
// randomness flows from one master seed through purpose-tagged derived
// streams, so runs are reproducible and scene-parallel execution does not
// change any output.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "articulate/errors.hpp"
#include "articulate/evaluate.hpp"
#include "articulate/kinematics.hpp"
#include "articulate/observe.hpp"
#include "articulate/predict.hpp"
#include "articulate/rng.hpp"
#include "articulate/serialization.hpp"
#include "json.hpp"

namespace {

using Json = nlohmann::ordered_json;
using namespace articulate;

// ARTICULATE_LOG: error (default), info, debug
int log_level() {
  static const int level = [] {
    const char* env = std::getenv("ARTICULATE_LOG");
    if (env == nullptr) return 0;
    const std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
  }();
  return level;
}

void log_error(const std::string& msg) {
  std::cerr << "[articulate] error: " << msg << '\n';
}
void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[articulate] " << msg << '\n';
}
void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[articulate] " << msg << '\n';
}

struct RunConfig {
  std::uint64_t master_seed = 1;
  std::string category = "two_part_revolute";
  std::size_t scene_count = 10;
  int threads = 1;
  Method method = Method::ancsh;
  CameraConfig camera;
  ShapeParams shape;
  NoiseConfig noise;
  FitConfig fit;
  std::string model_path = "model.json";
  std::string dataset_path = "dataset.jsonl";
  std::string predictions_dir = "predictions";
  std::string estimates_path = "estimates.jsonl";
  std::string report_json_path = "report.json";
  std::string report_csv_path = "report.csv";
};

void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw SchemaError("unknown config key '" + where + item.key() + "'");
  }
}

template <typename T>
void read_key(const Json& obj, const char* key, T& value) {
  if (!obj.contains(key)) return;
  try {
    value = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(std::string("config key '") + key +
                      "' has the wrong type");
  }
}

RunConfig config_from_json(const Json& doc) {
  RunConfig cfg;
  check_keys(doc,
             {"master_seed", "category", "scene_count", "threads", "method",
              "camera", "shape", "noise", "ransac", "weights", "solver",
              "assoc_sigma", "paths"},
             "");
  read_key(doc, "master_seed", cfg.master_seed);
  read_key(doc, "category", cfg.category);
  read_key(doc, "scene_count", cfg.scene_count);
  read_key(doc, "threads", cfg.threads);
  if (doc.contains("method"))
    cfg.method = method_from_string(doc.at("method").get<std::string>());
  if (doc.contains("camera")) {
    const Json& c = doc.at("camera");
    check_keys(c,
               {"distance_min", "distance_max", "elevation_min",
                "elevation_max", "azimuth_min", "azimuth_max", "image_width",
                "image_height", "focal", "sample_count"},
               "camera.");
    read_key(c, "distance_min", cfg.camera.distance_min);
    read_key(c, "distance_max", cfg.camera.distance_max);
    read_key(c, "elevation_min", cfg.camera.elevation_min);
    read_key(c, "elevation_max", cfg.camera.elevation_max);
    read_key(c, "azimuth_min", cfg.camera.azimuth_min);
    read_key(c, "azimuth_max", cfg.camera.azimuth_max);
    read_key(c, "image_width", cfg.camera.image_width);
    read_key(c, "image_height", cfg.camera.image_height);
    read_key(c, "focal", cfg.camera.focal);
    read_key(c, "sample_count", cfg.camera.sample_count);
  }
  if (doc.contains("shape")) {
    const Json& s = doc.at("shape");
    check_keys(s, {"points_per_part", "size_jitter", "aspect_jitter"},
               "shape.");
    read_key(s, "points_per_part", cfg.shape.points_per_part);
    read_key(s, "size_jitter", cfg.shape.size_jitter);
    read_key(s, "aspect_jitter", cfg.shape.aspect_jitter);
  }
  if (doc.contains("noise")) {
    const Json& n = doc.at("noise");
    check_keys(n,
               {"npcs_sigma", "g_scale_rel_sigma", "g_offset_sigma",
                "axis_angle_sigma_deg", "pivot_sigma", "seg_flip_prob",
                "assoc_flip_prob"},
               "noise.");
    read_key(n, "npcs_sigma", cfg.noise.npcs_sigma);
    read_key(n, "g_scale_rel_sigma", cfg.noise.g_scale_rel_sigma);
    read_key(n, "g_offset_sigma", cfg.noise.g_offset_sigma);
    read_key(n, "axis_angle_sigma_deg", cfg.noise.axis_angle_sigma_deg);
    read_key(n, "pivot_sigma", cfg.noise.pivot_sigma);
    read_key(n, "seg_flip_prob", cfg.noise.seg_flip_prob);
    read_key(n, "assoc_flip_prob", cfg.noise.assoc_flip_prob);
  }
  if (doc.contains("ransac")) {
    const Json& r = doc.at("ransac");
    check_keys(r, {"max_iters", "inlier_threshold", "min_sample",
                   "confidence"},
               "ransac.");
    read_key(r, "max_iters", cfg.fit.ransac.max_iters);
    read_key(r, "inlier_threshold", cfg.fit.ransac.inlier_threshold);
    read_key(r, "min_sample", cfg.fit.ransac.min_sample);
    read_key(r, "confidence", cfg.fit.ransac.confidence);
  }
  if (doc.contains("weights")) {
    const Json& w = doc.at("weights");
    check_keys(w, {"lambda", "mu"}, "weights.");
    read_key(w, "lambda", cfg.fit.weights.lambda);
    read_key(w, "mu", cfg.fit.weights.mu);
  }
  if (doc.contains("solver")) {
    const Json& s = doc.at("solver");
    check_keys(s,
               {"max_iterations", "gradient_tolerance",
                "relative_energy_tolerance"},
               "solver.");
    read_key(s, "max_iterations", cfg.fit.solver.max_iterations);
    read_key(s, "gradient_tolerance", cfg.fit.solver.gradient_tolerance);
    read_key(s, "relative_energy_tolerance",
             cfg.fit.solver.relative_energy_tolerance);
  }
  read_key(doc, "assoc_sigma", cfg.fit.assoc_sigma);
  if (doc.contains("paths")) {
    const Json& p = doc.at("paths");
    check_keys(p,
               {"model", "dataset", "predictions_dir", "estimates",
                "report_json", "report_csv"},
               "paths.");
    read_key(p, "model", cfg.model_path);
    read_key(p, "dataset", cfg.dataset_path);
    read_key(p, "predictions_dir", cfg.predictions_dir);
    read_key(p, "estimates", cfg.estimates_path);
    read_key(p, "report_json", cfg.report_json_path);
    read_key(p, "report_csv", cfg.report_csv_path);
  }
  if (cfg.scene_count < 1)
    throw SchemaError("config key 'scene_count' must be at least 1");
  if (cfg.threads < 1)
    throw SchemaError("config key 'threads' must be at least 1");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("config file: " + std::string(e.what()));
  }
  return config_from_json(doc);
}

// The effective configuration (file plus flag overrides), embedded into
// reports so a run is reproducible from its artifacts alone.
std::string effective_config_json(const RunConfig& cfg) {
  Json doc = Json::object();
  doc["master_seed"] = cfg.master_seed;
  doc["category"] = cfg.category;
  doc["scene_count"] = cfg.scene_count;
  doc["threads"] = cfg.threads;
  doc["method"] = method_to_string(cfg.method);
  doc["camera"] = {{"distance_min", cfg.camera.distance_min},
                   {"distance_max", cfg.camera.distance_max},
                   {"elevation_min", cfg.camera.elevation_min},
                   {"elevation_max", cfg.camera.elevation_max},
                   {"azimuth_min", cfg.camera.azimuth_min},
                   {"azimuth_max", cfg.camera.azimuth_max},
                   {"image_width", cfg.camera.image_width},
                   {"image_height", cfg.camera.image_height},
                   {"focal", cfg.camera.focal},
                   {"sample_count", cfg.camera.sample_count}};
  doc["shape"] = {{"points_per_part", cfg.shape.points_per_part},
                  {"size_jitter", cfg.shape.size_jitter},
                  {"aspect_jitter", cfg.shape.aspect_jitter}};
  doc["noise"] = {{"npcs_sigma", cfg.noise.npcs_sigma},
                  {"g_scale_rel_sigma", cfg.noise.g_scale_rel_sigma},
                  {"g_offset_sigma", cfg.noise.g_offset_sigma},
                  {"axis_angle_sigma_deg", cfg.noise.axis_angle_sigma_deg},
                  {"pivot_sigma", cfg.noise.pivot_sigma},
                  {"seg_flip_prob", cfg.noise.seg_flip_prob},
                  {"assoc_flip_prob", cfg.noise.assoc_flip_prob}};
  doc["ransac"] = {{"max_iters", cfg.fit.ransac.max_iters},
                   {"inlier_threshold", cfg.fit.ransac.inlier_threshold},
                   {"min_sample", cfg.fit.ransac.min_sample},
                   {"confidence", cfg.fit.ransac.confidence}};
  doc["weights"] = {{"lambda", cfg.fit.weights.lambda},
                    {"mu", cfg.fit.weights.mu}};
  doc["solver"] = {
      {"max_iterations", cfg.fit.solver.max_iterations},
      {"gradient_tolerance", cfg.fit.solver.gradient_tolerance},
      {"relative_energy_tolerance",
       cfg.fit.solver.relative_energy_tolerance}};
  doc["assoc_sigma"] = cfg.fit.assoc_sigma;
  doc["paths"] = {{"model", cfg.model_path},
                  {"dataset", cfg.dataset_path},
                  {"predictions_dir", cfg.predictions_dir},
                  {"estimates", cfg.estimates_path},
                  {"report_json", cfg.report_json_path},
                  {"report_csv", cfg.report_csv_path}};
  return doc.dump();
}

// Index-addressed scene parallelism; any slot order yields the same
// stored results.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int count = std::min<std::size_t>(threads, n);
  pool.reserve(count);
  for (int t = 0; t < count; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (std::thread& t : pool) t.join();
}

std::string prediction_path(const RunConfig& cfg, std::uint64_t scene_id) {
  return cfg.predictions_dir + "/pred_" + std::to_string(scene_id) + ".json";
}

int cmd_generate(const RunConfig& cfg) {
  const KinematicModel model =
      make_procedural_model(category_from_string(cfg.category),
                            derive_seed(cfg.master_seed, "model", 0),
                            cfg.shape);
  save_model(model, cfg.model_path);
  log_info("model written to " + cfg.model_path);

  std::vector<std::optional<Scene>> slots(cfg.scene_count);
  std::vector<std::string> failures(cfg.scene_count);
  parallel_for(cfg.scene_count, cfg.threads, [&](std::size_t i) {
    try {
      Scene scene = sample_scene(model, cfg.camera,
                                 derive_seed(cfg.master_seed, "scene", i));
      scene.scene_id = i;
      scene.model_ref = cfg.model_path;
      slots[i] = std::move(scene);
      log_debug("scene " + std::to_string(i) + " generated");
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  std::vector<Scene> scenes;
  scenes.reserve(cfg.scene_count);
  int failed = 0;
  for (std::size_t i = 0; i < cfg.scene_count; ++i) {
    if (slots[i]) {
      scenes.push_back(std::move(*slots[i]));
    } else {
      ++failed;
      log_error("scene " + std::to_string(i) + ": " + failures[i]);
    }
  }
  write_dataset(scenes, cfg.dataset_path);
  log_info(std::to_string(scenes.size()) + " scenes written to " +
           cfg.dataset_path);
  return failed == 0 ? 0 : 1;
}

int cmd_predict(const RunConfig& cfg) {
  const KinematicModel model = load_model(cfg.model_path);
  const std::vector<Scene> scenes = read_dataset(cfg.dataset_path);
  std::filesystem::create_directories(cfg.predictions_dir);

  std::vector<std::string> failures(scenes.size());
  parallel_for(scenes.size(), cfg.threads, [&](std::size_t i) {
    try {
      const PredictionRecord pred = simulate_prediction(
          scenes[i], model, cfg.noise,
          derive_seed(cfg.master_seed, "predict", scenes[i].scene_id),
          cfg.fit.assoc_sigma);
      write_prediction(pred, prediction_path(cfg, scenes[i].scene_id));
      log_debug("scene " + std::to_string(scenes[i].scene_id) +
                " prediction written");
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  int failed = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i)
    if (!failures[i].empty()) {
      ++failed;
      log_error("scene " + std::to_string(scenes[i].scene_id) + ": " +
                failures[i]);
    }
  log_info(std::to_string(scenes.size() - failed) + " predictions in " +
           cfg.predictions_dir);
  return failed == 0 ? 0 : 1;
}

int cmd_fit(const RunConfig& cfg) {
  const KinematicModel model = load_model(cfg.model_path);
  const std::vector<Scene> scenes = read_dataset(cfg.dataset_path);

  EstimateFile file;
  file.method = cfg.method;
  file.records.resize(scenes.size());
  parallel_for(scenes.size(), cfg.threads, [&](std::size_t i) {
    EstimateRecord& record = file.records[i];
    record.estimate.scene_id = scenes[i].scene_id;
    try {
      const PredictionRecord pred =
          load_prediction(prediction_path(cfg, scenes[i].scene_id));
      record.estimate =
          fit_scene(cfg.method, scenes[i], pred, model, cfg.fit,
                    derive_seed(cfg.master_seed, "fit", scenes[i].scene_id));
      log_debug("scene " + std::to_string(scenes[i].scene_id) + " fit, " +
                std::to_string(record.estimate.pose.iterations) +
                " iterations");
    } catch (const std::exception& e) {
      record.ok = false;
      record.error = e.what();
    }
  });

  write_estimates(file, cfg.estimates_path);
  int failed = 0;
  for (const EstimateRecord& record : file.records)
    if (!record.ok) {
      ++failed;
      log_error("scene " + std::to_string(record.estimate.scene_id) + ": " +
                record.error);
    }
  log_info("estimates written to " + cfg.estimates_path);
  return failed == 0 ? 0 : 1;
}

struct EvalOptions {
  bool print_ad = false;
  std::vector<double> occlusion_bins = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<std::string> compare;  // method names; empty = use estimates
};

int cmd_eval(const RunConfig& cfg, const EvalOptions& opt) {
  const KinematicModel model = load_model(cfg.model_path);
  const std::vector<Scene> scenes = read_dataset(cfg.dataset_path);
  const NaocsFrame naocs = build_naocs(model);
  const NpcsFrame npcs = build_npcs(naocs);

  ComparisonReport report;
  report.master_seed = cfg.master_seed;
  ReportExtras extras;
  extras.config_json = effective_config_json(cfg);
  int failed = 0;

  if (!opt.compare.empty()) {
    std::vector<Method> methods;
    methods.reserve(opt.compare.size());
    for (const std::string& name : opt.compare)
      methods.push_back(method_from_string(name));
    report = compare_methods(methods, scenes, model, cfg.noise, cfg.fit,
                             cfg.master_seed);
  } else {
    const EstimateFile file = read_estimates(cfg.estimates_path);
    std::unordered_map<std::uint64_t, const Scene*> by_id;
    for (const Scene& scene : scenes) by_id[scene.scene_id] = &scene;

    std::vector<std::optional<SceneMetrics>> slots(file.records.size());
    std::vector<std::string> failures(file.records.size());
    parallel_for(file.records.size(), cfg.threads, [&](std::size_t i) {
      const EstimateRecord& record = file.records[i];
      if (!record.ok) {
        failures[i] = record.error;
        return;
      }
      try {
        const auto it = by_id.find(record.estimate.scene_id);
        if (it == by_id.end())
          throw SchemaError("estimate references unknown scene_id " +
                            std::to_string(record.estimate.scene_id));
        slots[i] = score_scene(record.estimate, *it->second, npcs);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    });

    std::vector<SceneMetrics> metrics;
    metrics.reserve(file.records.size());
    for (std::size_t i = 0; i < file.records.size(); ++i) {
      if (slots[i]) {
        metrics.push_back(std::move(*slots[i]));
      } else {
        ++failed;
        extras.failures.push_back(
            {file.records[i].estimate.scene_id, failures[i]});
        log_error("scene " +
                  std::to_string(file.records[i].estimate.scene_id) + ": " +
                  failures[i]);
      }
    }
    report.methods.push_back(summarize(file.method, std::move(metrics)));
  }

  // occlusion section from the full-pipeline block when present
  const MethodReport* occ_block = nullptr;
  for (const MethodReport& block : report.methods)
    if (block.method == Method::ancsh) occ_block = &block;
  if (occ_block == nullptr && !report.methods.empty())
    occ_block = &report.methods.front();
  if (occ_block != nullptr && !occ_block->per_scene.empty())
    extras.occlusion_bins =
        occlusion_analysis(occ_block->per_scene, opt.occlusion_bins);

  write_report_json(report, extras, cfg.report_json_path);
  write_report_csv(report, cfg.report_csv_path);
  log_info("report written to " + cfg.report_json_path + " and " +
           cfg.report_csv_path);

  if (opt.print_ad) {
    for (const MethodReport& block : report.methods) {
      const std::vector<double> ad = ad_accuracy(block.per_scene, 0.10);
      std::ostringstream line;
      line << method_to_string(block.method) << " AD accuracy (10%):";
      for (double v : ad) line << ' ' << v;
      std::cout << line.str() << '\n';
    }
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"articulated-object pose pipeline"};
  app.require_subcommand(1);

  struct Shared {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> method;
    std::optional<std::string> out;
  };
  Shared shared;
  EvalOptions eval_opt;

  const auto add_shared = [&](CLI::App* sub, bool with_method) {
    sub->add_option("--config", shared.config_path, "JSON config file");
    sub->add_option("--seed", shared.seed, "override master_seed");
    sub->add_option("--threads", shared.threads,
                    "scene-parallel worker count");
    sub->add_option("--out", shared.out, "override the primary output path");
    if (with_method)
      sub->add_option("--method", shared.method, "npcs | naocs | ancsh");
  };

  CLI::App* gen = app.add_subcommand(
      "generate", "write a procedural model and a scene dataset");
  add_shared(gen, false);
  CLI::App* pred = app.add_subcommand(
      "predict", "simulate prediction files for a dataset");
  add_shared(pred, false);
  CLI::App* fit = app.add_subcommand(
      "fit", "fit part poses and joints from predictions");
  add_shared(fit, true);
  CLI::App* eval = app.add_subcommand(
      "eval", "score estimates against ground truth and write reports");
  add_shared(eval, true);
  eval->add_option("--occlusion-bins", eval_opt.occlusion_bins,
                   "occlusion bin edges")
      ->delimiter(',');
  eval->add_option("--compare", eval_opt.compare,
                   "re-run these methods on the dataset and compare")
      ->delimiter(',');
  eval->add_flag("--ad", eval_opt.print_ad,
                 "print AD accuracy at the 10% threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(shared.config_path);
    if (shared.seed) cfg.master_seed = *shared.seed;
    if (shared.threads) cfg.threads = *shared.threads;
    if (shared.method) cfg.method = method_from_string(*shared.method);
    if (cfg.threads < 1) throw SchemaError("--threads must be at least 1");

    if (gen->parsed()) {
      if (shared.out) cfg.dataset_path = *shared.out;
      return cmd_generate(cfg);
    }
    if (pred->parsed()) {
      if (shared.out) cfg.predictions_dir = *shared.out;
      return cmd_predict(cfg);
    }
    if (fit->parsed()) {
      if (shared.out) cfg.estimates_path = *shared.out;
      return cmd_fit(cfg);
    }
    if (shared.out) {
      cfg.report_json_path = *shared.out;
      const std::filesystem::path p(*shared.out);
      cfg.report_csv_path =
          (p.parent_path() / p.stem()).string() + ".csv";
    }
    return cmd_eval(cfg, eval_opt);
  } catch (const std::exception& e) {
    log_error(e.what());
    return 2;
  }
}
