// objclass: command-line driver for scene synthesis, segmentation, training,
// classification, tuning, evaluation and the seven-method benchmark.

#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "objclass/config.hpp"
#include "objclass/error.hpp"
#include "objclass/evaluation.hpp"
#include "objclass/ga.hpp"
#include "objclass/pipeline.hpp"
#include "objclass/raster_io.hpp"
#include "objclass/segmentation.hpp"
#include "objclass/synth.hpp"

namespace fs = std::filesystem;
using namespace objclass;

namespace {

// A CLI flag that, when given, overrides one config key.
struct Override {
  std::string key;
  std::string value;
  bool given = false;
};

class Overrides {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto& o = store_.emplace_back(Override{key, {}, false});
    app->add_option(flag, o.value, help + " [" + key + "]");
    bound_.emplace_back(app, flag, &o);
  }

  void flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto& o = store_.emplace_back(Override{key, {}, false});
    app->add_flag_callback(flag, [&o] { o.value = "true", o.given = true; }, help + " [" + key + "]");
  }

  void apply(ConfigMap& config) {
    for (auto& [app, flag, o] : bound_) {
      if (app->count(flag) > 0) o->given = true;
    }
    for (const auto& o : store_) {
      if (o.given) config[o.key] = o.value;
    }
  }

 private:
  std::deque<Override> store_;
  std::vector<std::tuple<CLI::App*, std::string, Override*>> bound_;
};

void write_json_file(const nlohmann::json& doc, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
}

int run_synth(const PipelineConfig& config, const fs::path& spec_path, std::optional<double> salt,
              std::size_t train_per_class) {
  SceneSpec spec = standard_scene_spec(config.seed);
  if (!spec_path.empty()) {
    std::ifstream in(spec_path);
    if (!in) throw ConfigError("--spec: no such file: " + spec_path.string());
    spec = scene_spec_from_json(nlohmann::json::parse(in));
  }
  if (salt) spec.noise_salt_fraction = *salt;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const SyntheticScene scene = generate_scene(spec);
  const fs::path out = config.paths.output;
  fs::create_directories(out);
  save_raster(scene.raster, out / "scene.hdr");
  save_labels(scene.truth, out / "truth.hdr");
  write_json_file(scene_manifest(spec), out / "scene.json");
  if (train_per_class > 0) save_labels(draw_training_mask(scene.truth, train_per_class, spec.seed), out / "training.hdr");
  spdlog::info("wrote {}x{}x{} scene to {}", spec.width, spec.height, spec.bands, out.string());
  return 0;
}

int run_segment(const PipelineConfig& config) {
  check_inputs(config, false);
  const Raster raster = load_raster(config.paths.raster);
  const PreparedScene scene = prepare_scene(config, raster);
  fs::create_directories(config.paths.output);
  save_labels(object_id_map(scene.segmentation, raster.resolution_m()), config.paths.output / "objects.hdr");
  write_json_file(objects_table(scene.segmentation), config.paths.output / "objects.json");
  save_raster(scene.spatial, config.paths.output / "spatial.hdr");
  std::cout << scene.segmentation.objects.size() << " objects\n";
  return 0;
}

int run_train(const PipelineConfig& config) {
  check_inputs(config, false);
  if (config.paths.model.empty()) throw ConfigError("paths.model is not set");
  const Raster raster = load_raster(config.paths.raster);
  std::optional<LabelMap> reference;
  if (!config.paths.reference.empty()) reference = load_labels(config.paths.reference);
  const PreparedScene scene = prepare_scene(config, raster);
  const TrainingData training = gather_training(config, raster, scene.spatial, reference ? &*reference : nullptr);
  const SvmMulticlassModel model = train_svm(config, training);
  if (config.paths.model.has_parent_path()) fs::create_directories(config.paths.model.parent_path());
  save_model(model, config.paths.model);
  spdlog::info("trained {} classes on {} samples -> {}", model.classes.size(), training.set.size(),
               config.paths.model.string());
  return 0;
}

int run_classify(const PipelineConfig& config) {
  const PipelineResult r = run_pipeline(config);
  if (r.report) std::cout << format_accuracy_row(r.report->kappa, r.report->overall_accuracy) << "\n";
  for (const auto& p : r.artifacts) spdlog::info("wrote {}", p.string());
  return 0;
}

int run_tune(PipelineConfig config) {
  check_inputs(config, false);
  const Raster raster = load_raster(config.paths.raster);
  std::optional<LabelMap> reference;
  if (!config.paths.reference.empty()) reference = load_labels(config.paths.reference);
  const PreparedScene scene = prepare_scene(config, raster);
  const TrainingData training = gather_training(config, raster, scene.spatial, reference ? &*reference : nullptr);
  const GaResult ga = evolve(training.set, training.spatial, config.ga);
  fs::create_directories(config.paths.output);
  write_json_file(ga_history_json(ga), config.paths.output / "ga.json");

  // Resolved config with the tuned genes folded in, ready for classify/benchmark.
  config.kernel = ga.best.kernel_spec();
  config.smo.C = ga.best.C();
  config.beta = ga.best.beta;
  std::ofstream out(config.paths.output / "tuned.cfg", std::ios::binary);
  out << dump_config(to_config_map(config));
  std::cout << "best fitness " << ga.best_fitness << "\n" << genome_to_json(ga.best).dump(2) << "\n";
  return 0;
}

int run_evaluate(const PipelineConfig& config, const fs::path& predicted_path) {
  if (config.paths.reference.empty()) throw ConfigError("paths.reference is not set");
  if (!fs::exists(config.paths.reference)) {
    throw ConfigError("paths.reference: no such file: " + config.paths.reference.string());
  }
  if (!fs::exists(predicted_path)) throw ConfigError("--predicted: no such file: " + predicted_path.string());
  const LabelMap reference = load_labels(config.paths.reference);
  const LabelMap predicted = load_labels(predicted_path);
  const MethodReport report = evaluate_method(predicted_path.stem().string(), reference, predicted);
  fs::create_directories(config.paths.output);
  write_json_file(report_json(report), config.paths.output / (predicted_path.stem().string() + "_report.json"));
  std::cout << format_accuracy_row(report.kappa, report.overall_accuracy) << "\n";
  return 0;
}

int run_benchmark_cmd(const PipelineConfig& config) {
  const BenchmarkResult r = run_benchmark(config);
  std::cout << r.table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("objclass");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Object-based spectral-spatial classification of multispectral rasters"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  fs::path config_path;
  std::vector<std::string> sets;
  bool print_config = false;
  bool quiet = false;
  app.add_option("--config", config_path, "Config file ([section] headers, key = value lines)");
  app.add_option("--set", sets, "Override one config key, e.g. --set svrf.beta=2");
  app.add_flag("--print-config", print_config, "Print the resolved config and exit");
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  Overrides ov;
  auto common = [&](CLI::App* sub) {
    ov.add(sub, "--output", "paths.output", "Output directory");
    ov.add(sub, "--seed", "run.seed", "Random seed");
  };
  auto inputs = [&](CLI::App* sub) {
    ov.add(sub, "--raster", "paths.raster", "Input raster header");
    ov.add(sub, "--reference", "paths.reference", "Reference label header");
    ov.add(sub, "--training", "paths.training", "Training label mask header");
    ov.add(sub, "--samples", "paths.samples", "Training samples CSV");
    ov.add(sub, "--train-per-class", "run.train_per_class", "Training pixels per class drawn from the reference");
    ov.add(sub, "--threshold", "segmentation.threshold", "Segmentation threshold or 'auto'");
    ov.add(sub, "--min-size", "segmentation.min_size", "Minimum object size");
  };
  auto svm_flags = [&](CLI::App* sub) {
    ov.add(sub, "--C", "kernel.C", "SVM box constraint");
    ov.add(sub, "--mu", "kernel.mu", "Spectral weight of the composite kernel");
    ov.add(sub, "--gamma", "kernel.spectral.gamma", "Spectral kernel gamma");
    ov.add(sub, "--spatial-gamma", "kernel.spatial.gamma", "Spatial kernel gamma");
  };
  auto classify_flags = [&](CLI::App* sub) {
    ov.add(sub, "--model", "paths.model", "SVM model file");
    ov.add(sub, "--beta", "svrf.beta", "Pairwise strength");
    ov.add(sub, "--sigma-s", "svrf.sigma_s", "Contrast bandwidth or 'auto'");
    ov.add(sub, "--neighborhood", "svrf.neighborhood", "4 or 8");
    ov.add(sub, "--ca", "ca.rule", "CA rule threshold,ceiling,steps or 'off'");
    ov.flag(sub, "--object-majority", "run.object_majority", "Relabel each object by its majority class");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene with ground truth");
  common(synth);
  fs::path spec_path;
  std::optional<double> synth_salt;
  std::size_t synth_train = 0;
  synth->add_option("--spec", spec_path, "Scene manifest JSON (default: the standard scene)");
  synth->add_option("--salt", synth_salt, "Salt fraction");
  synth->add_option("--write-training", synth_train, "Also write a training mask with this many pixels per class");

  auto* seg = app.add_subcommand("segment", "Region-growing segmentation");
  common(seg);
  inputs(seg);

  auto* train = app.add_subcommand("train", "Train the multiclass SVM and save the model");
  common(train);
  inputs(train);
  svm_flags(train);
  ov.add(train, "--model", "paths.model", "Model file to write");

  auto* classify = app.add_subcommand("classify", "Classify a raster with one method");
  common(classify);
  inputs(classify);
  svm_flags(classify);
  classify_flags(classify);
  ov.add(classify, "--method", "run.method", "mindist|mahalanobis|maxlik|pipiped|fspace|svm|svrf");

  auto* tune = app.add_subcommand("tune", "Genetic search over kernel and field parameters");
  common(tune);
  inputs(tune);
  ov.add(tune, "--generations", "ga.generations", "Generations");
  ov.add(tune, "--population", "ga.population", "Population size");
  ov.add(tune, "--ga-seed", "ga.seed", "GA seed");

  auto* evaluate = app.add_subcommand("evaluate", "Accuracy of a label raster against a reference");
  common(evaluate);
  ov.add(evaluate, "--reference", "paths.reference", "Reference label header");
  fs::path predicted;
  evaluate->add_option("--predicted", predicted, "Predicted label header")->required();

  auto* bench = app.add_subcommand("benchmark", "Run all seven methods and tabulate accuracy");
  common(bench);
  inputs(bench);
  svm_flags(bench);
  classify_flags(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (quiet) spdlog::set_level(spdlog::level::warn);

  try {
    ConfigMap map;
    if (!config_path.empty()) {
      if (!fs::exists(config_path)) throw ConfigError("--config: no such file: " + config_path.string());
      map = load_config_file(config_path);
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
      map[s.substr(0, eq)] = s.substr(eq + 1);
    }
    ov.apply(map);
    const PipelineConfig config = pipeline_config_from_map(map);
    if (print_config) {
      std::cout << dump_config(to_config_map(config));
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << "A subcommand is required\nRun with --help for more information.\n";
      return 2;
    }

    if (synth->parsed()) return run_synth(config, spec_path, synth_salt, synth_train);
    if (seg->parsed()) return run_segment(config);
    if (train->parsed()) return run_train(config);
    if (classify->parsed()) return run_classify(config);
    if (tune->parsed()) return run_tune(config);
    if (evaluate->parsed()) return run_evaluate(config, predicted);
    if (bench->parsed()) return run_benchmark_cmd(config);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
