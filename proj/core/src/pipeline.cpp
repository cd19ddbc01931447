#include "objclass/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "objclass/baselines.hpp"
#include "objclass/ca.hpp"
#include "objclass/error.hpp"
#include "objclass/raster_io.hpp"
#include "objclass/synth.hpp"

namespace objclass {
namespace fs = std::filesystem;

namespace {

// Runs one stage, logs its wall time and tags any failure with the stage name.
// ConfigError passes through untouched so the CLI can report it as a usage error.
template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&] {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    spdlog::info("stage {}: {:.3f} s", name, dt.count());
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      finish();
    } else {
      auto result = fn();
      finish();
      return result;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void require(const fs::path& path, const char* key) {
  if (path.empty()) throw ConfigError(std::string(key) + " is not set");
  if (!fs::exists(path)) throw ConfigError(std::string(key) + ": no such file: " + path.string());
}

void write_json(const nlohmann::json& doc, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

void write_text(const std::string& text, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

Palette palette_for(const LabelMap& a, const LabelMap* b) {
  ClassId top = 0;
  for (ClassId id : a.class_ids()) top = std::max(top, id);
  if (b) {
    for (ClassId id : b->class_ids()) top = std::max(top, id);
  }
  return default_palette(top);
}

bool has_training_source(const PipelineConfig& c) { return !c.paths.training.empty() || !c.paths.samples.empty(); }

nlohmann::json trace_json(const IcmResult& icm) {
  return {{"initial_objective", icm.initial_objective},
          {"objective_trace", icm.objective_trace},
          {"sweeps", icm.sweeps},
          {"converged", icm.converged}};
}

}  // namespace

void check_inputs(const PipelineConfig& config, bool need_reference) {
  require(config.paths.raster, "paths.raster");
  if (need_reference) require(config.paths.reference, "paths.reference");
  else if (!config.paths.reference.empty()) require(config.paths.reference, "paths.reference");
  if (!config.paths.training.empty()) require(config.paths.training, "paths.training");
  if (!config.paths.samples.empty()) require(config.paths.samples, "paths.samples");
}

PreparedScene prepare_scene(const PipelineConfig& config, const Raster& raster) {
  const double threshold = config.segment_threshold.value_or(default_segment_threshold(raster));
  Segmentation seg = stage("segment", [&] { return segment(raster, threshold, config.min_size); });
  spdlog::info("segmentation: threshold {:.4g}, {} objects", threshold, seg.objects.size());
  Raster spatial = stage("spatial_features", [&] { return spatial_feature_map(raster, seg); });
  return {std::move(seg), std::move(spatial), threshold};
}

TrainingData training_from_mask(const Raster& raster, const Raster& spatial, const LabelMap& mask) {
  if (!mask.same_grid(raster.width(), raster.height())) {
    throw std::invalid_argument("training mask is " + std::to_string(mask.width()) + "x" +
                                std::to_string(mask.height()) + ", raster is " + std::to_string(raster.width()) +
                                "x" + std::to_string(raster.height()));
  }
  TrainingData t;
  t.set.dim = raster.bands();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == kUnclassified) continue;
    t.set.samples.push_back(Sample{raster.spectrum(i), mask[i]});
    t.spatial.push_back(spatial.spectrum(i));
  }
  if (t.set.samples.empty()) throw std::invalid_argument("training mask has no labelled pixels");
  return t;
}

TrainingData gather_training(const PipelineConfig& config, const Raster& raster, const Raster& spatial,
                             const LabelMap* reference) {
  if (!config.paths.training.empty()) {
    return training_from_mask(raster, spatial, load_labels(config.paths.training));
  }
  if (!config.paths.samples.empty()) {
    TrainingData t;
    t.set = load_samples_csv(config.paths.samples);
    if (t.set.dim != raster.bands()) {
      throw std::invalid_argument("samples have " + std::to_string(t.set.dim) + " bands, raster has " +
                                  std::to_string(raster.bands()));
    }
    for (const auto& s : t.set.samples) t.spatial.push_back(s.features);
    return t;
  }
  if (reference) {
    return training_from_mask(raster, spatial, draw_training_mask(*reference, config.train_per_class, config.seed));
  }
  throw ConfigError("no training source: set paths.training, paths.samples or paths.reference");
}

SvmMulticlassModel train_svm(const PipelineConfig& config, const TrainingData& training) {
  return train_multiclass(training.set, training.spatial, config.kernel, config.smo);
}

SvrfParams svrf_params(const PipelineConfig& config, const Raster& raster) {
  SvrfParams p;
  p.beta = config.beta;
  p.sigma_s = config.sigma_s ? *config.sigma_s : estimate_sigma_s(raster, config.seed);
  p.neighborhood = config.neighborhood;
  p.max_sweeps = config.max_sweeps;
  p.validate();
  return p;
}

Classification classify_scene(Method method, const PipelineConfig& config, const Raster& raster,
                              const Raster& spatial, const TrainingData* training, const SvmMulticlassModel* model) {
  const std::size_t n = raster.pixel_count();
  if (method == Method::Svm || method == Method::Svrf) {
    if (!model) throw std::invalid_argument("method " + std::string(method_name(method)) + " needs a model");
    Classification out{LabelMap(raster.width(), raster.height(), kUnclassified, raster.resolution_m()), {}, {}};
    out.unary = unary_field(*model, raster, spatial);
    if (method == Method::Svm) {
      out.labels = unary_argmax(*out.unary, raster.resolution_m());
    } else {
      const SvrfParams params = svrf_params(config, raster);
      spdlog::info("svrf: beta {:.4g}, sigma_s {:.4g}", params.beta, params.sigma_s);
      out.icm = icm_infer(params, *out.unary, raster);
      out.labels = LabelMap(raster.width(), raster.height(), out.icm->labels.labels(), raster.resolution_m());
    }
    return out;
  }

  if (!training) throw std::invalid_argument("method " + std::string(method_name(method)) + " needs training samples");
  LabelMap labels(raster.width(), raster.height(), kUnclassified, raster.resolution_m());
  std::vector<double> px(raster.bands());
  if (method == Method::FeatureSpace) {
    for (std::size_t i = 0; i < n; ++i) {
      raster.spectrum(i, px);
      labels[i] = classify_feature_space(training->set, px, config.knn_k);
    }
    return {std::move(labels), {}, {}};
  }
  const GaussianClassStats stats = fit_stats(training->set);
  for (std::size_t i = 0; i < n; ++i) {
    raster.spectrum(i, px);
    switch (method) {
      case Method::Mahalanobis: labels[i] = classify_mahalanobis(stats, px); break;
      case Method::MinDistance: labels[i] = classify_min_distance(stats, px); break;
      case Method::MaxLikelihood: labels[i] = classify_max_likelihood(stats, px); break;
      case Method::Parallelepiped: labels[i] = classify_parallelepiped(stats, px, config.parallelepiped_k); break;
      default: break;
    }
  }
  return {std::move(labels), {}, {}};
}

LabelMap postprocess(const PipelineConfig& config, const LabelMap& labels, const Segmentation& seg,
                     const UnaryField* unary) {
  LabelMap out = labels;
  if (config.object_majority) {
    out = stage("object_majority", [&] { return object_majority_relabel(out, seg); });
  }
  if (config.ca) {
    out = stage("ca", [&] { return ca_run(out, unary, *config.ca); });
  }
  return LabelMap(out.width(), out.height(), out.labels(), labels.resolution_m());
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  check_inputs(config, false);
  const std::string name(method_name(config.method));
  const bool uses_svm = config.method == Method::Svm || config.method == Method::Svrf;

  const Raster raster = stage("load", [&] { return load_raster(config.paths.raster); });
  std::optional<LabelMap> reference;
  if (!config.paths.reference.empty()) {
    reference = stage("load_reference", [&] { return load_labels(config.paths.reference); });
  }
  const PreparedScene scene = prepare_scene(config, raster);

  std::optional<TrainingData> training;
  std::optional<SvmMulticlassModel> model;
  const bool load_existing =
      uses_svm && !config.paths.model.empty() && fs::exists(config.paths.model) && !has_training_source(config);
  if (load_existing) {
    model = stage("load_model", [&] { return load_model(config.paths.model); });
  } else {
    training = stage("training_data", [&] {
      return gather_training(config, raster, scene.spatial, reference ? &*reference : nullptr);
    });
    if (uses_svm) model = stage("train", [&] { return train_svm(config, *training); });
  }

  Classification cls = stage("classify", [&] {
    return classify_scene(config.method, config, raster, scene.spatial, training ? &*training : nullptr,
                          model ? &*model : nullptr);
  });
  PipelineResult result{postprocess(config, cls.labels, scene.segmentation, cls.unary ? &*cls.unary : nullptr),
                        std::nullopt, std::move(cls.icm), {}};

  if (reference) {
    result.report = stage("evaluate", [&] { return evaluate_method(name, *reference, result.labels); });
    spdlog::info("{}: OA {:.4f}, kappa {:.4f}", name, result.report->overall_accuracy, result.report->kappa);
  }

  stage("write", [&] {
    fs::create_directories(config.paths.output);
    const fs::path base = config.paths.output / name;
    save_labels(result.labels, fs::path(base).concat(".hdr"));
    result.artifacts.push_back(fs::path(base).concat(".hdr"));
    export_ppm(result.labels, palette_for(result.labels, reference ? &*reference : nullptr),
               fs::path(base).concat(".ppm"));
    result.artifacts.push_back(fs::path(base).concat(".ppm"));
    if (result.report) {
      write_json(report_json(*result.report), fs::path(base).concat("_report.json"));
      result.artifacts.push_back(fs::path(base).concat("_report.json"));
    }
    if (result.icm) {
      write_json(trace_json(*result.icm), fs::path(base).concat("_trace.json"));
      result.artifacts.push_back(fs::path(base).concat("_trace.json"));
    }
    if (model && !load_existing && !config.paths.model.empty()) {
      save_model(*model, config.paths.model);
      result.artifacts.push_back(config.paths.model);
    }
  });
  return result;
}

BenchmarkResult run_benchmark(const PipelineConfig& config) {
  config.validate();
  check_inputs(config, true);
  const Raster raster = stage("load", [&] { return load_raster(config.paths.raster); });
  const LabelMap reference = stage("load_reference", [&] { return load_labels(config.paths.reference); });
  const PreparedScene scene = prepare_scene(config, raster);
  const TrainingData training =
      stage("training_data", [&] { return gather_training(config, raster, scene.spatial, &reference); });

  // SVM and SVRF share one trained model; a training failure fails both rows.
  std::optional<SvmMulticlassModel> model;
  std::string model_error;
  try {
    model = stage("train", [&] { return train_svm(config, training); });
  } catch (const StageError& e) {
    model_error = e.what();
  }

  BenchmarkResult result;
  fs::create_directories(config.paths.output);
  nlohmann::json methods = nlohmann::json::array();
  std::vector<std::pair<std::string, std::optional<MethodReport>>> table_rows;
  for (Method m : kAllMethods) {
    BenchmarkRow row{m, std::nullopt, {}};
    const std::string name(method_name(m));
    try {
      const bool uses_svm = m == Method::Svm || m == Method::Svrf;
      if (uses_svm && !model) throw StageError("train", model_error);
      const std::string stage_name = "classify_" + name;
      Classification cls = stage(stage_name.c_str(), [&] {
        return classify_scene(m, config, raster, scene.spatial, &training, model ? &*model : nullptr);
      });
      const LabelMap labels =
          postprocess(config, cls.labels, scene.segmentation, cls.unary ? &*cls.unary : nullptr);
      row.report = evaluate_method(name, reference, labels);
      const fs::path hdr = config.paths.output / (name + ".hdr");
      save_labels(labels, hdr);
      result.artifacts.push_back(hdr);
      spdlog::info("{}: OA {:.4f}, kappa {:.4f}", name, row.report->overall_accuracy, row.report->kappa);
    } catch (const std::exception& e) {
      row.error = e.what();
      spdlog::warn("{} failed: {}", name, row.error);
    }
    nlohmann::json entry = row.report ? report_json(*row.report) : nlohmann::json::object();
    entry["method"] = name;
    entry["title"] = std::string(method_title(m));
    entry["status"] = row.report ? "ok" : "failed";
    if (!row.report) entry["error"] = row.error;
    methods.push_back(std::move(entry));
    table_rows.emplace_back(std::string(method_title(m)), row.report);
    result.rows.push_back(std::move(row));
  }

  result.table = format_table(table_rows);
  // Areal extent per class and method, in km^2.
  std::string extents = "\nAreal extent (km^2)\n";
  std::vector<ClassId> ids{kUnclassified};
  for (ClassId id : reference.class_ids()) ids.push_back(id);
  extents += "Methodology";
  for (ClassId id : ids) extents += id == kUnclassified ? " | unclassified" : " | class " + std::to_string(id);
  extents += "\n";
  for (const auto& row : result.rows) {
    extents += std::string(method_title(row.method));
    for (ClassId id : ids) {
      if (!row.report) {
        extents += " | failed";
        continue;
      }
      double km2 = 0.0;
      for (const auto& [cid, v] : row.report->areal_extent_km2) {
        if (cid == id) km2 = v;
      }
      char buf[48];
      std::snprintf(buf, sizeof(buf), " | %.4f", km2);
      extents += buf;
    }
    extents += "\n";
  }
  result.table += extents;

  const fs::path json_path = config.paths.output / "benchmark.json";
  write_json({{"schema", "benchmark_v1"}, {"methods", methods}}, json_path);
  const fs::path table_path = config.paths.output / "benchmark.txt";
  write_text(result.table, table_path);
  result.artifacts.push_back(json_path);
  result.artifacts.push_back(table_path);
  return result;
}

}  // namespace objclass
