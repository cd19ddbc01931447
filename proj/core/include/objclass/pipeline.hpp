#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "objclass/config.hpp"
#include "objclass/evaluation.hpp"
#include "objclass/raster.hpp"
#include "objclass/segmentation.hpp"
#include "objclass/svm.hpp"
#include "objclass/svrf.hpp"

namespace objclass {

/// A pipeline stage failed; what() is prefixed with "stage <name>: ".
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("stage " + stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Throws ConfigError naming the config key and path of the first input that
/// does not exist. The raster is always required; the reference only when
/// `need_reference` is set.
void check_inputs(const PipelineConfig& config, bool need_reference);

struct PreparedScene {
  Segmentation segmentation;
  Raster spatial;          // per-pixel object mean spectra
  double threshold = 0.0;  // segmentation threshold actually used
};

PreparedScene prepare_scene(const PipelineConfig& config, const Raster& raster);

/// Spectral samples with their spatial vectors aligned by index.
struct TrainingData {
  TrainingSet set;
  std::vector<std::vector<double>> spatial;
};

/// Every nonzero site of `mask` becomes a sample, in row-major order.
TrainingData training_from_mask(const Raster& raster, const Raster& spatial, const LabelMap& mask);

/// Training pixels from paths.training if set, else CSV samples from
/// paths.samples (their spatial vector is the spectrum itself), else
/// train_per_class pixels per class drawn from `reference`.
TrainingData gather_training(const PipelineConfig& config, const Raster& raster, const Raster& spatial,
                             const LabelMap* reference);

SvmMulticlassModel train_svm(const PipelineConfig& config, const TrainingData& training);

struct Classification {
  LabelMap labels;
  std::optional<UnaryField> unary;  // svm and svrf only
  std::optional<IcmResult> icm;     // svrf only
};

/// One method on one scene. `model` is required for svm and svrf, `training`
/// for the five baselines.
Classification classify_scene(Method method, const PipelineConfig& config, const Raster& raster,
                              const Raster& spatial, const TrainingData* training, const SvmMulticlassModel* model);

/// Optional object-majority relabelling, then the optional CA pass.
LabelMap postprocess(const PipelineConfig& config, const LabelMap& labels, const Segmentation& seg,
                     const UnaryField* unary);

/// sigma_s from the config, or estimated from the raster when unset.
SvrfParams svrf_params(const PipelineConfig& config, const Raster& raster);

struct PipelineResult {
  LabelMap labels;
  std::optional<MethodReport> report;
  std::optional<IcmResult> icm;
  std::vector<std::filesystem::path> artifacts;
};

/// load -> segment -> spatial features -> train or load model -> classify ->
/// object majority -> CA -> evaluate -> write artifacts into paths.output.
/// A model is loaded from paths.model when that file exists and no training
/// source is configured; otherwise the model is trained.
PipelineResult run_pipeline(const PipelineConfig& config);

struct BenchmarkRow {
  Method method;
  std::optional<MethodReport> report;  // empty when the method failed
  std::string error;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;  // kAllMethods order
  std::string table;
  std::vector<std::filesystem::path> artifacts;
};

/// All seven methods on the same inputs. A failing method becomes a "failed"
/// row and the run continues. Requires paths.reference.
BenchmarkResult run_benchmark(const PipelineConfig& config);

}  // namespace objclass
