#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "objclass/ca.hpp"
#include "objclass/ga.hpp"
#include "objclass/kernels.hpp"
#include "objclass/svrf.hpp"

namespace objclass {

/// Flat view of a config file: "[section]" headers and "key = value" lines
/// become "section.key" -> "value". '#' and ';' start comment lines.
using ConfigMap = std::map<std::string, std::string>;

/// Throws ConfigError with the line number on malformed input.
ConfigMap parse_config_text(std::string_view text);
ConfigMap load_config_file(const std::filesystem::path& path);
/// Inverse of parse_config_text (grouped by section, keys sorted).
std::string dump_config(const ConfigMap& config);

enum class Method { Mahalanobis, MinDistance, MaxLikelihood, Parallelepiped, FeatureSpace, Svm, Svrf };

/// Row order of the comparison table.
inline constexpr std::array<Method, 7> kAllMethods = {Method::Mahalanobis,    Method::MinDistance,
                                                      Method::MaxLikelihood,  Method::Parallelepiped,
                                                      Method::FeatureSpace,   Method::Svm,
                                                      Method::Svrf};

/// CLI spelling: mahalanobis, mindist, maxlik, pipiped, fspace, svm, svrf.
std::string_view method_name(Method m);
/// Human-readable row title for tables.
std::string_view method_title(Method m);
Method method_from_string(std::string_view name);

struct PipelineConfig {
  struct Paths {
    std::filesystem::path raster;
    std::filesystem::path reference;   // ground-truth labels for evaluation
    std::filesystem::path training;    // label map, nonzero = training pixel
    std::filesystem::path samples;     // CSV samples (spectral only)
    std::filesystem::path model;       // SVM model file to load or write
    std::filesystem::path output = "out";
  } paths;

  Method method = Method::Svrf;
  std::uint64_t seed = 7;
  std::size_t train_per_class = 100;  // used when training pixels are drawn from the reference
  bool object_majority = false;

  KernelSpec kernel{BaseKernel{KernelFamily::Rbf, 0.1, 3, 1.0}, BaseKernel{KernelFamily::Rbf, 0.1, 3, 1.0}, 0.5};
  SmoParams smo{10.0, 1e-3, 100, 4000, 512};

  std::optional<double> segment_threshold;  // empty = 0.5 x global per-band std-dev norm
  std::size_t min_size = 8;

  double beta = 1.0;
  std::optional<double> sigma_s;             // empty = median neighbour distance
  Neighborhood neighborhood = Neighborhood::Four;
  std::size_t max_sweeps = 50;

  std::optional<CaRule> ca;

  double parallelepiped_k = 2.0;
  std::size_t knn_k = 5;

  GaConfig ga;

  /// Range checks only; input existence is checked by the pipeline stages.
  void validate() const;
};

/// Unknown keys are rejected so typos do not silently fall back to defaults.
PipelineConfig pipeline_config_from_map(const ConfigMap& config);
ConfigMap to_config_map(const PipelineConfig& config);

}  // namespace objclass
