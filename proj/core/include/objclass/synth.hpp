#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "objclass/raster.hpp"

namespace objclass {

/// Parameters of a synthetic multispectral scene with known ground truth.
struct SceneSpec {
  std::size_t width = 128;
  std::size_t height = 128;
  std::size_t bands = 5;
  std::size_t classes = 4;
  std::vector<std::vector<double>> class_means;   // classes x bands
  std::vector<std::vector<double>> class_sigmas;  // classes x bands, >= 0
  std::size_t region_scale = 3;                   // majority-filter radius, >= 1
  double noise_salt_fraction = 0.0;               // in [0, 1]
  std::uint64_t seed = 0;
  double resolution_m = 23.5;

  /// Throws std::invalid_argument when any invariant is violated.
  void validate() const;
};

struct SyntheticScene {
  Raster raster;
  LabelMap truth;
  /// true where the observation was drawn from a class other than the truth.
  std::vector<bool> salt;
};

/// Voronoi regions around K random seeds, smoothed by a majority filter of
/// radius region_scale, then per-band Gaussian draws per class with salt
/// replacement. Deterministic in spec.seed.
///
/// RNG call order: per attempt, 2*K uniforms for seed coordinates; then per
/// pixel in row-major order one uniform (salt test), one index draw when
/// salted, and B normals.
SyntheticScene generate_scene(const SceneSpec& spec);

/// The reference scene used by the end-to-end acceptance run: 128x128, 5
/// bands, 4 classes, sigma 1 in every band, consecutive class means 2 sigma
/// apart in every band (with a per-band ordering of the classes), salt 0.10.
SceneSpec standard_scene_spec(std::uint64_t seed = 7);

/// Picks `per_class` pixels of every class in `truth` (fewer if the class is
/// smaller) and returns a map that is nonzero only at the chosen pixels.
LabelMap draw_training_mask(const LabelMap& truth, std::size_t per_class, std::uint64_t seed);

nlohmann::json scene_manifest(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const nlohmann::json& manifest);

}  // namespace objclass
