#include "objclass/synth.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "objclass/rng.hpp"

namespace objclass {
namespace {

std::vector<ClassId> voronoi_labels(const SceneSpec& spec, Rng& rng) {
  const std::size_t k = spec.classes;
  std::vector<double> sx(k), sy(k);
  for (std::size_t c = 0; c < k; ++c) {
    sx[c] = rng.uniform() * static_cast<double>(spec.width);
    sy[c] = rng.uniform() * static_cast<double>(spec.height);
  }
  std::vector<ClassId> labels(spec.width * spec.height);
  for (std::size_t y = 0; y < spec.height; ++y) {
    for (std::size_t x = 0; x < spec.width; ++x) {
      const double px = static_cast<double>(x) + 0.5;
      const double py = static_cast<double>(y) + 0.5;
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (px - sx[c]) * (px - sx[c]) + (py - sy[c]) * (py - sy[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      labels[y * spec.width + x] = static_cast<ClassId>(best + 1);
    }
  }
  return labels;
}

// Plurality vote in a (2r+1)^2 window clipped to the grid. Ties keep the
// centre label when it is among the winners, else the smallest id wins.
std::vector<ClassId> majority_filter(const std::vector<ClassId>& labels, std::size_t width,
                                     std::size_t height, std::size_t classes, std::size_t radius) {
  // Per-class summed-area tables make each window O(K).
  const std::size_t sw = width + 1;
  std::vector<std::vector<std::uint32_t>> sat(classes, std::vector<std::uint32_t>(sw * (height + 1), 0));
  for (std::size_t c = 0; c < classes; ++c) {
    auto& t = sat[c];
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const std::uint32_t v = labels[y * width + x] == c + 1 ? 1u : 0u;
        t[(y + 1) * sw + x + 1] = v + t[y * sw + x + 1] + t[(y + 1) * sw + x] - t[y * sw + x];
      }
    }
  }
  std::vector<ClassId> out(labels.size());
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t y0 = y >= radius ? y - radius : 0;
    const std::size_t y1 = std::min(height, y + radius + 1);
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t x0 = x >= radius ? x - radius : 0;
      const std::size_t x1 = std::min(width, x + radius + 1);
      const ClassId centre = labels[y * width + x];
      ClassId winner = centre;
      std::uint32_t best = 0;
      for (std::size_t c = 0; c < classes; ++c) {
        const auto& t = sat[c];
        const std::uint32_t n = t[y1 * sw + x1] - t[y0 * sw + x1] - t[y1 * sw + x0] + t[y0 * sw + x0];
        if (n > best) {
          best = n;
          winner = static_cast<ClassId>(c + 1);
        }
      }
      const auto& tc = sat[centre - 1];
      const std::uint32_t centre_count =
          tc[y1 * sw + x1] - tc[y0 * sw + x1] - tc[y1 * sw + x0] + tc[y0 * sw + x0];
      out[y * width + x] = centre_count == best ? centre : winner;
    }
  }
  return out;
}

}  // namespace

void SceneSpec::validate() const {
  if (width == 0 || height == 0 || bands == 0) throw std::invalid_argument("empty scene");
  if (classes < 2) throw std::invalid_argument("a scene needs at least 2 classes");
  if (classes > 65535) throw std::invalid_argument("too many classes");
  if (classes > width * height) {
    throw std::invalid_argument("more classes (" + std::to_string(classes) + ") than pixels");
  }
  if (class_means.size() != classes || class_sigmas.size() != classes) {
    throw std::invalid_argument("class_means and class_sigmas need one row per class");
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (class_means[c].size() != bands || class_sigmas[c].size() != bands) {
      throw std::invalid_argument("class " + std::to_string(c + 1) + ": need one value per band");
    }
    for (std::size_t b = 0; b < bands; ++b) {
      if (!std::isfinite(class_means[c][b]) || !(class_sigmas[c][b] >= 0.0) ||
          !std::isfinite(class_sigmas[c][b])) {
        throw std::invalid_argument("class " + std::to_string(c + 1) +
                                    ": means must be finite and sigmas >= 0");
      }
    }
    for (std::size_t d = 0; d < c; ++d) {
      if (class_means[c] == class_means[d]) {
        throw std::invalid_argument("classes " + std::to_string(d + 1) + " and " +
                                    std::to_string(c + 1) + " have identical means");
      }
    }
  }
  if (region_scale < 1) throw std::invalid_argument("region_scale must be >= 1");
  if (!(noise_salt_fraction >= 0.0 && noise_salt_fraction <= 1.0)) {
    throw std::invalid_argument("noise_salt_fraction must be in [0, 1]");
  }
  if (!(resolution_m > 0.0)) throw std::invalid_argument("resolution_m must be positive");
}

SyntheticScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n = spec.width * spec.height;

  constexpr int kMaxAttempts = 10;
  std::vector<ClassId> truth;
  bool ok = false;
  for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
    truth = majority_filter(voronoi_labels(spec, rng), spec.width, spec.height, spec.classes,
                            spec.region_scale);
    std::vector<std::size_t> counts(spec.classes + 1, 0);
    for (ClassId id : truth) ++counts[id];
    ok = std::all_of(counts.begin() + 1, counts.end(), [](std::size_t c) { return c > 0; });
  }
  if (!ok) {
    throw std::runtime_error("could not place every class after " + std::to_string(kMaxAttempts) +
                             " seed layouts; enlarge the scene or reduce region_scale");
  }

  std::vector<float> data(n * spec.bands);
  std::vector<bool> salt(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t source = truth[i] - 1u;
    if (rng.uniform() < spec.noise_salt_fraction) {
      salt[i] = true;
      const std::size_t other = rng.uniform_index(spec.classes - 1);
      source = other >= source ? other + 1 : other;
    }
    for (std::size_t b = 0; b < spec.bands; ++b) {
      const double z = rng.normal();
      data[b * n + i] = static_cast<float>(spec.class_means[source][b] + spec.class_sigmas[source][b] * z);
    }
  }

  return SyntheticScene{
      Raster(spec.width, spec.height, spec.bands, spec.resolution_m, std::move(data)),
      LabelMap(spec.width, spec.height, std::move(truth), spec.resolution_m), std::move(salt)};
}

SceneSpec standard_scene_spec(std::uint64_t seed) {
  // Per-band rank of each class; consecutive ranks are 2 sigma apart.
  static constexpr int kRank[5][4] = {
      {0, 1, 2, 3}, {3, 2, 1, 0}, {1, 3, 0, 2}, {2, 0, 3, 1}, {0, 2, 3, 1}};
  SceneSpec spec;
  spec.width = 128;
  spec.height = 128;
  spec.bands = 5;
  spec.classes = 4;
  spec.region_scale = 3;
  spec.noise_salt_fraction = 0.10;
  spec.seed = seed;
  spec.resolution_m = 23.5;
  spec.class_means.assign(4, std::vector<double>(5));
  spec.class_sigmas.assign(4, std::vector<double>(5, 1.0));
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t b = 0; b < 5; ++b) spec.class_means[c][b] = 10.0 + 2.0 * kRank[b][c];
  }
  return spec;
}

LabelMap draw_training_mask(const LabelMap& truth, std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  LabelMap mask(truth.width(), truth.height(), kUnclassified, truth.resolution_m());
  for (ClassId id : truth.class_ids()) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == id) members.push_back(i);
    }
    rng.shuffle(members);
    const std::size_t take = std::min(per_class, members.size());
    for (std::size_t j = 0; j < take; ++j) mask[members[j]] = id;
  }
  return mask;
}

nlohmann::json scene_manifest(const SceneSpec& spec) {
  return {{"width", spec.width},
          {"height", spec.height},
          {"bands", spec.bands},
          {"classes", spec.classes},
          {"class_means", spec.class_means},
          {"class_sigmas", spec.class_sigmas},
          {"region_scale", spec.region_scale},
          {"noise_salt_fraction", spec.noise_salt_fraction},
          {"seed", spec.seed},
          {"resolution_m", spec.resolution_m}};
}

SceneSpec scene_spec_from_json(const nlohmann::json& manifest) {
  SceneSpec spec;
  spec.width = manifest.at("width").get<std::size_t>();
  spec.height = manifest.at("height").get<std::size_t>();
  spec.bands = manifest.at("bands").get<std::size_t>();
  spec.classes = manifest.at("classes").get<std::size_t>();
  spec.class_means = manifest.at("class_means").get<std::vector<std::vector<double>>>();
  spec.class_sigmas = manifest.at("class_sigmas").get<std::vector<std::vector<double>>>();
  spec.region_scale = manifest.at("region_scale").get<std::size_t>();
  spec.noise_salt_fraction = manifest.at("noise_salt_fraction").get<double>();
  spec.seed = manifest.at("seed").get<std::uint64_t>();
  spec.resolution_m = manifest.value("resolution_m", 23.5);
  spec.validate();
  return spec;
}

}  // namespace objclass
