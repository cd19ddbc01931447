#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "objclass/raster.hpp"

namespace objclass {

using ObjectId = std::uint32_t;

struct ImageObject {
  ObjectId id;
  std::size_t pixel_count;
  std::vector<double> mean;            // spectral mean of member pixels
  std::array<std::size_t, 4> bbox;     // xmin, ymin, xmax, ymax (inclusive)
};

/// Partition of the grid into 4-connected objects with ids 1..N.
struct Segmentation {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<ObjectId> object_ids;    // row-major, every entry >= 1
  std::vector<ImageObject> objects;    // objects[k].id == k + 1

  const ImageObject& object_at(std::size_t pixel) const { return objects[object_ids[pixel] - 1]; }
};

/// Region growing. Seeds are taken in raster-scan order; a 4-neighbour joins
/// the growing region iff the Euclidean distance between its spectrum and the
/// region's running mean is <= threshold. Regions smaller than min_size are
/// then merged into the adjacent region with the nearest mean (ties to the
/// smaller id), repeated until none are left. Object ids are renumbered in
/// order of first appearance in raster scan.
Segmentation segment(const Raster& raster, double threshold, std::size_t min_size = 8);

/// 0.5 x the Euclidean norm of the per-band global standard deviations.
double default_segment_threshold(const Raster& raster);

/// B-band raster whose every pixel holds its object's mean spectrum.
Raster spatial_feature_map(const Raster& raster, const Segmentation& seg);

/// Every pixel of an object gets the object's plurality nonzero label (ties to
/// the smallest id). Objects with no labelled pixel stay unclassified.
LabelMap object_majority_relabel(const LabelMap& pixel_labels, const Segmentation& seg);

/// Object ids as a uint16 label raster; throws if there are more than 65535 objects.
LabelMap object_id_map(const Segmentation& seg, double resolution_m);

/// {"objects":[{"id","pixel_count","mean","bbox"}...]}
nlohmann::json objects_table(const Segmentation& seg);

}  // namespace objclass
