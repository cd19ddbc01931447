#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace objclass {

using ClassId = std::uint16_t;

/// Label value reserved for "no class assigned".
inline constexpr ClassId kUnclassified = 0;

/// B-band image grid. Storage is band-sequential, row-major within a band,
/// origin at the top-left corner: sample (x, y, b) lives at b*W*H + y*W + x.
class Raster {
 public:
  /// Throws std::invalid_argument on an empty grid, a data length that is not
  /// bands*width*height, a non-positive resolution, or a non-finite value.
  Raster(std::size_t width, std::size_t height, std::size_t bands, double resolution_m,
         std::vector<float> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t bands() const { return bands_; }
  std::size_t pixel_count() const { return width_ * height_; }
  double resolution_m() const { return resolution_m_; }

  std::size_t index(std::size_t x, std::size_t y, std::size_t band) const {
    return band * width_ * height_ + y * width_ + x;
  }
  float at(std::size_t x, std::size_t y, std::size_t band) const { return data_[index(x, y, band)]; }
  float at(std::size_t pixel, std::size_t band) const { return data_[band * width_ * height_ + pixel]; }

  /// Spectrum of one pixel (pixel = y*W + x), widened to double.
  std::vector<double> spectrum(std::size_t pixel) const;
  void spectrum(std::size_t pixel, std::span<double> out) const;

  std::span<const float> band(std::size_t b) const {
    return {data_.data() + b * width_ * height_, width_ * height_};
  }
  const std::vector<float>& data() const { return data_; }

  /// Same shape, resolution and payload bytes.
  bool bitwise_equal(const Raster& other) const;
  bool same_grid(std::size_t width, std::size_t height) const {
    return width_ == width && height_ == height;
  }

 private:
  std::size_t width_;
  std::size_t height_;
  std::size_t bands_;
  double resolution_m_;
  std::vector<float> data_;
};

/// Per-pixel class identifiers, row-major. 0 means unclassified.
class LabelMap {
 public:
  LabelMap(std::size_t width, std::size_t height, std::vector<ClassId> labels,
           double resolution_m = 1.0);
  LabelMap(std::size_t width, std::size_t height, ClassId fill = kUnclassified,
           double resolution_m = 1.0);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return labels_.size(); }
  double resolution_m() const { return resolution_m_; }

  ClassId operator[](std::size_t i) const { return labels_[i]; }
  ClassId& operator[](std::size_t i) { return labels_[i]; }
  ClassId at(std::size_t x, std::size_t y) const { return labels_[y * width_ + x]; }
  ClassId& at(std::size_t x, std::size_t y) { return labels_[y * width_ + x]; }

  const std::vector<ClassId>& labels() const { return labels_; }

  /// Distinct nonzero ids, ascending.
  std::vector<ClassId> class_ids() const;

  bool same_grid(std::size_t width, std::size_t height) const {
    return width_ == width && height_ == height;
  }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  double resolution_m_;
  std::vector<ClassId> labels_;
};

struct Sample {
  std::vector<double> features;
  ClassId label;
};

/// Labelled feature vectors, all of length `dim`, labels >= 1.
struct TrainingSet {
  std::size_t dim = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  /// Distinct labels, ascending.
  std::vector<ClassId> class_ids() const;
  /// Throws std::invalid_argument on a ragged vector or a label of 0.
  void validate() const;
};

/// A site described by its own spectrum and by its spatial characteristic
/// (the object-mean spectrum from segmentation). Inputs to the composite kernel.
struct PixelFeatures {
  std::vector<double> spectral;
  std::vector<double> spatial;

  friend bool operator==(const PixelFeatures&, const PixelFeatures&) = default;
};

}  // namespace objclass
