#include "objclass/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>
#include <string>

namespace objclass {

Raster::Raster(std::size_t width, std::size_t height, std::size_t bands, double resolution_m,
               std::vector<float> data)
    : width_(width), height_(height), bands_(bands), resolution_m_(resolution_m),
      data_(std::move(data)) {
  if (width_ == 0 || height_ == 0 || bands_ == 0) throw std::invalid_argument("empty raster");
  if (!(resolution_m_ > 0.0) || !std::isfinite(resolution_m_)) {
    throw std::invalid_argument("resolution_m must be a positive finite number");
  }
  const std::size_t expected = width_ * height_ * bands_;
  if (data_.size() != expected) {
    throw std::invalid_argument("raster data length " + std::to_string(data_.size()) +
                                " does not match bands*width*height = " +
                                std::to_string(expected));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw std::invalid_argument("non-finite raster value at index " + std::to_string(i));
    }
  }
}

std::vector<double> Raster::spectrum(std::size_t pixel) const {
  std::vector<double> out(bands_);
  spectrum(pixel, out);
  return out;
}

void Raster::spectrum(std::size_t pixel, std::span<double> out) const {
  const std::size_t plane = width_ * height_;
  for (std::size_t b = 0; b < bands_; ++b) out[b] = data_[b * plane + pixel];
}

bool Raster::bitwise_equal(const Raster& other) const {
  return width_ == other.width_ && height_ == other.height_ && bands_ == other.bands_ &&
         std::memcmp(&resolution_m_, &other.resolution_m_, sizeof(double)) == 0 &&
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

LabelMap::LabelMap(std::size_t width, std::size_t height, std::vector<ClassId> labels,
                   double resolution_m)
    : width_(width), height_(height), resolution_m_(resolution_m), labels_(std::move(labels)) {
  if (width_ == 0 || height_ == 0) throw std::invalid_argument("empty label map");
  if (!(resolution_m_ > 0.0)) throw std::invalid_argument("resolution_m must be positive");
  if (labels_.size() != width_ * height_) {
    throw std::invalid_argument("label count " + std::to_string(labels_.size()) +
                                " does not match width*height = " +
                                std::to_string(width_ * height_));
  }
}

LabelMap::LabelMap(std::size_t width, std::size_t height, ClassId fill, double resolution_m)
    : LabelMap(width, height, std::vector<ClassId>(width * height, fill), resolution_m) {}

std::vector<ClassId> LabelMap::class_ids() const {
  std::vector<bool> seen(65536, false);
  for (ClassId id : labels_) seen[id] = true;
  std::vector<ClassId> ids;
  for (std::size_t id = 1; id < seen.size(); ++id) {
    if (seen[id]) ids.push_back(static_cast<ClassId>(id));
  }
  return ids;
}

std::vector<ClassId> TrainingSet::class_ids() const {
  std::set<ClassId> ids;
  for (const auto& s : samples) ids.insert(s.label);
  return {ids.begin(), ids.end()};
}

void TrainingSet::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].features.size() != dim) {
      throw std::invalid_argument("sample " + std::to_string(i) + " has length " +
                                  std::to_string(samples[i].features.size()) + ", expected " +
                                  std::to_string(dim));
    }
    if (samples[i].label == kUnclassified) {
      throw std::invalid_argument("sample " + std::to_string(i) + ": label must be >= 1");
    }
  }
}

}  // namespace objclass
