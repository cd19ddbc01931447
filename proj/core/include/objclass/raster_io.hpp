#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "objclass/raster.hpp"

namespace objclass {

// On-disk layout
// --------------
// A raster or label map is a pair of sibling files:
//   name.hdr  UTF-8 JSON object
//             raster: {"width","height","bands","resolution_m","dtype":"float32"}
//             labels: {"width","height","resolution_m","dtype":"uint16"}
//   name.bin  raw little-endian payload, band-sequential, row-major
// The key set is checked exactly; unknown or missing keys are rejected.

/// Payload path paired with a header path (extension replaced by ".bin").
std::filesystem::path payload_path(const std::filesystem::path& header_path);

Raster load_raster(const std::filesystem::path& header_path);
void save_raster(const Raster& raster, const std::filesystem::path& header_path);

LabelMap load_labels(const std::filesystem::path& header_path);
void save_labels(const LabelMap& labels, const std::filesystem::path& header_path);

using Rgb = std::array<std::uint8_t, 3>;
using Palette = std::map<ClassId, Rgb>;

/// A fixed, readable palette for ids 1..count.
Palette default_palette(std::size_t count);

/// Binary PPM (P6, maxval 255). Label 0 renders black; every other label must
/// have a palette entry.
void export_ppm(const LabelMap& labels, const Palette& palette, const std::filesystem::path& path);

/// CSV with header band_1,...,band_B,label. One sample per data row, file order kept.
TrainingSet load_samples_csv(const std::filesystem::path& path);
void save_samples_csv(const TrainingSet& samples, const std::filesystem::path& path);

// Little-endian helpers shared by the model file writer.
void append_le(std::vector<std::uint8_t>& out, float value);
void append_le(std::vector<std::uint8_t>& out, double value);
void append_le(std::vector<std::uint8_t>& out, std::uint16_t value);
float read_le_f32(std::span<const std::uint8_t> bytes);
double read_le_f64(std::span<const std::uint8_t> bytes);
std::uint16_t read_le_u16(std::span<const std::uint8_t> bytes);

}  // namespace objclass
