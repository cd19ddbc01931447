#include "objclass/raster_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "objclass/error.hpp"

namespace objclass {
namespace {

using nlohmann::json;

template <typename UInt>
void append_le_bits(std::vector<std::uint8_t>& out, UInt bits) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFFu));
  }
}

template <typename UInt>
UInt read_le_bits(std::span<const std::uint8_t> bytes) {
  UInt bits = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bits |= static_cast<UInt>(bytes[i]) << (8 * i);
  return bits;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

json read_header(const std::filesystem::path& path, const std::set<std::string>& keys,
                 std::string_view dtype) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json header;
  try {
    in >> header;
  } catch (const json::exception& e) {
    throw IoError("malformed header " + path.string() + ": " + e.what());
  }
  if (!header.is_object()) throw IoError("header " + path.string() + " is not a JSON object");
  std::set<std::string> found;
  for (const auto& item : header.items()) found.insert(item.key());
  if (found != keys) {
    std::string expected;
    for (const auto& k : keys) expected += (expected.empty() ? "" : ",") + k;
    throw IoError("header " + path.string() + " must contain exactly the keys {" + expected + "}");
  }
  if (header.at("dtype") != dtype) {
    throw IoError("header " + path.string() + ": dtype must be " + std::string(dtype));
  }
  return header;
}

std::size_t header_dim(const json& header, const char* key, const std::filesystem::path& path) {
  const auto& v = header.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw IoError("header " + path.string() + ": " + key + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

double header_resolution(const json& header, const std::filesystem::path& path) {
  const auto& v = header.at("resolution_m");
  if (!v.is_number() || !(v.get<double>() > 0.0)) {
    throw IoError("header " + path.string() + ": resolution_m must be a positive number");
  }
  return v.get<double>();
}

std::vector<std::uint8_t> read_payload(const std::filesystem::path& header_path,
                                       std::size_t expected_bytes) {
  const auto data_path = payload_path(header_path);
  auto bytes = read_file(data_path);
  if (bytes.size() != expected_bytes) {
    throw IoError("size mismatch in " + data_path.string() + ": expected " +
                  std::to_string(expected_bytes) + " bytes, got " + std::to_string(bytes.size()));
  }
  return bytes;
}

std::string trim_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

}  // namespace

void append_le(std::vector<std::uint8_t>& out, float value) {
  append_le_bits(out, std::bit_cast<std::uint32_t>(value));
}
void append_le(std::vector<std::uint8_t>& out, double value) {
  append_le_bits(out, std::bit_cast<std::uint64_t>(value));
}
void append_le(std::vector<std::uint8_t>& out, std::uint16_t value) { append_le_bits(out, value); }

float read_le_f32(std::span<const std::uint8_t> bytes) {
  return std::bit_cast<float>(read_le_bits<std::uint32_t>(bytes));
}
double read_le_f64(std::span<const std::uint8_t> bytes) {
  return std::bit_cast<double>(read_le_bits<std::uint64_t>(bytes));
}
std::uint16_t read_le_u16(std::span<const std::uint8_t> bytes) {
  return read_le_bits<std::uint16_t>(bytes);
}

std::filesystem::path payload_path(const std::filesystem::path& header_path) {
  auto p = header_path;
  p.replace_extension(".bin");
  return p;
}

Raster load_raster(const std::filesystem::path& header_path) {
  const json header =
      read_header(header_path, {"bands", "dtype", "height", "resolution_m", "width"}, "float32");
  const std::size_t width = header_dim(header, "width", header_path);
  const std::size_t height = header_dim(header, "height", header_path);
  const std::size_t bands = header_dim(header, "bands", header_path);
  const double resolution = header_resolution(header, header_path);
  if (width == 0 || height == 0 || bands == 0) {
    throw IoError("empty raster: " + header_path.string());
  }
  const std::size_t count = width * height * bands;
  const auto bytes = read_payload(header_path, count * 4);
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = read_le_f32(std::span(bytes).subspan(4 * i, 4));
    if (!std::isfinite(data[i])) {
      throw IoError("non-finite value at index " + std::to_string(i) + " in " +
                    payload_path(header_path).string());
    }
  }
  return Raster(width, height, bands, resolution, std::move(data));
}

void save_raster(const Raster& raster, const std::filesystem::path& header_path) {
  json header = {{"width", raster.width()},
                 {"height", raster.height()},
                 {"bands", raster.bands()},
                 {"resolution_m", raster.resolution_m()},
                 {"dtype", "float32"}};
  std::vector<std::uint8_t> bytes;
  bytes.reserve(raster.data().size() * 4);
  for (float v : raster.data()) append_le(bytes, v);
  write_text(header_path, header.dump() + "\n");
  write_file(payload_path(header_path), bytes);
}

LabelMap load_labels(const std::filesystem::path& header_path) {
  const json header = read_header(header_path, {"dtype", "height", "resolution_m", "width"}, "uint16");
  const std::size_t width = header_dim(header, "width", header_path);
  const std::size_t height = header_dim(header, "height", header_path);
  const double resolution = header_resolution(header, header_path);
  if (width == 0 || height == 0) throw IoError("empty label map: " + header_path.string());
  const std::size_t count = width * height;
  const auto bytes = read_payload(header_path, count * 2);
  std::vector<ClassId> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = read_le_u16(std::span(bytes).subspan(2 * i, 2));
  return LabelMap(width, height, std::move(labels), resolution);
}

void save_labels(const LabelMap& labels, const std::filesystem::path& header_path) {
  json header = {{"width", labels.width()},
                 {"height", labels.height()},
                 {"resolution_m", labels.resolution_m()},
                 {"dtype", "uint16"}};
  std::vector<std::uint8_t> bytes;
  bytes.reserve(labels.size() * 2);
  for (ClassId v : labels.labels()) append_le(bytes, v);
  write_text(header_path, header.dump() + "\n");
  write_file(payload_path(header_path), bytes);
}

Palette default_palette(std::size_t count) {
  static constexpr Rgb kColors[] = {
      {31, 119, 180}, {44, 160, 44},   {214, 39, 40},  {255, 127, 14}, {148, 103, 189},
      {140, 86, 75},  {227, 119, 194}, {127, 127, 127}, {188, 189, 34}, {23, 190, 207},
  };
  Palette palette;
  for (std::size_t id = 1; id <= count; ++id) {
    palette[static_cast<ClassId>(id)] = kColors[(id - 1) % std::size(kColors)];
  }
  return palette;
}

void export_ppm(const LabelMap& labels, const Palette& palette, const std::filesystem::path& path) {
  const std::string header =
      "P6\n" + std::to_string(labels.width()) + " " + std::to_string(labels.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(header.size() + 3 * labels.size());
  for (ClassId id : labels.labels()) {
    Rgb rgb{0, 0, 0};
    if (id != kUnclassified) {
      const auto it = palette.find(id);
      if (it == palette.end()) {
        throw std::invalid_argument("no palette entry for class " + std::to_string(id));
      }
      rgb = it->second;
    }
    bytes.insert(bytes.end(), rgb.begin(), rgb.end());
  }
  write_file(path, bytes);
}

TrainingSet load_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing CSV header");
  line = trim_cr(line);
  const auto header = split_commas(line);
  if (header.size() < 2 || strip(header.back()) != "label") {
    throw IoError(path.string() + ": header must be band_1,...,band_B,label");
  }
  TrainingSet set;
  set.dim = header.size() - 1;
  for (std::size_t b = 0; b < set.dim; ++b) {
    if (strip(header[b]) != "band_" + std::to_string(b + 1)) {
      throw IoError(path.string() + ": header column " + std::to_string(b + 1) + " must be band_" +
                    std::to_string(b + 1));
    }
  }
  std::size_t row = 0;  // data rows, header excluded
  while (std::getline(in, line)) {
    line = trim_cr(line);
    if (strip(line).empty()) continue;
    const std::string where = path.string() + " row " + std::to_string(++row);
    const auto fields = split_commas(line);
    if (fields.size() != set.dim + 1) {
      throw IoError(where + ": expected " + std::to_string(set.dim + 1) + " fields, got " +
                    std::to_string(fields.size()));
    }
    Sample sample;
    sample.features.resize(set.dim);
    for (std::size_t b = 0; b < set.dim; ++b) {
      const auto f = strip(fields[b]);
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), sample.features[b]);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() ||
          !std::isfinite(sample.features[b])) {
        throw IoError(where + ": field " + std::to_string(b + 1) + " is not a finite number");
      }
    }
    const auto lf = strip(fields.back());
    long long label = 0;
    auto [ptr, ec] = std::from_chars(lf.data(), lf.data() + lf.size(), label);
    if (lf.empty() || ec != std::errc() || ptr != lf.data() + lf.size()) {
      throw IoError(where + ": label is not an integer");
    }
    if (label < 1) throw IoError(where + ": label must be >= 1");
    if (label > 65535) throw IoError(where + ": label exceeds 65535");
    sample.label = static_cast<ClassId>(label);
    set.samples.push_back(std::move(sample));
  }
  return set;
}

void save_samples_csv(const TrainingSet& samples, const std::filesystem::path& path) {
  std::ostringstream out;
  for (std::size_t b = 0; b < samples.dim; ++b) out << "band_" << b + 1 << ",";
  out << "label\n";
  for (const auto& s : samples.samples) {
    for (double v : s.features) out << shortest(v) << ",";
    out << s.label << "\n";
  }
  write_text(path, out.str());
}

}  // namespace objclass
