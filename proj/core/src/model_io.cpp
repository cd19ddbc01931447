#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "objclass/error.hpp"
#include "objclass/raster_io.hpp"
#include "objclass/svm.hpp"

namespace objclass {
namespace {

constexpr std::string_view kMagic = "objclass-svm-model 1";
constexpr std::string_view kEndHeader = "end_header\n";

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

template <typename T>
T parse_number(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw IoError("model header: missing key " + key);
  T v{};
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("model header: bad value for " + key + ": '" + s + "'");
  }
  return v;
}

}  // namespace

void save_model(const SvmMulticlassModel& model, const std::filesystem::path& path) {
  if (model.classes.size() != model.binaries.size() || model.classes.size() != model.calibrators.size()) {
    throw std::invalid_argument("save_model: classes, binaries and calibrators are not aligned");
  }
  if (model.binaries.empty()) throw std::invalid_argument("save_model: empty model");
  const std::size_t ds = model.spectral_dim();
  const std::size_t dp = model.spatial_dim();
  const auto& first = model.binaries.front();

  std::ostringstream head;
  head << kMagic << "\n";
  head << "classes=";
  for (std::size_t c = 0; c < model.classes.size(); ++c) head << (c ? "," : "") << model.classes[c];
  head << "\nC=" << shortest(first.C) << "\n";
  head << "spectral_dim=" << ds << "\nspatial_dim=" << dp << "\n";
  head << "sv_dtype=float64\n";
  head << to_kv_block(first.kernel);
  for (std::size_t c = 0; c < model.classes.size(); ++c) {
    const auto& b = model.binaries[c];
    if (!(b.kernel == first.kernel) || b.C != first.C) {
      throw std::invalid_argument("save_model: binaries must share kernel and C");
    }
    const std::string prefix = "class." + std::to_string(model.classes[c]) + ".";
    head << prefix << "bias=" << shortest(b.bias) << "\n";
    head << prefix << "platt_a=" << shortest(model.calibrators[c].A) << "\n";
    head << prefix << "platt_b=" << shortest(model.calibrators[c].B) << "\n";
    head << prefix << "n_sv=" << b.support_vectors.size() << "\n";
  }
  head << kEndHeader;

  const std::string text = head.str();
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  for (const auto& b : model.binaries) {
    for (std::size_t i = 0; i < b.support_vectors.size(); ++i) {
      const auto& sv = b.support_vectors[i];
      if (sv.spectral.size() != ds || sv.spatial.size() != dp) {
        throw std::invalid_argument("save_model: support vectors have inconsistent lengths");
      }
      append_le(bytes, b.alphas_signed[i]);
      for (double v : sv.spectral) append_le(bytes, v);
      for (double v : sv.spatial) append_le(bytes, v);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

SvmMulticlassModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const std::string_view all(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  const std::string marker = "\n" + std::string(kEndHeader);
  const auto end = all.find(marker);
  if (end == std::string_view::npos || !all.starts_with(kMagic)) {
    throw IoError(path.string() + " is not an objclass model file");
  }

  std::map<std::string, std::string> kv;
  std::istringstream lines{std::string(all.substr(0, end))};
  std::string line;
  std::getline(lines, line);  // magic
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("model header: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }

  SvmMulticlassModel model;
  {
    std::istringstream cls(kv.count("classes") ? kv.at("classes") : "");
    std::string item;
    while (std::getline(cls, item, ',')) {
      model.classes.push_back(static_cast<ClassId>(std::stoul(item)));
    }
  }
  if (model.classes.size() < 2) throw IoError("model header: need at least 2 classes");
  if (kv.count("sv_dtype") && kv.at("sv_dtype") != "float64") {
    throw IoError("model header: unsupported sv_dtype " + kv.at("sv_dtype"));
  }
  const double C = parse_number<double>(kv, "C");
  const auto ds = parse_number<std::size_t>(kv, "spectral_dim");
  const auto dp = parse_number<std::size_t>(kv, "spatial_dim");
  KernelSpec kernel;
  try {
    kernel = kernel_spec_from_kv(kv);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("model header: ") + e.what());
  }

  std::size_t offset = end + marker.size();
  const std::size_t record = 8 * (1 + ds + dp);
  const std::span<const std::uint8_t> payload(bytes);
  for (ClassId id : model.classes) {
    const std::string prefix = "class." + std::to_string(id) + ".";
    SvmBinaryModel b;
    b.kernel = kernel;
    b.C = C;
    b.bias = parse_number<double>(kv, prefix + "bias");
    const auto n_sv = parse_number<std::size_t>(kv, prefix + "n_sv");
    if (offset + n_sv * record > bytes.size()) {
      throw IoError(path.string() + ": support-vector block is truncated");
    }
    for (std::size_t i = 0; i < n_sv; ++i) {
      b.alphas_signed.push_back(read_le_f64(payload.subspan(offset, 8)));
      offset += 8;
      PixelFeatures sv;
      sv.spectral.resize(ds);
      sv.spatial.resize(dp);
      for (auto& v : sv.spectral) {
        v = read_le_f64(payload.subspan(offset, 8));
        offset += 8;
      }
      for (auto& v : sv.spatial) {
        v = read_le_f64(payload.subspan(offset, 8));
        offset += 8;
      }
      b.support_vectors.push_back(std::move(sv));
    }
    model.binaries.push_back(std::move(b));
    model.calibrators.push_back({parse_number<double>(kv, prefix + "platt_a"),
                                 parse_number<double>(kv, prefix + "platt_b")});
  }
  if (offset != bytes.size()) {
    throw IoError(path.string() + ": " + std::to_string(bytes.size() - offset) +
                  " trailing bytes after the support-vector block");
  }
  return model;
}

}  // namespace objclass
