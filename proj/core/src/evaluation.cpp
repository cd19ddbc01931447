#include "objclass/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace objclass {
namespace {
__extension__ typedef unsigned __int128 u128;
__extension__ typedef __int128 i128;
}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (auto v : row) t += v;
  }
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t r) const {
  std::uint64_t t = 0;
  for (auto v : counts[r]) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t c) const {
  std::uint64_t t = 0;
  for (const auto& row : counts) t += row[c];
  return t;
}

ConfusionMatrix confusion(const LabelMap& reference, const LabelMap& predicted) {
  if (!reference.same_grid(predicted.width(), predicted.height())) {
    throw std::invalid_argument("confusion: reference and prediction have different shapes");
  }
  std::set<ClassId> ids;
  for (ClassId id : reference.class_ids()) ids.insert(id);
  for (ClassId id : predicted.class_ids()) ids.insert(id);
  ConfusionMatrix cm;
  cm.classes.assign(ids.begin(), ids.end());
  const std::size_t k = cm.classes.size();
  cm.counts.assign(k, std::vector<std::uint64_t>(k, 0));
  std::vector<std::size_t> slot(65536, 0);
  for (std::size_t i = 0; i < k; ++i) slot[cm.classes[i]] = i;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const ClassId r = reference[i];
    const ClassId p = predicted[i];
    if (r == kUnclassified || p == kUnclassified) {
      ++cm.ignored;
      continue;
    }
    ++cm.counts[slot[r]][slot[p]];
  }
  if (cm.total() == 0) throw std::invalid_argument("confusion: zero non-ignored sites");
  return cm;
}

ConfusionMatrix confusion_from_counts(std::vector<std::vector<std::uint64_t>> counts) {
  ConfusionMatrix cm;
  for (const auto& row : counts) {
    if (row.size() != counts.size()) throw std::invalid_argument("confusion matrix must be square");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) cm.classes.push_back(static_cast<ClassId>(i + 1));
  cm.counts = std::move(counts);
  return cm;
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) throw std::invalid_argument("overall_accuracy: empty confusion matrix");
  std::uint64_t diag = 0;
  for (std::size_t k = 0; k < cm.classes.size(); ++k) diag += cm.counts[k][k];
  return static_cast<double>(diag) / static_cast<double>(n);
}

double kappa(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) throw std::invalid_argument("kappa: empty confusion matrix");
  std::uint64_t diag = 0;
  // Chance agreement from integer marginals, summed exactly before dividing.
  u128 chance = 0;
  for (std::size_t k = 0; k < cm.classes.size(); ++k) {
    diag += cm.counts[k][k];
    chance += static_cast<u128>(cm.row_sum(k)) * cm.col_sum(k);
  }
  const u128 n2 = static_cast<u128>(n) * n;
  if (chance == n2) {
    if (diag == n) return 1.0;
    throw std::domain_error("kappa: chance agreement is 1 but observed agreement is below 1");
  }
  // (p0 - pe)/(1 - pe) = (n*diag - chance) / (n^2 - chance)
  const auto num = static_cast<double>(static_cast<i128>(static_cast<u128>(n) * diag) - static_cast<i128>(chance));
  const auto den = static_cast<double>(n2 - chance);
  return num / den;
}

std::optional<double> producer_accuracy(const ConfusionMatrix& cm, std::size_t k) {
  const auto s = cm.row_sum(k);
  if (s == 0) return std::nullopt;
  return static_cast<double>(cm.counts[k][k]) / static_cast<double>(s);
}

std::optional<double> user_accuracy(const ConfusionMatrix& cm, std::size_t k) {
  const auto s = cm.col_sum(k);
  if (s == 0) return std::nullopt;
  return static_cast<double>(cm.counts[k][k]) / static_cast<double>(s);
}

double areal_extent(const LabelMap& labels, double resolution_m, ClassId id) {
  const auto count = static_cast<double>(std::count(labels.labels().begin(), labels.labels().end(), id));
  return count * resolution_m * resolution_m / 1e6;
}

std::string format_accuracy_row(double kappa_value, double overall_accuracy_value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f | %.2f", kappa_value, 100.0 * overall_accuracy_value);
  return buf;
}

MethodReport evaluate_method(const std::string& method, const LabelMap& reference, const LabelMap& predicted) {
  MethodReport r;
  r.method = method;
  r.cm = confusion(reference, predicted);
  r.overall_accuracy = overall_accuracy(r.cm);
  r.kappa = kappa(r.cm);
  r.unclassified = static_cast<std::uint64_t>(
      std::count(predicted.labels().begin(), predicted.labels().end(), kUnclassified));
  std::vector<ClassId> ids{kUnclassified};
  for (ClassId id : r.cm.classes) ids.push_back(id);
  for (ClassId id : ids) r.areal_extent_km2.emplace_back(id, areal_extent(predicted, predicted.resolution_m(), id));
  return r;
}

nlohmann::json report_json(const MethodReport& report) {
  using nlohmann::json;
  const auto& cm = report.cm;
  json producer = json::array();
  json user = json::array();
  for (std::size_t k = 0; k < cm.classes.size(); ++k) {
    const auto p = producer_accuracy(cm, k);
    const auto u = user_accuracy(cm, k);
    producer.push_back(p ? json(*p) : json(nullptr));
    user.push_back(u ? json(*u) : json(nullptr));
  }
  json extents = json::object();
  for (const auto& [id, km2] : report.areal_extent_km2) extents[std::to_string(id)] = km2;
  char oa[32];
  char kp[32];
  std::snprintf(oa, sizeof(oa), "%.2f", 100.0 * report.overall_accuracy);
  std::snprintf(kp, sizeof(kp), "%.2f", report.kappa);
  return {{"schema", "report_v1"},
          {"method", report.method},
          {"classes", cm.classes},
          {"confusion", cm.counts},
          {"ignored", cm.ignored},
          {"unclassified", report.unclassified},
          {"overall_accuracy", report.overall_accuracy},
          {"overall_accuracy_percent", oa},
          {"kappa", report.kappa},
          {"kappa_display", kp},
          {"producer_accuracy", producer},
          {"user_accuracy", user},
          {"areal_extent_km2", extents}};
}

std::string format_table(const std::vector<std::pair<std::string, std::optional<MethodReport>>>& rows) {
  std::size_t width = std::string("Methodology").size();
  for (const auto& [name, _] : rows) width = std::max(width, name.size());
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  std::string out = pad("Methodology") + " | Kappa | OA (%)\n";
  out += std::string(width, '-') + "-+-------+-------\n";
  for (const auto& [name, report] : rows) {
    out += pad(name) + " | ";
    if (!report) {
      out += "failed\n";
      continue;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%5.2f | %6.2f", report->kappa, 100.0 * report->overall_accuracy);
    out += buf;
    out += "\n";
  }
  return out;
}

}  // namespace objclass
