#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "objclass/raster.hpp"

namespace objclass {

/// Rows are reference classes, columns predicted classes.
struct ConfusionMatrix {
  std::vector<ClassId> classes;
  std::vector<std::vector<std::uint64_t>> counts;
  std::uint64_t ignored = 0;  // sites with 0 in the reference or the prediction

  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t r) const;
  std::uint64_t col_sum(std::size_t c) const;
};

/// Class list is the union of nonzero ids in either map. Throws on a shape
/// mismatch or when every site is ignored ("zero non-ignored sites").
ConfusionMatrix confusion(const LabelMap& reference, const LabelMap& predicted);

/// Builds a matrix directly from counts, with classes 1..K.
ConfusionMatrix confusion_from_counts(std::vector<std::vector<std::uint64_t>> counts);

double overall_accuracy(const ConfusionMatrix& cm);

/// (p0 - pe) / (1 - pe). When pe == 1 returns 1 if p0 == 1, else throws.
double kappa(const ConfusionMatrix& cm);

/// Diagonal over the row sum (reference) or column sum (map); empty when the sum is 0.
std::optional<double> producer_accuracy(const ConfusionMatrix& cm, std::size_t k);
std::optional<double> user_accuracy(const ConfusionMatrix& cm, std::size_t k);

/// count(class) * resolution_m^2 / 1e6, in square kilometres.
double areal_extent(const LabelMap& labels, double resolution_m, ClassId id);

/// "0.60 | 80.00": kappa and percent overall accuracy, two decimals each.
std::string format_accuracy_row(double kappa_value, double overall_accuracy_value);

struct MethodReport {
  std::string method;
  ConfusionMatrix cm;
  double overall_accuracy = 0.0;
  double kappa = 0.0;
  std::uint64_t unclassified = 0;   // predicted-0 sites
  std::vector<std::pair<ClassId, double>> areal_extent_km2;  // includes class 0
};

/// Metrics plus per-class areal extents of `predicted` (class 0 included).
MethodReport evaluate_method(const std::string& method, const LabelMap& reference, const LabelMap& predicted);

/// JSON document with "schema": "report_v1".
nlohmann::json report_json(const MethodReport& report);

/// Two-decimal text table, one row per method, "failed" for missing reports.
std::string format_table(const std::vector<std::pair<std::string, std::optional<MethodReport>>>& rows);

}  // namespace objclass
