#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "objclass/kernels.hpp"
#include "objclass/raster.hpp"
#include "objclass/rng.hpp"

namespace objclass::testing {

/// Fresh directory under the system temp dir, removed by the destructor.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

Raster random_raster(Rng& rng, std::size_t max_side = 12, std::size_t max_bands = 6);
LabelMap random_labels(Rng& rng, std::size_t width, std::size_t height, ClassId max_class,
                       bool allow_zero = false);
std::vector<double> random_vector(Rng& rng, std::size_t dim, double lo = -1.0, double hi = 1.0);

/// Small two-class problem: points from two Gaussian blobs, labels +1/-1,
/// both classes present.
struct BinaryProblem {
  std::vector<PixelFeatures> points;
  std::vector<int> labels;
};
BinaryProblem random_binary_problem(Rng& rng, std::size_t n, std::size_t dim, double separation);

/// Independent solver for the SVM dual: maximise sum(a) - a'Qa/2 with
/// Q_ij = y_i y_j K_ij over 0 <= a <= C, y'a = 0. Accelerated projected
/// gradient; the projection onto the feasible set is found by bisection on
/// the multiplier of the equality constraint.
struct QpSolution {
  std::vector<double> alpha;
  double objective = 0.0;
  double bias = 0.0;
};
QpSolution solve_dual_oracle(const std::vector<std::vector<double>>& kernel, const std::vector<int>& labels,
                             double C, std::size_t iterations = 200000);

/// Decision value sum_j alpha_j y_j K(x, x_j) + b from an oracle solution and
/// a row of kernel values against the training points.
double oracle_decision(const QpSolution& s, const std::vector<int>& labels, const std::vector<double>& k_row);

}  // namespace objclass::testing
