#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "objclass/kernels.hpp"
#include "objclass/raster.hpp"

namespace objclass {

struct SmoParams {
  double C = 1.0;
  double tol = 1e-3;
  /// Iteration budget is max_passes * n pair updates.
  std::size_t max_passes = 100;
  /// Gram matrix is precomputed up to this many points, else rows are LRU-cached.
  std::size_t full_gram_limit = 4000;
  std::size_t cache_rows = 512;
};

/// g(P) = sum_i alphas_signed[i] * K(P, P_i) + bias over the support vectors.
struct SvmBinaryModel {
  std::vector<PixelFeatures> support_vectors;
  std::vector<double> alphas_signed;  // alpha_i * y_i, nonzero alphas only
  double bias = 0.0;
  KernelSpec kernel;
  double C = 1.0;

  friend bool operator==(const SvmBinaryModel&, const SvmBinaryModel&) = default;
};

struct SmoResult {
  SvmBinaryModel model;
  std::vector<double> alpha;       // one per training point, in [0, C]
  std::vector<std::size_t> support_indices;
  double dual_objective = 0.0;     // sum(alpha) - 1/2 alpha^T Q alpha
  std::size_t iterations = 0;
  /// False when the iteration budget ran out before the violation gap fell
  /// below tol; the model is then the best iterate reached.
  bool converged = false;
};

/// Soft-margin binary SVM on the composite kernel, solved by SMO with
/// maximal-violating-pair selection (lowest index wins ties). labels are +1/-1.
///
/// Throws std::invalid_argument for mismatched lengths, labels other than
/// +/-1, a single class, C <= 0 or tol <= 0.
SmoResult smo_train(std::span<const PixelFeatures> points, std::span<const int> labels,
                    const KernelSpec& kernel, const SmoParams& params);

double decision(const SvmBinaryModel& model, std::span<const double> p_spectral,
                std::span<const double> p_spatial);
inline double decision(const SvmBinaryModel& model, const PixelFeatures& p) {
  return decision(model, p.spectral, p.spatial);
}

/// Sigmoid P(y = +1 | g) = 1 / (1 + exp(A g + B)).
struct PlattParams {
  double A = 0.0;
  double B = 0.0;

  double probability(double g) const;
  friend bool operator==(const PlattParams&, const PlattParams&) = default;
};

/// Newton fit with backtracking on the regularised targets
/// t+ = (N+ + 1)/(N+ + 2), t- = 1/(N- + 2). Stops when the gradient norm drops
/// below 1e-8 or after 100 iterations.
PlattParams platt_fit(std::span<const double> decision_values, std::span<const int> labels);

/// Negative log-likelihood that platt_fit minimises; exposed for tests and diagnostics.
double platt_nll(const PlattParams& params, std::span<const double> decision_values,
                 std::span<const int> labels);

/// One-vs-rest binaries with per-class Platt calibrators.
struct SvmMulticlassModel {
  std::vector<ClassId> classes;  // ascending
  std::vector<SvmBinaryModel> binaries;
  std::vector<PlattParams> calibrators;

  std::size_t spectral_dim() const;
  std::size_t spatial_dim() const;
  friend bool operator==(const SvmMulticlassModel&, const SvmMulticlassModel&) = default;
};

/// Trains one binary per class (that class = +1) on all points, then fits each
/// calibrator on 3-fold cross-validated decision values. Fold of a point is
/// its occurrence index within its class modulo 3.
SvmMulticlassModel train_multiclass(std::span<const PixelFeatures> points,
                                    std::span<const ClassId> labels, const KernelSpec& kernel,
                                    const SmoParams& params);

/// TrainingSet flavour: spectral vectors from `data`, spatial vectors aligned by index.
SvmMulticlassModel train_multiclass(const TrainingSet& data,
                                    std::span<const std::vector<double>> spatial,
                                    const KernelSpec& kernel, const SmoParams& params);

/// Calibrated class probabilities normalised to sum to 1, aligned with model.classes.
std::vector<double> posterior(const SvmMulticlassModel& model, std::span<const double> p_spectral,
                              std::span<const double> p_spatial);
inline std::vector<double> posterior(const SvmMulticlassModel& model, const PixelFeatures& p) {
  return posterior(model, p.spectral, p.spatial);
}

/// Class with the largest posterior (ties to the smallest id).
ClassId predict(const SvmMulticlassModel& model, const PixelFeatures& p);

// Model file
// ----------
// Text header, one key=value per line, ending with the line "end_header",
// followed by a little-endian binary block. For every class in order the block
// holds n_sv records of (alpha_signed, spectral[0..ds), spatial[0..dp)), all
// float64. Doubles in the header use shortest round-trip notation, so a
// save/load/save cycle is byte-identical.
void save_model(const SvmMulticlassModel& model, const std::filesystem::path& path);
SvmMulticlassModel load_model(const std::filesystem::path& path);

}  // namespace objclass
