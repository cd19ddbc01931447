#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "objclass/raster.hpp"
#include "objclass/svm.hpp"

namespace objclass {

enum class Neighborhood { Four = 4, Eight = 8 };

/// Parameters of the local-consistency term and of ICM.
struct SvrfParams {
  double beta = 1.0;      // pairwise strength, >= 0
  double sigma_s = 1.0;   // contrast bandwidth, > 0
  Neighborhood neighborhood = Neighborhood::Four;
  std::size_t max_sweeps = 50;

  void validate() const;
};

struct SvrfModel {
  SvmMulticlassModel svm;
  SvrfParams field;
};

/// Per-site log posteriors of the SVM, floored at log(1e-10).
struct UnaryField {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<ClassId> classes;    // ascending, K entries
  std::vector<double> log_probs;   // site-major: log_probs[site * K + k]

  std::size_t class_count() const { return classes.size(); }
  std::size_t site_count() const { return width * height; }
  std::span<const double> site(std::size_t i) const {
    return {log_probs.data() + i * classes.size(), classes.size()};
  }
  /// Posterior of class id `label` at site i; 0 if the field has no such class.
  double probability(std::size_t i, ClassId label) const;
};

inline constexpr double kLogProbFloor = -23.025850929940457;  // log(1e-10)

UnaryField unary_field(const SvmMulticlassModel& model, const Raster& raster, const Raster& spatial);

/// Pixelwise argmax of the unary field (ties to the smallest class id).
LabelMap unary_argmax(const UnaryField& unary, double resolution_m = 1.0);

/// beta * [yi == yj] * exp(-|xi - xj|^2 / (2 sigma_s^2)).
double pairwise(const SvrfParams& params, std::span<const double> xi, std::span<const double> xj,
                ClassId yi, ClassId yj);

/// J(Y) = sum_i log O(y_i) + sum over unordered neighbour pairs of V.
double svrf_objective(const SvrfParams& params, const UnaryField& unary, const Raster& raster,
                      const LabelMap& labels);

struct IcmResult {
  LabelMap labels;
  double initial_objective = 0.0;
  std::vector<double> objective_trace;  // J after each sweep
  std::size_t sweeps = 0;
  bool converged = false;               // last sweep changed nothing
};

struct IcmOptions {
  /// Recompute J before and after every accepted change and throw
  /// std::logic_error if it went down. Quadratic cost; tests only.
  bool check_each_update = false;
};

/// Iterated conditional modes. Starts from the unary argmax, visits sites in
/// row-major order and moves each to the label maximising its local score;
/// a site only changes on a strict improvement. Stops after a sweep with no
/// change or after max_sweeps sweeps. Contrast uses the spectral raster.
IcmResult icm_infer(const SvrfParams& params, const UnaryField& unary, const Raster& raster,
                    const IcmOptions& options = {});

/// Median Euclidean distance over `pairs` random 4-neighbour pairs; 1.0 when
/// the median is zero.
double estimate_sigma_s(const Raster& raster, std::uint64_t seed = 0, std::size_t pairs = 1000);

}  // namespace objclass
