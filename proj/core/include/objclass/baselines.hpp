#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "objclass/raster.hpp"

namespace objclass {

struct ClassGaussian {
  ClassId id;
  std::size_t count;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;   // unbiased, regularised to be positive definite
  Eigen::VectorXd stddev;       // per band, from the unregularised diagonal
  double ridge;                 // lambda added to the diagonal
  Eigen::LLT<Eigen::MatrixXd> cholesky;
  double log_det;
};

/// Per-class Gaussian statistics, classes in ascending id order.
struct GaussianClassStats {
  std::vector<ClassGaussian> classes;
};

/// Unbiased mean and covariance per class. The covariance gets lambda*I with
/// lambda = 1e-6 * trace/B (1e-6 when the trace is 0), multiplied by 10 until
/// the Cholesky factorisation succeeds. Throws if a class has < 2 samples.
GaussianClassStats fit_stats(const TrainingSet& data);

/// Argmin Euclidean distance to the class mean.
ClassId classify_min_distance(const GaussianClassStats& stats, std::span<const double> pixel);
/// Argmin (x - m)^T S^-1 (x - m).
ClassId classify_mahalanobis(const GaussianClassStats& stats, std::span<const double> pixel);
/// Argmin ln det S + (x - m)^T S^-1 (x - m); equal priors.
ClassId classify_max_likelihood(const GaussianClassStats& stats, std::span<const double> pixel);
/// Boxes mean +/- k*stddev per band. One box: that class; several: nearest
/// mean among them; none: 0 (unclassified).
ClassId classify_parallelepiped(const GaussianClassStats& stats, std::span<const double> pixel, double k = 2.0);
/// Plurality label among the k nearest training samples (Euclidean; distance
/// ties go to the earlier sample, vote ties to the smallest id).
ClassId classify_feature_space(const TrainingSet& data, std::span<const double> pixel, std::size_t k = 5);

double mahalanobis_squared(const ClassGaussian& g, std::span<const double> pixel);

}  // namespace objclass
