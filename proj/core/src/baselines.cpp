#include "objclass/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace objclass {
namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void check_pixel(const GaussianClassStats& stats, std::span<const double> pixel) {
  if (stats.classes.empty()) throw std::invalid_argument("classifier has no classes");
  if (static_cast<Eigen::Index>(pixel.size()) != stats.classes.front().mean.size()) {
    throw std::invalid_argument("pixel has " + std::to_string(pixel.size()) + " bands, statistics have " +
                                std::to_string(stats.classes.front().mean.size()));
  }
}

template <typename Score>
ClassId argmin_class(const GaussianClassStats& stats, Score&& score) {
  ClassId best = kUnclassified;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& g : stats.classes) {  // ascending ids, strict < keeps the smallest on ties
    const double s = score(g);
    if (s < best_score) {
      best_score = s;
      best = g.id;
    }
  }
  return best;
}

}  // namespace

GaussianClassStats fit_stats(const TrainingSet& data) {
  data.validate();
  if (data.dim == 0) throw std::invalid_argument("fit_stats: zero-dimensional samples");
  std::map<ClassId, std::vector<const Sample*>> by_class;
  for (const auto& s : data.samples) by_class[s.label].push_back(&s);
  if (by_class.empty()) throw std::invalid_argument("fit_stats: no samples");

  const auto b = static_cast<Eigen::Index>(data.dim);
  GaussianClassStats stats;
  for (const auto& [id, members] : by_class) {
    if (members.size() < 2) {
      throw std::invalid_argument("fit_stats: class " + std::to_string(id) + " has fewer than 2 samples");
    }
    const double n = static_cast<double>(members.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(b);
    for (const Sample* s : members) mean += as_vector(s->features);
    mean /= n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(b, b);
    for (const Sample* s : members) {
      const Eigen::VectorXd d = as_vector(s->features) - mean;
      cov.noalias() += d * d.transpose();
    }
    cov /= (n - 1.0);
    const Eigen::VectorXd stddev = cov.diagonal().cwiseSqrt();

    const double trace = cov.trace();
    double lambda = trace > 0.0 ? 1e-6 * trace / static_cast<double>(b) : 1e-6;
    Eigen::MatrixXd regularised;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int attempt = 0;; ++attempt) {
      regularised = cov;
      regularised.diagonal().array() += lambda;
      llt.compute(regularised);
      if (llt.info() == Eigen::Success) break;
      if (attempt == 30) throw std::runtime_error("fit_stats: covariance of class " + std::to_string(id) +
                                                  " could not be made positive definite");
      lambda *= 10.0;
    }
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    stats.classes.push_back(ClassGaussian{id, members.size(), mean, regularised, stddev, lambda, llt, log_det});
  }
  return stats;
}

double mahalanobis_squared(const ClassGaussian& g, std::span<const double> pixel) {
  const Eigen::VectorXd d = as_vector(pixel) - g.mean;
  const Eigen::VectorXd z = g.cholesky.matrixL().solve(d);
  return z.squaredNorm();
}

ClassId classify_min_distance(const GaussianClassStats& stats, std::span<const double> pixel) {
  check_pixel(stats, pixel);
  return argmin_class(stats, [&](const ClassGaussian& g) { return (as_vector(pixel) - g.mean).squaredNorm(); });
}

ClassId classify_mahalanobis(const GaussianClassStats& stats, std::span<const double> pixel) {
  check_pixel(stats, pixel);
  return argmin_class(stats, [&](const ClassGaussian& g) { return mahalanobis_squared(g, pixel); });
}

ClassId classify_max_likelihood(const GaussianClassStats& stats, std::span<const double> pixel) {
  check_pixel(stats, pixel);
  return argmin_class(stats, [&](const ClassGaussian& g) { return g.log_det + mahalanobis_squared(g, pixel); });
}

ClassId classify_parallelepiped(const GaussianClassStats& stats, std::span<const double> pixel, double k) {
  check_pixel(stats, pixel);
  const auto x = as_vector(pixel);
  ClassId best = kUnclassified;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& g : stats.classes) {
    const Eigen::ArrayXd half = k * g.stddev.array();
    const bool inside = ((x - g.mean).array().abs() <= half).all();
    if (!inside) continue;
    const double d = (x - g.mean).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = g.id;
    }
  }
  return best;
}

ClassId classify_feature_space(const TrainingSet& data, std::span<const double> pixel, std::size_t k) {
  if (data.samples.empty()) throw std::invalid_argument("feature space classifier: no training samples");
  if (k == 0) throw std::invalid_argument("feature space classifier: k must be >= 1");
  if (pixel.size() != data.dim) throw std::invalid_argument("feature space classifier: pixel length mismatch");
  const std::size_t n = data.samples.size();
  k = std::min(k, n);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0.0;
    const auto& f = data.samples[i].features;
    for (std::size_t b = 0; b < pixel.size(); ++b) d2 += (f[b] - pixel[b]) * (f[b] - pixel[b]);
    dist[i] = {d2, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::map<ClassId, std::size_t> votes;
  for (std::size_t j = 0; j < k; ++j) ++votes[data.samples[dist[j].second].label];
  ClassId best = kUnclassified;
  std::size_t best_votes = 0;
  for (const auto& [id, v] : votes) {
    if (v > best_votes) {
      best_votes = v;
      best = id;
    }
  }
  return best;
}

}  // namespace objclass
