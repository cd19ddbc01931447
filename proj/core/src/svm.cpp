#include "objclass/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "objclass/kernel_cache.hpp"

namespace objclass {
namespace {

constexpr double kTau = 1e-12;

void check_training_input(std::span<const PixelFeatures> points, std::span<const int> labels,
                          const SmoParams& params) {
  if (points.size() != labels.size()) {
    throw std::invalid_argument("smo_train: " + std::to_string(points.size()) + " points but " +
                                std::to_string(labels.size()) + " labels");
  }
  if (!(params.C > 0.0)) throw std::invalid_argument("smo_train: C must be > 0");
  if (!(params.tol > 0.0)) throw std::invalid_argument("smo_train: tol must be > 0");
  bool pos = false;
  bool neg = false;
  for (int y : labels) {
    if (y == 1) pos = true;
    else if (y == -1) neg = true;
    else throw std::invalid_argument("smo_train: labels must be +1 or -1");
  }
  if (!pos || !neg) throw std::invalid_argument("smo_train: both classes must be present");
  const auto ds = points.front().spectral.size();
  const auto dp = points.front().spatial.size();
  for (const auto& p : points) {
    if (p.spectral.size() != ds || p.spatial.size() != dp) {
      throw std::invalid_argument("smo_train: feature vectors have inconsistent lengths");
    }
  }
}

}  // namespace

SmoResult smo_train(std::span<const PixelFeatures> points, std::span<const int> labels,
                    const KernelSpec& kernel, const SmoParams& params) {
  check_training_input(points, labels, params);
  kernel.validate();
  const std::size_t n = points.size();
  const double C = params.C;
  KernelMatrix K(kernel, points, params.full_gram_limit, params.cache_rows);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i];
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a^T Q a - e^T a

  auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; };

  const std::size_t budget = std::max<std::size_t>(1, params.max_passes) * n;
  SmoResult result;
  std::size_t iter = 0;
  for (; iter < budget; ++iter) {
    std::size_t i = n;
    std::size_t j = n;
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(t) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    if (i == n || j == n || g_max - g_min <= params.tol) {
      result.converged = true;
      break;
    }

    const auto Ki = K.row(i);
    const auto Kj = K.row(j);
    const double Kii = K.diagonal(i);
    const double Kjj = K.diagonal(j);
    const double Kij = Ki[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];

    if (y[i] != y[j]) {
      double quad = Kii + Kjj - 2.0 * Kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = Kii + Kjj - 2.0 * Kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = sum;
        }
        if (alpha[i] < 0.0) {
          alpha[i] = 0.0;
          alpha[j] = sum;
        }
      }
    }

    const double di = (alpha[i] - old_ai) * y[i];
    const double dj = (alpha[j] - old_aj) * y[j];
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (Ki[t] * di + Kj[t] * dj);
  }
  result.iterations = iter;

  // Bias: average over free vectors, else the midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (upper + lower);

  double objective = 0.0;
  for (std::size_t t = 0; t < n; ++t) objective += 0.5 * alpha[t] * (1.0 - grad[t]);

  result.model.bias = -rho;
  result.model.kernel = kernel;
  result.model.C = C;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      result.support_indices.push_back(t);
      result.model.support_vectors.push_back(points[t]);
      result.model.alphas_signed.push_back(alpha[t] * y[t]);
    }
  }
  result.alpha = std::move(alpha);
  result.dual_objective = objective;
  return result;
}

double decision(const SvmBinaryModel& model, std::span<const double> p_spectral,
                std::span<const double> p_spatial) {
  double g = 0.0;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    const auto& sv = model.support_vectors[i];
    if (sv.spectral.size() != p_spectral.size() || sv.spatial.size() != p_spatial.size()) {
      throw std::invalid_argument("decision: feature length does not match the model");
    }
    g += model.alphas_signed[i] * eval_composite(model.kernel, p_spectral, p_spatial, sv.spectral, sv.spatial);
  }
  return g + model.bias;
}

std::size_t SvmMulticlassModel::spectral_dim() const {
  for (const auto& b : binaries) {
    if (!b.support_vectors.empty()) return b.support_vectors.front().spectral.size();
  }
  return 0;
}

std::size_t SvmMulticlassModel::spatial_dim() const {
  for (const auto& b : binaries) {
    if (!b.support_vectors.empty()) return b.support_vectors.front().spatial.size();
  }
  return 0;
}

SvmMulticlassModel train_multiclass(std::span<const PixelFeatures> points,
                                    std::span<const ClassId> labels, const KernelSpec& kernel,
                                    const SmoParams& params) {
  if (points.size() != labels.size()) {
    throw std::invalid_argument("train_multiclass: points and labels differ in length");
  }
  std::vector<ClassId> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw std::invalid_argument("train_multiclass: need at least 2 classes");
  if (classes.front() == kUnclassified) {
    throw std::invalid_argument("train_multiclass: label 0 is reserved for unclassified");
  }

  const std::size_t n = points.size();
  constexpr std::size_t kFolds = 3;
  std::vector<std::size_t> fold(n);
  {
    std::vector<std::size_t> seen(65536, 0);
    for (std::size_t i = 0; i < n; ++i) fold[i] = seen[labels[i]]++ % kFolds;
  }

  SvmMulticlassModel model;
  model.classes = classes;
  for (ClassId c : classes) {
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == c ? 1 : -1;
    SvmBinaryModel full = smo_train(points, y, kernel, params).model;

    std::vector<double> cv_values(n);
    for (std::size_t f = 0; f < kFolds; ++f) {
      std::vector<PixelFeatures> train_pts;
      std::vector<int> train_y;
      bool pos = false;
      bool neg = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (fold[i] == f) continue;
        train_pts.push_back(points[i]);
        train_y.push_back(y[i]);
        (y[i] > 0 ? pos : neg) = true;
      }
      const bool usable = pos && neg;
      SvmBinaryModel fold_model = usable ? smo_train(train_pts, train_y, kernel, params).model : full;
      for (std::size_t i = 0; i < n; ++i) {
        if (fold[i] == f) cv_values[i] = decision(fold_model, points[i]);
      }
    }
    model.calibrators.push_back(platt_fit(cv_values, y));
    model.binaries.push_back(std::move(full));
  }
  return model;
}

SvmMulticlassModel train_multiclass(const TrainingSet& data,
                                    std::span<const std::vector<double>> spatial,
                                    const KernelSpec& kernel, const SmoParams& params) {
  data.validate();
  if (spatial.size() != data.size()) {
    throw std::invalid_argument("train_multiclass: spatial features not aligned with samples");
  }
  std::vector<PixelFeatures> points;
  std::vector<ClassId> labels;
  points.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    points.push_back({data.samples[i].features, spatial[i]});
    labels.push_back(data.samples[i].label);
  }
  return train_multiclass(points, labels, kernel, params);
}

std::vector<double> posterior(const SvmMulticlassModel& model, std::span<const double> p_spectral,
                              std::span<const double> p_spatial) {
  const std::size_t k = model.classes.size();
  std::vector<double> p(k);
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    p[c] = model.calibrators[c].probability(decision(model.binaries[c], p_spectral, p_spatial));
    total += p[c];
  }
  if (!(total > 0.0)) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(k));
    return p;
  }
  for (double& v : p) v /= total;
  return p;
}

ClassId predict(const SvmMulticlassModel& model, const PixelFeatures& p) {
  const auto probs = posterior(model, p);
  const auto best = std::max_element(probs.begin(), probs.end());  // first max = smallest id
  return model.classes[static_cast<std::size_t>(best - probs.begin())];
}

}  // namespace objclass
