#include "objclass/svrf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "objclass/rng.hpp"

namespace objclass {
namespace {

void check_congruent(const UnaryField& unary, const Raster& raster) {
  if (!raster.same_grid(unary.width, unary.height)) {
    throw std::invalid_argument("unary field and raster have different shapes");
  }
  if (unary.log_probs.size() != unary.site_count() * unary.class_count()) {
    throw std::invalid_argument("unary field has the wrong number of entries");
  }
}

std::size_t argmax_index(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Contrast weights exp(-d^2 / 2 sigma^2) on the edges leaving each site
// towards right, down, down-right and down-left.
struct EdgeWeights {
  std::vector<double> right, down, down_right, down_left;
};

double contrast(const Raster& r, std::size_t a, std::size_t b, double inv_two_sigma2) {
  double d2 = 0.0;
  for (std::size_t band = 0; band < r.bands(); ++band) {
    const double diff = static_cast<double>(r.at(a, band)) - static_cast<double>(r.at(b, band));
    d2 += diff * diff;
  }
  return std::exp(-d2 * inv_two_sigma2);
}

EdgeWeights edge_weights(const SvrfParams& params, const Raster& r) {
  const std::size_t w = r.width();
  const std::size_t h = r.height();
  const double k = 1.0 / (2.0 * params.sigma_s * params.sigma_s);
  EdgeWeights e;
  e.right.assign(w * h, 0.0);
  e.down.assign(w * h, 0.0);
  const bool eight = params.neighborhood == Neighborhood::Eight;
  if (eight) {
    e.down_right.assign(w * h, 0.0);
    e.down_left.assign(w * h, 0.0);
  }
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (x + 1 < w) e.right[i] = contrast(r, i, i + 1, k);
      if (y + 1 < h) e.down[i] = contrast(r, i, i + w, k);
      if (eight && y + 1 < h) {
        if (x + 1 < w) e.down_right[i] = contrast(r, i, i + w + 1, k);
        if (x > 0) e.down_left[i] = contrast(r, i, i + w - 1, k);
      }
    }
  }
  return e;
}

// Visits (neighbour, weight) pairs of site i.
template <typename Fn>
void for_each_neighbour(const EdgeWeights& e, bool eight, std::size_t w, std::size_t h, std::size_t i, Fn&& fn) {
  const std::size_t x = i % w;
  const std::size_t y = i / w;
  if (x + 1 < w) fn(i + 1, e.right[i]);
  if (x > 0) fn(i - 1, e.right[i - 1]);
  if (y + 1 < h) fn(i + w, e.down[i]);
  if (y > 0) fn(i - w, e.down[i - w]);
  if (eight) {
    if (y + 1 < h && x + 1 < w) fn(i + w + 1, e.down_right[i]);
    if (y > 0 && x > 0) fn(i - w - 1, e.down_right[i - w - 1]);
    if (y + 1 < h && x > 0) fn(i + w - 1, e.down_left[i]);
    if (y > 0 && x + 1 < w) fn(i - w + 1, e.down_left[i - w + 1]);
  }
}

double objective_indices(const SvrfParams& params, const UnaryField& unary, const EdgeWeights& e,
                         const std::vector<std::size_t>& y) {
  const std::size_t w = unary.width;
  const std::size_t h = unary.height;
  const bool eight = params.neighborhood == Neighborhood::Eight;
  double unary_sum = 0.0;
  double pair_sum = 0.0;
  for (std::size_t i = 0; i < w * h; ++i) {
    unary_sum += unary.site(i)[y[i]];
    const std::size_t x = i % w;
    const std::size_t row = i / w;
    if (x + 1 < w && y[i] == y[i + 1]) pair_sum += e.right[i];
    if (row + 1 < h && y[i] == y[i + w]) pair_sum += e.down[i];
    if (eight && row + 1 < h) {
      if (x + 1 < w && y[i] == y[i + w + 1]) pair_sum += e.down_right[i];
      if (x > 0 && y[i] == y[i + w - 1]) pair_sum += e.down_left[i];
    }
  }
  return unary_sum + params.beta * pair_sum;
}

std::vector<std::size_t> to_indices(const UnaryField& unary, const LabelMap& labels) {
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::lower_bound(unary.classes.begin(), unary.classes.end(), labels[i]);
    if (it == unary.classes.end() || *it != labels[i]) {
      throw std::invalid_argument("label " + std::to_string(labels[i]) + " is not a class of the unary field");
    }
    out[i] = static_cast<std::size_t>(it - unary.classes.begin());
  }
  return out;
}

}  // namespace

void SvrfParams::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("svrf beta must be >= 0");
  if (!(sigma_s > 0.0) || !std::isfinite(sigma_s)) throw std::invalid_argument("svrf sigma_s must be > 0");
  if (neighborhood != Neighborhood::Four && neighborhood != Neighborhood::Eight) {
    throw std::invalid_argument("svrf neighborhood must be 4 or 8");
  }
  if (max_sweeps < 1) throw std::invalid_argument("svrf max_sweeps must be >= 1");
}

double UnaryField::probability(std::size_t i, ClassId label) const {
  const auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) return 0.0;
  return std::exp(site(i)[static_cast<std::size_t>(it - classes.begin())]);
}

UnaryField unary_field(const SvmMulticlassModel& model, const Raster& raster, const Raster& spatial) {
  if (!spatial.same_grid(raster.width(), raster.height())) {
    throw std::invalid_argument("raster and spatial feature map have different shapes");
  }
  UnaryField field;
  field.width = raster.width();
  field.height = raster.height();
  field.classes = model.classes;
  const std::size_t k = model.classes.size();
  const std::size_t n = raster.pixel_count();
  field.log_probs.resize(n * k);
  std::vector<double> spectral(raster.bands());
  std::vector<double> spat(spatial.bands());
  for (std::size_t i = 0; i < n; ++i) {
    raster.spectrum(i, spectral);
    spatial.spectrum(i, spat);
    const auto p = posterior(model, spectral, spat);
    for (std::size_t c = 0; c < k; ++c) {
      field.log_probs[i * k + c] = p[c] > 1e-10 ? std::log(p[c]) : kLogProbFloor;
    }
  }
  return field;
}

LabelMap unary_argmax(const UnaryField& unary, double resolution_m) {
  LabelMap out(unary.width, unary.height, kUnclassified, resolution_m);
  for (std::size_t i = 0; i < unary.site_count(); ++i) out[i] = unary.classes[argmax_index(unary.site(i))];
  return out;
}

double pairwise(const SvrfParams& params, std::span<const double> xi, std::span<const double> xj,
                ClassId yi, ClassId yj) {
  if (xi.size() != xj.size()) throw std::invalid_argument("pairwise: vectors differ in length");
  if (yi != yj) return 0.0;
  double d2 = 0.0;
  for (std::size_t b = 0; b < xi.size(); ++b) d2 += (xi[b] - xj[b]) * (xi[b] - xj[b]);
  return params.beta * std::exp(-d2 / (2.0 * params.sigma_s * params.sigma_s));
}

double svrf_objective(const SvrfParams& params, const UnaryField& unary, const Raster& raster,
                      const LabelMap& labels) {
  params.validate();
  check_congruent(unary, raster);
  if (!labels.same_grid(unary.width, unary.height)) {
    throw std::invalid_argument("label map and unary field have different shapes");
  }
  return objective_indices(params, unary, edge_weights(params, raster), to_indices(unary, labels));
}

IcmResult icm_infer(const SvrfParams& params, const UnaryField& unary, const Raster& raster,
                    const IcmOptions& options) {
  params.validate();
  check_congruent(unary, raster);
  const std::size_t w = unary.width;
  const std::size_t h = unary.height;
  const std::size_t n = w * h;
  const std::size_t k = unary.class_count();
  const bool eight = params.neighborhood == Neighborhood::Eight;
  const EdgeWeights edges = edge_weights(params, raster);

  std::vector<std::size_t> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = argmax_index(unary.site(i));

  IcmResult result{LabelMap(w, h, kUnclassified, raster.resolution_m()), 0.0, {}, 0, false};
  result.initial_objective = objective_indices(params, unary, edges, y);

  std::vector<double> score(k);
  for (std::size_t sweep = 0; sweep < params.max_sweeps; ++sweep) {
    std::size_t changes = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto lp = unary.site(i);
      std::copy(lp.begin(), lp.end(), score.begin());
      for_each_neighbour(edges, eight, w, h, i,
                         [&](std::size_t j, double weight) { score[y[j]] += params.beta * weight; });
      std::size_t best = y[i];
      for (std::size_t c = 0; c < k; ++c) {
        if (score[c] > score[best]) best = c;
      }
      if (best != y[i]) {
        if (options.check_each_update) {
          const double before = objective_indices(params, unary, edges, y);
          const std::size_t old = y[i];
          y[i] = best;
          const double after = objective_indices(params, unary, edges, y);
          if (after < before - 1e-9 * std::max(1.0, std::abs(before))) {
            y[i] = old;
            throw std::logic_error("icm update decreased the objective at site " + std::to_string(i));
          }
        } else {
          y[i] = best;
        }
        ++changes;
      }
    }
    ++result.sweeps;
    result.objective_trace.push_back(objective_indices(params, unary, edges, y));
    if (changes == 0) {
      result.converged = true;
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) result.labels[i] = unary.classes[y[i]];
  return result;
}

double estimate_sigma_s(const Raster& raster, std::uint64_t seed, std::size_t pairs) {
  const std::size_t w = raster.width();
  const std::size_t h = raster.height();
  if (w * h < 2 || pairs == 0) return 1.0;
  Rng rng(seed);
  std::vector<double> d;
  d.reserve(pairs);
  while (d.size() < pairs) {
    const std::size_t i = rng.uniform_index(w * h);
    const std::size_t dir = rng.uniform_index(4);
    const std::size_t x = i % w;
    const std::size_t y = i / w;
    std::size_t j;
    if (dir == 0 && x + 1 < w) j = i + 1;
    else if (dir == 1 && x > 0) j = i - 1;
    else if (dir == 2 && y + 1 < h) j = i + w;
    else if (dir == 3 && y > 0) j = i - w;
    else continue;
    double d2 = 0.0;
    for (std::size_t b = 0; b < raster.bands(); ++b) {
      const double diff = static_cast<double>(raster.at(i, b)) - static_cast<double>(raster.at(j, b));
      d2 += diff * diff;
    }
    d.push_back(std::sqrt(d2));
  }
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size() / 2;
  const double median = d.size() % 2 ? d[m] : 0.5 * (d[m - 1] + d[m]);
  return median > 0.0 ? median : 1.0;
}

}  // namespace objclass
