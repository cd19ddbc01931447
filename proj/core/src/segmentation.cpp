#include "objclass/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace objclass {
namespace {

double distance_to_mean(const Raster& r, std::size_t pixel, const std::vector<double>& sum, double count) {
  double d2 = 0.0;
  for (std::size_t b = 0; b < r.bands(); ++b) {
    const double diff = static_cast<double>(r.at(pixel, b)) - sum[b] / count;
    d2 += diff * diff;
  }
  return std::sqrt(d2);
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return d2;
}

struct Region {
  std::vector<double> sum;
  std::size_t count = 0;
  std::set<ObjectId> neighbours;
  bool alive = true;

  std::vector<double> mean() const {
    std::vector<double> m(sum.size());
    for (std::size_t b = 0; b < sum.size(); ++b) m[b] = sum[b] / static_cast<double>(count);
    return m;
  }
};

void check_grid(const LabelMap& labels, const Segmentation& seg) {
  if (!labels.same_grid(seg.width, seg.height)) {
    throw std::invalid_argument("label map and segmentation have different shapes");
  }
}

}  // namespace

Segmentation segment(const Raster& raster, double threshold, std::size_t min_size) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("segment threshold must be >= 0");
  if (min_size < 1) throw std::invalid_argument("min_size must be >= 1");
  const std::size_t w = raster.width();
  const std::size_t h = raster.height();
  const std::size_t n = w * h;
  const std::size_t bands = raster.bands();

  // Growth.
  std::vector<ObjectId> region(n, 0);
  std::vector<Region> regions(1);  // index 0 unused
  std::deque<std::size_t> queue;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (region[seed] != 0) continue;
    const auto id = static_cast<ObjectId>(regions.size());
    Region reg;
    reg.sum.assign(bands, 0.0);
    auto add = [&](std::size_t p) {
      region[p] = id;
      for (std::size_t b = 0; b < bands; ++b) reg.sum[b] += raster.at(p, b);
      ++reg.count;
      queue.push_back(p);
    };
    add(seed);
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      const std::size_t x = p % w;
      const std::size_t y = p / w;
      const std::size_t cand[4] = {y > 0 ? p - w : n, x > 0 ? p - 1 : n, x + 1 < w ? p + 1 : n,
                                   y + 1 < h ? p + w : n};
      for (std::size_t q : cand) {
        if (q == n || region[q] != 0) continue;
        if (distance_to_mean(raster, q, reg.sum, static_cast<double>(reg.count)) <= threshold) add(q);
      }
    }
    regions.push_back(std::move(reg));
  }

  // Adjacency between grown regions.
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t x = p % w;
    if (x + 1 < w && region[p] != region[p + 1]) {
      regions[region[p]].neighbours.insert(region[p + 1]);
      regions[region[p + 1]].neighbours.insert(region[p]);
    }
    if (p + w < n && region[p] != region[p + w]) {
      regions[region[p]].neighbours.insert(region[p + w]);
      regions[region[p + w]].neighbours.insert(region[p]);
    }
  }

  // Merge undersized regions into their spectrally nearest neighbour.
  std::vector<ObjectId> parent(regions.size());
  std::iota(parent.begin(), parent.end(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (ObjectId id = 1; id < regions.size(); ++id) {
      Region& src = regions[id];
      if (!src.alive || src.count >= min_size || src.neighbours.empty()) continue;
      const auto src_mean = src.mean();
      ObjectId target = 0;
      double best = std::numeric_limits<double>::infinity();
      for (ObjectId nb : src.neighbours) {  // ascending, so ties keep the smaller id
        const double d = squared_distance(src_mean, regions[nb].mean());
        if (d < best) {
          best = d;
          target = nb;
        }
      }
      Region& dst = regions[target];
      for (std::size_t b = 0; b < bands; ++b) dst.sum[b] += src.sum[b];
      dst.count += src.count;
      for (ObjectId nb : src.neighbours) {
        regions[nb].neighbours.erase(id);
        if (nb != target) {
          regions[nb].neighbours.insert(target);
          dst.neighbours.insert(nb);
        }
      }
      src.neighbours.clear();
      src.alive = false;
      src.count = 0;
      parent[id] = target;
      changed = true;
    }
  }
  auto find = [&](ObjectId id) {
    while (parent[id] != id) id = parent[id];
    return id;
  };

  // Renumber in raster-scan order and recompute statistics from pixels.
  Segmentation seg;
  seg.width = w;
  seg.height = h;
  seg.object_ids.assign(n, 0);
  std::vector<ObjectId> renumber(regions.size(), 0);
  for (std::size_t p = 0; p < n; ++p) {
    const ObjectId root = find(region[p]);
    if (renumber[root] == 0) {
      renumber[root] = static_cast<ObjectId>(seg.objects.size() + 1);
      seg.objects.push_back(ImageObject{renumber[root], 0, std::vector<double>(bands, 0.0),
                                        {p % w, p / w, p % w, p / w}});
    }
    const ObjectId id = renumber[root];
    seg.object_ids[p] = id;
    ImageObject& obj = seg.objects[id - 1];
    ++obj.pixel_count;
    for (std::size_t b = 0; b < bands; ++b) obj.mean[b] += raster.at(p, b);
    const std::size_t x = p % w;
    const std::size_t y = p / w;
    obj.bbox[0] = std::min(obj.bbox[0], x);
    obj.bbox[1] = std::min(obj.bbox[1], y);
    obj.bbox[2] = std::max(obj.bbox[2], x);
    obj.bbox[3] = std::max(obj.bbox[3], y);
  }
  for (auto& obj : seg.objects) {
    for (double& v : obj.mean) v /= static_cast<double>(obj.pixel_count);
  }
  return seg;
}

double default_segment_threshold(const Raster& raster) {
  const double n = static_cast<double>(raster.pixel_count());
  double norm2 = 0.0;
  for (std::size_t b = 0; b < raster.bands(); ++b) {
    double mean = 0.0;
    for (float v : raster.band(b)) mean += v;
    mean /= n;
    double var = 0.0;
    for (float v : raster.band(b)) var += (v - mean) * (v - mean);
    norm2 += var / n;
  }
  return 0.5 * std::sqrt(norm2);
}

Raster spatial_feature_map(const Raster& raster, const Segmentation& seg) {
  if (!raster.same_grid(seg.width, seg.height) || seg.object_ids.size() != raster.pixel_count()) {
    throw std::invalid_argument("raster and segmentation have different shapes");
  }
  const std::size_t n = raster.pixel_count();
  std::vector<float> data(n * raster.bands());
  for (std::size_t p = 0; p < n; ++p) {
    const auto& mean = seg.object_at(p).mean;
    if (mean.size() != raster.bands()) {
      throw std::invalid_argument("segmentation band count differs from raster");
    }
    for (std::size_t b = 0; b < raster.bands(); ++b) data[b * n + p] = static_cast<float>(mean[b]);
  }
  return Raster(raster.width(), raster.height(), raster.bands(), raster.resolution_m(), std::move(data));
}

LabelMap object_majority_relabel(const LabelMap& pixel_labels, const Segmentation& seg) {
  check_grid(pixel_labels, seg);
  std::vector<std::map<ClassId, std::size_t>> votes(seg.objects.size());
  for (std::size_t p = 0; p < pixel_labels.size(); ++p) {
    if (pixel_labels[p] != kUnclassified) ++votes[seg.object_ids[p] - 1][pixel_labels[p]];
  }
  std::vector<ClassId> winner(seg.objects.size(), kUnclassified);
  for (std::size_t k = 0; k < votes.size(); ++k) {
    std::size_t best = 0;
    for (const auto& [id, count] : votes[k]) {  // ascending ids: strict > keeps the smallest on ties
      if (count > best) {
        best = count;
        winner[k] = id;
      }
    }
  }
  LabelMap out = pixel_labels;
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = winner[seg.object_ids[p] - 1];
  return out;
}

LabelMap object_id_map(const Segmentation& seg, double resolution_m) {
  if (seg.objects.size() > 65535) {
    throw std::runtime_error("segmentation has " + std::to_string(seg.objects.size()) +
                             " objects; the uint16 label format holds at most 65535");
  }
  std::vector<ClassId> ids(seg.object_ids.begin(), seg.object_ids.end());
  return LabelMap(seg.width, seg.height, std::move(ids), resolution_m);
}

nlohmann::json objects_table(const Segmentation& seg) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& obj : seg.objects) {
    objects.push_back({{"id", obj.id},
                       {"pixel_count", obj.pixel_count},
                       {"mean", obj.mean},
                       {"bbox", obj.bbox}});
  }
  return {{"width", seg.width}, {"height", seg.height}, {"objects", std::move(objects)}};
}

}  // namespace objclass
