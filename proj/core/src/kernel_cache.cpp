#include "objclass/kernel_cache.hpp"

#include <stdexcept>

namespace objclass {

KernelMatrix::KernelMatrix(const KernelSpec& spec, std::span<const PixelFeatures> points,
                           std::size_t full_limit, std::size_t cache_rows)
    : spec_(spec), points_(points), full_(points.size() <= full_limit),
      capacity_(cache_rows), diag_(points.size()) {
  if (!full_ && capacity_ < 2) throw std::invalid_argument("kernel cache needs at least 2 rows");
  const std::size_t n = points_.size();
  for (std::size_t i = 0; i < n; ++i) diag_[i] = eval_composite(spec_, points_[i], points_[i]);
  if (full_) {
    rows_.assign(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      rows_[i][i] = diag_[i];
      for (std::size_t j = i + 1; j < n; ++j) {
        const double k = eval_composite(spec_, points_[i], points_[j]);
        rows_[i][j] = k;
        rows_[j][i] = k;
      }
    }
    rows_computed_ = n;
  } else {
    rows_.resize(n);
    where_.resize(n);
    cached_.assign(n, false);
  }
}

double KernelMatrix::entry(std::size_t i, std::size_t j) const {
  if (i == j) return diag_[i];
  return i < j ? eval_composite(spec_, points_[i], points_[j])
               : eval_composite(spec_, points_[j], points_[i]);
}

void KernelMatrix::fill_row(std::size_t i, std::vector<double>& out) const {
  out.resize(points_.size());
  for (std::size_t j = 0; j < points_.size(); ++j) out[j] = entry(i, j);
}

std::span<const double> KernelMatrix::row(std::size_t i) {
  if (full_) return rows_[i];
  if (cached_[i]) {
    lru_.splice(lru_.begin(), lru_, where_[i]);
    return rows_[i];
  }
  if (lru_.size() == capacity_) {
    const std::size_t victim = lru_.back();
    lru_.pop_back();
    cached_[victim] = false;
    rows_[i].swap(rows_[victim]);
    std::vector<double>().swap(rows_[victim]);
  }
  fill_row(i, rows_[i]);
  ++rows_computed_;
  lru_.push_front(i);
  where_[i] = lru_.begin();
  cached_[i] = true;
  return rows_[i];
}

}  // namespace objclass
