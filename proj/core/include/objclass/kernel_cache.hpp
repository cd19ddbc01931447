#pragma once

#include <cstddef>
#include <list>
#include <span>
#include <vector>

#include "objclass/kernels.hpp"

namespace objclass {

/// Row access to the composite-kernel Gram matrix of a fixed point set.
/// Small problems (n <= full_limit) precompute the whole matrix; larger ones
/// keep an LRU cache of `cache_rows` rows. Both paths produce identical
/// values because every entry goes through eval_composite with the same
/// argument order (lower index first).
class KernelMatrix {
 public:
  KernelMatrix(const KernelSpec& spec, std::span<const PixelFeatures> points,
               std::size_t full_limit = 4000, std::size_t cache_rows = 512);

  std::size_t size() const { return points_.size(); }
  double diagonal(std::size_t i) const { return diag_[i]; }

  /// Row i. The span stays valid until at least two further distinct rows
  /// have been requested.
  std::span<const double> row(std::size_t i);

  bool is_full() const { return full_; }
  std::size_t rows_computed() const { return rows_computed_; }

 private:
  double entry(std::size_t i, std::size_t j) const;
  void fill_row(std::size_t i, std::vector<double>& out) const;

  KernelSpec spec_;
  std::span<const PixelFeatures> points_;
  bool full_;
  std::size_t capacity_;
  std::vector<double> diag_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::list<std::size_t>::iterator> where_;
  std::vector<bool> cached_;
  std::list<std::size_t> lru_;  // front = most recent
  std::size_t rows_computed_ = 0;
};

}  // namespace objclass
