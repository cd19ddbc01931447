#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "objclass/kernels.hpp"
#include "objclass/raster.hpp"
#include "objclass/rng.hpp"
#include "objclass/svm.hpp"

namespace objclass {

/// Searched hyperparameters. Every field stays inside its range after any
/// genetic operation.
struct Genome {
  double log2_C = 0.0;                          // [-5, 15]
  KernelFamily kernel_family = KernelFamily::Rbf;
  double log2_gamma = -1.0;                     // [-15, 3]
  int degree = 3;                               // {2, 3, 4}
  double mu = 0.5;                              // [0, 1]
  double beta = 1.0;                            // [0, 5]

  static constexpr double kLog2CMin = -5.0, kLog2CMax = 15.0;
  static constexpr double kLog2GammaMin = -15.0, kLog2GammaMax = 3.0;
  static constexpr int kDegreeMin = 2, kDegreeMax = 4;
  static constexpr double kMuMin = 0.0, kMuMax = 1.0;
  static constexpr double kBetaMin = 0.0, kBetaMax = 5.0;

  bool valid() const;
  /// Same family, gamma and degree for both the spectral and spatial kernel; coef0 = 1.
  KernelSpec kernel_spec() const;
  double C() const;

  friend bool operator==(const Genome&, const Genome&) = default;
};

struct GaConfig {
  std::size_t population = 20;
  std::size_t generations = 30;
  std::size_t tournament_size = 3;
  double crossover_prob = 0.5;   // per gene, uniform crossover
  double mutation_prob = 0.1;    // per gene, Gaussian step of 10% of the range
  std::size_t elitism = 1;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  double svm_tol = 1e-3;

  void validate() const;
};

/// Stratified folds: the members of each class (in index order) are shuffled
/// with a generator seeded by `seed` and dealt round-robin, continuing the
/// deal position from one class to the next. Throws if a class has fewer than
/// `folds` members.
std::vector<std::vector<std::size_t>> kfold_split(std::span<const ClassId> labels, std::size_t folds,
                                                  std::uint64_t seed);

Genome random_genome(Rng& rng);
void mutate(Genome& g, double prob, Rng& rng);
/// Uniform crossover: each gene is swapped between a and b with probability `prob`.
void crossover(Genome& a, Genome& b, double prob, Rng& rng);

/// Mean held-out overall accuracy of the pixelwise SVM over stratified folds.
/// A fold whose training throws scores 0 (logged as a warning).
double fitness(const Genome& genome, const TrainingSet& data, std::span<const std::vector<double>> spatial,
               const GaConfig& config);

struct GaResult {
  Genome best;
  double best_fitness = 0.0;
  std::vector<double> history;   // best-so-far after the initial population and after each generation
  std::size_t evaluations = 0;   // fitness calls made
};

/// Tournament selection, uniform crossover, Gaussian mutation and elitism.
/// All genetic-operator draws come from one generator seeded with config.seed
/// on the calling thread.
GaResult evolve(const TrainingSet& data, std::span<const std::vector<double>> spatial, const GaConfig& config);

nlohmann::json genome_to_json(const Genome& g);
nlohmann::json ga_history_json(const GaResult& result);

}  // namespace objclass
