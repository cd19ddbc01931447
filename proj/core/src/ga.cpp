#include "objclass/ga.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace objclass {
namespace {

constexpr KernelFamily kFamilies[] = {KernelFamily::Linear, KernelFamily::Polynomial, KernelFamily::Rbf,
                                      KernelFamily::Sam, KernelFamily::Sid};
constexpr std::size_t kFamilyCount = std::size(kFamilies);

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

double gaussian_step(Rng& rng, double value, double lo, double hi) {
  return std::clamp(value + 0.1 * (hi - lo) * rng.normal(), lo, hi);
}

std::size_t tournament(const std::vector<double>& fit, std::size_t size, Rng& rng) {
  std::size_t best = rng.uniform_index(fit.size());
  for (std::size_t k = 1; k < size; ++k) {
    const std::size_t c = rng.uniform_index(fit.size());
    if (fit[c] > fit[best] || (fit[c] == fit[best] && c < best)) best = c;
  }
  return best;
}

}  // namespace

bool Genome::valid() const {
  return log2_C >= kLog2CMin && log2_C <= kLog2CMax && log2_gamma >= kLog2GammaMin &&
         log2_gamma <= kLog2GammaMax && degree >= kDegreeMin && degree <= kDegreeMax && mu >= kMuMin &&
         mu <= kMuMax && beta >= kBetaMin && beta <= kBetaMax &&
         std::find(std::begin(kFamilies), std::end(kFamilies), kernel_family) != std::end(kFamilies);
}

KernelSpec Genome::kernel_spec() const {
  BaseKernel k{kernel_family, std::exp2(log2_gamma), degree, 1.0};
  return KernelSpec{k, k, mu};
}

double Genome::C() const { return std::exp2(log2_C); }

void GaConfig::validate() const {
  if (population < 2) throw std::invalid_argument("GA population must be >= 2");
  if (folds < 2) throw std::invalid_argument("GA folds must be >= 2");
  if (elitism >= population) throw std::invalid_argument("GA elitism must be < population");
  if (tournament_size < 1) throw std::invalid_argument("GA tournament_size must be >= 1");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0) || !(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
    throw std::invalid_argument("GA probabilities must be in [0, 1]");
  }
}

std::vector<std::vector<std::size_t>> kfold_split(std::span<const ClassId> labels, std::size_t folds,
                                                  std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("kfold_split: folds must be >= 2");
  if (folds > labels.size()) throw std::invalid_argument("kfold_split: more folds than samples");
  std::vector<ClassId> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  Rng rng(seed);
  std::vector<std::vector<std::size_t>> out(folds);
  std::size_t deal = 0;
  for (ClassId c : classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    if (members.size() < folds) {
      throw std::invalid_argument("kfold_split: class " + std::to_string(c) + " has " +
                                  std::to_string(members.size()) + " members, fewer than " +
                                  std::to_string(folds) + " folds");
    }
    rng.shuffle(members);
    for (std::size_t idx : members) out[deal++ % folds].push_back(idx);
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

Genome random_genome(Rng& rng) {
  Genome g;
  g.log2_C = uniform_in(rng, Genome::kLog2CMin, Genome::kLog2CMax);
  g.kernel_family = kFamilies[rng.uniform_index(kFamilyCount)];
  g.log2_gamma = uniform_in(rng, Genome::kLog2GammaMin, Genome::kLog2GammaMax);
  g.degree = Genome::kDegreeMin + static_cast<int>(rng.uniform_index(3));
  g.mu = uniform_in(rng, Genome::kMuMin, Genome::kMuMax);
  g.beta = uniform_in(rng, Genome::kBetaMin, Genome::kBetaMax);
  return g;
}

void mutate(Genome& g, double prob, Rng& rng) {
  if (rng.uniform() < prob) g.log2_C = gaussian_step(rng, g.log2_C, Genome::kLog2CMin, Genome::kLog2CMax);
  if (rng.uniform() < prob) {
    // Categorical gene: jump to one of the other families.
    const auto cur = static_cast<std::size_t>(
        std::find(std::begin(kFamilies), std::end(kFamilies), g.kernel_family) - std::begin(kFamilies));
    const std::size_t pick = rng.uniform_index(kFamilyCount - 1);
    g.kernel_family = kFamilies[pick >= cur ? pick + 1 : pick];
  }
  if (rng.uniform() < prob) {
    g.log2_gamma = gaussian_step(rng, g.log2_gamma, Genome::kLog2GammaMin, Genome::kLog2GammaMax);
  }
  if (rng.uniform() < prob) {
    const int pick = Genome::kDegreeMin + static_cast<int>(rng.uniform_index(2));
    g.degree = pick >= g.degree ? pick + 1 : pick;
  }
  if (rng.uniform() < prob) g.mu = gaussian_step(rng, g.mu, Genome::kMuMin, Genome::kMuMax);
  if (rng.uniform() < prob) g.beta = gaussian_step(rng, g.beta, Genome::kBetaMin, Genome::kBetaMax);
}

void crossover(Genome& a, Genome& b, double prob, Rng& rng) {
  if (rng.uniform() < prob) std::swap(a.log2_C, b.log2_C);
  if (rng.uniform() < prob) std::swap(a.kernel_family, b.kernel_family);
  if (rng.uniform() < prob) std::swap(a.log2_gamma, b.log2_gamma);
  if (rng.uniform() < prob) std::swap(a.degree, b.degree);
  if (rng.uniform() < prob) std::swap(a.mu, b.mu);
  if (rng.uniform() < prob) std::swap(a.beta, b.beta);
}

double fitness(const Genome& genome, const TrainingSet& data, std::span<const std::vector<double>> spatial,
               const GaConfig& config) {
  if (!genome.valid()) throw std::invalid_argument("fitness: genome outside its ranges");
  data.validate();
  if (spatial.size() != data.size()) throw std::invalid_argument("fitness: spatial features not aligned");
  std::vector<ClassId> labels;
  std::vector<PixelFeatures> points;
  for (std::size_t i = 0; i < data.size(); ++i) {
    labels.push_back(data.samples[i].label);
    points.push_back({data.samples[i].features, spatial[i]});
  }
  const auto folds = kfold_split(labels, config.folds, config.seed);
  SmoParams params;
  params.C = genome.C();
  params.tol = config.svm_tol;
  const KernelSpec kernel = genome.kernel_spec();

  double total = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> held(data.size(), false);
    for (std::size_t i : folds[f]) held[i] = true;
    std::vector<PixelFeatures> train_pts;
    std::vector<ClassId> train_labels;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (held[i]) continue;
      train_pts.push_back(points[i]);
      train_labels.push_back(labels[i]);
    }
    try {
      const auto model = train_multiclass(train_pts, train_labels, kernel, params);
      std::size_t correct = 0;
      for (std::size_t i : folds[f]) correct += predict(model, points[i]) == labels[i] ? 1 : 0;
      total += static_cast<double>(correct) / static_cast<double>(folds[f].size());
    } catch (const std::exception& e) {
      spdlog::warn("fitness: fold {} scored 0 ({} kernel): {}", f, to_string(genome.kernel_family), e.what());
    }
  }
  return total / static_cast<double>(folds.size());
}

GaResult evolve(const TrainingSet& data, std::span<const std::vector<double>> spatial, const GaConfig& config) {
  config.validate();
  Rng rng(config.seed);
  GaResult result;

  std::vector<Genome> pop(config.population);
  for (auto& g : pop) g = random_genome(rng);
  std::vector<double> fit(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    fit[i] = fitness(pop[i], data, spatial, config);
    ++result.evaluations;
  }
  auto record_best = [&] {
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (result.history.empty() && i == 0) {
        result.best = pop[0];
        result.best_fitness = fit[0];
      } else if (fit[i] > result.best_fitness) {
        result.best = pop[i];
        result.best_fitness = fit[i];
      }
    }
    result.history.push_back(result.best_fitness);
  };
  record_best();

  for (std::size_t gen = 0; gen < config.generations; ++gen) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });

    std::vector<Genome> next;
    std::vector<double> next_fit;
    for (std::size_t e = 0; e < config.elitism; ++e) {
      next.push_back(pop[order[e]]);
      next_fit.push_back(fit[order[e]]);
    }
    const std::size_t first_new = next.size();
    while (next.size() < config.population) {
      Genome a = pop[tournament(fit, config.tournament_size, rng)];
      Genome b = pop[tournament(fit, config.tournament_size, rng)];
      crossover(a, b, config.crossover_prob, rng);
      mutate(a, config.mutation_prob, rng);
      mutate(b, config.mutation_prob, rng);
      next.push_back(a);
      if (next.size() < config.population) next.push_back(b);
    }
    next_fit.resize(next.size());
    for (std::size_t i = first_new; i < next.size(); ++i) {
      next_fit[i] = fitness(next[i], data, spatial, config);
      ++result.evaluations;
    }
    pop = std::move(next);
    fit = std::move(next_fit);
    record_best();
  }
  return result;
}

nlohmann::json genome_to_json(const Genome& g) {
  return {{"log2_C", g.log2_C},       {"C", g.C()},           {"kernel_family", to_string(g.kernel_family)},
          {"log2_gamma", g.log2_gamma}, {"gamma", std::exp2(g.log2_gamma)}, {"degree", g.degree},
          {"mu", g.mu},               {"beta", g.beta}};
}

nlohmann::json ga_history_json(const GaResult& result) {
  return {{"best", genome_to_json(result.best)},
          {"best_fitness", result.best_fitness},
          {"history", result.history},
          {"evaluations", result.evaluations}};
}

}  // namespace objclass
