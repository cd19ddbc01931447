#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "objclass/ga.hpp"
#include "test_support.hpp"

using namespace objclass;

namespace {

// Two tight, far-apart 2-D clusters of 20 each.
struct Fixture {
  TrainingSet data;
  std::vector<std::vector<double>> spatial;
};

Fixture separable(Rng& rng, bool shuffle_labels = false) {
  Fixture f;
  f.data.dim = 2;
  for (int i = 0; i < 40; ++i) {
    const double c = i % 2 ? 15.0 : 5.0;  // positive so every kernel family applies
    std::vector<double> x{c + 0.3 * rng.normal(), c + 0.3 * rng.normal()};
    f.data.samples.push_back({x, static_cast<ClassId>(1 + i % 2)});
    f.spatial.push_back(x);
  }
  if (shuffle_labels) {
    std::vector<ClassId> labels;
    for (const auto& s : f.data.samples) labels.push_back(s.label);
    rng.shuffle(labels);
    for (std::size_t i = 0; i < labels.size(); ++i) f.data.samples[i].label = labels[i];
  }
  return f;
}

void expect_in_range(const Genome& g) {
  EXPECT_TRUE(g.valid());
  EXPECT_GE(g.log2_C, Genome::kLog2CMin);
  EXPECT_LE(g.log2_C, Genome::kLog2CMax);
  EXPECT_GE(g.log2_gamma, Genome::kLog2GammaMin);
  EXPECT_LE(g.log2_gamma, Genome::kLog2GammaMax);
  EXPECT_GE(g.degree, Genome::kDegreeMin);
  EXPECT_LE(g.degree, Genome::kDegreeMax);
  EXPECT_GE(g.mu, 0.0);
  EXPECT_LE(g.mu, 1.0);
  EXPECT_GE(g.beta, 0.0);
  EXPECT_LE(g.beta, 5.0);
}

}  // namespace

TEST(KFold, FiveAndFive) {
  const std::vector<ClassId> labels{1, 1, 1, 1, 1, 2, 2, 2, 2, 2};
  const auto folds = kfold_split(labels, 5, 11);
  ASSERT_EQ(folds.size(), 5u);
  for (const auto& f : folds) {
    ASSERT_EQ(f.size(), 2u);
    std::multiset<ClassId> cls{labels[f[0]], labels[f[1]]};
    EXPECT_EQ(cls, (std::multiset<ClassId>{1, 2}));
  }
}

TEST(KFold, PartitionDeterminismAndErrors) {
  Rng rng(1);
  for (int inst = 0; inst < 30; ++inst) {
    const std::size_t folds = 2 + rng.uniform_index(5);
    std::vector<ClassId> labels;
    for (ClassId c = 1; c <= 3; ++c) {
      const std::size_t n = folds + rng.uniform_index(15);
      for (std::size_t i = 0; i < n; ++i) labels.push_back(c);
    }
    rng.shuffle(labels);
    const std::uint64_t seed = rng.uniform_index(1000);
    const auto split = kfold_split(labels, folds, seed);
    std::vector<int> seen(labels.size(), 0);
    for (const auto& f : split) {
      for (auto i : f) ++seen[i];
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    // Per class, fold sizes differ by at most one.
    for (ClassId c = 1; c <= 3; ++c) {
      std::size_t lo = SIZE_MAX, hi = 0;
      for (const auto& f : split) {
        const auto n = static_cast<std::size_t>(std::count_if(f.begin(), f.end(), [&](auto i) { return labels[i] == c; }));
        lo = std::min(lo, n);
        hi = std::max(hi, n);
      }
      EXPECT_LE(hi - lo, 1u);
    }
    EXPECT_EQ(kfold_split(labels, folds, seed), split);
  }
  const std::vector<ClassId> small{1, 1, 2, 2, 2};
  EXPECT_THROW(kfold_split(small, 3, 0), std::invalid_argument);
  EXPECT_THROW(kfold_split(small, 1, 0), std::invalid_argument);
}

TEST(Operators, GenesStayInRange) {
  Rng rng(2);
  Genome a = random_genome(rng), b = random_genome(rng);
  for (int op = 0; op < 10000; ++op) {
    switch (rng.uniform_index(3)) {
      case 0: mutate(a, 1.0, rng); break;
      case 1: mutate(b, 0.5, rng); break;
      default: crossover(a, b, 0.5, rng); break;
    }
    if (op % 100 == 0) {
      expect_in_range(a);
      expect_in_range(b);
    }
  }
  expect_in_range(a);
  expect_in_range(b);
}

TEST(Operators, FullMutationChangesCategoricalGenes) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Genome g = random_genome(rng);
    const Genome before = g;
    mutate(g, 1.0, rng);
    EXPECT_NE(g.kernel_family, before.kernel_family);
    EXPECT_NE(g.degree, before.degree);
  }
}

TEST(Fitness, SeparableFixtureScoresOne) {
  Rng rng(4);
  const auto f = separable(rng);
  Genome g;
  g.log2_C = 1.0;
  g.kernel_family = KernelFamily::Rbf;
  g.log2_gamma = -3.0;
  g.mu = 0.5;
  EXPECT_DOUBLE_EQ(fitness(g, f.data, f.spatial, GaConfig{}), 1.0);
}

TEST(Fitness, ShuffledLabelsNearChance) {
  Rng rng(5);
  double total = 0;
  const int reps = 6;
  for (int r = 0; r < reps; ++r) {
    const auto f = separable(rng, true);
    Genome g;
    g.log2_C = 0.0;
    g.log2_gamma = -3.0;
    GaConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(r);
    total += fitness(g, f.data, f.spatial, cfg);
  }
  EXPECT_NEAR(total / reps, 0.5, 0.1);
}

TEST(Fitness, RejectsBadInput) {
  Rng rng(6);
  const auto f = separable(rng);
  Genome g;
  g.mu = 2.0;
  EXPECT_THROW(fitness(g, f.data, f.spatial, GaConfig{}), std::invalid_argument);
  g.mu = 0.5;
  EXPECT_THROW(fitness(g, f.data, std::span(f.spatial).first(3), GaConfig{}), std::invalid_argument);
}

TEST(Evolve, DeterministicMonotoneAndCounted) {
  Rng rng(7);
  const auto f = separable(rng);
  GaConfig cfg;
  cfg.population = 4;
  cfg.generations = 3;
  cfg.folds = 3;
  cfg.seed = 99;
  const auto a = evolve(f.data, f.spatial, cfg);
  const auto b = evolve(f.data, f.spatial, cfg);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.history, b.history);
  ASSERT_EQ(a.history.size(), cfg.generations + 1);
  for (std::size_t i = 1; i < a.history.size(); ++i) EXPECT_GE(a.history[i], a.history[i - 1]);
  EXPECT_EQ(a.best_fitness, a.history.back());
  EXPECT_EQ(a.evaluations, cfg.population + cfg.generations * (cfg.population - cfg.elitism));
  expect_in_range(a.best);
}

TEST(Evolve, TinyBudget) {
  Rng rng(8);
  const auto f = separable(rng);
  GaConfig cfg;
  cfg.population = 2;
  cfg.generations = 1;
  cfg.folds = 2;
  const auto r = evolve(f.data, f.spatial, cfg);
  EXPECT_LE(r.evaluations, 4u);
  EXPECT_EQ(r.history.size(), 2u);
}

TEST(GaConfig, Validation) {
  GaConfig c;
  c.population = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = GaConfig{};
  c.elitism = c.population;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = GaConfig{};
  c.mutation_prob = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = GaConfig{};
  c.folds = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
