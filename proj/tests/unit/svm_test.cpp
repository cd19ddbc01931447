#include <algorithm>
#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "objclass/svm.hpp"
#include "test_support.hpp"

using namespace objclass;
using objclass::testing::TempDir;

namespace {

const KernelSpec kLinear{BaseKernel{KernelFamily::Linear, 1, 3, 1}, BaseKernel{KernelFamily::Linear, 1, 3, 1}, 1.0};

KernelSpec rbf(double gamma, double mu = 1.0) {
  return {BaseKernel{KernelFamily::Rbf, gamma, 3, 1}, BaseKernel{KernelFamily::Rbf, gamma, 3, 1}, mu};
}

PixelFeatures pt(std::vector<double> s) { return {s, s}; }

std::vector<std::vector<double>> kernel_table(const KernelSpec& k, const std::vector<PixelFeatures>& pts) {
  std::vector<std::vector<double>> K(pts.size(), std::vector<double>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) K[i][j] = eval_composite(k, pts[i], pts[j]);
  }
  return K;
}

// Largest gain any single feasible two-variable step could still make.
double best_pair_gain(const std::vector<std::vector<double>>& K, const std::vector<int>& y,
                      const std::vector<double>& a, double C) {
  const std::size_t n = y.size();
  std::vector<double> grad(n, 1.0);  // gradient of the dual: 1 - Q a
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) grad[i] -= y[i] * y[j] * K[i][j] * a[j];
  }
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      // Direction a_i += y_i t, a_j -= y_j t keeps y'a fixed.
      const double slope = grad[i] * y[i] - grad[j] * y[j];
      const double curv = K[i][i] + K[j][j] - 2.0 * K[i][j];
      double tmax = 1e300, tmin = -1e300;
      auto bound = [&](double base, double dir) {
        if (dir > 0) tmax = std::min(tmax, (C - base) / dir), tmin = std::max(tmin, -base / dir);
        else tmax = std::min(tmax, -base / dir), tmin = std::max(tmin, (C - base) / dir);
      };
      bound(a[i], y[i]);
      bound(a[j], -y[j]);
      double t = curv > 1e-12 ? slope / curv : (slope > 0 ? tmax : tmin);
      t = std::clamp(t, tmin, tmax);
      best = std::max(best, t * slope - 0.5 * t * t * curv);
    }
  }
  return best;
}

void expect_kkt(const SmoResult& r, std::span<const PixelFeatures> pts, std::span<const int> y, double C,
                double tol) {
  double eq = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double a = r.alpha[i];
    eq += a * y[i];
    ASSERT_GE(a, 0.0);
    ASSERT_LE(a, C);
    const double m = y[i] * decision(r.model, pts[i]);
    if (a == 0.0) EXPECT_GE(m, 1.0 - tol) << "point " << i;
    else if (a == C) EXPECT_LE(m, 1.0 + tol) << "point " << i;
    else EXPECT_NEAR(m, 1.0, tol) << "point " << i;
  }
  EXPECT_LE(std::abs(eq), 1e-6);
}

}  // namespace

TEST(Smo, AnalyticTwoPointProblem) {
  const std::vector<PixelFeatures> pts{pt({-1.0}), pt({1.0})};
  const std::vector<int> y{-1, 1};
  const auto r = smo_train(pts, y, kLinear, SmoParams{10.0});
  EXPECT_NEAR(r.alpha[0], 0.5, 1e-6);
  EXPECT_NEAR(r.alpha[1], 0.5, 1e-6);
  EXPECT_NEAR(r.model.bias, 0.0, 1e-6);
  EXPECT_TRUE(r.converged);
  for (double x : {-3.0, -1.0, 0.0, 0.25, 1.0, 2.0}) {
    EXPECT_NEAR(decision(r.model, std::vector<double>{x}, std::vector<double>{x}), x, 1e-6);
  }
  // Dual objective 2a - 2a^2 at a = 0.5.
  EXPECT_NEAR(r.dual_objective, 0.5, 1e-9);
}

TEST(Smo, DuplicatedOpposingPointsHitTheBound) {
  const std::vector<PixelFeatures> pts{pt({1.0}), pt({1.0})};
  const std::vector<int> y{1, -1};
  const double C = 3.0;
  const auto r = smo_train(pts, y, kLinear, SmoParams{C});
  EXPECT_EQ(r.alpha[0], C);
  EXPECT_EQ(r.alpha[1], C);
}

TEST(Smo, EmptySupportSetDecisionIsBias) {
  SvmBinaryModel m;
  m.bias = -0.75;
  m.kernel = kLinear;
  EXPECT_EQ(decision(m, std::vector<double>{1.0}, std::vector<double>{1.0}), -0.75);
}

TEST(Smo, FeasibilityAndKktOnRandomProblems) {
  Rng rng(11);
  for (int inst = 0; inst < 30; ++inst) {
    const auto p = objclass::testing::random_binary_problem(rng, 10 + rng.uniform_index(80), 3, 2.0);
    const double C = std::pow(2.0, static_cast<double>(rng.uniform_index(8)) - 3.0);
    const KernelSpec k = inst % 2 ? rbf(0.5, 0.7) : kLinear;
    SmoParams params{C};
    const auto r = smo_train(p.points, p.labels, k, params);
    ASSERT_TRUE(r.converged);
    expect_kkt(r, p.points, p.labels, C, params.tol);
  }
}

TEST(Smo, NoSinglePairStepImproves) {
  Rng rng(12);
  for (int inst = 0; inst < 20; ++inst) {
    const auto p = objclass::testing::random_binary_problem(rng, 30, 2, 1.0);
    const KernelSpec k = rbf(0.8, 0.6);
    const double C = 2.0;
    const auto r = smo_train(p.points, p.labels, k, SmoParams{C, 1e-6});
    const auto K = kernel_table(k, p.points);
    EXPECT_LE(best_pair_gain(K, p.labels, r.alpha, C), 1e-9);
  }
}

TEST(Smo, MatchesBruteForceOracleOnTinyProblems) {
  Rng rng(13);
  for (int inst = 0; inst < 30; ++inst) {
    const std::size_t n = 2 + rng.uniform_index(7);
    auto p = objclass::testing::random_binary_problem(rng, n, 2, 1.0);
    const double C = 0.5 + 4.0 * rng.uniform();
    const KernelSpec k = inst % 3 == 0 ? kLinear : rbf(0.5 + rng.uniform());
    const auto r = smo_train(p.points, p.labels, k, SmoParams{C, 1e-6});
    const auto K = kernel_table(k, p.points);
    const auto oracle = objclass::testing::solve_dual_oracle(K, p.labels, C);
    EXPECT_NEAR(r.dual_objective, oracle.objective, 1e-4) << "instance " << inst;
    for (int probe = 0; probe < 5; ++probe) {
      const PixelFeatures q = pt(objclass::testing::random_vector(rng, 2, -2, 2));
      std::vector<double> row;
      for (const auto& x : p.points) row.push_back(eval_composite(k, q, x));
      EXPECT_NEAR(decision(r.model, q), objclass::testing::oracle_decision(oracle, p.labels, row), 1e-3)
          << "instance " << inst;
    }
  }
}

TEST(Smo, SeparableMargin) {
  Rng rng(14);
  const auto p = objclass::testing::random_binary_problem(rng, 60, 2, 12.0);
  const auto r = smo_train(p.points, p.labels, kLinear, SmoParams{1e4});
  double worst = 1e300;
  for (std::size_t i = 0; i < p.points.size(); ++i) worst = std::min(worst, p.labels[i] * decision(r.model, p.points[i]));
  EXPECT_GE(worst, 1.0 - 1e-3);
}

TEST(Smo, LruCacheGivesIdenticalSolution) {
  Rng rng(15);
  const auto p = objclass::testing::random_binary_problem(rng, 120, 3, 1.5);
  const auto full = smo_train(p.points, p.labels, rbf(0.4, 0.5), SmoParams{1.0, 1e-3, 100, 4000, 512});
  const auto lru = smo_train(p.points, p.labels, rbf(0.4, 0.5), SmoParams{1.0, 1e-3, 100, 10, 7});
  EXPECT_EQ(full.alpha, lru.alpha);
  EXPECT_EQ(full.model, lru.model);
  EXPECT_EQ(full.iterations, lru.iterations);
}

TEST(Smo, BudgetExhaustionIsFlagged) {
  Rng rng(16);
  const auto p = objclass::testing::random_binary_problem(rng, 50, 2, 0.5);
  const auto r = smo_train(p.points, p.labels, rbf(1.0), SmoParams{100.0, 1e-9, 0});
  EXPECT_FALSE(r.converged);
  double eq = 0;
  for (std::size_t i = 0; i < r.alpha.size(); ++i) eq += r.alpha[i] * p.labels[i];
  EXPECT_LE(std::abs(eq), 1e-6);
}

TEST(Smo, ContractErrors) {
  const std::vector<PixelFeatures> pts{pt({0.0}), pt({1.0})};
  EXPECT_THROW(smo_train(pts, std::vector<int>{1, 1}, kLinear, {}), std::invalid_argument);
  EXPECT_THROW(smo_train(pts, std::vector<int>{1, 0}, kLinear, {}), std::invalid_argument);
  EXPECT_THROW(smo_train(pts, std::vector<int>{1, -1}, kLinear, SmoParams{0.0}), std::invalid_argument);
  EXPECT_THROW(smo_train(pts, std::vector<int>{1, -1}, kLinear, SmoParams{1.0, 0.0}), std::invalid_argument);
  const auto r = smo_train(pts, std::vector<int>{1, -1}, kLinear, {});
  EXPECT_THROW(decision(r.model, std::vector<double>{1, 2}, std::vector<double>{1}), std::invalid_argument);
}

TEST(Platt, SeparatedValues) {
  const std::vector<double> g{-2, -1, 1, 2};
  const std::vector<int> y{-1, -1, 1, 1};
  const auto p = platt_fit(g, y);
  EXPECT_LT(p.A, 0.0);
  EXPECT_LT(platt_nll(p, g, y), platt_nll(PlattParams{-1.0, 0.0}, g, y));
  EXPECT_GT(p.probability(3.0), 0.5);
}

TEST(Platt, UninformativeValuesGivePrior) {
  // Every value carries both labels: only the prior is learnable.
  std::vector<double> g;
  std::vector<int> y;
  for (double v : {-2.0, -1.0, 1.0, 2.0}) {
    g.push_back(v), y.push_back(1);
    g.push_back(v), y.push_back(-1);
  }
  const auto p = platt_fit(g, y);
  EXPECT_NEAR(p.probability(0.0), 0.5, 1e-6);
}

TEST(Platt, AntisymmetricFixtureHasZeroOffset) {
  std::vector<double> g;
  std::vector<int> y;
  for (double v : {0.3, 0.7, 1.1, 2.5}) {
    g.push_back(v), y.push_back(1);
    g.push_back(-v), y.push_back(-1);
  }
  g.push_back(0.2), y.push_back(-1);
  g.push_back(-0.2), y.push_back(1);
  EXPECT_NEAR(platt_fit(g, y).B, 0.0, 1e-6);
}

TEST(Platt, Errors) {
  EXPECT_THROW(platt_fit(std::vector<double>{1, 2}, std::vector<int>{1, 1}), std::invalid_argument);
  EXPECT_THROW(platt_fit(std::vector<double>{1, NAN}, std::vector<int>{1, -1}), std::invalid_argument);
}

namespace {

struct Clusters {
  std::vector<PixelFeatures> points;
  std::vector<ClassId> labels;
};

Clusters three_clusters(Rng& rng) {
  Clusters c;
  const double centres[3][2] = {{0, 0}, {6, 0}, {0, 6}};
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 20; ++i) {
      std::vector<double> v{centres[k][0] + 0.5 * rng.normal(), centres[k][1] + 0.5 * rng.normal()};
      c.points.push_back({v, v});
      c.labels.push_back(static_cast<ClassId>(k + 1));
    }
  }
  return c;
}

}  // namespace

TEST(Multiclass, SeparatedClustersAreLearnedExactly) {
  Rng rng(21);
  const auto c = three_clusters(rng);
  const auto m = train_multiclass(c.points, c.labels, rbf(0.5), SmoParams{10.0});
  EXPECT_EQ(m.classes, (std::vector<ClassId>{1, 2, 3}));
  for (std::size_t i = 0; i < c.points.size(); ++i) EXPECT_EQ(predict(m, c.points[i]), c.labels[i]);
  const double centres[3][2] = {{0, 0}, {6, 0}, {0, 6}};
  for (int k = 0; k < 3; ++k) {
    const std::vector<double> v{centres[k][0], centres[k][1]};
    const auto p = posterior(m, v, v);
    EXPECT_EQ(std::max_element(p.begin(), p.end()) - p.begin(), k);
  }
}

TEST(Multiclass, PosteriorIsNormalised) {
  Rng rng(22);
  const auto c = three_clusters(rng);
  const auto m = train_multiclass(c.points, c.labels, rbf(0.5), SmoParams{10.0});
  for (int i = 0; i < 200; ++i) {
    const auto v = objclass::testing::random_vector(rng, 2, -5, 10);
    const auto p = posterior(m, v, v);
    double s = 0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Multiclass, TwoClassBinariesMirror) {
  std::vector<PixelFeatures> pts;
  std::vector<ClassId> labels;
  for (double v : {1.0, 1.5, 2.0, 3.0, 2.5, 1.2}) {
    pts.push_back(pt({v, 0.3 * v})), labels.push_back(2);
    pts.push_back(pt({-v, -0.3 * v})), labels.push_back(1);
  }
  const auto m = train_multiclass(pts, labels, kLinear, SmoParams{1.0, 1e-6});
  Rng rng(23);
  for (int i = 0; i < 50; ++i) {
    const auto q = objclass::testing::random_vector(rng, 2, -3, 3);
    EXPECT_NEAR(decision(m.binaries[0], q, q), -decision(m.binaries[1], q, q), 1e-6);
  }
  const std::vector<double> origin{0.0, 0.0};
  const auto p = posterior(m, origin, origin);
  EXPECT_NEAR(p[0], 0.5, 1e-3);
  EXPECT_NEAR(p[1], 0.5, 1e-3);
}

TEST(Multiclass, RelabellingPermutesPosterior) {
  Rng rng(24);
  const auto c = three_clusters(rng);
  // 1 -> 7, 2 -> 3, 3 -> 5 keeps the ascending order of ids: 2->3, 3->5, 1->7 reorders it.
  const ClassId map[4] = {0, 7, 3, 5};
  std::vector<ClassId> relabelled;
  for (ClassId l : c.labels) relabelled.push_back(map[l]);
  const auto a = train_multiclass(c.points, c.labels, rbf(0.5), SmoParams{10.0});
  const auto b = train_multiclass(c.points, relabelled, rbf(0.5), SmoParams{10.0});
  EXPECT_EQ(b.classes, (std::vector<ClassId>{3, 5, 7}));
  for (int i = 0; i < 50; ++i) {
    const auto v = objclass::testing::random_vector(rng, 2, -2, 8);
    const auto pa = posterior(a, v, v);
    const auto pb = posterior(b, v, v);
    // class 1 -> slot of id 7 (2), class 2 -> id 3 (0), class 3 -> id 5 (1)
    EXPECT_NEAR(pa[0], pb[2], 1e-12);
    EXPECT_NEAR(pa[1], pb[0], 1e-12);
    EXPECT_NEAR(pa[2], pb[1], 1e-12);
  }
}

TEST(Multiclass, Errors) {
  const std::vector<PixelFeatures> pts{pt({0.0}), pt({1.0})};
  EXPECT_THROW(train_multiclass(pts, std::vector<ClassId>{1, 1}, kLinear, {}), std::invalid_argument);
  EXPECT_THROW(train_multiclass(pts, std::vector<ClassId>{1, 0}, kLinear, {}), std::invalid_argument);
}

TEST(ModelFile, RoundTripIsBitExact) {
  TempDir dir;
  Rng rng(25);
  for (int i = 0; i < 10; ++i) {
    const auto c = three_clusters(rng);
    const auto m = train_multiclass(c.points, c.labels, rbf(0.1 + rng.uniform(), rng.uniform()), SmoParams{5.0});
    save_model(m, dir / "m.model");
    const auto back = load_model(dir / "m.model");
    EXPECT_EQ(back, m);
    save_model(back, dir / "m2.model");
    std::ifstream a(dir / "m.model", std::ios::binary), b(dir / "m2.model", std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    EXPECT_EQ(sa, sb);
  }
}

TEST(ModelFile, TruncationIsDetected) {
  TempDir dir;
  Rng rng(26);
  const auto c = three_clusters(rng);
  save_model(train_multiclass(c.points, c.labels, rbf(0.5), {}), dir / "m.model");
  const auto size = std::filesystem::file_size(dir / "m.model");
  std::filesystem::resize_file(dir / "m.model", size - 8);
  EXPECT_THROW(load_model(dir / "m.model"), std::runtime_error);
}
