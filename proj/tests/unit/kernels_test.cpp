#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "objclass/kernel_cache.hpp"
#include "objclass/kernels.hpp"
#include "test_support.hpp"

using namespace objclass;
using objclass::testing::random_vector;

namespace {

BaseKernel make(KernelFamily f, double gamma = 1.0, int degree = 3, double coef0 = 1.0) {
  return BaseKernel{f, gamma, degree, coef0};
}

std::vector<PixelFeatures> random_points(Rng& rng, std::size_t n, std::size_t dim, double lo, double hi) {
  std::vector<PixelFeatures> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({random_vector(rng, dim, lo, hi), random_vector(rng, dim, lo, hi)});
  return pts;
}

}  // namespace

TEST(Kernels, BaseValues) {
  const std::vector<double> a{1, 2}, b{3, 4};
  EXPECT_EQ(eval_base(make(KernelFamily::Linear), a, b), 11.0);
  EXPECT_DOUBLE_EQ(eval_base(make(KernelFamily::Polynomial, 1, 2, 1), a, b), 144.0);
  EXPECT_DOUBLE_EQ(eval_base(make(KernelFamily::Rbf, 0.5), a, b), std::exp(-0.5 * 8.0));
  const double sam = eval_base(make(KernelFamily::Sam, 1.0), std::vector<double>{1, 0}, std::vector<double>{0, 1});
  EXPECT_NEAR(sam, std::exp(-std::pow(std::numbers::pi / 2, 2)), 1e-15);
  EXPECT_NEAR(sam, 0.08480, 5e-6);
}

TEST(Kernels, SidMatchesSymmetricKl) {
  const std::vector<double> u{1, 2, 3}, v{2, 2, 1};
  double kl = 0;
  for (int i = 0; i < 3; ++i) {
    const double p = u[i] / 6.0, q = v[i] / 5.0;
    kl += p * std::log(p / q) + q * std::log(q / p);
  }
  EXPECT_NEAR(eval_base(make(KernelFamily::Sid, 0.7), u, v), std::exp(-0.7 * kl), 1e-14);
  EXPECT_EQ(eval_base(make(KernelFamily::Sid, 3.0), u, u), 1.0);
}

TEST(Kernels, SelfSimilarityIsOne) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto u = random_vector(rng, 4, 0.1, 5.0);
    for (auto f : {KernelFamily::Rbf, KernelFamily::Sam, KernelFamily::Sid}) {
      EXPECT_NEAR(eval_base(make(f, 0.1 + rng.uniform()), u, u), 1.0, 1e-12);
    }
    EXPECT_EQ(eval_base(make(KernelFamily::Rbf, 2.0), u, u), 1.0);
  }
}

TEST(Kernels, SymmetryAndBoundedness) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto u = random_vector(rng, 5, 0.01, 3.0), v = random_vector(rng, 5, 0.01, 3.0);
    for (auto f : {KernelFamily::Linear, KernelFamily::Polynomial, KernelFamily::Rbf, KernelFamily::Sam,
                   KernelFamily::Sid}) {
      const auto k = make(f, 0.05 + rng.uniform(), 2, 0.5);
      const double uv = eval_base(k, u, v);
      EXPECT_EQ(uv, eval_base(k, v, u));
      if (f == KernelFamily::Rbf || f == KernelFamily::Sam || f == KernelFamily::Sid) {
        EXPECT_GT(uv, 0.0);
        EXPECT_LE(uv, 1.0);
      }
    }
  }
}

TEST(Kernels, Errors) {
  const std::vector<double> a{1, 2}, b{1, 2, 3}, zero{0, 0}, neg{1, -1};
  EXPECT_THROW(eval_base(make(KernelFamily::Linear), a, b), std::invalid_argument);
  EXPECT_THROW(eval_base(make(KernelFamily::Sam), a, zero), std::invalid_argument);
  EXPECT_THROW(eval_base(make(KernelFamily::Sid), a, neg), std::invalid_argument);
  EXPECT_THROW(make(KernelFamily::Rbf, 0.0).validate(), std::invalid_argument);
  EXPECT_THROW(make(KernelFamily::Polynomial, 1.0, 0).validate(), std::invalid_argument);
  EXPECT_THROW((KernelSpec{make(KernelFamily::Rbf), make(KernelFamily::Rbf), 1.5}.validate()), std::invalid_argument);
  EXPECT_THROW(kernel_family_from_string("cubic"), std::invalid_argument);
}

TEST(Kernels, SamClampsNearParallelVectors) {
  const std::vector<double> u{0.1, 0.2, 0.3};
  std::vector<double> v = u;
  for (auto& x : v) x *= 3.0;  // cos may round above 1
  const double k = eval_base(make(KernelFamily::Sam, 1.0), u, v);
  EXPECT_FALSE(std::isnan(k));
  EXPECT_NEAR(k, 1.0, 1e-12);
}

TEST(Composite, BoundaryWeightsAndHandValue) {
  Rng rng(3);
  KernelSpec spec{make(KernelFamily::Rbf, 0.3), make(KernelFamily::Polynomial, 1, 2, 1), 1.0};
  for (int i = 0; i < 100; ++i) {
    const auto ps = random_vector(rng, 3), pp = random_vector(rng, 2), qs = random_vector(rng, 3),
               qp = random_vector(rng, 2);
    spec.mu = 1.0;
    EXPECT_EQ(eval_composite(spec, ps, pp, qs, qp), eval_base(spec.spectral, ps, qs));
    spec.mu = 0.0;
    EXPECT_EQ(eval_composite(spec, ps, pp, qs, qp), eval_base(spec.spatial, pp, qp));
  }
  const KernelSpec lin{make(KernelFamily::Linear), make(KernelFamily::Linear), 0.5};
  EXPECT_DOUBLE_EQ(eval_composite(lin, std::vector<double>{1, 0}, std::vector<double>{2, 0},
                                  std::vector<double>{1, 0}, std::vector<double>{2, 0}),
                   2.5);
}

TEST(Composite, AffineInMu) {
  Rng rng(4);
  KernelSpec spec{make(KernelFamily::Rbf, 0.7), make(KernelFamily::Sam, 0.4), 0.0};
  for (int i = 0; i < 100; ++i) {
    const auto ps = random_vector(rng, 3, 0.1, 2), pp = random_vector(rng, 3, 0.1, 2),
               qs = random_vector(rng, 3, 0.1, 2), qp = random_vector(rng, 3, 0.1, 2);
    const double m0 = rng.uniform(), m2 = rng.uniform(), m1 = 0.5 * (m0 + m2);
    spec.mu = m0;
    const double k0 = eval_composite(spec, ps, pp, qs, qp);
    spec.mu = m1;
    const double k1 = eval_composite(spec, ps, pp, qs, qp);
    spec.mu = m2;
    const double k2 = eval_composite(spec, ps, pp, qs, qp);
    EXPECT_NEAR(k1, 0.5 * (k0 + k2), 1e-14);
  }
}

TEST(Gram, SymmetricAndHandChecked) {
  const KernelSpec lin{make(KernelFamily::Linear), make(KernelFamily::Linear), 1.0};
  const std::vector<PixelFeatures> pts{{{1, 0}, {0}}, {{0, 2}, {0}}, {{3, 4}, {0}}};
  const auto G = gram(lin, pts);
  const double expected[3][3] = {{1, 0, 3}, {0, 4, 8}, {3, 8, 25}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_EQ(G(i, j), expected[i][j]);
  }
  const KernelSpec rbf{make(KernelFamily::Rbf), make(KernelFamily::Rbf), 0.5};
  const auto one = gram(rbf, std::vector<PixelFeatures>{{{1, 2}, {3}}});
  ASSERT_EQ(one.rows(), 1);
  EXPECT_EQ(one(0, 0), 1.0);

  Rng rng(5);
  const auto random = random_points(rng, 30, 4, 0.1, 3.0);
  for (auto f : {KernelFamily::Polynomial, KernelFamily::Sam, KernelFamily::Sid}) {
    const auto M = gram(KernelSpec{make(f, 0.5, 2), make(KernelFamily::Rbf), 0.3}, random);
    EXPECT_TRUE(M == M.transpose());
  }
}

TEST(Psd, HandMatrices) {
  const auto id = psd_check(Eigen::MatrixXd::Identity(3, 3), 1e-6);
  EXPECT_NEAR(id.min_eigenvalue, 1.0, 1e-12);
  EXPECT_TRUE(id.passes);
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 1;
  const auto r = psd_check(m, 1e-6);
  EXPECT_NEAR(r.min_eigenvalue, -1.0, 1e-12);
  EXPECT_FALSE(r.passes);
  m(0, 1) = 2.5;
  EXPECT_THROW(psd_check(m, 1e-6), std::invalid_argument);
}

TEST(Psd, RbfGramOfDistinctPointsPasses) {
  Rng rng(6);
  const auto pts = random_points(rng, 50, 5, -2, 2);
  const KernelSpec rbf{make(KernelFamily::Rbf, 0.8), make(KernelFamily::Rbf, 0.8), 1.0};
  EXPECT_TRUE(psd_check(gram(rbf, pts), 1e-6).passes);
}

TEST(KvBlock, RoundTrip) {
  const KernelSpec spec{make(KernelFamily::Polynomial, 0.1, 4, 0.25), make(KernelFamily::Sid, 1e-3), 0.3};
  const std::string text = to_kv_block(spec);
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  EXPECT_EQ(kernel_spec_from_kv(kv), spec);
}

TEST(KernelMatrix, CachedRowsMatchFullGram) {
  Rng rng(7);
  const auto pts = random_points(rng, 40, 3, -1, 1);
  const KernelSpec spec{make(KernelFamily::Rbf, 0.9), make(KernelFamily::Polynomial, 1, 2, 1), 0.6};
  KernelMatrix full(spec, pts, 4000, 512);
  KernelMatrix lru(spec, pts, 10, 3);
  ASSERT_TRUE(full.is_full());
  ASSERT_FALSE(lru.is_full());
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t i = rng.uniform_index(pts.size());
    const auto a = full.row(i);
    const auto b = lru.row(i);
    for (std::size_t j = 0; j < pts.size(); ++j) ASSERT_EQ(a[j], b[j]);
    EXPECT_EQ(full.diagonal(i), lru.diagonal(i));
  }
}
