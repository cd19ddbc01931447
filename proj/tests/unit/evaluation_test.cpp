#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "objclass/evaluation.hpp"
#include "test_support.hpp"

using namespace objclass;

namespace {

// Chance agreement by enumerating every (reference, predicted) pair of sites.
double pe_by_pairs(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes.size();
  std::vector<std::size_t> ref, pred;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      for (std::uint64_t i = 0; i < cm.counts[r][c]; ++i) {
        ref.push_back(r);
        pred.push_back(c);
      }
    }
  }
  std::uint64_t match = 0;
  for (auto a : ref) {
    for (auto b : pred) match += a == b;
  }
  const double n = static_cast<double>(ref.size());
  return static_cast<double>(match) / (n * n);
}

}  // namespace

TEST(Metrics, WorkedExample) {
  const auto cm = confusion_from_counts({{45, 5}, {15, 35}});
  EXPECT_DOUBLE_EQ(overall_accuracy(cm), 0.8);
  EXPECT_NEAR(kappa(cm), 0.6, 1e-12);
  EXPECT_EQ(format_accuracy_row(kappa(cm), overall_accuracy(cm)), "0.60 | 80.00");
  EXPECT_DOUBLE_EQ(*producer_accuracy(cm, 0), 0.9);
  EXPECT_DOUBLE_EQ(*user_accuracy(cm, 0), 0.75);
}

TEST(Metrics, PerfectAndChance) {
  const auto diag = confusion_from_counts({{10, 0, 0}, {0, 5, 0}, {0, 0, 7}});
  EXPECT_EQ(overall_accuracy(diag), 1.0);
  EXPECT_EQ(kappa(diag), 1.0);
  const auto chance = confusion_from_counts({{30, 30}, {20, 20}});
  EXPECT_NEAR(kappa(chance), 0.0, 1e-15);
  const auto single = confusion_from_counts({{4}});
  EXPECT_EQ(kappa(single), 1.0);
  const auto empty_row = confusion_from_counts({{3, 0}, {0, 0}});
  EXPECT_FALSE(producer_accuracy(empty_row, 1).has_value());
  EXPECT_THROW(confusion_from_counts({{1, 2}}), std::invalid_argument);
}

TEST(Metrics, KappaMatchesPairOracle) {
  Rng rng(1);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t k = 2 + rng.uniform_index(3);
    std::vector<std::vector<std::uint64_t>> counts(k, std::vector<std::uint64_t>(k));
    std::uint64_t diag = 0, total = 0;
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        counts[r][c] = rng.uniform_index(8);
        total += counts[r][c];
        if (r == c) diag += counts[r][c];
      }
    }
    if (total == 0) continue;
    const auto cm = confusion_from_counts(counts);
    const double pe = pe_by_pairs(cm);
    const double p0 = static_cast<double>(diag) / static_cast<double>(total);
    if (pe == 1.0) continue;
    EXPECT_NEAR(kappa(cm), (p0 - pe) / (1 - pe), 1e-12);
    EXPECT_LE(kappa(cm), 1.0);
  }
}

TEST(Metrics, InvariantUnderClassRelabelling) {
  Rng rng(2);
  for (int inst = 0; inst < 50; ++inst) {
    const LabelMap ref = objclass::testing::random_labels(rng, 9, 7, 4);
    LabelMap pred = ref;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (rng.uniform() < 0.3) pred[i] = static_cast<ClassId>(1 + rng.uniform_index(4));
    }
    // Apply the same permutation of ids to both maps.
    std::vector<ClassId> perm{0, 1, 2, 3, 4};
    std::vector<ClassId> tail(perm.begin() + 1, perm.end());
    rng.shuffle(tail);
    std::copy(tail.begin(), tail.end(), perm.begin() + 1);
    LabelMap ref2 = ref, pred2 = pred;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      ref2[i] = static_cast<ClassId>(perm[ref[i]] + 10);
      pred2[i] = static_cast<ClassId>(perm[pred[i]] + 10);
    }
    const auto a = confusion(ref, pred), b = confusion(ref2, pred2);
    EXPECT_DOUBLE_EQ(overall_accuracy(a), overall_accuracy(b));
    EXPECT_NEAR(kappa(a), kappa(b), 1e-14);
  }
}

TEST(Confusion, FromMaps) {
  const LabelMap ref(4, 1, {1, 1, 2, 2}), pred(4, 1, {1, 2, 2, 2});
  const auto cm = confusion(ref, pred);
  EXPECT_EQ(cm.classes, (std::vector<ClassId>{1, 2}));
  EXPECT_EQ(cm.counts, (std::vector<std::vector<std::uint64_t>>{{1, 1}, {0, 2}}));
  EXPECT_DOUBLE_EQ(overall_accuracy(cm), 0.75);
  EXPECT_NEAR(kappa(cm), 0.5, 1e-15);

  const LabelMap with_zero(4, 1, {0, 1, 2, 0});
  const auto cz = confusion(ref, with_zero);
  EXPECT_EQ(cz.ignored, 2u);
  EXPECT_EQ(cz.total(), 2u);
  EXPECT_THROW(confusion(ref, LabelMap(4, 1, kUnclassified)), std::invalid_argument);
  EXPECT_THROW(confusion(ref, LabelMap(2, 2, 1)), std::invalid_argument);
}

TEST(ArealExtent, HandValues) {
  const LabelMap l(100, 100, 1);
  EXPECT_DOUBLE_EQ(areal_extent(l, 10.0, 1), 1.0);
  LabelMap m(10, 10, 1);
  for (std::size_t i = 0; i < 40; ++i) m[i] = 2;
  EXPECT_NEAR(areal_extent(m, 23.5, 1), 60 * 23.5 * 23.5 / 1e6, 1e-15);
  // 1000 px at 23.5 m.
  LabelMap k(1000, 1, 3);
  EXPECT_NEAR(areal_extent(k, 23.5, 3), 0.55225, 1e-12);
  EXPECT_EQ(areal_extent(k, 23.5, 5), 0.0);
}

TEST(ArealExtent, SumsToScene) {
  Rng rng(3);
  for (int inst = 0; inst < 20; ++inst) {
    const LabelMap l = objclass::testing::random_labels(rng, 13, 11, 5, true);
    const double res = 1.0 + 30.0 * rng.uniform();
    double sum = areal_extent(l, res, kUnclassified);
    for (ClassId c = 1; c <= 5; ++c) sum += areal_extent(l, res, c);
    EXPECT_NEAR(sum, 13.0 * 11.0 * res * res / 1e6, 1e-12);
  }
}

TEST(Format, Rows) {
  EXPECT_EQ(format_accuracy_row(0.99, 0.9751), "0.99 | 97.51");
  EXPECT_EQ(format_accuracy_row(1.0, 1.0), "1.00 | 100.00");
  EXPECT_EQ(format_accuracy_row(0.6, 0.8), "0.60 | 80.00");
}

TEST(Report, JsonAndTable) {
  const LabelMap ref(4, 1, {1, 1, 2, 2}), pred(4, 1, {1, 0, 2, 2});
  const auto rep = evaluate_method("mindist", ref, pred);
  EXPECT_EQ(rep.unclassified, 1u);
  EXPECT_DOUBLE_EQ(rep.overall_accuracy, 1.0);
  const auto doc = report_json(rep);
  EXPECT_EQ(doc["schema"], "report_v1");
  const std::string table = format_table({{"Minimum distance", rep}, {"SVM", std::nullopt}});
  EXPECT_NE(table.find("1.00 | 100.00"), std::string::npos);
  EXPECT_NE(table.find("failed"), std::string::npos);
}
