#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "engage_mil/error.hpp"
#include "engage_mil/eval/kappa.hpp"
#include "engage_mil/eval/metrics.hpp"
#include "engage_mil/rng.hpp"
#include "support/tempdir.hpp"

using namespace engage;
using namespace engage::eval;

namespace {

// Quadratic kappa from an explicitly tabulated 4x4 contingency table.
double kappa_from_table(const double O[4][4]) {
  double n = 0, row[4] = {}, col[4] = {};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      n += O[i][j];
      row[i] += O[i][j];
      col[j] += O[i][j];
    }
  double num = 0, den = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double w = (i - j) * (i - j) / 9.0;
      num += w * O[i][j] / n;
      den += w * row[i] * col[j] / (n * n);
    }
  return 1 - num / den;
}

AnnotationMatrix matrix(const std::vector<std::vector<int>>& by_rater) {
  AnnotationMatrix m;
  const std::size_t videos = by_rater.front().size();
  m.ratings.assign(videos, {});
  for (std::size_t v = 0; v < videos; ++v)
    for (const auto& rater : by_rater) m.ratings[v].emplace_back(rater[v]);
  return m;
}

}  // namespace

TEST(Kappa, IdenticalIsOne) {
  const std::vector<int> a = {0, 1, 2, 3, 2, 1, 1};
  EXPECT_DOUBLE_EQ(quadratic_weighted_kappa(a, a), 1.0);
}

TEST(Kappa, ReversedContingencyExample) {
  const std::vector<int> a = {0, 1, 2, 3}, b = {3, 2, 1, 0};
  // O has one count on each anti-diagonal cell; marginals are uniform.
  const double O[4][4] = {{0, 0, 0, 1}, {0, 0, 1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}};
  // Hand evaluation: sum w O / n = (1 + 1/9 + 1/9 + 1) / 4 = 5/9;
  // sum w E = (1/16) * sum_ij (i-j)^2 / 9 = (1/16) * 40/9 = 5/18; kappa = 1 - 2 = -1.
  EXPECT_NEAR(kappa_from_table(O), -1.0, 1e-12);
  EXPECT_NEAR(quadratic_weighted_kappa(a, b), kappa_from_table(O), 1e-12);
}

TEST(Kappa, MatchesTableOracleAndIsSymmetric) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> a(30), b(30);
    double O[4][4] = {};
    for (int i = 0; i < 30; ++i) {
      a[i] = static_cast<int>(rng.below(4));
      b[i] = std::min(3, a[i] + static_cast<int>(rng.below(2)));
      O[a[i]][b[i]] += 1;
    }
    EXPECT_NEAR(quadratic_weighted_kappa(a, b), kappa_from_table(O), 1e-12);
    EXPECT_NEAR(quadratic_weighted_kappa(a, b), quadratic_weighted_kappa(b, a), 1e-12);
  }
}

TEST(Kappa, IndependentRatersNearZero) {
  Rng rng(2);
  std::vector<int> a(10000), b(10000);
  for (int i = 0; i < 10000; ++i) {
    a[i] = static_cast<int>(rng.below(4));
    b[i] = static_cast<int>(rng.below(4));
  }
  EXPECT_LT(std::abs(quadratic_weighted_kappa(a, b)), 0.1);
}

TEST(Kappa, OrderPreservingRelabelInvariance) {
  // Levels {0,1,2} mapped to {0,1,3} are not a shift, so check a shift instead:
  // both raters use only 0..2, mapped to 1..3 with L unchanged.
  Rng rng(3);
  std::vector<int> a(40), b(40), a2(40), b2(40);
  for (int i = 0; i < 40; ++i) {
    a[i] = static_cast<int>(rng.below(3));
    b[i] = static_cast<int>(rng.below(3));
    a2[i] = a[i] + 1;
    b2[i] = b[i] + 1;
  }
  EXPECT_NEAR(quadratic_weighted_kappa(a, b), quadratic_weighted_kappa(a2, b2), 1e-12);
}

TEST(Kappa, DegenerateCases) {
  const std::vector<int> c = {2, 2, 2};
  EXPECT_EQ(quadratic_weighted_kappa(c, c), 1.0);
  EXPECT_THROW(quadratic_weighted_kappa(std::vector<int>{}, std::vector<int>{}), Error);
  EXPECT_THROW(quadratic_weighted_kappa(std::vector<int>{1, 4}, std::vector<int>{1, 1}), Error);
  EXPECT_THROW(quadratic_weighted_kappa(std::vector<int>{1}, std::vector<int>{1, 1}), Error);
}

TEST(Fusion, IdenticalRaters) {
  const std::vector<int> labels = {0, 1, 2, 3, 2, 1};
  const auto r = fuse_labels(matrix({labels, labels, labels}));
  EXPECT_TRUE(r.dropped.empty());
  EXPECT_EQ(r.labels, labels);
}

TEST(Fusion, AntiCorrelatedRaterIsDropped) {
  const std::vector<int> truth = {0, 1, 2, 3, 3, 2, 1, 0, 2, 1, 3, 0};
  std::vector<int> anti(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) anti[i] = 3 - truth[i];
  const auto r = fuse_labels(matrix({truth, truth, truth, truth, anti}));
  EXPECT_LT(r.reliability[4], 0.4);
  ASSERT_EQ(r.dropped.size(), 1u);
  EXPECT_EQ(r.dropped[0], 4u);
  EXPECT_EQ(r.labels, truth);
}

TEST(Fusion, RoundHalfAwayFromZero) {
  // Two reliable raters that agree everywhere but on the last video.
  const std::vector<int> a = {0, 1, 2, 3, 2}, b = {0, 1, 2, 3, 3};
  const auto r = fuse_labels(matrix({a, b}));
  EXPECT_EQ(r.labels.back(), 3);
  for (int v : r.labels) {
    EXPECT_GE(v, 0);
    EXPECT_LE(v, 3);
  }
}

TEST(Fusion, MissingEntriesAndNoReliableRaters) {
  auto m = matrix({{0, 1, 2, 3}, {0, 1, 2, 3}, {1, 1, 2, 2}});
  m.ratings[1][2].reset();
  m.ratings[3][0].reset();
  const auto r = fuse_labels(m);
  EXPECT_EQ(r.labels.size(), 4u);
  try {
    fuse_labels(matrix({{0, 1, 2, 3}, {3, 2, 1, 0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoReliableRaters);
  }
}

TEST(Fusion, ReadsCsvWithBlanks) {
  engage::testing::TempDir dir;
  std::ofstream(dir.path() / "a.csv") << "video_id,r1,r2,r3\nv1,0,0,\nv2,2,3,2\n";
  const auto m = read_annotations_csv(dir.path() / "a.csv");
  ASSERT_EQ(m.videos(), 2u);
  EXPECT_EQ(m.raters(), 3u);
  EXPECT_FALSE(m.ratings[0][2].has_value());
  EXPECT_EQ(*m.ratings[1][1], 3);
  std::ofstream(dir.path() / "b.csv") << "video_id,r1,r2\nv1,0,7\n";
  try {
    read_annotations_csv(dir.path() / "b.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("b.csv:2"), std::string::npos);
  }
}

TEST(Metrics, MseAndClasswise) {
  const std::vector<double> pred = {1, 1}, truth = {0, 2};
  EXPECT_DOUBLE_EQ(mse(pred, truth), 1.0);
  const auto cw = classwise_mse(pred, truth);
  EXPECT_DOUBLE_EQ(*cw.mse[0], 1.0);
  EXPECT_DOUBLE_EQ(*cw.mse[2], 1.0);
  EXPECT_FALSE(cw.mse[1].has_value());
  EXPECT_FALSE(cw.mse[3].has_value());
  EXPECT_EQ(mse(truth, truth), 0.0);
  EXPECT_THROW(mse(std::vector<double>{1}, truth), Error);
}

TEST(Metrics, ClasswiseReaggregates) {
  Rng rng(4);
  std::vector<double> pred(200), truth(200);
  for (int i = 0; i < 200; ++i) {
    truth[i] = static_cast<double>(rng.below(4));
    pred[i] = rng.uniform(0, 3);
  }
  const auto cw = classwise_mse(pred, truth);
  double weighted = 0;
  for (int c = 0; c < 4; ++c)
    if (cw.mse[c]) weighted += *cw.mse[c] * cw.count[c];
  EXPECT_NEAR(weighted / 200.0, mse(pred, truth), 1e-12);
}

TEST(Metrics, PccCases) {
  Rng rng(5);
  std::vector<double> t(50), p(50), neg(50);
  for (int i = 0; i < 50; ++i) {
    t[i] = rng.normal();
    p[i] = 2 * t[i] + 1;
    neg[i] = -t[i];
  }
  EXPECT_NEAR(pcc(p, t), 1.0, 1e-12);
  EXPECT_NEAR(pcc(neg, t), -1.0, 1e-12);
  try {
    pcc(std::vector<double>{1, 1, 1}, std::vector<double>{0, 1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefinedCorrelation);
  }
}

TEST(Metrics, PccMatchesTwoPassOracleAndAffineInvariance) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(40), b(40), a2(40);
    for (int i = 0; i < 40; ++i) {
      a[i] = rng.normal();
      b[i] = 0.5 * a[i] + rng.normal();
      a2[i] = -3.0 * a[i] + 7.0;
    }
    double ma = 0, mb = 0;
    for (int i = 0; i < 40; ++i) {
      ma += a[i] / 40;
      mb += b[i] / 40;
    }
    double cov = 0, va = 0, vb = 0;
    for (int i = 0; i < 40; ++i) {
      cov += (a[i] - ma) * (b[i] - mb);
      va += (a[i] - ma) * (a[i] - ma);
      vb += (b[i] - mb) * (b[i] - mb);
    }
    EXPECT_NEAR(pcc(a, b), cov / std::sqrt(va * vb), 1e-12);
    EXPECT_NEAR(pcc(a2, b), -pcc(a, b), 1e-12);
  }
}

TEST(Metrics, ReportJson) {
  const std::vector<double> truth = {0, 1, 2, 3, 3}, pred = {0.2, 1.1, 1.8, 2.5, 2.9};
  const auto j = to_json(evaluate(pred, truth));
  EXPECT_EQ(j["n"], 5);
  for (const char* c : {"0", "1", "2", "3"}) EXPECT_FALSE(j["classwise"][c]["mse"].is_null());
  EXPECT_FALSE(j["pcc"].is_null());
  const auto constant = to_json(evaluate(std::vector<double>{1, 1}, std::vector<double>{1, 1}));
  EXPECT_EQ(constant["mse"], 0.0);
  EXPECT_TRUE(constant["pcc"].is_null());
}
