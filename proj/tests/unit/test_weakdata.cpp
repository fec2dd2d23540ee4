#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "engage_mil/error.hpp"
#include "engage_mil/rng.hpp"
#include "engage_mil/weakdata/dataset.hpp"
#include "engage_mil/weakdata/dataset_io.hpp"
#include "engage_mil/weakdata/kmeans.hpp"
#include "engage_mil/weakdata/relabel.hpp"
#include "engage_mil/weakdata/synth.hpp"
#include "support/tempdir.hpp"

using namespace engage;
using namespace engage::weakdata;

namespace {

std::vector<features::SegmentFeature> windows(std::size_t count) {
  std::vector<features::SegmentFeature> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].vector = {static_cast<double>(i), 0.5};
    out[i].window = {i, 20, 10};
  }
  return out;
}

Dataset labelled(const std::vector<std::pair<std::string, int>>& subject_label) {
  Dataset d;
  d.M = 2;
  d.dim = 1;
  int v = 0;
  for (const auto& [s, y] : subject_label) {
    Bag b;
    b.video_id = "v" + std::to_string(v++);
    b.subject_id = s;
    b.label = y;
    b.instances = InstanceMatrix::Constant(2, 1, y);
    d.bags.push_back(b);
  }
  return d;
}

}  // namespace

TEST(Resample, EvenSpacing) {
  const auto idx = resample_indices(179, 100);
  ASSERT_EQ(idx.size(), 100u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(idx[i], i * 179 / 100);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  EXPECT_EQ(std::adjacent_find(idx.begin(), idx.end()), idx.end());
}

TEST(Resample, IdentityAndRepetition) {
  const auto same = resample_indices(100, 100);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(same[i], i);
  const auto twice = resample_indices(50, 100);
  std::map<std::size_t, int> count;
  for (auto i : twice) ++count[i];
  EXPECT_EQ(count.size(), 50u);
  for (const auto& [i, c] : count) EXPECT_EQ(c, 2);
  EXPECT_TRUE(std::is_sorted(twice.begin(), twice.end()));
}

TEST(MakeBag, ShapeOrderAndEmpty) {
  const auto bag = make_bag(windows(37), 10, "v", "s", 2);
  EXPECT_EQ(bag.size(), 10);
  EXPECT_EQ(bag.dim(), 2);
  for (Eigen::Index i = 1; i < 10; ++i) EXPECT_LT(bag.instances(i - 1, 0), bag.instances(i, 0));
  try {
    make_bag({}, 10, "v", "s", 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyVideo);
  }
}

TEST(Split, PaperShape) {
  SyntheticSpec spec;
  spec.M = 2;
  spec.dim = 2;
  spec.class_distribution = {0.25, 0.25, 0.25, 0.25};
  const auto data = synth_generate(spec).dataset;
  ASSERT_EQ(data.size(), 195u);
  const auto [train, test] = split_subject_independent(data, 48.0 / 195.0, 1);
  EXPECT_EQ(train.size(), 147u);
  EXPECT_EQ(test.size(), 48u);
}

TEST(Split, DisjointForManySeeds) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, int>> sl;
    const int subjects = 2 + static_cast<int>(rng.below(20));
    for (int s = 0; s < subjects; ++s) {
      const int vids = 1 + static_cast<int>(rng.below(4));
      for (int v = 0; v < vids; ++v) sl.emplace_back("s" + std::to_string(s), static_cast<int>(rng.below(4)));
    }
    const auto data = labelled(sl);
    const auto [train, test] = split_subject_independent(data, rng.uniform(0.1, 0.9), trial);
    EXPECT_FALSE(train.bags.empty());
    EXPECT_FALSE(test.bags.empty());
    EXPECT_EQ(train.size() + test.size(), data.size());
    const auto a = train.subjects(), b = test.subjects();
    std::vector<std::string> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    EXPECT_TRUE(common.empty());
  }
}

TEST(Split, TwoSubjectsAndSingleSubject) {
  const auto [train, test] = split_subject_independent(labelled({{"a", 1}, {"b", 2}}), 0.5, 3);
  EXPECT_EQ(train.subjects().size(), 1u);
  EXPECT_EQ(test.subjects().size(), 1u);
  EXPECT_NE(*train.subjects().begin(), *test.subjects().begin());
  try {
    split_subject_independent(labelled({{"a", 1}, {"a", 2}}), 0.5, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCannotSplit);
  }
}

TEST(Augment, Multiplicities) {
  std::vector<std::pair<std::string, int>> sl;
  for (int i = 0; i < 9; ++i) sl.emplace_back("s", 0);
  for (int i = 0; i < 50; ++i) sl.emplace_back("s", 3);
  for (int i = 0; i < 7; ++i) sl.emplace_back("s", 1);
  const auto out = augment(labelled(sl));
  std::array<int, 4> counts{};
  for (const auto& b : out.bags) ++counts[b.label];
  EXPECT_EQ(counts[0], 180);
  EXPECT_EQ(counts[1], 7);
  EXPECT_EQ(counts[3], 100);
}

TEST(Augment, CopiesAreIdenticalAndOthersUnchanged) {
  SyntheticSpec spec;
  spec.subjects = 4;
  spec.videos = 12;
  spec.M = 3;
  spec.dim = 2;
  spec.class_distribution = {0.25, 0.25, 0.25, 0.25};
  const auto data = synth_generate(spec).dataset;
  const auto out = augment(data);
  std::map<std::string, int> copies;
  for (const auto& b : out.bags) {
    ++copies[b.video_id];
    const auto it = std::find_if(data.bags.begin(), data.bags.end(),
                                 [&](const Bag& o) { return o.video_id == b.video_id; });
    ASSERT_NE(it, data.bags.end());
    EXPECT_EQ(b.instances, it->instances);
  }
  for (const auto& b : data.bags) EXPECT_EQ(copies[b.video_id], kAugmentCopies[b.label]);

  auto mid = labelled({{"a", 1}, {"b", 2}});
  const auto same = augment(mid);
  ASSERT_EQ(same.size(), 2u);
  EXPECT_EQ(same.bags[0].video_id, "v0");
  EXPECT_EQ(same.bags[1].video_id, "v1");
}

TEST(KMeans, SeparatedClouds) {
  Rng rng(2);
  Eigen::MatrixXd pts(40, 2);
  for (int i = 0; i < 40; ++i) {
    const double cx = i < 20 ? -50.0 : 50.0;
    pts(i, 0) = cx + rng.normal();
    pts(i, 1) = rng.normal();
  }
  const auto r = kmeans(pts, 2, 7);
  for (int i = 1; i < 20; ++i) EXPECT_EQ(r.assignments[i], r.assignments[0]);
  for (int i = 21; i < 40; ++i) EXPECT_EQ(r.assignments[i], r.assignments[20]);
  EXPECT_NE(r.assignments[0], r.assignments[20]);
}

TEST(KMeans, KEqualsCount) {
  Rng rng(3);
  Eigen::MatrixXd pts(6, 3);
  for (int i = 0; i < 6; ++i)
    for (int d = 0; d < 3; ++d) pts(i, d) = rng.normal();
  const auto r = kmeans(pts, 6, 1);
  EXPECT_EQ(r.inertia, 0.0);
  EXPECT_EQ(std::set<int>(r.assignments.begin(), r.assignments.end()).size(), 6u);
}

TEST(KMeans, MonotoneInertiaAndCentroidFixedPoint) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd pts(30, 2);
    for (int i = 0; i < 30; ++i)
      for (int d = 0; d < 2; ++d) pts(i, d) = rng.normal();
    const auto r = kmeans(pts, 3, trial);
    ASSERT_FALSE(r.inertia_trace.empty());
    EXPECT_LE(r.inertia, r.inertia_trace.front() + 1e-12);
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i)
      EXPECT_LE(r.inertia_trace[i], r.inertia_trace[i - 1] + 1e-12);
    for (int c = 0; c < 3; ++c) {
      Eigen::RowVector2d sum = Eigen::RowVector2d::Zero();
      int n = 0;
      for (int i = 0; i < 30; ++i)
        if (r.assignments[i] == c) {
          sum += pts.row(i);
          ++n;
        }
      ASSERT_GT(n, 0);
      EXPECT_LT((r.centroids.row(c) - sum / n).norm(), 1e-12);
    }
  }
}

TEST(KMeans, InvalidKAndDeterminism) {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Random(5, 2);
  try {
    kmeans(pts, 6, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidK);
  }
  EXPECT_EQ(kmeans(pts, 2, 9).assignments, kmeans(pts, 2, 9).assignments);
}

TEST(Relabel, Noisy) {
  const auto data = labelled({{"a", 2}, {"b", 0}});
  const auto l = relabel(data, RelabelStrategy::kNoisy);
  EXPECT_EQ(l.labels[0], (std::vector<double>{2, 2}));
  EXPECT_EQ(l.labels[1], (std::vector<double>{0, 0}));
}

TEST(Relabel, ModeAndMean) {
  // Three bags with labels 1, 1, 3; instance 0 of each goes to cluster 0, instance 1 to cluster 1.
  const auto data = labelled({{"a", 1}, {"b", 1}, {"c", 3}});
  const std::vector<int> assign = {0, 1, 0, 1, 0, 1};
  const auto mode = relabel(data, RelabelStrategy::kKMeansMode, &assign);
  const auto mean = relabel(data, RelabelStrategy::kKMeansMean, &assign);
  for (int b = 0; b < 3; ++b)
    for (int i = 0; i < 2; ++i) {
      EXPECT_EQ(mode.labels[b][i], 1.0);
      EXPECT_DOUBLE_EQ(mean.labels[b][i], 5.0 / 3.0);
    }
}

TEST(Relabel, ModeTieGoesToSmallerLabel) {
  const auto data = labelled({{"a", 3}, {"b", 2}});
  const std::vector<int> assign = {0, 0, 0, 0};
  const auto mode = relabel(data, RelabelStrategy::kKMeansMode, &assign);
  EXPECT_EQ(mode.labels[0][0], 2.0);
  EXPECT_EQ(mode.labels[1][1], 2.0);
}

TEST(Relabel, MeanWithinMemberRangeAndMissingAssignments) {
  Rng rng(5);
  std::vector<std::pair<std::string, int>> sl;
  for (int i = 0; i < 10; ++i) sl.emplace_back("s", static_cast<int>(rng.below(4)));
  const auto data = labelled(sl);
  std::vector<int> assign(20);
  for (int& a : assign) a = static_cast<int>(rng.below(3));
  const auto mean = relabel(data, RelabelStrategy::kKMeansMean, &assign);
  for (int c = 0; c < 3; ++c) {
    double lo = 4, hi = -1;
    for (int k = 0; k < 20; ++k)
      if (assign[k] == c) {
        lo = std::min<double>(lo, data.bags[k / 2].label);
        hi = std::max<double>(hi, data.bags[k / 2].label);
      }
    for (int k = 0; k < 20; ++k)
      if (assign[k] == c) {
        EXPECT_GE(mean.labels[k / 2][k % 2], lo);
        EXPECT_LE(mean.labels[k / 2][k % 2], hi);
      }
  }
  try {
    relabel(data, RelabelStrategy::kKMeansMode);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(Synth, PaperClassCounts) {
  SyntheticSpec spec;
  spec.M = 4;
  const auto counts = class_counts(spec.class_distribution, 195);
  EXPECT_EQ(counts, (std::array<int, 4>{9, 53, 82, 50}));
  const auto data = synth_generate(spec).dataset;
  std::array<int, 4> seen{};
  for (const auto& b : data.bags) ++seen[b.label];
  EXPECT_EQ(seen, counts);
  EXPECT_EQ(data.subjects().size(), 78u);
}

TEST(Synth, NoiselessFullSignal) {
  SyntheticSpec spec;
  spec.subjects = 5;
  spec.videos = 20;
  spec.M = 6;
  spec.class_distribution = {0.25, 0.25, 0.25, 0.25};
  spec.signal_fraction = 1.0;
  spec.noise_scale = 0.0;
  const auto syn = synth_generate(spec);
  std::map<int, Eigen::RowVectorXd> per_class;
  for (std::size_t b = 0; b < syn.dataset.size(); ++b) {
    const auto& bag = syn.dataset.bags[b];
    for (Eigen::Index i = 0; i < bag.size(); ++i) {
      EXPECT_EQ(bag.instances.row(i), bag.instances.row(0));
      EXPECT_EQ(syn.planted[b][i], bag.label);
    }
    if (!per_class.count(bag.label)) per_class[bag.label] = bag.instances.row(0);
    EXPECT_EQ(bag.instances.row(0), per_class[bag.label]);
  }
  for (int a = 0; a < 4; ++a)
    for (int c = a + 1; c < 4; ++c) EXPECT_NE(per_class[a], per_class[c]);
}

TEST(Synth, PlantedFractionAndDeterminism) {
  SyntheticSpec spec;
  spec.subjects = 6;
  spec.videos = 12;
  spec.M = 20;
  spec.class_distribution = {0.0, 0.0, 0.0, 1.0};
  const auto a = synth_generate(spec);
  for (const auto& p : a.planted) EXPECT_EQ(std::count(p.begin(), p.end(), 3.0), 6);
  const auto b = synth_generate(spec);
  for (std::size_t i = 0; i < a.dataset.size(); ++i)
    EXPECT_EQ(a.dataset.bags[i].instances, b.dataset.bags[i].instances);
  SyntheticSpec bad = spec;
  bad.signal_fraction = 0.0;
  EXPECT_THROW(synth_generate(bad), Error);
}

TEST(DatasetIo, RoundTripAndAudit) {
  engage::testing::TempDir dir;
  SyntheticSpec spec;
  spec.subjects = 3;
  spec.videos = 6;
  spec.M = 4;
  spec.dim = 3;
  spec.class_distribution = {0.25, 0.25, 0.25, 0.25};
  const auto syn = synth_generate(spec);
  write_dataset(dir.path() / "index.json", syn.dataset);
  std::vector<std::filesystem::path> opened;
  const auto back = read_dataset(dir.path() / "index.json",
                                 [&](const std::filesystem::path& p) { opened.push_back(p); });
  EXPECT_EQ(opened.size(), 6u);
  ASSERT_EQ(back.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(back.bags[i].video_id, syn.dataset.bags[i].video_id);
    EXPECT_EQ(back.bags[i].subject_id, syn.dataset.bags[i].subject_id);
    EXPECT_EQ(back.bags[i].label, syn.dataset.bags[i].label);
    // float32 on disk.
    EXPECT_LT((back.bags[i].instances - syn.dataset.bags[i].instances).cwiseAbs().maxCoeff(), 1e-6);
  }
  const auto header = read_feature_header(dir.path() / "v0000.emil");
  EXPECT_EQ(header.M, 4u);
  EXPECT_EQ(header.dim, 3u);
  EXPECT_EQ(std::filesystem::file_size(dir.path() / "v0000.emil"), 16u + 4u * 3u * 4u);

  write_planted_csv(dir.path() / "planted.csv", syn.dataset, syn.planted);
  EXPECT_EQ(read_planted_csv(dir.path() / "planted.csv", syn.dataset), syn.planted);
}

TEST(DatasetIo, RejectsCorruptFeatureFile) {
  engage::testing::TempDir dir;
  std::ofstream(dir.path() / "x.emil") << "EMILjunk";
  EXPECT_THROW(read_feature_file(dir.path() / "x.emil"), Error);
}
