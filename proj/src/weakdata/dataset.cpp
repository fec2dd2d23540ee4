#include "engage_mil/weakdata/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "engage_mil/error.hpp"
#include "engage_mil/rng.hpp"

namespace engage::weakdata {

void Dataset::validate() const {
  for (const Bag& b : bags) {
    require(b.size() == M, ErrorCode::kInvalidInput,
            "bag '" + b.video_id + "' has " + std::to_string(b.size()) + " instances, expected " +
                std::to_string(M));
    require(b.dim() == dim, ErrorCode::kInvalidInput,
            "bag '" + b.video_id + "' has dimension " + std::to_string(b.dim()) + ", expected " +
                std::to_string(dim));
    require(b.label >= 0 && b.label < kNumLevels, ErrorCode::kInvalidInput,
            "bag '" + b.video_id + "' label out of range");
  }
}

std::set<std::string> Dataset::subjects() const {
  std::set<std::string> out;
  for (const Bag& b : bags) out.insert(b.subject_id);
  return out;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(bags.size());
  for (const Bag& b : bags) out.push_back(b.label);
  return out;
}

Dataset Dataset::empty_like() const {
  Dataset d;
  d.kind = kind;
  d.M = M;
  d.dim = dim;
  return d;
}

std::vector<std::size_t> resample_indices(std::size_t count, std::size_t M) {
  require(count >= 1, ErrorCode::kEmptyVideo, "video has no segments");
  require(M >= 1, ErrorCode::kInvalidArgument, "M must be positive");
  std::vector<std::size_t> idx(M);
  for (std::size_t i = 0; i < M; ++i) idx[i] = i * count / M;
  return idx;
}

Bag make_bag(const std::vector<features::SegmentFeature>& segments, std::size_t M,
             std::string video_id, std::string subject_id, int label) {
  require(!segments.empty(), ErrorCode::kEmptyVideo, "video '" + video_id + "' has no segments");
  require(label >= 0 && label < kNumLevels, ErrorCode::kInvalidInput, "label out of range");
  const std::size_t dim = segments.front().vector.size();
  Bag bag;
  bag.video_id = std::move(video_id);
  bag.subject_id = std::move(subject_id);
  bag.label = label;
  bag.instances.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(dim));
  const auto idx = resample_indices(segments.size(), M);
  for (std::size_t i = 0; i < M; ++i) {
    const auto& v = segments[idx[i]].vector;
    require(v.size() == dim, ErrorCode::kDimensionMismatch, "segments differ in dimension");
    for (std::size_t d = 0; d < dim; ++d) {
      require(std::isfinite(v[d]), ErrorCode::kInvalidInput, "non-finite segment feature");
      bag.instances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = v[d];
    }
  }
  return bag;
}

std::pair<Dataset, Dataset> split_subject_independent(const Dataset& data, double test_fraction,
                                                      std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0, ErrorCode::kInvalidArgument,
          "test fraction must lie in (0, 1)");
  std::map<std::string, std::size_t> videos_per_subject;
  for (const Bag& b : data.bags) ++videos_per_subject[b.subject_id];
  require(videos_per_subject.size() >= 2, ErrorCode::kCannotSplit,
          "a subject-independent split needs at least two subjects");

  std::vector<std::string> order;
  for (const auto& [subject, count] : videos_per_subject) order.push_back(subject);
  Rng rng(seed);
  rng.shuffle(order);

  const auto target = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(data.size())));
  const std::size_t S = order.size(), N = data.size();

  // reach[i][v]: some subset of order[i..] holds exactly v videos.
  std::vector<std::vector<char>> reach(S + 1, std::vector<char>(N + 1, 0));
  reach[S][0] = 1;
  for (std::size_t i = S; i-- > 0;) {
    const std::size_t n = videos_per_subject[order[i]];
    for (std::size_t v = 0; v <= N; ++v)
      reach[i][v] = reach[i + 1][v] || (v >= n && reach[i + 1][v - n]);
  }
  // Closest reachable total to the target that leaves both sides non-empty;
  // ties go to the smaller test side.
  std::size_t goal = 0;
  for (std::size_t v = 1; v < N; ++v) {
    if (!reach[0][v]) continue;
    const auto dist = [&](std::size_t x) { return x > target ? x - target : target - x; };
    if (goal == 0 || dist(v) < dist(goal)) goal = v;
  }
  // Walk the shuffled order, taking a subject whenever the rest can still
  // complete the goal.
  std::set<std::string> test_subjects;
  std::size_t left = goal;
  for (std::size_t i = 0; i < S && left > 0; ++i) {
    const std::size_t n = videos_per_subject[order[i]];
    if (n <= left && reach[i + 1][left - n]) {
      test_subjects.insert(order[i]);
      left -= n;
    }
  }

  std::pair<Dataset, Dataset> out{data.empty_like(), data.empty_like()};
  for (const Bag& b : data.bags)
    (test_subjects.contains(b.subject_id) ? out.second : out.first).bags.push_back(b);
  return out;
}

Dataset augment(const Dataset& train) {
  Dataset out = train.empty_like();
  for (const Bag& b : train.bags) {
    require(b.label >= 0 && b.label < kNumLevels, ErrorCode::kInvalidInput, "label out of range");
    for (int c = 0; c < kAugmentCopies[b.label]; ++c) out.bags.push_back(b);
  }
  return out;
}

}  // namespace engage::weakdata
