#include "engage_mil/weakdata/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "engage_mil/error.hpp"
#include "engage_mil/rng.hpp"

namespace engage::weakdata {

void SyntheticSpec::validate() const {
  require(subjects >= 1 && videos >= 1, ErrorCode::kInvalidArgument,
          "need at least one subject and one video");
  require(M >= 1 && dim >= 1, ErrorCode::kInvalidArgument, "M and dim must be positive");
  double total = 0.0;
  for (double p : class_distribution) {
    require(p >= 0.0, ErrorCode::kInvalidArgument, "negative class probability");
    total += p;
  }
  require(total > 0.0 && total <= 1.0 + 1e-9, ErrorCode::kInvalidArgument,
          "class distribution must sum to at most 1");
  require(signal_fraction > 0.0 && signal_fraction <= 1.0, ErrorCode::kInvalidArgument,
          "signal fraction must lie in (0, 1]");
  require(noise_scale >= 0.0, ErrorCode::kInvalidArgument, "noise scale must be >= 0");
}

std::array<int, kNumLevels> class_counts(const std::array<double, kNumLevels>& distribution,
                                         int videos) {
  std::array<int, kNumLevels> counts{};
  std::array<double, kNumLevels> remainder{};
  int assigned = 0;
  double share = 0.0;
  for (double p : distribution) share += p;
  // A distribution summing below 1 describes fewer than `videos` videos.
  const int total = static_cast<int>(std::lround(share * videos - 1e-9));
  for (int c = 0; c < kNumLevels; ++c) {
    const double exact = distribution[c] * videos;
    // Guard against 9/195*195 landing a hair below 9.
    counts[c] = static_cast<int>(std::floor(exact + 1e-9));
    remainder[c] = exact - counts[c];
    assigned += counts[c];
  }
  std::array<int, kNumLevels> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int i = 0; assigned < total; ++i, ++assigned) ++counts[order[i % kNumLevels]];
  return counts;
}

SyntheticData synth_generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  // Level directions, orthonormalised when the dimension allows it.
  std::array<Eigen::VectorXd, kNumLevels> direction;
  for (int y = 0; y < kNumLevels; ++y) {
    Eigen::VectorXd v(spec.dim);
    for (int d = 0; d < spec.dim; ++d) v[d] = rng.normal();
    if (y >= 1 && y - 1 < spec.dim) {
      for (int p = 1; p < y; ++p) v -= v.dot(direction[p]) * direction[p];
    }
    direction[y] = v.normalized();
  }

  const auto counts = class_counts(spec.class_distribution, spec.videos);
  std::vector<int> labels;
  for (int c = 0; c < kNumLevels; ++c) labels.insert(labels.end(), counts[c], c);
  rng.shuffle(labels);

  const auto n_signal = static_cast<int>(std::clamp<long>(
      std::lround(spec.signal_fraction * spec.M), 1, spec.M));

  SyntheticData out;
  out.dataset.kind = features::FeatureKind::kPoseGaze;
  out.dataset.M = spec.M;
  out.dataset.dim = spec.dim;
  std::vector<int> positions(spec.M);
  char buf[32];
  for (int v = 0; v < static_cast<int>(labels.size()); ++v) {
    Bag bag;
    std::snprintf(buf, sizeof buf, "v%04d", v);
    bag.video_id = buf;
    std::snprintf(buf, sizeof buf, "s%03d", v % spec.subjects);
    bag.subject_id = buf;
    bag.label = labels[v];
    bag.instances.resize(spec.M, spec.dim);

    std::iota(positions.begin(), positions.end(), 0);
    rng.shuffle(positions);
    std::vector<double> planted(spec.M, 0.0);
    for (int j = 0; j < n_signal; ++j) planted[positions[j]] = bag.label;

    for (int j = 0; j < spec.M; ++j) {
      for (int d = 0; d < spec.dim; ++d) bag.instances(j, d) = spec.noise_scale * rng.normal();
      if (planted[j] > 0.0) bag.instances.row(j) += bag.label * direction[bag.label].transpose();
    }
    out.dataset.bags.push_back(std::move(bag));
    out.planted.push_back(std::move(planted));
  }
  return out;
}

}  // namespace engage::weakdata
