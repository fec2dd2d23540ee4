#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "engage_mil/weakdata/dataset.hpp"

namespace engage::weakdata {

// Planted-signal generator. Videos are dealt to subjects round-robin, so
// subject s gets floor(V/S) or ceil(V/S) videos.
struct SyntheticSpec {
  int subjects = 78;
  int videos = 195;
  int M = 100;
  int dim = 9;
  std::array<double, kNumLevels> class_distribution = {9.0 / 195, 53.0 / 195, 82.0 / 195,
                                                        50.0 / 195};
  double signal_fraction = 0.3;  // rho
  double noise_scale = 0.5;      // sigma_n
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  Dataset dataset;
  std::vector<std::vector<double>> planted;  // [bag][instance]
};

// Class counts for N videos: floor(p_c * N), then largest remainder (ties to the
// lower level) up to round(sum(p) * N). A distribution summing below 1 yields
// fewer than N videos.
std::array<int, kNumLevels> class_counts(const std::array<double, kNumLevels>& distribution,
                                         int videos);

// For a bag of level y, round(rho * M) instances (positions drawn from the seed)
// carry y * u_y + sigma_n * noise, where u_y is a fixed unit direction per level;
// the rest are sigma_n * noise. Planted intensity is y on signal instances and 0
// elsewhere.
SyntheticData synth_generate(const SyntheticSpec& spec);

}  // namespace engage::weakdata
