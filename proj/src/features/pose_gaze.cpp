#include "engage_mil/features/pose_gaze.hpp"

#include <cmath>

#include "engage_mil/error.hpp"

namespace engage::features {

PoseGazeTrack subsample(const PoseGazeTrack& track, double source_fps, double target_fps) {
  PoseGazeTrack out;
  for (std::size_t i : subsample_indices(track.size(), source_fps, target_fps))
    out.records.push_back(track.records[i]);
  return out;
}

std::array<double, kPoseGazeDim> pose_gaze_feature(const PoseGazeTrack& track,
                                                   const SegmentWindow& window) {
  require(window.length >= 1 && window.start + window.length <= track.size(),
          ErrorCode::kInvalidArgument, "window exceeds the pose/gaze track");

  auto channel = [&](std::size_t t, int c) -> double {
    const PoseGazeRecord& r = track.records[t];
    if (c < 3) return r.translation[c];
    if (c < 6) return r.rotation[c - 3];
    return 0.5 * (r.gaze_left[c - 6] + r.gaze_right[c - 6]);
  };

  std::array<double, kPoseGazeDim> out{};
  const double n = static_cast<double>(window.length);
  for (int c = 0; c < kPoseGazeDim; ++c) {
    // Shifted by the first sample, so a constant channel gives exactly zero.
    const double shift = channel(window.start, c);
    double mean = 0.0;
    for (std::size_t t = window.start; t < window.start + window.length; ++t) {
      const double v = channel(t, c);
      require(std::isfinite(v), ErrorCode::kInvalidInput, "non-finite pose/gaze value");
      mean += v - shift;
    }
    mean /= n;
    double ss = 0.0;
    for (std::size_t t = window.start; t < window.start + window.length; ++t) {
      const double d = (channel(t, c) - shift) - mean;
      ss += d * d;
    }
    out[c] = std::sqrt(ss / n);
  }
  return out;
}

}  // namespace engage::features
