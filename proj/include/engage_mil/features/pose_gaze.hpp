#pragma once

#include <array>
#include <vector>

#include "engage_mil/features/frames.hpp"

namespace engage::features {

inline constexpr int kPoseGazeDim = 9;

// One OpenFace row. Translation in mm, rotation in radians, gaze as unit vectors.
struct PoseGazeRecord {
  std::array<double, 3> translation{};
  std::array<double, 3> rotation{};  // roll, yaw, pitch (pose_Rx, pose_Ry, pose_Rz)
  std::array<double, 3> gaze_left{};
  std::array<double, 3> gaze_right{};
};

struct PoseGazeTrack {
  std::vector<PoseGazeRecord> records;

  std::size_t size() const { return records.size(); }
};

// Keeps every step-th record, matching subsample() on the aligned frames.
PoseGazeTrack subsample(const PoseGazeTrack& track, double source_fps, double target_fps);

// Population standard deviations over the window:
//   [Tx, Ty, Tz, Rx, Ry, Rz, gx, gy, gz]
// where g is the per-frame mean of the left and right gaze vectors.
// A single-frame window yields zeros.
std::array<double, kPoseGazeDim> pose_gaze_feature(const PoseGazeTrack& track,
                                                   const SegmentWindow& window);

}  // namespace engage::features
