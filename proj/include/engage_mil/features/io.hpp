#pragma once

#include <filesystem>
#include <string>

#include "engage_mil/features/frames.hpp"
#include "engage_mil/features/pose_gaze.hpp"

namespace engage::features {

// Sidecar manifest of a frame archive directory.
struct VideoManifest {
  std::string video_id;
  std::string subject_id;
  double fps = 0.0;
  int width = 0;
  int height = 0;
  std::size_t frame_count = 0;
};

VideoManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const VideoManifest& manifest);

// Binary P5 PGM with maxval <= 255.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

// Loads the *.pgm files of `dir` in lexicographic order (zero-padded numbering)
// and checks them against the manifest.
FrameSequence read_frame_archive(const std::filesystem::path& dir, const VideoManifest& manifest);

// OpenFace-style CSV. Required columns (surrounding whitespace ignored):
// frame, pose_Tx..pose_Rz, gaze_0_x..gaze_1_z. Extra columns are skipped.
// Parse errors carry "file:line".
PoseGazeTrack read_pose_gaze_csv(const std::filesystem::path& path);
void write_pose_gaze_csv(const std::filesystem::path& path, const PoseGazeTrack& track);

}  // namespace engage::features
