#include "engage_mil/features/frames.hpp"

#include <cmath>

#include "engage_mil/error.hpp"

namespace engage::features {

void FrameSequence::validate() const {
  require(!frames.empty(), ErrorCode::kInvalidArgument, "frame sequence is empty");
  require(fps > 0.0, ErrorCode::kInvalidArgument, "fps must be positive");
  const int w = frames.front().width;
  const int h = frames.front().height;
  for (const auto& f : frames) {
    require(f.width == w && f.height == h, ErrorCode::kInvalidArgument,
            "frames of video '" + video_id + "' differ in size");
    require(f.pixels.size() == static_cast<std::size_t>(w) * h, ErrorCode::kInvalidArgument,
            "frame buffer does not match its dimensions");
  }
}

std::size_t subsample_step(double source_fps, double target_fps) {
  require(source_fps > 0.0 && target_fps > 0.0, ErrorCode::kInvalidArgument,
          "frame rates must be positive");
  require(target_fps <= source_fps, ErrorCode::kInvalidArgument,
          "target fps exceeds source fps");
  return static_cast<std::size_t>(std::llround(source_fps / target_fps));
}

std::vector<std::size_t> subsample_indices(std::size_t frame_count, double source_fps,
                                           double target_fps) {
  const std::size_t step = subsample_step(source_fps, target_fps);
  std::vector<std::size_t> kept;
  kept.reserve(frame_count / step + 1);
  for (std::size_t i = 0; i < frame_count; i += step) kept.push_back(i);
  return kept;
}

FrameSequence subsample(const FrameSequence& seq, double target_fps) {
  const std::size_t step = subsample_step(seq.fps, target_fps);
  FrameSequence out;
  out.fps = seq.fps / static_cast<double>(step);
  out.subject_id = seq.subject_id;
  out.video_id = seq.video_id;
  for (std::size_t i : subsample_indices(seq.size(), seq.fps, target_fps))
    out.frames.push_back(seq.frames[i]);
  return out;
}

std::vector<SegmentWindow> segment(std::size_t frame_count, std::size_t length,
                                   std::size_t stride) {
  require(length >= 2, ErrorCode::kInvalidArgument, "window length must be at least 2");
  require(stride >= 1, ErrorCode::kInvalidArgument, "window stride must be at least 1");
  require(frame_count >= length, ErrorCode::kTooShortVideo,
          std::to_string(frame_count) + " frames cannot hold a " + std::to_string(length) +
              "-frame window");
  std::vector<SegmentWindow> windows;
  windows.reserve((frame_count - length) / stride + 1);
  for (std::size_t start = 0; start + length <= frame_count; start += stride)
    windows.push_back({start, length, stride});
  return windows;
}

}  // namespace engage::features
