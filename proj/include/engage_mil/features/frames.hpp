#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace engage::features {

// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

struct FrameSequence {
  std::vector<GrayImage> frames;
  double fps = 0.0;
  std::string subject_id;
  std::string video_id;

  std::size_t size() const { return frames.size(); }
  // Throws invalid-argument unless frames are non-empty, equally sized and fps > 0.
  void validate() const;
};

struct SegmentWindow {
  std::size_t start = 0;
  std::size_t length = 0;
  std::size_t stride = 0;

  bool operator==(const SegmentWindow&) const = default;
};

// Frame step used to reach target_fps from source_fps: round(source / target).
std::size_t subsample_step(double source_fps, double target_fps);

// Indices kept by subsample(): 0, step, 2*step, ... below frame_count.
std::vector<std::size_t> subsample_indices(std::size_t frame_count, double source_fps,
                                           double target_fps);

FrameSequence subsample(const FrameSequence& seq, double target_fps);

// Sliding windows of `length` frames moved by `stride`; count = floor((n-k)/l) + 1.
std::vector<SegmentWindow> segment(std::size_t frame_count, std::size_t length, std::size_t stride);

inline std::vector<SegmentWindow> segment(const FrameSequence& seq, std::size_t length,
                                          std::size_t stride) {
  return segment(seq.size(), length, stride);
}

}  // namespace engage::features
