#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "engage_mil/features/frames.hpp"

namespace engage::features {

inline constexpr int kLbpNeighbors = 8;
inline constexpr int kUniformBins = 59;
inline constexpr int kLbpTopBins = 3 * kUniformBins;

// Bit b is set iff neighbors[b] >= center. Neighbor b sits at angle 2*pi*b/8,
// counter-clockwise from the positive first axis of the plane.
std::uint8_t lbp_code(double center, const std::array<double, kLbpNeighbors>& neighbors);

// Uniform-2 mapping: the 58 codes with at most two circular 0/1 transitions get
// bins 0..57 in increasing code order; every other code maps to bin 58.
int uniform_bin(std::uint8_t code);
bool is_uniform(std::uint8_t code);

// Unit-radius sampling offsets (first axis, second axis) for neighbor b. The
// second axis points "down" (row index, time index), so on a displayed slice the
// neighbors run counter-clockwise. Diagonals are off-grid and are bilinearly
// interpolated.
struct NeighborOffset {
  double du;
  double dv;
};
const std::array<NeighborOffset, kLbpNeighbors>& neighbor_offsets();

// Bilinear sample of a plane given as a callable (u, v) -> intensity at integer
// coordinates. (u, v) must keep the 2x2 support in range.
template <class Pixel>
double bilinear(const Pixel& pixel, int u, int v, const NeighborOffset& off) {
  const double fu = u + off.du;
  const double fv = v + off.dv;
  const int u0 = static_cast<int>(std::floor(fu));
  const int v0 = static_cast<int>(std::floor(fv));
  const double au = fu - u0;
  const double av = fv - v0;
  if (au == 0.0 && av == 0.0) return pixel(u0, v0);
  const double p00 = pixel(u0, v0);
  const double p10 = au == 0.0 ? 0.0 : pixel(u0 + 1, v0);
  const double p01 = av == 0.0 ? 0.0 : pixel(u0, v0 + 1);
  const double p11 = (au == 0.0 || av == 0.0) ? 0.0 : pixel(u0 + 1, v0 + 1);
  return (1.0 - au) * (1.0 - av) * p00 + au * (1.0 - av) * p10 + (1.0 - au) * av * p01 +
         au * av * p11;
}

struct LbpTopOptions {
  // Spatial block grid; the descriptor concatenates 177 bins per block, row-major.
  int grid_x = 1;
  int grid_y = 1;
  // XY codes on every frame of the window; false restricts them to the centre frame.
  bool xy_all_frames = true;
};

// XY | XT | YT uniform-LBP histograms over one window, each plane normalised to
// sum 1. Planes and their sampled voxels:
//   XY: (u=x, v=y) on each frame t of the window, x in [1,W-2], y in [1,H-2]
//   XT: (u=x, v=t) on each row y,                  x in [1,W-2], t in [1,k-2]
//   YT: (u=y, v=t) on each column x,               y in [1,H-2], t in [1,k-2]
// Throws degenerate-window when W, H or k < 3.
std::vector<double> lbp_top(const FrameSequence& seq, const SegmentWindow& window,
                            const LbpTopOptions& options = {});

}  // namespace engage::features
