#include "engage_mil/features/lbp_top.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "engage_mil/error.hpp"

namespace engage::features {
namespace {

std::array<int, 256> build_uniform_table() {
  std::array<int, 256> table{};
  int next = 0;
  for (int code = 0; code < 256; ++code) {
    const auto c = static_cast<std::uint8_t>(code);
    const auto rotated = static_cast<std::uint8_t>((c >> 1) | (c << 7));
    table[code] = std::popcount(static_cast<unsigned>(c ^ rotated)) <= 2 ? next++ : -1;
  }
  for (int& bin : table)
    if (bin < 0) bin = kUniformBins - 1;
  return table;
}

const std::array<int, 256>& uniform_table() {
  static const std::array<int, 256> table = build_uniform_table();
  return table;
}

// Precomputed bilinear support of one neighbor relative to the centre voxel.
struct Tap {
  int du0, dv0;
  double w00, w10, w01, w11;
  bool on_grid;
};

std::array<Tap, kLbpNeighbors> build_taps() {
  std::array<Tap, kLbpNeighbors> taps{};
  const auto& offsets = neighbor_offsets();
  for (int b = 0; b < kLbpNeighbors; ++b) {
    const double du = offsets[b].du;
    const double dv = offsets[b].dv;
    const int du0 = static_cast<int>(std::floor(du));
    const int dv0 = static_cast<int>(std::floor(dv));
    const double au = du - du0;
    const double av = dv - dv0;
    taps[b] = {du0,
               dv0,
               (1.0 - au) * (1.0 - av),
               au * (1.0 - av),
               (1.0 - au) * av,
               au * av,
               au == 0.0 && av == 0.0};
  }
  return taps;
}

// Histogram of one plane family. `pixel(u, v, s)` reads slice s of the family.
template <class Pixel>
void accumulate_plane(const Pixel& pixel, int u_begin, int u_end, int v_begin, int v_end,
                      int s_begin, int s_end, const std::array<Tap, kLbpNeighbors>& taps,
                      const std::array<int, 256>& table, auto&& block_of,
                      std::vector<std::vector<double>>& hist) {
  for (int s = s_begin; s < s_end; ++s) {
    for (int v = v_begin; v < v_end; ++v) {
      for (int u = u_begin; u < u_end; ++u) {
        const double center = pixel(u, v, s);
        unsigned code = 0;
        for (int b = 0; b < kLbpNeighbors; ++b) {
          const Tap& t = taps[b];
          const int u0 = u + t.du0;
          const int v0 = v + t.dv0;
          double value;
          if (t.on_grid) {
            value = pixel(u0, v0, s);
          } else {
            value = t.w00 * pixel(u0, v0, s) + t.w10 * pixel(u0 + 1, v0, s) +
                    t.w01 * pixel(u0, v0 + 1, s) + t.w11 * pixel(u0 + 1, v0 + 1, s);
          }
          code |= static_cast<unsigned>(value >= center) << b;
        }
        hist[block_of(u, v, s)][table[code]] += 1.0;
      }
    }
  }
}

}  // namespace

std::uint8_t lbp_code(double center, const std::array<double, kLbpNeighbors>& neighbors) {
  unsigned code = 0;
  for (int b = 0; b < kLbpNeighbors; ++b)
    code |= static_cast<unsigned>(neighbors[b] >= center) << b;
  return static_cast<std::uint8_t>(code);
}

int uniform_bin(std::uint8_t code) { return uniform_table()[code]; }

bool is_uniform(std::uint8_t code) {
  const auto rotated = static_cast<std::uint8_t>((code >> 1) | (code << 7));
  return std::popcount(static_cast<unsigned>(code ^ rotated)) <= 2;
}

const std::array<NeighborOffset, kLbpNeighbors>& neighbor_offsets() {
  constexpr double s = std::numbers::sqrt2 / 2.0;
  static const std::array<NeighborOffset, kLbpNeighbors> offsets = {{
      {1.0, 0.0},
      {s, -s},
      {0.0, -1.0},
      {-s, -s},
      {-1.0, 0.0},
      {-s, s},
      {0.0, 1.0},
      {s, s},
  }};
  return offsets;
}

std::vector<double> lbp_top(const FrameSequence& seq, const SegmentWindow& window,
                            const LbpTopOptions& options) {
  require(!seq.frames.empty(), ErrorCode::kInvalidArgument, "frame sequence is empty");
  require(window.length >= 1 && window.start + window.length <= seq.size(),
          ErrorCode::kInvalidArgument, "window exceeds the frame sequence");
  require(options.grid_x >= 1 && options.grid_y >= 1, ErrorCode::kInvalidArgument,
          "block grid must be at least 1x1");
  const int width = seq.frames.front().width;
  const int height = seq.frames.front().height;
  const int length = static_cast<int>(window.length);
  require(width >= 3 && height >= 3 && length >= 3, ErrorCode::kDegenerateWindow,
          "window of " + std::to_string(width) + "x" + std::to_string(height) + "x" +
              std::to_string(length) + " has no interior voxel");
  for (std::size_t t = window.start; t < window.start + window.length; ++t)
    require(seq.frames[t].width == width && seq.frames[t].height == height,
            ErrorCode::kInvalidArgument, "frames differ in size");

  const auto& table = uniform_table();
  static const std::array<Tap, kLbpNeighbors> taps = build_taps();
  const int blocks = options.grid_x * options.grid_y;
  auto block_xy = [&](int x, int y) {
    return (y * options.grid_y / height) * options.grid_x + x * options.grid_x / width;
  };
  const auto* frames = seq.frames.data() + window.start;
  auto voxel = [frames](int x, int y, int t) -> double {
    return frames[t].pixels[static_cast<std::size_t>(y) * frames[t].width + x];
  };

  std::vector<std::vector<double>> xy(blocks, std::vector<double>(kUniformBins, 0.0));
  std::vector<std::vector<double>> xt = xy;
  std::vector<std::vector<double>> yt = xy;

  const int xy_begin = options.xy_all_frames ? 0 : length / 2;
  const int xy_end = options.xy_all_frames ? length : length / 2 + 1;
  accumulate_plane([&](int u, int v, int s) { return voxel(u, v, s); }, 1, width - 1, 1,
                   height - 1, xy_begin, xy_end, taps, table,
                   [&](int u, int v, int) { return block_xy(u, v); }, xy);
  accumulate_plane([&](int u, int v, int s) { return voxel(u, s, v); }, 1, width - 1, 1,
                   length - 1, 0, height, taps, table,
                   [&](int u, int, int s) { return block_xy(u, s); }, xt);
  accumulate_plane([&](int u, int v, int s) { return voxel(s, u, v); }, 1, height - 1, 1,
                   length - 1, 0, width, taps, table,
                   [&](int u, int, int s) { return block_xy(s, u); }, yt);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(blocks) * kLbpTopBins);
  for (int b = 0; b < blocks; ++b) {
    for (auto* plane : {&xy, &xt, &yt}) {
      const auto& h = (*plane)[b];
      double total = 0.0;
      for (double c : h) total += c;
      require(total > 0.0, ErrorCode::kDegenerateWindow,
              "block grid leaves a block without interior voxels");
      for (double c : h) out.push_back(c / total);
    }
  }
  return out;
}

}  // namespace engage::features
