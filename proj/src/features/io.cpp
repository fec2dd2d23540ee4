#include "engage_mil/features/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "engage_mil/csv.hpp"
#include "engage_mil/error.hpp"

namespace engage::features {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using csv::trim;

std::vector<std::string> split_csv(const std::string& line) { return csv::split(line); }

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

// Reads the next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string token;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) return token;
    } else {
      token.push_back(c);
    }
  }
  return token;
}

}  // namespace

VideoManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open manifest " + path.string());
  try {
    const json j = json::parse(in);
    VideoManifest m;
    m.video_id = j.at("video_id").get<std::string>();
    m.subject_id = j.at("subject_id").get<std::string>();
    m.fps = j.at("fps").get<double>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.frame_count = j.at("frame_count").get<std::size_t>();
    require(m.fps > 0.0, ErrorCode::kParseError, path.string() + ": fps must be positive");
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

void write_manifest(const fs::path& path, const VideoManifest& m) {
  const json j = {{"video_id", m.video_id}, {"subject_id", m.subject_id},
                  {"fps", m.fps},           {"width", m.width},
                  {"height", m.height},     {"frame_count", m.frame_count}};
  std::ofstream out(path);
  require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

GrayImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  require(pgm_token(in) == "P5", ErrorCode::kParseError, path.string() + ": not a binary PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pgm_token(in));
    h = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    fail(ErrorCode::kParseError, path.string() + ": malformed PGM header");
  }
  require(w > 0 && h > 0 && maxval > 0 && maxval <= 255, ErrorCode::kParseError,
          path.string() + ": unsupported PGM geometry or depth");
  GrayImage img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  require(in.gcount() == static_cast<std::streamsize>(img.pixels.size()), ErrorCode::kParseError,
          path.string() + ": truncated pixel data");
  return img;
}

void write_pgm(const fs::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
}

FrameSequence read_frame_archive(const fs::path& dir, const VideoManifest& manifest) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  require(files.size() == manifest.frame_count, ErrorCode::kParseError,
          dir.string() + ": manifest lists " + std::to_string(manifest.frame_count) +
              " frames, found " + std::to_string(files.size()));
  FrameSequence seq;
  seq.fps = manifest.fps;
  seq.subject_id = manifest.subject_id;
  seq.video_id = manifest.video_id;
  seq.frames.reserve(files.size());
  for (const auto& f : files) {
    GrayImage img = read_pgm(f);
    require(img.width == manifest.width && img.height == manifest.height, ErrorCode::kParseError,
            f.string() + ": frame size differs from manifest");
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

PoseGazeTrack read_pose_gaze_csv(const fs::path& path) {
  static const std::array<const char*, 13> kColumns = {
      "frame",    "pose_Tx",  "pose_Ty",  "pose_Tz",  "pose_Rx",  "pose_Ry", "pose_Rz",
      "gaze_0_x", "gaze_0_y", "gaze_0_z", "gaze_1_x", "gaze_1_y", "gaze_1_z"};
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 1;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParseError,
          where(path, line_no) + ": missing header");
  const auto header = split_csv(line);
  std::array<std::size_t, 13> index{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), kColumns[c]);
    require(it != header.end(), ErrorCode::kParseError,
            where(path, line_no) + ": missing column " + kColumns[c]);
    index[c] = static_cast<std::size_t>(it - header.begin());
  }

  PoseGazeTrack track;
  double first_frame = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    require(cells.size() == header.size(), ErrorCode::kParseError,
            where(path, line_no) + ": expected " + std::to_string(header.size()) + " fields");
    std::array<double, 13> v{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      const std::string& cell = cells[index[c]];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v[c]);
      require(ec == std::errc() && ptr == cell.data() + cell.size(), ErrorCode::kParseError,
              where(path, line_no) + ": bad number '" + cell + "' in column " + kColumns[c]);
    }
    if (track.size() == 0) first_frame = v[0];
    require(v[0] == first_frame + static_cast<double>(track.size()), ErrorCode::kParseError,
            where(path, line_no) + ": frame numbers must be consecutive");
    PoseGazeRecord r;
    for (int k = 0; k < 3; ++k) {
      r.translation[k] = v[1 + k];
      r.rotation[k] = v[4 + k];
      r.gaze_left[k] = v[7 + k];
      r.gaze_right[k] = v[10 + k];
    }
    track.records.push_back(r);
  }
  return track;
}

void write_pose_gaze_csv(const fs::path& path, const PoseGazeTrack& track) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out << "frame, pose_Tx, pose_Ty, pose_Tz, pose_Rx, pose_Ry, pose_Rz, gaze_0_x, gaze_0_y, "
         "gaze_0_z, gaze_1_x, gaze_1_y, gaze_1_z\n";
  out.precision(17);
  for (std::size_t i = 0; i < track.size(); ++i) {
    const auto& r = track.records[i];
    out << (i + 1);
    for (double v : r.translation) out << ", " << v;
    for (double v : r.rotation) out << ", " << v;
    for (double v : r.gaze_left) out << ", " << v;
    for (double v : r.gaze_right) out << ", " << v;
    out << '\n';
  }
}

}  // namespace engage::features
