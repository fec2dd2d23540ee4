#include "engage_mil/weakdata/dataset_io.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "engage_mil/binary_io.hpp"
#include "engage_mil/error.hpp"
#include "json.hpp"

namespace engage::weakdata {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'E', 'M', 'I', 'L'};

FeatureFileHeader read_header(std::istream& in, const fs::path& path) {
  char magic[4];
  FeatureFileHeader h;
  require(static_cast<bool>(in.read(magic, 4)) && std::memcmp(magic, kMagic, 4) == 0,
          ErrorCode::kParseError, path.string() + ": bad feature file magic");
  require(binary::get_u32(in, h.version) && binary::get_u32(in, h.M) &&
              binary::get_u32(in, h.dim),
          ErrorCode::kParseError, path.string() + ": truncated header");
  require(h.version == kFeatureFileVersion, ErrorCode::kParseError,
          path.string() + ": unsupported feature file version " + std::to_string(h.version));
  return h;
}

}  // namespace

void write_feature_file(const fs::path& path, const InstanceMatrix& instances) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out.write(kMagic, 4);
  binary::put_u32(out, kFeatureFileVersion);
  binary::put_u32(out, static_cast<std::uint32_t>(instances.rows()));
  binary::put_u32(out, static_cast<std::uint32_t>(instances.cols()));
  for (Eigen::Index i = 0; i < instances.rows(); ++i)
    for (Eigen::Index d = 0; d < instances.cols(); ++d)
      binary::put_f32(out, static_cast<float>(instances(i, d)));
  require(out.good(), ErrorCode::kIo, "write failed for " + path.string());
}

FeatureFileHeader read_feature_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  return read_header(in, path);
}

InstanceMatrix read_feature_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  const FeatureFileHeader h = read_header(in, path);
  InstanceMatrix x(h.M, h.dim);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
      float v;
      require(binary::get_f32(in, v), ErrorCode::kParseError, path.string() + ": truncated data");
      x(i, d) = v;
    }
  }
  return x;
}

void write_index(const fs::path& index_path, const Dataset& data, const fs::path& feature_dir) {
  const fs::path base = index_path.parent_path();
  json videos = json::array();
  for (const Bag& b : data.bags) {
    const fs::path file = feature_dir / (b.video_id + ".emil");
    videos.push_back({{"video_id", b.video_id},
                      {"subject_id", b.subject_id},
                      {"label", b.label},
                      {"feature_kind", features::to_string(data.kind)},
                      {"path", fs::relative(file, base.empty() ? fs::path(".") : base)
                                   .generic_string()}});
  }
  const json j = {{"feature_kind", features::to_string(data.kind)},
                  {"M", data.M},
                  {"dim", data.dim},
                  {"videos", videos}};
  std::ofstream out(index_path);
  require(out.good(), ErrorCode::kIo, "cannot write " + index_path.string());
  out << j.dump(2) << '\n';
}

void write_dataset(const fs::path& index_path, const Dataset& data) {
  data.validate();
  fs::path dir = index_path.parent_path();
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  for (const Bag& b : data.bags) write_feature_file(dir / (b.video_id + ".emil"), b.instances);
  write_index(index_path, data, dir);
}

Dataset read_dataset(const fs::path& index_path,
                     const std::function<void(const fs::path&)>& on_read) {
  std::ifstream in(index_path);
  require(in.good(), ErrorCode::kIo, "cannot open dataset index " + index_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, index_path.string() + ": " + e.what());
  }
  Dataset data;
  try {
    const auto kind = features::parse_feature_kind(j.at("feature_kind").get<std::string>());
    require(kind.has_value(), ErrorCode::kParseError, index_path.string() + ": unknown feature kind");
    data.kind = *kind;
    data.M = j.at("M").get<Eigen::Index>();
    data.dim = j.at("dim").get<Eigen::Index>();
    const fs::path base = index_path.parent_path();
    for (const auto& v : j.at("videos")) {
      Bag b;
      b.video_id = v.at("video_id").get<std::string>();
      b.subject_id = v.at("subject_id").get<std::string>();
      b.label = v.at("label").get<int>();
      require(v.at("feature_kind").get<std::string>() == features::to_string(data.kind),
              ErrorCode::kIncompatibleArtifacts,
              index_path.string() + ": video '" + b.video_id + "' has a different feature kind");
      const fs::path file = base / v.at("path").get<std::string>();
      if (on_read) on_read(file);
      b.instances = read_feature_file(file);
      data.bags.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, index_path.string() + ": " + e.what());
  }
  data.validate();
  return data;
}

void write_planted_csv(const fs::path& path, const Dataset& data,
                       const std::vector<std::vector<double>>& planted) {
  require(planted.size() == data.size(), ErrorCode::kInvalidInput, "planted truth shape mismatch");
  std::ofstream out(path);
  require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out << "video_id,instance_index,planted_intensity\n";
  for (std::size_t b = 0; b < data.size(); ++b)
    for (std::size_t j = 0; j < planted[b].size(); ++j)
      out << data.bags[b].video_id << ',' << j << ',' << planted[b][j] << '\n';
}

std::vector<std::vector<double>> read_planted_csv(const fs::path& path, const Dataset& data) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  std::map<std::string, std::vector<double>> by_video;
  std::string line;
  std::size_t line_no = 1;
  std::getline(in, line);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string video, index, value;
    if (!std::getline(ss, video, ',') || !std::getline(ss, index, ',') ||
        !std::getline(ss, value, ','))
      fail(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ": bad row");
    try {
      auto& v = by_video[video];
      const auto j = static_cast<std::size_t>(std::stoul(index));
      if (v.size() <= j) v.resize(j + 1, 0.0);
      v[j] = std::stod(value);
    } catch (const std::exception&) {
      fail(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  std::vector<std::vector<double>> out;
  for (const Bag& b : data.bags) {
    auto it = by_video.find(b.video_id);
    require(it != by_video.end() && static_cast<Eigen::Index>(it->second.size()) == b.size(),
            ErrorCode::kIncompatibleArtifacts,
            path.string() + ": no planted truth for video '" + b.video_id + "'");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace engage::weakdata
