#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "engage_mil/weakdata/dataset.hpp"

namespace engage::weakdata {

// Per-video feature file: 16-byte header {"EMIL", u32 version, u32 M, u32 D}
// followed by M*D little-endian float32, row-major.
inline constexpr std::uint32_t kFeatureFileVersion = 1;

void write_feature_file(const std::filesystem::path& path, const InstanceMatrix& instances);
InstanceMatrix read_feature_file(const std::filesystem::path& path);

// Header only, for cheap consistency checks.
struct FeatureFileHeader {
  std::uint32_t version = 0;
  std::uint32_t M = 0;
  std::uint32_t dim = 0;
};
FeatureFileHeader read_feature_header(const std::filesystem::path& path);

// JSON index: {"feature_kind", "M", "dim", "videos": [{video_id, subject_id,
// label, feature_kind, path}]}. Paths are relative to the index file. Feature
// files are written next to the index as <video_id>.emil.
void write_dataset(const std::filesystem::path& index_path, const Dataset& data);
// Writes only the index, pointing at feature files that already exist.
void write_index(const std::filesystem::path& index_path, const Dataset& data,
                 const std::filesystem::path& feature_dir);

// `on_read` is called with every feature file path opened (access auditing).
Dataset read_dataset(const std::filesystem::path& index_path,
                     const std::function<void(const std::filesystem::path&)>& on_read = {});

// Planted truth CSV: video_id,instance_index,planted_intensity.
void write_planted_csv(const std::filesystem::path& path, const Dataset& data,
                       const std::vector<std::vector<double>>& planted);
std::vector<std::vector<double>> read_planted_csv(const std::filesystem::path& path,
                                                  const Dataset& data);

}  // namespace engage::weakdata
