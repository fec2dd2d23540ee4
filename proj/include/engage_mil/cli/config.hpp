#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "engage_mil/baselines/linear.hpp"
#include "engage_mil/baselines/svr.hpp"
#include "engage_mil/deepmil/nets.hpp"
#include "engage_mil/deepmil/train.hpp"
#include "engage_mil/features/lbp_top.hpp"
#include "engage_mil/features/segment_feature.hpp"
#include "engage_mil/weakdata/relabel.hpp"
#include "engage_mil/weakdata/synth.hpp"
#include "json.hpp"

namespace engage::cli {

enum class ModelKind { kSvr, kSgd, kRidge, kMilNet, kSeqNet };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

struct FeatureConfig {
  features::FeatureKind kind = features::FeatureKind::kPoseGaze;
  std::size_t window = 20;  // k
  std::size_t stride = 10;  // l
  double target_fps = 6.0;
  std::size_t M = 100;
  features::LbpTopOptions lbp;
};

struct ExtractConfig {
  std::filesystem::path input_dir;    // one sub-directory per video
  std::filesystem::path labels;       // CSV video_id,label
  std::filesystem::path annotations;  // CSV video_id,<rater>... fused when labels is empty
  double reliability_threshold = 0.4;
  std::optional<double> test_fraction;
};

struct SynthConfig {
  weakdata::SyntheticSpec spec;
  std::optional<double> test_fraction;
};

struct GridConfig {
  std::vector<double> C;
  std::vector<double> sigma;
  int folds = 5;
};

struct TrainSection {
  std::filesystem::path dataset;
  ModelKind model = ModelKind::kMilNet;
  weakdata::RelabelStrategy relabel = weakdata::RelabelStrategy::kNoisy;
  int kmeans_k = 10;
  bool augment = true;
  baselines::SvrConfig svr;
  std::optional<GridConfig> grid;
  baselines::SgdConfig sgd;
  baselines::BayesianRidgeConfig ridge;
  deepmil::MilNetSpec milnet;
  deepmil::SeqNetSpec seqnet;
  deepmil::TrainConfig optimizer;
  std::filesystem::path audit;  // when set, every feature file read is listed here
};

struct PredictSection {
  std::filesystem::path dataset;
};

struct LocalizeSection {
  std::filesystem::path dataset;
  std::filesystem::path planted;  // optional planted-truth CSV
};

struct EvalSection {
  std::filesystem::path predictions;
  std::filesystem::path train_dataset;
  std::filesystem::path test_dataset;
};

// One JSON document drives every command; each command reads its own section.
// Relative paths inside the file resolve against the file's directory.
struct RunConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::filesystem::path model;
  std::filesystem::path out;
  FeatureConfig features;
  ExtractConfig extract;
  SynthConfig synth;
  TrainSection train;
  PredictSection predict;
  LocalizeSection localize;
  EvalSection eval;
};

// Throws invalid-argument on unknown keys or ill-typed values.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Command-line overrides; set fields win over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> out;
};

void apply(RunConfig& config, const Overrides& overrides);

}  // namespace engage::cli
