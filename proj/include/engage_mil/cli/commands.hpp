#pragma once

#include <filesystem>
#include <ostream>
#include <variant>

#include <Eigen/Core>

#include "engage_mil/baselines/linear.hpp"
#include "engage_mil/baselines/svr.hpp"
#include "engage_mil/cli/config.hpp"
#include "engage_mil/deepmil/nets.hpp"
#include "engage_mil/error.hpp"
#include "engage_mil/weakdata/dataset.hpp"

namespace engage::cli {

// 0 success, 2 usage/config, 3 data, 4 numeric failure.
int exit_code(ErrorCode code);

// Progress lines ("<video>: N segments -> M instances") go to `out`.
void cmd_extract(const RunConfig& config, std::ostream& out);
void cmd_synth(const RunConfig& config, std::ostream& out);
void cmd_train(const RunConfig& config, std::ostream& out);
void cmd_predict(const RunConfig& config, std::ostream& out);
void cmd_localize(const RunConfig& config, std::ostream& out);
void cmd_eval(const RunConfig& config, std::ostream& out);

// Any trained model, as found on disk.
struct AnyModel {
  std::variant<baselines::SvrModel, baselines::LinearModel, baselines::RidgePosterior,
               deepmil::MilNet, deepmil::SeqNet>
      model;
  features::FeatureKind kind = features::FeatureKind::kPoseGaze;
};

// Detects ESVR / EMNN binaries by magic, otherwise reads the linear-model JSON.
AnyModel load_model(const std::filesystem::path& path);
// Throws incompatible-artifacts on a feature kind, dimension or M mismatch.
void check_compatible(const AnyModel& model, const weakdata::Dataset& data);
// Per-instance intensities in label units.
Eigen::VectorXd instance_scores(const AnyModel& model, const weakdata::Bag& bag);
// Video-level prediction: mean of instance predictions for instance models,
// the pooled score for the networks.
double bag_score(const AnyModel& model, const weakdata::Bag& bag);

}  // namespace engage::cli
